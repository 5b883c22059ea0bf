//! Two ways to discretize a Dirac point load: evaluate test functions at
//! the load point, or replace the delta by its element-local polynomial
//! moment projection. Both give the same load vector, hence the same
//! discrete solution.

use biharm::assembly::{assemble_system, assemble_system_with_rhs};
use biharm::delta::{assemble_regularized_rhs, project_delta};
use biharm::mesh::Point2;
use biharm::presets;
use biharm::solver::solve;
use biharm::space::FeSpace;

fn main() {
    let preset = presets::lshape_clamped(90.0).unwrap();
    let mesh = preset.mesh.uniform_refine();
    let space = FeSpace::new(mesh, 3).unwrap();

    let direct = solve(&assemble_system(&space, &preset.spec).unwrap()).unwrap();

    let deltas: Vec<_> = preset
        .spec
        .point_loads
        .iter()
        .map(|&(x, w)| project_delta(&space, x, w).unwrap())
        .collect();
    let rhs = assemble_regularized_rhs(&space, &deltas).unwrap();
    let system = assemble_system_with_rhs(&space, &preset.spec, &rhs).unwrap();
    let projected = solve(&system).unwrap();

    let max_diff = direct
        .solution
        .iter()
        .zip(&projected.solution)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("dofs: {}", space.n_dofs);
    println!("max |direct - projected| = {max_diff:.3e}");

    let d = &deltas[0];
    let x0 = Point2::new(-std::f64::consts::PI, std::f64::consts::PI);
    println!(
        "delta projection lives on element {} around ({:.3}, {:.3})",
        d.triangle, x0.x, x0.y
    );
}
