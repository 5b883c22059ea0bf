//! Solve the same square plate under the four supported boundary
//! conditions and report dof counts, estimator totals and (where an exact
//! solution exists) the energy error.

use biharm::adapt::{compute_estimate, EstimatorChoice};
use biharm::assembly::assemble_system;
use biharm::norms::energy_error;
use biharm::presets;
use biharm::solver::solve;
use biharm::space::FeSpace;

fn main() {
    let degree = 2;
    let beta = biharm::problem::ProblemSpec::default_beta(degree);
    let presets = [
        presets::square_dirichlet(3, beta).unwrap(),
        presets::square_navier(3, beta).unwrap(),
        presets::square_neumann(beta).unwrap(),
        presets::lshape_clamped(beta).unwrap(),
    ];
    for p in presets {
        let mesh = p.mesh.uniform_refine().uniform_refine();
        let space = FeSpace::new(mesh, degree).unwrap();
        let report = solve(&assemble_system(&space, &p.spec).unwrap()).unwrap();
        let est = compute_estimate(
            &space,
            &report.solution,
            &p.spec,
            EstimatorChoice::Extension,
        )
        .unwrap();
        let err = p
            .exact
            .as_ref()
            .map(|e| energy_error(&space, &report.solution, e, &p.spec).unwrap());
        print!(
            "{:22} N = {:6}  eta = {:9.3e}  residual = {:.1e}",
            p.name, space.n_dofs, est.global_total, report.relative_residual
        );
        match err {
            Some(e) => println!("  energy error = {e:.3e}"),
            None => println!(),
        }
    }
}
