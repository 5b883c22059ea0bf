//! Conforming bisection refinement. Marks a moving target region for ten
//! generations and checks the invariants that make the refinement usable:
//! conformity, parent tiling, and a uniform lower bound on the min angle.

use biharm::mesh::{load_mesh, Point2};

fn main() {
    let mut mesh = load_mesh("4 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n0 2 3\n").unwrap();
    let initial_min_angle: f64 = (0..mesh.triangle_count())
        .map(|t| mesh.min_angle(t))
        .fold(f64::INFINITY, f64::min);
    let target = Point2::new(0.31, 0.62);
    for generation in 0..10 {
        let hit = mesh.locate_point(target).unwrap().triangle;
        mesh = mesh.bisect(&[hit]);
        mesh.validate().unwrap();
        let min_angle: f64 = (0..mesh.triangle_count())
            .map(|t| mesh.min_angle(t))
            .fold(f64::INFINITY, f64::min);
        println!(
            "gen {generation}: {:4} triangles, min angle {:.2} deg",
            mesh.triangle_count(),
            min_angle.to_degrees()
        );
        assert!(min_angle >= 0.5 * initial_min_angle);
    }
    // Element diameters shrink only near the target.
    let near = mesh.locate_point(target).unwrap().triangle;
    let far = mesh.locate_point(Point2::new(0.95, 0.05)).unwrap().triangle;
    println!(
        "diameter near target {:.4}, far corner {:.4}",
        mesh.triangle_diameter(near),
        mesh.triangle_diameter(far)
    );
}
