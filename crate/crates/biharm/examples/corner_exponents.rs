//! Corner singularity exponents: the smallest positive root of the
//! characteristic equation sin^2(z w) = z^2 sin^2(w) determines how much
//! regularity the solution loses at a corner of interior angle w.

use std::f64::consts::PI;

use biharm::exponent::{regularity_index, singular_exponent, sweep};

fn main() {
    println!("omega/pi  alpha0   H^(2+alpha) index");
    for k in [1.0 / 3.0, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75] {
        let omega = k * PI;
        let r = singular_exponent(omega).unwrap();
        println!(
            "{k:7.4}  {:.6}  {:.6}",
            r.alpha0,
            regularity_index(omega).unwrap()
        );
    }

    // Coarse sweep, usable as a gnuplot table.
    println!("\nomega,alpha0");
    for (w, a) in sweep(24).unwrap() {
        println!("{w:.4},{a:.4}");
    }
}
