//! Uniform refinement study for the square plate with a point load and a
//! known exact solution. Prints the level/error/rate table; the H2 rates
//! drift toward 1 as the mesh resolves the log singularity at the load.

use biharm::adapt::EstimatorChoice;
use biharm::presets;
use biharm::study::{run_study, StudyConfig, StudyMode};

fn main() {
    for degree in [2usize, 3] {
        let beta = biharm::problem::ProblemSpec::default_beta(degree);
        let preset = presets::square_dirichlet(3, beta).unwrap();
        let mut cfg = StudyConfig::new(degree, StudyMode::Uniform, EstimatorChoice::Extension);
        cfg.levels = 4;
        let out = run_study(&preset, &cfg).unwrap();
        println!("-- {} P{degree}", preset.name);
        print!("{}", out.table_csv());
    }
}
