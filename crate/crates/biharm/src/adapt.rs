//! Solve - estimate - mark - refine driver with Doerfler bulk marking.

use crate::assembly::assemble_system;
use crate::delta::project_delta;
use crate::error::{BiharmError, Result};
use crate::estimator::{
    estimate_extension, estimate_primal, estimate_regularized, EstimatorReport,
};
use crate::mesh::Mesh;
use crate::norms::{energy_error, ExactSolution};
use crate::problem::ProblemSpec;
use crate::solver::solve;
use crate::space::FeSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    Primal,
    Regularized,
    Extension,
}

#[derive(Debug, Clone)]
pub struct AdaptConfig {
    /// Doerfler bulk fraction in (0, 1].
    pub theta: f64,
    /// Number of refinement rounds; the loop solves rounds + 1 times.
    pub rounds: usize,
    pub degree: usize,
    pub estimator: EstimatorChoice,
}

impl AdaptConfig {
    pub fn new(degree: usize, estimator: EstimatorChoice) -> Self {
        AdaptConfig {
            theta: 0.5,
            rounds: 0,
            degree,
            estimator,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(BiharmError::Config(format!(
                "marking fraction theta must be in (0, 1], got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdaptRecord {
    pub iteration: usize,
    pub n_dofs: usize,
    pub estimator: f64,
    pub energy_error: Option<f64>,
    pub marked: usize,
    pub elements: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AdaptTrace {
    pub records: Vec<AdaptRecord>,
}

impl AdaptTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,N,eta,energy_err,marked,elements\n");
        for r in &self.records {
            let err = r
                .energy_error
                .map_or(String::new(), |e| format!("{e:.12e}"));
            out.push_str(&format!(
                "{},{},{:.12e},{},{},{}\n",
                r.iteration, r.n_dofs, r.estimator, err, r.marked, r.elements
            ));
        }
        out
    }
}

pub struct AdaptResult {
    pub trace: AdaptTrace,
    pub space: FeSpace,
    pub solution: Vec<f64>,
    pub final_report: EstimatorReport,
}

/// Minimal greedy Doerfler set: smallest prefix of the descending-sorted
/// local indicators whose squared sum reaches theta^2 times the local mass.
/// The free-standing global Dirac term is not part of the mass.
pub fn mark(report: &EstimatorReport, theta: f64) -> Vec<usize> {
    let total = report.local_squared_mass();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..report.elements.len()).collect();
    order.sort_by(|&a, &b| {
        let (ta, tb) = (report.elements[a].local_total, report.elements[b].local_total);
        tb.partial_cmp(&ta).unwrap().then(a.cmp(&b))
    });
    let threshold = theta * theta * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for &t in &order {
        if acc >= threshold {
            break;
        }
        let l = report.elements[t].local_total;
        if l == 0.0 {
            break;
        }
        acc += l * l;
        marked.push(t);
    }
    // Greedy minimality: the prefix without its last element is short.
    if let Some(&last) = marked.last() {
        let l = report.elements[last].local_total;
        debug_assert!(acc - l * l < threshold);
    }
    marked
}

/// Dispatch to the chosen estimator, projecting the point loads first when
/// the regularized variant asks for it.
pub fn compute_estimate(
    space: &FeSpace,
    u: &[f64],
    spec: &ProblemSpec,
    choice: EstimatorChoice,
) -> Result<EstimatorReport> {
    match choice {
        EstimatorChoice::Primal => estimate_primal(space, u, spec),
        EstimatorChoice::Extension => estimate_extension(space, u, spec),
        EstimatorChoice::Regularized => {
            let deltas = spec
                .point_loads
                .iter()
                .map(|&(x, w)| project_delta(space, x, w))
                .collect::<Result<Vec<_>>>()?;
            estimate_regularized(space, u, &deltas, spec)
        }
    }
}

/// Run the adaptive loop for `cfg.rounds` refinements, returning the trace
/// and the final discrete solution.
pub fn run_adaptive(
    spec: &ProblemSpec,
    mesh0: Mesh,
    cfg: &AdaptConfig,
    exact: Option<&ExactSolution>,
) -> Result<AdaptResult> {
    cfg.validate()?;
    spec.validate()?;
    let mut mesh = mesh0;
    let mut trace = AdaptTrace::default();
    let mut last: Option<(FeSpace, Vec<f64>, EstimatorReport)> = None;
    for i in 0..=cfg.rounds {
        let space = FeSpace::new(mesh.clone(), cfg.degree)?;
        let system = assemble_system(&space, spec)?;
        let report = solve(&system)?;
        let est = compute_estimate(&space, &report.solution, spec, cfg.estimator)?;
        let err = match exact {
            Some(e) => Some(energy_error(&space, &report.solution, e, spec)?),
            None => None,
        };
        let marked = if i < cfg.rounds {
            mark(&est, cfg.theta)
        } else {
            Vec::new()
        };
        trace.records.push(AdaptRecord {
            iteration: i,
            n_dofs: space.n_dofs,
            estimator: est.global_total,
            energy_error: err,
            marked: marked.len(),
            elements: space.mesh.triangle_count(),
        });
        if i < cfg.rounds {
            mesh = space.mesh.bisect(&marked);
        }
        last = Some((space, report.solution, est));
    }
    let (space, solution, final_report) = last.expect("loop ran at least once");
    Ok(AdaptResult {
        trace,
        space,
        solution,
        final_report,
    })
}
