//! Convergence studies: uniform or adaptive refinement sweeps with CSV
//! tables, a refinement trace, a log-log SVG plot and mesh snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::adapt::{compute_estimate, mark, AdaptRecord, AdaptTrace, EstimatorChoice};
use crate::assembly::assemble_system;
use crate::error::{BiharmError, Result};
use crate::norms::{discrete_difference_error, h2_error, rate};
use crate::presets::PresetProblem;
use crate::solver::solve;
use crate::space::FeSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMode {
    Uniform,
    Adaptive,
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub degree: usize,
    pub mode: StudyMode,
    pub estimator: EstimatorChoice,
    /// Bulk marking fraction, used in adaptive mode.
    pub theta: f64,
    /// Number of refinement steps; `levels + 1` solves are performed.
    pub levels: usize,
    /// Keep a text snapshot of every mesh in the sweep.
    pub keep_meshes: bool,
}

impl StudyConfig {
    pub fn new(degree: usize, mode: StudyMode, estimator: EstimatorChoice) -> Self {
        StudyConfig {
            degree,
            mode,
            estimator,
            theta: 0.5,
            levels: 0,
            keep_meshes: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n_dofs: usize,
    /// Largest element diameter.
    pub h: f64,
    /// Energy error against the exact solution when available, otherwise the
    /// broken H2 distance between consecutive iterates.
    pub error: Option<f64>,
    pub estimator: f64,
    /// Observed order: log2 of the ratio of consecutive errors.
    pub rate: Option<f64>,
}

pub struct StudyOutput {
    pub rows: Vec<ConvergenceRow>,
    pub trace: AdaptTrace,
    /// Mesh snapshots per level when requested.
    pub meshes: Vec<String>,
    pub final_space: FeSpace,
    pub final_solution: Vec<f64>,
}

/// Least-squares slope of log2(y) against log2(x) over the last `window`
/// points with positive entries.
pub fn log_slope(xs: &[f64], ys: &[f64], window: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.log2(), y.log2()))
        .collect();
    if pts.len() < 2 || window < 2 {
        return None;
    }
    let tail = &pts[pts.len().saturating_sub(window)..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

impl StudyOutput {
    /// Fitted decay order of the estimator against dof count over the last
    /// `window` rows: eta ~ N^slope.
    pub fn estimator_slope(&self, window: usize) -> Option<f64> {
        let ns: Vec<f64> = self.rows.iter().map(|r| r.n_dofs as f64).collect();
        let etas: Vec<f64> = self.rows.iter().map(|r| r.estimator).collect();
        log_slope(&ns, &etas, window)
    }

    pub fn table_csv(&self) -> String {
        let mut out = String::from("level,N,h,error,estimator,rate\n");
        for r in &self.rows {
            let err = r.error.map_or(String::new(), |e| format!("{e:.12e}"));
            let rt = r.rate.map_or(String::new(), |x| format!("{x:.6}"));
            let _ = writeln!(
                out,
                "{},{},{:.12e},{},{:.12e},{}",
                r.level, r.n_dofs, r.h, err, r.estimator, rt
            );
        }
        out
    }

    /// Whitespace-separated columns (N, estimator, error) for external
    /// plotting tools; missing errors are written as nan.
    pub fn table_dat(&self) -> String {
        let mut out = String::from("# N eta error\n");
        for r in &self.rows {
            let err = r.error.unwrap_or(f64::NAN);
            let _ = writeln!(out, "{} {:.12e} {:.12e}", r.n_dofs, r.estimator, err);
        }
        out
    }

    /// Self-contained log-log SVG plot of estimator (and error, when known)
    /// against dof count, with a reference line of slope
    /// -(degree - 1)/2.
    pub fn plot_svg(&self, degree: usize) -> String {
        let (w, h) = (640.0, 480.0);
        let (ml, mr, mt, mb) = (70.0, 20.0, 20.0, 50.0);
        let mut series: Vec<(&str, &str, Vec<(f64, f64)>)> = Vec::new();
        let eta: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.estimator > 0.0)
            .map(|r| ((r.n_dofs as f64).log10(), r.estimator.log10()))
            .collect();
        if !eta.is_empty() {
            series.push(("estimator", "#1f77b4", eta));
        }
        let err: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| r.error.filter(|&e| e > 0.0).map(|e| (r.n_dofs as f64, e)))
            .map(|(n, e)| (n.log10(), e.log10()))
            .collect();
        if !err.is_empty() {
            series.push(("error", "#d62728", err));
        }
        let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.2.iter().copied()).collect();
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
             viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"13\">\n\
             <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
        );
        if all.is_empty() {
            svg.push_str("<text x=\"20\" y=\"40\">no positive data</text>\n</svg>\n");
            return svg;
        }
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x1 - x0 < 1e-9 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-9 {
            y1 = y0 + 1.0;
        }
        let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
        let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
        // Axes.
        let _ = writeln!(
            svg,
            "<rect x=\"{ml}\" y=\"{mt}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            w - ml - mr,
            h - mt - mb
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">log10 N</text>",
            (ml + w - mr) / 2.0,
            h - 12.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">log10 value</text>",
            (mt + h - mb) / 2.0,
            (mt + h - mb) / 2.0
        );
        for (tick, label_fmt) in [(x0, true), (x1, true)] {
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.2}</text>",
                px(tick),
                h - mb + 18.0,
                if label_fmt { tick } else { tick }
            );
        }
        for tick in [y0, y1] {
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2}</text>",
                ml - 6.0,
                py(tick) + 4.0,
                tick
            );
        }
        // Reference decay N^{-(m-1)/2} through the first estimator point.
        let slope = -0.5 * (degree as f64 - 1.0);
        if let Some(first) = series.first().and_then(|s| s.2.first()) {
            let (rx0, ry0) = *first;
            let ry1 = ry0 + slope * (x1 - rx0);
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>",
                px(rx0),
                py(ry0),
                px(x1),
                py(ry1.clamp(y0 - 2.0, y1 + 2.0))
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" fill=\"gray\">slope {slope:.1}</text>",
                px(x1) - 110.0,
                py(ry1.clamp(y0 - 2.0, y1 + 2.0)) - 6.0
            );
        }
        for (i, (name, color, pts)) in series.iter().enumerate() {
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                path.join(" ")
            );
            for &(x, y) in pts {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                    px(x),
                    py(y)
                );
            }
            let ly = mt + 18.0 + 18.0 * i as f64;
            let _ = writeln!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\
                 <text x=\"{}\" y=\"{}\">{name}</text>",
                ml + 10.0,
                ly - 10.0,
                ml + 28.0,
                ly
            );
        }
        svg.push_str("</svg>\n");
        svg
    }

    /// Write table.csv, trace.csv, plot.svg, plot.dat and mesh_<i>.txt into
    /// `dir`, creating it if needed.
    pub fn write_outputs(&self, dir: &Path, degree: usize) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("table.csv"), self.table_csv())?;
        fs::write(dir.join("trace.csv"), self.trace.to_csv())?;
        fs::write(dir.join("plot.svg"), self.plot_svg(degree))?;
        fs::write(dir.join("plot.dat"), self.table_dat())?;
        for (i, m) in self.meshes.iter().enumerate() {
            fs::write(dir.join(format!("mesh_{i}.txt")), m)?;
        }
        Ok(())
    }
}

fn max_diameter(space: &FeSpace) -> f64 {
    (0..space.mesh.triangle_count())
        .map(|t| space.mesh.triangle_diameter(t))
        .fold(0.0, f64::max)
}

/// Run a refinement sweep on a preset. Uniform mode halves every element at
/// each level; adaptive mode marks a Doerfler bulk of the estimator mass.
/// Errors use the exact solution when the preset has one, otherwise the
/// distance between consecutive uniform iterates.
pub fn run_study(preset: &PresetProblem, cfg: &StudyConfig) -> Result<StudyOutput> {
    if !(cfg.theta > 0.0 && cfg.theta <= 1.0) {
        return Err(BiharmError::Config(format!(
            "marking fraction theta must be in (0, 1], got {}",
            cfg.theta
        )));
    }
    preset.spec.validate()?;
    let spec = &preset.spec;
    let mut mesh = preset.mesh.clone();
    let mut rows = Vec::new();
    let mut trace = AdaptTrace::default();
    let mut meshes = Vec::new();
    let mut prev: Option<(FeSpace, Vec<f64>)> = None;
    let mut prev_err: Option<f64> = None;
    let mut last: Option<(FeSpace, Vec<f64>)> = None;
    for level in 0..=cfg.levels {
        let space = FeSpace::new(mesh.clone(), cfg.degree)?;
        let system = assemble_system(&space, spec)?;
        let solution = solve(&system)?.solution;
        let est = compute_estimate(&space, &solution, spec, cfg.estimator)?;
        let error = match (&preset.exact, &prev) {
            (Some(exact), _) => Some(h2_error(&space, &solution, exact)?),
            (None, Some((ps, pu))) if cfg.mode == StudyMode::Uniform => {
                Some(discrete_difference_error(&space, &solution, ps, pu)?)
            }
            _ => None,
        };
        let row_rate = match (prev_err, error) {
            (Some(p), Some(c)) => rate(p, c),
            _ => None,
        };
        if error.is_some() {
            prev_err = error;
        }
        let marked = if level < cfg.levels {
            match cfg.mode {
                StudyMode::Uniform => (0..space.mesh.triangle_count()).collect(),
                StudyMode::Adaptive => mark(&est, cfg.theta),
            }
        } else {
            Vec::new()
        };
        rows.push(ConvergenceRow {
            level,
            n_dofs: space.n_dofs,
            h: max_diameter(&space),
            error,
            estimator: est.global_total,
            rate: row_rate,
        });
        trace.records.push(AdaptRecord {
            iteration: level,
            n_dofs: space.n_dofs,
            estimator: est.global_total,
            energy_error: error,
            marked: marked.len(),
            elements: space.mesh.triangle_count(),
        });
        if cfg.keep_meshes {
            meshes.push(space.mesh.to_text());
        }
        if level < cfg.levels {
            mesh = match cfg.mode {
                StudyMode::Uniform => space.mesh.uniform_refine(),
                StudyMode::Adaptive => space.mesh.bisect(&marked),
            };
        }
        if preset.exact.is_none() && cfg.mode == StudyMode::Uniform {
            prev = Some((space.clone(), solution.clone()));
        }
        last = Some((space, solution));
    }
    let (final_space, final_solution) = last.expect("at least one level runs");
    Ok(StudyOutput {
        rows,
        trace,
        meshes,
        final_space,
        final_solution,
    })
}
