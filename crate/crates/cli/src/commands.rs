//! The `validate`, `kernels`, `solve`, `sweep` and `sstar` drivers.

use std::fs;
use std::path::{Path, PathBuf};

use frns_core::model::ModelConfig;
use frns_core::solver::{
    autonomous_level, decay_fit, default_rho_values, estimate_s_star, ground_state_multistart, mp_threshold,
    summarize_sweep, sweep_entry, verify_solution_region, DecayFit, SStarEstimate, SweepEntry, SweepReport,
};
use frns_core::{FracParams, SolveResult};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::kernels::{kernel_suite, Check, SuiteOptions};
use crate::output::{num, write_csv, RunManifest, Stamp};
use crate::svg::{line_plot, Plot};
use crate::CliError;

fn stamp(cfg: &RunConfig) -> Stamp {
    Stamp {
        config_hash: cfg.hash(),
        seed: cfg.seed(),
    }
}

fn invalid(what: &'static str, detail: impl Into<String>) -> CliError {
    CliError::Invalid(frns_core::Error::Domain {
        what,
        detail: detail.into(),
    })
}

/// Report lines naming every verified assumption.
pub fn validate(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let model = cfg.model()?;
    let mut lines = model.validate()?;
    let grid = cfg.grid()?;
    lines.push(format!(
        "grid: N = {}, {} points per dimension, half length {}, spacing {}",
        grid.n_dim(),
        grid.points_per_dim(),
        grid.half_length(),
        grid.spacing()
    ));
    if !cfg.eps_list().iter().all(|e| *e > 0.0) {
        return Err(invalid("sweep.eps", "every eps must be > 0"));
    }
    Ok(lines)
}

pub struct KernelsOutcome {
    pub checks: Vec<Check>,
    pub outputs: Vec<PathBuf>,
}

impl KernelsOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn kernels(cfg: &RunConfig, out: &Path, opts: SuiteOptions) -> Result<KernelsOutcome, CliError> {
    let frac = cfg.frac()?;
    let checks = kernel_suite(&frac, opts)?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                num(c.computed),
                num(c.expected),
                num(c.tolerance),
                c.pass.to_string(),
            ]
        })
        .collect();
    let st = stamp(cfg);
    let mut manifest = RunManifest::new(&st);
    manifest.outputs.push(write_csv(
        out,
        "kernels.csv",
        &st,
        &["check", "computed [1]", "expected [1]", "tolerance [1]", "pass"],
        &rows,
    )?);
    manifest.write(out)?;
    Ok(KernelsOutcome {
        checks,
        outputs: manifest.outputs,
    })
}

pub struct SolveOutcome {
    pub model: ModelConfig,
    pub result: SolveResult,
    pub c_star: f64,
    pub restart_spread: f64,
    pub decay: Option<DecayFit>,
    pub region_ok: bool,
    pub outputs: Vec<PathBuf>,
}

impl SolveOutcome {
    /// Converged with `0 < energy < c_star`.
    pub fn passed(&self) -> bool {
        self.result.converged() && self.result.energy > 0.0 && self.result.energy < self.c_star
    }
}

fn radial_profile(result: &SolveResult) -> Vec<(f64, f64)> {
    let grid = result.field.grid();
    let n = grid.points_per_dim();
    let [i0, j0] = grid.multi_index(result.argmax_index);
    (0..n / 2)
        .map(|d| {
            let idx = grid.flat_index([(i0 + d) % n, j0]);
            (d as f64 * grid.spacing(), result.field.values()[idx])
        })
        .collect()
}

pub fn solve(cfg: &RunConfig, out: &Path) -> Result<SolveOutcome, CliError> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let ms = ground_state_multistart(&model, grid, &cfg.tolerances(), cfg.restarts(), cfg.seed())?;
    let r = ms.best;
    let c_star = mp_threshold(&model)?;
    let region = verify_solution_region(&r, &model);
    let decay = match decay_fit(&r) {
        Ok(d) => Some(d),
        Err(e) => {
            log::warn!("decay fit: {e}");
            None
        }
    };
    let st = stamp(cfg);
    let mut manifest = RunManifest::new(&st);

    let two = grid.n_dim() == 2;
    let rows: Vec<Vec<String>> = grid
        .points()
        .zip(r.field.values())
        .map(|(x, &v)| {
            if two {
                vec![num(x[0]), num(x[1]), num(v)]
            } else {
                vec![num(x[0]), num(v)]
            }
        })
        .collect();
    let header: &[&str] = if two {
        &["x [length]", "y [length]", "u [1]"]
    } else {
        &["x [length]", "u [1]"]
    };
    manifest.outputs.push(write_csv(out, "solution.csv", &st, header, &rows)?);

    let nan = f64::NAN;
    let d = decay.as_ref();
    let diag: Vec<(&str, String, &str)> = vec![
        ("energy", num(r.energy), "energy"),
        ("c_star", num(c_star), "energy"),
        ("energy_below_c_star", (r.energy > 0.0 && r.energy < c_star).to_string(), "bool"),
        ("nehari_residual", num(r.nehari_residual), "energy"),
        ("grad_residual", num(r.grad_residual), "1"),
        ("converged", r.converged().to_string(), "bool"),
        ("status", format!("{:?}", r.status), "text"),
        ("iterations", r.iterations.to_string(), "count"),
        ("restart_spread", num(ms.spread), "1"),
        ("argmax_x", num(r.argmax_point[0]), "length"),
        ("argmax_y", num(r.argmax_point[1]), "length"),
        ("sup_norm", num(r.sup_norm), "1"),
        ("min_value", num(region.min_value), "1"),
        ("max_outside_Lambda", num(region.max_outside), "1"),
        ("a_threshold", num(region.a), "1"),
        ("solves_original_equation", region.below_threshold.to_string(), "bool"),
        ("decay_C1", num(d.map_or(nan, |d| d.c1)), "1"),
        ("decay_C2", num(d.map_or(nan, |d| d.c2)), "1/length"),
        ("decay_r2", num(d.map_or(nan, |d| d.r_squared)), "1"),
        ("decay_bound_holds", d.map_or(false, |d| d.bound_holds).to_string(), "bool"),
    ];
    let rows: Vec<Vec<String>> = diag
        .into_iter()
        .map(|(q, v, u)| vec![q.to_string(), v, u.to_string()])
        .collect();
    manifest
        .outputs
        .push(write_csv(out, "diagnostics.csv", &st, &["quantity", "value", "unit"], &rows)?);

    let svg = line_plot(
        &Plot {
            title: "radial profile through the maximum",
            x_label: "distance from argmax",
            y_label: "u",
            log_y: true,
        },
        &radial_profile(&r),
    );
    let path = out.join("profile.svg");
    fs::write(&path, svg)?;
    manifest.outputs.push(path);
    manifest.write(out)?;
    Ok(SolveOutcome {
        model,
        c_star,
        restart_spread: ms.spread,
        decay,
        region_ok: region.below_threshold,
        result: r,
        outputs: manifest.outputs,
    })
}

pub struct SweepOutcome {
    pub report: Option<SweepReport>,
    /// `(name, pass, detail)`.
    pub checks: Vec<(String, bool, String)>,
    pub failures: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.report.is_some() && self.checks.iter().all(|c| c.1)
    }
}

enum Job {
    Eps(f64),
    Autonomous,
}

enum JobResult {
    Entry(Box<SweepEntry>),
    Level(Box<SolveResult>),
}

fn sweep_checks(report: &SweepReport) -> Vec<(String, bool, String)> {
    let mut c = Vec::new();
    let dists: Vec<String> = report
        .entries
        .iter()
        .map(|e| e.dist_to_m.map_or("n/a".into(), |d| format!("{d:.4}")))
        .collect();
    c.push((
        "dist(eps x_eps, M) nonincreasing within h".to_string(),
        report.dist_nonincreasing,
        dists.join(" -> "),
    ));
    c.push((
        "final dist <= 2h".into(),
        report.final_dist_ok,
        dists.last().cloned().unwrap_or_default(),
    ));
    let last = report.entries.last();
    c.push((
        "max outside Lambda < a at smallest eps".into(),
        report.final_region_ok,
        last.map_or(String::new(), |e| format!("{:e} vs a = {:e}", e.region.max_outside, e.region.a)),
    ));
    let decay_ok = report
        .entries
        .iter()
        .all(|e| e.decay.as_ref().is_some_and(|d| d.c2 > 0.0 && d.r_squared >= 0.95));
    let fits: Vec<String> = report
        .entries
        .iter()
        .map(|e| e.decay.as_ref().map_or("none".into(), |d| format!("C2={:.3} r2={:.4}", d.c2, d.r_squared)))
        .collect();
    c.push(("decay fit C2 > 0, r2 >= 0.95".into(), decay_ok, fits.join("; ")));
    c.push((
        "all solves converged".into(),
        report.entries.iter().all(|e| e.result.converged()) && report.d_v0.converged(),
        String::new(),
    ));
    let l = &report.levels;
    let levels: Vec<String> = report.entries.iter().map(|e| format!("{:.6}", e.result.energy)).collect();
    c.push(("c_eps nonincreasing as eps decreases".into(), l.nonincreasing, levels.join(" -> ")));
    c.push((
        "smallest-eps c_eps within 5% above d_V(0)".into(),
        l.within_tolerance,
        format!("d = {:.6}, excess {:.4}", l.d_v0, l.smallest_excess),
    ));
    c.push(("0 < c_eps < c_star".into(), l.below_threshold, String::new()));
    c.push(("restarts agree to 1%".into(), l.restarts_agree, l.messages.join("; ")));
    c
}

pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<SweepOutcome, CliError> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let eps = cfg.eps_list();
    if eps.len() < 3 {
        return Err(invalid("sweep.eps", "a sweep needs at least three eps values"));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(invalid("sweep.eps", "eps values must be positive and strictly decreasing"));
    }
    let tol = cfg.tolerances();
    let (restarts, seed) = (cfg.restarts(), cfg.seed());
    let jobs: Vec<Job> = eps.iter().map(|&e| Job::Eps(e)).chain([Job::Autonomous]).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs())
        .build()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let results: Vec<Result<JobResult, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| match job {
                Job::Eps(e) => sweep_entry(&model, *e, grid, &tol, restarts, seed)
                    .map(|r| JobResult::Entry(Box::new(r)))
                    .map_err(|err| format!("eps = {e}: {err}")),
                Job::Autonomous => autonomous_level(&model, grid, &tol, restarts, seed)
                    .map(|r| JobResult::Level(Box::new(r)))
                    .map_err(|err| format!("autonomous level: {err}")),
            })
            .collect()
    });
    let mut entries = Vec::new();
    let mut level = None;
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(JobResult::Entry(e)) => entries.push(*e),
            Ok(JobResult::Level(l)) => level = Some(*l),
            Err(msg) => failures.push(msg),
        }
    }
    let d_value = level.as_ref().map_or(f64::NAN, |l| l.energy);

    let st = stamp(cfg);
    let mut manifest = RunManifest::new(&st);
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                num(e.eps),
                num(e.result.energy),
                num(e.c_star),
                num(d_value),
                num(e.result.argmax_point[0]),
                num(e.result.argmax_point[1]),
                num(e.dist_to_m.unwrap_or(f64::NAN)),
                num(e.decay.as_ref().map_or(f64::NAN, |d| d.c2)),
                num(e.decay.as_ref().map_or(f64::NAN, |d| d.r_squared)),
                num(e.region.max_outside),
                num(e.region.a),
                e.result.converged().to_string(),
                num(e.restart_spread),
            ]
        })
        .collect();
    manifest.outputs.push(write_csv(
        out,
        "sweep.csv",
        &st,
        &[
            "eps [1]",
            "energy [energy]",
            "c_star [energy]",
            "d_V0_estimate [energy]",
            "argmax_x [length]",
            "argmax_y [length]",
            "dist_to_M_rescaled [length]",
            "decay_C2 [1/length]",
            "decay_r2 [1]",
            "max_outside_Lambda [1]",
            "a_threshold [1]",
            "converged",
            "restart_spread [1]",
        ],
        &rows,
    )?);
    let dist_points: Vec<(f64, f64)> = entries.iter().filter_map(|e| e.dist_to_m.map(|d| (e.eps, d))).collect();
    let svg = line_plot(
        &Plot {
            title: "concentration: distance of the rescaled maximum to M",
            x_label: "eps",
            y_label: "dist(eps x_eps, M)",
            log_y: false,
        },
        &dist_points,
    );
    let path = out.join("concentration.svg");
    fs::write(&path, svg)?;
    manifest.outputs.push(path);

    let report = match level {
        Some(l) if failures.is_empty() => Some(summarize_sweep(entries, l, grid.spacing())?),
        _ => None,
    };
    let checks = report.as_ref().map(sweep_checks).unwrap_or_default();
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|(n, p, d)| vec![n.clone(), p.to_string(), d.clone()])
        .collect();
    manifest
        .outputs
        .push(write_csv(out, "sweep_checks.csv", &st, &["check", "pass", "detail"], &rows)?);
    manifest.write(out)?;
    Ok(SweepOutcome {
        report,
        checks,
        failures,
        outputs: manifest.outputs,
    })
}

pub struct SStarOutcome {
    pub estimate: SStarEstimate,
    pub outputs: Vec<PathBuf>,
}

impl SStarOutcome {
    pub fn passed(&self) -> bool {
        self.estimate.relative_error.abs() <= 0.05
    }
}

pub fn sstar(cfg: &RunConfig, n_dim: usize, s: f64, out: &Path) -> Result<SStarOutcome, CliError> {
    let frac = FracParams::new(s, 1.0, n_dim)?;
    let grid = cfg.sstar_grid(n_dim)?;
    let estimate = estimate_s_star(&frac, grid, &default_rho_values(&grid))?;
    for w in &estimate.warnings {
        log::warn!("{w}");
    }
    let rows: Vec<Vec<String>> = estimate
        .quotients
        .iter()
        .map(|(rho, q)| {
            vec![
                num(*rho),
                num(*q),
                num(estimate.formula),
                num((q - estimate.formula) / estimate.formula),
            ]
        })
        .collect();
    let st = Stamp {
        config_hash: {
            let mut c = cfg.clone();
            c.set("frac.N", &n_dim.to_string())?;
            c.set("frac.s", &format!("{s:?}"))?;
            c.hash()
        },
        seed: cfg.seed(),
    };
    let mut manifest = RunManifest::new(&st);
    manifest.outputs.push(write_csv(
        out,
        "sstar.csv",
        &st,
        &["rho [length]", "quotient [1]", "formula [1]", "relative_error [1]"],
        &rows,
    )?);
    manifest.write(out)?;
    Ok(SStarOutcome {
        estimate,
        outputs: manifest.outputs,
    })
}
