use super::{autonomous_multistart, ground_state_multistart, mp_threshold, SolveResult, Tolerances};
use crate::error::{domain, Error, Result};
use crate::grid::{Grid, Point};
use crate::model::{AutonomousConfig, ModelConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    /// `max u` over the grid points with `εx ∉ Λ` (`-∞` when there are none).
    pub max_outside: f64,
    pub a: f64,
    /// `max_outside < a`: the penalized solution then solves the original equation.
    pub below_threshold: bool,
    pub sup_norm: f64,
    pub min_value: f64,
    /// `min u ≥ -1e-12`.
    pub nonnegative: bool,
}

pub fn verify_solution_region(result: &SolveResult, config: &ModelConfig) -> RegionReport {
    let grid = *result.field.grid();
    let eps = config.eps;
    let mut max_outside = f64::NEG_INFINITY;
    for (x, &v) in grid.points().zip(result.field.values()) {
        if !config.in_lambda([eps * x[0], eps * x[1]]) {
            max_outside = max_outside.max(v);
        }
    }
    let min_value = result.field.values().iter().cloned().fold(f64::INFINITY, f64::min);
    RegionReport {
        max_outside,
        a: config.pen.a,
        below_threshold: max_outside < config.pen.a,
        sup_norm: result.sup_norm,
        min_value,
        nonnegative: min_value >= -1e-12,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Least constant with `u ≤ C1 e^{-C2 r}` on the annulus.
    pub c1: f64,
    /// `exp` of the fitted intercept.
    pub c1_fit: f64,
    pub c2: f64,
    pub r_squared: f64,
    /// `u ≤ 1.1 C1 e^{-C2 r}` at every grid point with `u ≥ 1e-8·sup` at
    /// least as far out as the inner edge of the annulus.
    pub bound_holds: bool,
    pub samples: usize,
}

/// Least-squares fit of `ln u = ln C - C2 r` over the annulus
/// `1e-8 ≤ u/sup ≤ 1e-2`, with `r` the minimum-image distance to the maximum.
pub fn decay_fit(result: &SolveResult) -> Result<DecayFit> {
    let grid = *result.field.grid();
    let sup = result.sup_norm;
    let (lo, hi) = (1e-8 * sup, 1e-2 * sup);
    let all: Vec<(f64, f64)> = grid
        .points()
        .zip(result.field.values())
        .map(|(x, &v)| (grid.periodic_distance(x, result.argmax_point), v))
        .collect();
    let pts: Vec<(f64, f64)> = all
        .iter()
        .filter(|(_, v)| *v >= lo && *v <= hi)
        .map(|&(r, v)| (r, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::EmptyAnnulus(format!(
            "{} samples with u in [1e-8, 1e-2]·sup; enlarge the box",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mr = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let srr: f64 = pts.iter().map(|p| (p.0 - mr) * (p.0 - mr)).sum();
    let srl: f64 = pts.iter().map(|p| (p.0 - mr) * (p.1 - ml)).sum();
    let sll: f64 = pts.iter().map(|p| (p.1 - ml) * (p.1 - ml)).sum();
    if !(srr > 0.0) {
        return Err(Error::EmptyAnnulus("annulus has a single radius".into()));
    }
    let c2 = -srl / srr;
    let intercept = ml + c2 * mr;
    let r_squared = if sll > 0.0 { srl * srl / (srr * sll) } else { 1.0 };
    let ln_c1 = pts.iter().map(|(r, l)| l + c2 * r).fold(f64::NEG_INFINITY, f64::max);
    let r_inner = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let bound_holds = all
        .iter()
        .filter(|(r, v)| *r >= r_inner && *v >= lo)
        .all(|&(r, v)| v <= 1.1 * (ln_c1 - c2 * r).exp());
    Ok(DecayFit {
        c1: ln_c1.exp(),
        c1_fit: intercept.exp(),
        c2,
        r_squared,
        bound_holds,
        samples: pts.len(),
    })
}

/// One row of a concentration sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub eps: f64,
    pub result: SolveResult,
    pub c_star: f64,
    /// Energies of all restarts.
    pub restart_energies: Vec<f64>,
    pub restart_spread: f64,
    /// `ε x_ε`.
    pub argmax_rescaled: Point,
    /// `dist(ε x_ε, M)`; `None` for a constant potential.
    pub dist_to_m: Option<f64>,
    pub decay: Option<DecayFit>,
    pub region: RegionReport,
}

/// Solves `J_ε` with restarts and collects the diagnostics of one sweep row.
pub fn sweep_entry(
    config: &ModelConfig,
    eps: f64,
    grid: Grid,
    tol: &Tolerances,
    restarts: usize,
    seed: u64,
) -> Result<SweepEntry> {
    let cfg = config.with_eps(eps)?;
    let ms = ground_state_multistart(&cfg, grid, tol, restarts, seed)?;
    let x = ms.best.argmax_point;
    let rescaled = [eps * x[0], eps * x[1]];
    Ok(SweepEntry {
        eps,
        c_star: mp_threshold(&cfg)?,
        restart_energies: ms.energies,
        restart_spread: ms.spread,
        argmax_rescaled: rescaled,
        dist_to_m: cfg.potential.dist_to_m(rescaled, cfg.frac.n_dim),
        decay: decay_fit(&ms.best).ok(),
        region: verify_solution_region(&ms.best, &cfg),
        result: ms.best,
    })
}

/// Comparison of the `c_ε` estimates with `d_{V(0)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub d_v0: f64,
    /// `c_ε` does not increase (1% noise allowance) as `ε` decreases.
    pub nonincreasing: bool,
    /// `(c_{ε_min} - d)/d`.
    pub smallest_excess: f64,
    /// `0 ≤ smallest_excess ≤ 5%` (round-off allowed below 0).
    pub within_tolerance: bool,
    /// Every level lies below its mountain-pass threshold.
    pub below_threshold: bool,
    /// Restarts agree to 1% at every `ε`.
    pub restarts_agree: bool,
    pub messages: Vec<String>,
}

/// `entries` must be ordered by decreasing `ε`.
pub fn check_ce_vs_d(entries: &[SweepEntry], d_v0: f64) -> Result<LevelReport> {
    let last = entries.last().ok_or_else(|| domain("check_ce_vs_d", "empty sweep"))?;
    let mut messages = Vec::new();
    let mut nonincreasing = true;
    for w in entries.windows(2) {
        if w[1].result.energy > w[0].result.energy * 1.01 {
            nonincreasing = false;
            messages.push(format!(
                "c at eps = {} is {} > c at eps = {} ({})",
                w[1].eps, w[1].result.energy, w[0].eps, w[0].result.energy
            ));
        }
    }
    let smallest_excess = (last.result.energy - d_v0) / d_v0;
    let within_tolerance = (-1e-6..=0.05).contains(&smallest_excess);
    if !within_tolerance {
        messages.push(format!(
            "smallest-eps level {} vs d = {d_v0}: excess {smallest_excess:.4}",
            last.result.energy
        ));
    }
    let mut below_threshold = true;
    let mut restarts_agree = true;
    for e in entries {
        if !(e.result.energy > 0.0 && e.result.energy < e.c_star) {
            below_threshold = false;
            messages.push(format!("eps = {}: level {} outside (0, {})", e.eps, e.result.energy, e.c_star));
        }
        if e.restart_spread > 0.01 {
            restarts_agree = false;
            messages.push(format!("eps = {}: restarts disagree by {:.4}", e.eps, e.restart_spread));
        }
    }
    Ok(LevelReport {
        d_v0,
        nonincreasing,
        smallest_excess,
        within_tolerance,
        below_threshold,
        restarts_agree,
        messages,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub d_v0: SolveResult,
    pub levels: LevelReport,
    /// `dist_{k+1} ≤ dist_k + h`.
    pub dist_nonincreasing: bool,
    /// Final distance `≤ 2h`.
    pub final_dist_ok: bool,
    /// `max u < a` outside `Λ_ε` at the smallest `ε`.
    pub final_region_ok: bool,
}

/// `d_{V(0)}`: the autonomous level with `μ = -V0`.
pub fn autonomous_level(config: &ModelConfig, grid: Grid, tol: &Tolerances, restarts: usize, seed: u64) -> Result<SolveResult> {
    let auto = AutonomousConfig::new(config.potential.infimum(), config.frac, config.nonlin)?;
    Ok(autonomous_multistart(&auto, grid, tol, restarts, seed)?.best)
}

/// Assembles the sweep checks from rows ordered by decreasing `ε`.
pub fn summarize_sweep(entries: Vec<SweepEntry>, d_v0: SolveResult, h: f64) -> Result<SweepReport> {
    let levels = check_ce_vs_d(&entries, d_v0.energy)?;
    let dists: Vec<f64> = entries.iter().filter_map(|e| e.dist_to_m).collect();
    let dist_nonincreasing = dists.windows(2).all(|w| w[1] <= w[0] + h);
    let final_dist_ok = dists.last().map_or(true, |d| *d <= 2.0 * h);
    let final_region_ok = entries.last().map_or(false, |e| e.region.below_threshold);
    Ok(SweepReport {
        entries,
        d_v0,
        levels,
        dist_nonincreasing,
        final_dist_ok,
        final_region_ok,
    })
}

/// Sequential sweep over `eps_list` (decreasing) plus the autonomous level.
pub fn concentration_sweep(
    config: &ModelConfig,
    eps_list: &[f64],
    grid: Grid,
    tol: &Tolerances,
    restarts: usize,
    seed: u64,
) -> Result<SweepReport> {
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(domain("concentration_sweep", "eps list must be strictly decreasing"));
    }
    let entries = eps_list
        .iter()
        .map(|&eps| sweep_entry(config, eps, grid, tol, restarts, seed))
        .collect::<Result<Vec<_>>>()?;
    let d = autonomous_level(config, grid, tol, restarts, seed)?;
    summarize_sweep(entries, d, grid.spacing())
}
