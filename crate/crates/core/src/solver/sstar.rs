use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::grid::{Field, Grid};
use crate::model::ModelConfig;
use crate::specfun::{sigma_s, sobolev_trace_constant, trace_form_sobolev_constant, FracParams};
use crate::spectral::homogeneous_seminorm;

/// `ζ = 1 - (V1/m^{2s})(1 + 1/κ)`.
pub fn zeta(config: &ModelConfig) -> f64 {
    1.0 - config.potential.v1 / config.frac.mass_floor() * (1.0 + 1.0 / config.pen.kappa)
}

/// `(s/N)(ζS)^{N/2s}` with `S` the sharp constant of the trace-form seminorm.
pub fn mp_threshold(config: &ModelConfig) -> Result<f64> {
    let f = &config.frac;
    let n = f.n_dim as f64;
    let s_star = trace_form_sobolev_constant(f.n_dim, f.s)?;
    Ok(f.s / n * (zeta(config) * s_star).powf(n / (2.0 * f.s)))
}

/// `σ_s ∫|k|^{2s}|û|² / (∫|u|^{2*})^{2/2*}`.
pub fn rayleigh_quotient(u: &Field, frac: &FracParams) -> Result<f64> {
    let crit = frac.critical_exponent();
    let den = u.integral_abs_pow(crit).powf(2.0 / crit);
    if !(den > 0.0) {
        return Err(domain("rayleigh_quotient", "field vanishes"));
    }
    Ok(sigma_s(frac.s)? * homogeneous_seminorm(u, frac.s)? / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SStarEstimate {
    /// Smallest quotient over the `ρ` values.
    pub value: f64,
    /// Closed-form `S_*`.
    pub formula: f64,
    pub relative_error: f64,
    /// `(ρ, quotient)` pairs.
    pub quotients: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Bubble `ρ^{(N-2s)/2}/(|x|²+ρ²)^{(N-2s)/2}` times a cosine cutoff equal
/// to 1 on `|x| ≤ L/2` and 0 beyond `|x| = L`.
fn cut_bubble(grid: Grid, frac: &FracParams, rho: f64) -> Field {
    let n = grid.n_dim();
    let l = grid.half_length();
    let e = 0.5 * (n as f64 - 2.0 * frac.s);
    let values = grid
        .points()
        .map(|x| {
            let r2: f64 = x.iter().take(n).map(|c| c * c).sum();
            let t = ((r2.sqrt() - 0.5 * l) / (0.5 * l)).clamp(0.0, 1.0);
            let cut = 0.5 * (1.0 + (PI * t).cos());
            rho.powf(e) / (r2 + rho * rho).powf(e) * cut
        })
        .collect();
    Field::from_parts_unchecked(grid, values)
}

/// `ρ = h, 2h, 4h, 8h, 16h`.
pub fn default_rho_values(grid: &Grid) -> Vec<f64> {
    (0..5).map(|j| grid.spacing() * f64::from(1u32 << j)).collect()
}

/// Minimizes the discrete Rayleigh quotient over cut-off bubbles centred at
/// the origin of `grid`.
pub fn estimate_s_star(frac: &FracParams, grid: Grid, rho_values: &[f64]) -> Result<SStarEstimate> {
    frac.validate()?;
    if grid.n_dim() != frac.n_dim {
        return Err(domain("estimate_s_star", "grid dimension differs from N"));
    }
    if rho_values.is_empty() || rho_values.iter().any(|r| !(*r > 0.0) || *r > 0.5 * grid.half_length()) {
        return Err(domain("estimate_s_star", "need 0 < rho <= L/2 for every rho"));
    }
    let quotients = rho_values
        .iter()
        .map(|&rho| Ok((rho, rayleigh_quotient(&cut_bubble(grid, frac, rho), frac)?)))
        .collect::<Result<Vec<_>>>()?;
    let (best_idx, &(_, value)) = quotients
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("nonempty");
    let mut warnings = Vec::new();
    if quotients.len() > 1 && (best_idx == 0 || best_idx == quotients.len() - 1) {
        warnings.push(format!(
            "quotient still decreasing at the edge rho = {} of the range; refine the grid or widen the range",
            quotients[best_idx].0
        ));
    }
    let formula = sobolev_trace_constant(frac.n_dim, frac.s)?;
    Ok(SStarEstimate {
        value,
        formula,
        relative_error: (value - formula) / formula,
        quotients,
        warnings,
    })
}
