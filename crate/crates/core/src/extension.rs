//! Half-space extension `U(x, y)` of a trace `u`, built mode by mode from the
//! profile `ϑ`, together with the conormal derivative at `y = 0` and the
//! weighted Dirichlet energy.

use log::warn;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::numerics::richardson;
use crate::specfun::{theta_profile, FracParams};
use crate::spectral::Fourier;

/// Levels of a stack: `U(·, y_j)` for increasing heights starting at 0.
#[derive(Debug, Clone)]
pub struct ExtensionStack {
    grid: Grid,
    y_levels: Vec<f64>,
    slabs: Vec<Field>,
}

impl ExtensionStack {
    /// Assemble a stack from explicit slabs, e.g. a competitor for the
    /// minimality check.
    pub fn new(grid: Grid, y_levels: Vec<f64>, slabs: Vec<Field>) -> Result<Self> {
        check_levels(&y_levels)?;
        if slabs.len() != y_levels.len() {
            return Err(Error::GridMismatch(format!(
                "{} slabs for {} levels",
                slabs.len(),
                y_levels.len()
            )));
        }
        if let Some(bad) = slabs.iter().find(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch(format!("slab on {:?}, stack on {:?}", bad.grid(), grid)));
        }
        Ok(Self {
            grid,
            y_levels,
            slabs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn y_levels(&self) -> &[f64] {
        &self.y_levels
    }

    pub fn slabs(&self) -> &[Field] {
        &self.slabs
    }

    /// The trace `U(·, 0)`.
    pub fn trace(&self) -> &Field {
        &self.slabs[0]
    }

    pub fn into_slabs(self) -> Vec<Field> {
        self.slabs
    }
}

fn check_levels(y: &[f64]) -> Result<()> {
    if y.first() != Some(&0.0) {
        return Err(crate::error::domain("extension levels", "the first level must be y = 0"));
    }
    if let Some(w) = y.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(crate::error::domain(
            "extension levels",
            format!("levels must increase strictly, found {} then {}", w[0], w[1]),
        ));
    }
    Ok(())
}

/// `0` followed by `count` log-spaced heights in `[lo, hi]`.
pub fn log_levels(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || count < 2 {
        return Err(crate::error::domain(
            "log_levels",
            format!("need 0 < lo < hi and count >= 2, got lo={lo}, hi={hi}, count={count}"),
        ));
    }
    let step = (hi / lo).ln() / (count - 1) as f64;
    let mut out = Vec::with_capacity(count + 1);
    out.push(0.0);
    out.extend((0..count).map(|j| lo * (step * j as f64).exp()));
    Ok(out)
}

/// 48 log-spaced heights in `[1e-4/m, 20/m]` plus 0.
pub fn default_levels(m: f64) -> Result<Vec<f64>> {
    log_levels(1e-4 / m, 20.0 / m, 48)
}

/// `U(·, y) = F^{-1}[û(k) ϑ(y √(|k|²+m²))]` on every level; level 0 is `u` itself.
pub fn extend(u: &Field, params: &FracParams, y_levels: &[f64]) -> Result<ExtensionStack> {
    params.validate_operator()?;
    check_levels(y_levels)?;
    let grid = *u.grid();
    if grid.n_dim() != params.n_dim {
        return Err(Error::GridMismatch(format!(
            "parameters are {}-dimensional, grid is {}-dimensional",
            params.n_dim,
            grid.n_dim()
        )));
    }
    let fourier = Fourier::new(grid);
    let spec = fourier.forward(u.values());
    let m2 = params.m * params.m;
    let omega: Vec<f64> = (0..grid.total_points())
        .map(|i| {
            let k = grid.wavevector(i);
            (k[0] * k[0] + k[1] * k[1] + m2).sqrt()
        })
        .collect();
    let mut slabs = Vec::with_capacity(y_levels.len());
    slabs.push(u.clone());
    for &y in &y_levels[1..] {
        let mut level = spec.clone();
        for (c, w) in level.iter_mut().zip(&omega) {
            *c *= theta_profile(params.s, y * w)?;
        }
        slabs.push(Field::new(grid, fourier.inverse_real(level))?);
    }
    Ok(ExtensionStack {
        grid,
        y_levels: y_levels.to_vec(),
        slabs,
    })
}

/// Conormal derivative with extrapolation diagnostics.
#[derive(Debug, Clone)]
pub struct Conormal {
    /// `-lim_{y→0} y^{1-2s} ∂_y U`.
    pub field: Field,
    /// Convergence order observed on the three lowest levels.
    pub observed_order: f64,
    /// Largest last Richardson correction over the grid.
    pub correction: f64,
    /// Number of levels used.
    pub levels_used: usize,
}

/// `-y^{1-2s} ∂_y U` as `y → 0`.
///
/// Uses the difference quotient `D(y) = 2s (U(0) - U(y)) / y^{2s}`, which
/// tends to the same limit with corrections in `y^{2-2s}, y², y^{4-2s}, y⁴`,
/// sampled on the lowest geometrically spaced levels and extrapolated.
pub fn conormal_derivative(stack: &ExtensionStack, params: &FracParams) -> Result<Conormal> {
    params.validate_operator()?;
    let s = params.s;
    let y = &stack.y_levels;
    if y.len() < 5 {
        return Err(Error::Extrapolation(format!(
            "need at least 4 positive levels, stack has {}",
            y.len() - 1
        )));
    }
    let ratio = y[2] / y[1];
    let mut used = 2;
    while used < 6 && used + 1 < y.len() {
        let r = y[used + 1] / y[used];
        if (r - ratio).abs() > 1e-9 * ratio {
            break;
        }
        used += 1;
    }
    if used < 4 {
        return Err(Error::Extrapolation(format!(
            "only {used} geometrically spaced levels near y = 0, need 4"
        )));
    }
    let u0 = stack.slabs[0].values();
    // samples from the largest to the smallest height
    let quotients: Vec<Vec<f64>> = (1..=used)
        .rev()
        .map(|j| {
            let scale = 2.0 * s / y[j].powf(2.0 * s);
            u0.iter()
                .zip(stack.slabs[j].values())
                .map(|(a, b)| scale * (a - b))
                .collect()
        })
        .collect();
    let orders = [2.0 - 2.0 * s, 2.0, 4.0 - 2.0 * s, 4.0, 6.0 - 2.0 * s];
    let mut out = Vec::with_capacity(u0.len());
    let mut correction = 0.0f64;
    let mut samples = vec![0.0; used];
    for i in 0..u0.len() {
        for (slot, q) in samples.iter_mut().zip(&quotients) {
            *slot = q[i];
        }
        let (v, c) = richardson(&samples, ratio, &orders[..used - 1])?;
        out.push(v);
        correction = correction.max(c);
    }
    let diff = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let d1 = diff(&quotients[used - 3], &quotients[used - 2]);
    let d2 = diff(&quotients[used - 2], &quotients[used - 1]);
    let observed_order = if d1 > 0.0 && d2 > 0.0 {
        (d1 / d2).ln() / ratio.ln()
    } else {
        f64::INFINITY
    };
    Ok(Conormal {
        field: Field::new(stack.grid, out)?,
        observed_order,
        correction,
        levels_used: used,
    })
}

/// Weighted energy of a stack, with resolution diagnostics.
#[derive(Debug, Clone)]
pub struct ExtensionEnergy {
    pub value: f64,
    /// Set when the `y` grid is too coarse for the stated accuracy.
    pub warnings: Vec<String>,
}

/// Finite-difference weights for the first derivative at `x0` (Fornberg).
fn derivative_weights(x0: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // c[j][k]: weight of node j for derivative order k (k = 0, 1)
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// `∬ y^{1-2s} (|∇_x U|² + |∂_y U|² + m² U²) dx dy`.
///
/// The `x` part is evaluated exactly per level through Parseval. `∂_y U` comes
/// from five-point finite differences in `t = ln y`, the `y` integral from the
/// trapezoidal rule in `t`; the piece below the lowest positive level is
/// added from a power-law fit of the integrand.
pub fn extension_energy(stack: &ExtensionStack, params: &FracParams) -> Result<ExtensionEnergy> {
    params.validate_operator()?;
    let grid = stack.grid;
    let s = params.s;
    let y = &stack.y_levels[1..];
    let slabs = &stack.slabs[1..];
    let mut warnings = Vec::new();
    if y.len() < 32 {
        warnings.push(format!("only {} positive y levels, at least 32 are needed", y.len()));
    }
    if y.len() < 5 {
        return Err(Error::Unsupported(format!(
            "extension energy needs at least 5 positive levels, got {}",
            y.len()
        )));
    }
    let t: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let max_step = t.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    if max_step > 0.5 {
        warnings.push(format!("log-height step {max_step:.3} exceeds 0.5"));
    }
    let y_top = *y.last().unwrap_or(&0.0);
    if y_top * params.m < 15.0 {
        warnings.push(format!("top level m·y = {:.3} leaves a tail above e^-30", y_top * params.m));
    }

    let fourier = Fourier::new(grid);
    let m2 = params.m * params.m;
    let weight_x: Vec<f64> = (0..grid.total_points())
        .map(|i| {
            let k = grid.wavevector(i);
            k[0] * k[0] + k[1] * k[1] + m2
        })
        .collect();
    let parseval = grid.cell_volume() / grid.total_points() as f64;
    let spectra: Vec<_> = slabs.iter().map(|f| fourier.forward(f.values())).collect();

    let n = y.len();
    let mut integrand = Vec::with_capacity(n);
    for j in 0..n {
        let lo = j.saturating_sub(2).min(n - 5);
        let nodes = &t[lo..lo + 5];
        let w = derivative_weights(t[j], nodes);
        let spatial: f64 = spectra[j]
            .iter()
            .zip(&weight_x)
            .map(|(c, wx)| wx * c.norm_sqr())
            .sum::<f64>()
            * parseval;
        // ∂_y U = (1/y) ∂_t U
        let mut dy_sq = 0.0;
        for idx in 0..grid.total_points() {
            let mut d = 0.0;
            for (k, wk) in w.iter().enumerate() {
                d += wk * spectra[lo + k][idx].re;
            }
            dy_sq += d * d;
        }
        // imaginary parts separately keep the Parseval sum exact
        for idx in 0..grid.total_points() {
            let mut d = 0.0;
            for (k, wk) in w.iter().enumerate() {
                d += wk * spectra[lo + k][idx].im;
            }
            dy_sq += d * d;
        }
        let vertical = dy_sq * parseval / (y[j] * y[j]);
        integrand.push(y[j].powf(1.0 - 2.0 * s) * (spatial + vertical));
    }
    // trapezoid in t of f(y)·y
    let mut value = 0.0;
    for j in 0..n - 1 {
        let a = integrand[j] * y[j];
        let b = integrand[j + 1] * y[j + 1];
        value += 0.5 * (a + b) * (t[j + 1] - t[j]);
    }
    // (0, y_0]: integrand ≈ c y^α
    if integrand[0] > 0.0 && integrand[1] > 0.0 {
        let alpha = (integrand[1] / integrand[0]).ln() / (t[1] - t[0]);
        if alpha > -1.0 {
            value += integrand[0] * y[0] / (alpha + 1.0);
        } else {
            warnings.push(format!("integrand exponent {alpha:.3} near y = 0 is not integrable"));
        }
    }
    for w in &warnings {
        warn!("extension_energy: {w}");
    }
    Ok(ExtensionEnergy { value, warnings })
}
