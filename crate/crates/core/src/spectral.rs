//! `(-Δ+m²)^s` on periodic lattices: Fourier symbol application, the
//! singular-integral form (1D cross-check), the resolvent and the closed-form
//! Bessel kernel.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use statrs::function::gamma::gamma;

use crate::bessel::{bessel_k, bessel_k_scaled};
use crate::error::{domain, Error, Result};
use crate::grid::{Field, Grid};
use crate::numerics::{integrate, integrate_half_line};
use crate::specfun::{kernel_constants, FracParams};

/// Forward/inverse FFT plans for one grid. Cheap to clone.
#[derive(Clone)]
pub struct Fourier {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_dim();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_dim();
        // rows (or the whole line in 1D)
        plan.process(buf);
        if self.grid.n_dim() == 2 {
            transpose_square(buf, n);
            plan.process(buf);
            transpose_square(buf, n);
        }
    }

    /// Unnormalized DFT `û_k = Σ_x u(x) e^{-ik·x}`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    /// Inverse DFT (normalized), real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spectrum, &self.inverse);
        let scale = 1.0 / spectrum.len() as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// How `|k|²` is represented on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// Exact `|k|²` at the lattice frequencies `k = π q / L`.
    Continuum,
    /// Eigenvalues of the second-order difference Laplacian,
    /// `Σ_c (4/h²) sin²(k_c h / 2)`. Fractional powers of this symbol keep a
    /// discrete maximum principle (nonpositive off-diagonal stencil).
    Lattice,
}

/// Precomputed symbol values `(|k|²+m²)^s` for one grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: Grid,
    params: FracParams,
    kind: SymbolKind,
    symbol: Arc<Vec<f64>>,
    fourier: Fourier,
}

fn squared_wavenumber(grid: &Grid, flat: usize, kind: SymbolKind) -> f64 {
    let k = grid.wavevector(flat);
    let h = grid.spacing();
    (0..grid.n_dim())
        .map(|c| match kind {
            SymbolKind::Continuum => k[c] * k[c],
            SymbolKind::Lattice => {
                let sn = (0.5 * k[c] * h).sin();
                4.0 * sn * sn / (h * h)
            }
        })
        .sum()
}

/// Symbol table with the exact continuum symbol.
pub fn build_symbol(grid: Grid, params: FracParams) -> Result<KernelTable> {
    KernelTable::new(grid, params, SymbolKind::Continuum)
}

impl KernelTable {
    pub fn new(grid: Grid, params: FracParams, kind: SymbolKind) -> Result<Self> {
        params.validate_operator()?;
        if params.n_dim != grid.n_dim() {
            return Err(Error::GridMismatch(format!(
                "parameters are {}-dimensional, grid is {}-dimensional",
                params.n_dim,
                grid.n_dim()
            )));
        }
        let m2 = params.m * params.m;
        let symbol = (0..grid.total_points())
            .map(|i| (squared_wavenumber(&grid, i, kind) + m2).powf(params.s))
            .collect();
        Ok(Self {
            grid,
            params,
            kind,
            symbol: Arc::new(symbol),
            fourier: Fourier::new(grid),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    fn check(&self, u: &Field) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "field grid {:?} differs from table grid {:?}",
                u.grid(),
                self.grid
            )));
        }
        Ok(())
    }

    /// Multiply the spectrum of `u` by `weight(symbol_k)` and transform back.
    pub fn apply_multiplier<F: Fn(f64) -> f64>(&self, u: &Field, weight: F) -> Result<Field> {
        self.check(u)?;
        let mut spec = self.fourier.forward(u.values());
        for (c, &s) in spec.iter_mut().zip(self.symbol.iter()) {
            *c *= weight(s);
        }
        Ok(Field::from_parts_unchecked(self.grid, self.fourier.inverse_real(spec)))
    }

    /// `⟨Au, u⟩ = h^N Σ_x u·Au`, evaluated as `(h^N / n_tot) Σ_k symbol_k |û_k|²`.
    pub fn quadratic_form(&self, u: &Field) -> Result<f64> {
        self.check(u)?;
        let spec = self.fourier.forward(u.values());
        let sum: f64 = spec
            .iter()
            .zip(self.symbol.iter())
            .map(|(c, s)| s * c.norm_sqr())
            .sum();
        Ok(sum * self.grid.cell_volume() / self.grid.total_points() as f64)
    }
}

/// `(-Δ+m²)^s u` by multiplication with the tabulated symbol.
pub fn apply_operator(u: &Field, table: &KernelTable) -> Result<Field> {
    table.apply_multiplier(u, |s| s)
}

/// Solves `(-Δ+m²)^s z = mu` by division with the (strictly positive) symbol.
pub fn solve_resolvent(mu: &Field, table: &KernelTable) -> Result<Field> {
    table.apply_multiplier(mu, |s| 1.0 / s)
}

/// Homogeneous seminorm `h^N/n_tot Σ_k |k|^{2s} |û_k|²` (the `m = 0` form).
pub fn homogeneous_seminorm(u: &Field, s: f64) -> Result<f64> {
    let grid = *u.grid();
    let fourier = Fourier::new(grid);
    let spec = fourier.forward(u.values());
    let sum: f64 = spec
        .iter()
        .enumerate()
        .map(|(i, c)| squared_wavenumber(&grid, i, SymbolKind::Continuum).powf(s) * c.norm_sqr())
        .sum();
    Ok(sum * grid.cell_volume() / grid.total_points() as f64)
}

/// Output of the singular-integral evaluation.
#[derive(Debug, Clone)]
pub struct SingularApplication {
    pub field: Field,
    /// Bound on the dropped far field `∫_{|r|>R} (u(x)-u(x+r)) K(r) dr`,
    /// namely `2 max|u| · 2∫_R^∞ K`.
    pub tail_estimate: f64,
    /// Effective cutoff radius actually used.
    pub radius: f64,
}

/// Largest number of kernel offsets accepted by [`apply_operator_singular`].
pub const MAX_SINGULAR_OFFSETS: usize = 1 << 16;

/// `m^{2s}u + C(N,s) m^{(N+2s)/2} P.V.∫ (u(x)-u(y)) |x-y|^{-(N+2s)/2} K_{(N+2s)/2}(m|x-y|) dy`
/// on a 1D periodic grid.
///
/// Off-centre cells use the weights `w_j = (jh)^{-2} ∫_{(j-½)h}^{(j+½)h} r²K(r) dr`;
/// the central cell uses the second-order
/// Taylor expansion `-u''(x) ∫_0^{h/2} r² K(r) dr` with a centred difference
/// for `u''`. The field is read periodically, so the radius may exceed the
/// box; everything beyond it is dropped and bounded by `tail_estimate`.
pub fn apply_operator_singular(
    u: &Field,
    params: &FracParams,
    truncation_radius: f64,
) -> Result<SingularApplication> {
    let grid = *u.grid();
    if grid.n_dim() != 1 || params.n_dim != 1 {
        return Err(Error::Unsupported(
            "singular-integral evaluation is implemented for N = 1 only".into(),
        ));
    }
    params.validate_operator()?;
    let h = grid.spacing();
    if !(truncation_radius >= 1.5 * h) || !truncation_radius.is_finite() {
        return Err(domain(
            "apply_operator_singular",
            format!("truncation radius must be at least 1.5h = {}, got {truncation_radius}", 1.5 * h),
        ));
    }
    let max_offset = ((truncation_radius / h - 0.5).floor() as usize).max(1);
    if max_offset > MAX_SINGULAR_OFFSETS {
        return Err(domain(
            "apply_operator_singular",
            format!("{max_offset} kernel offsets exceed the cap of {MAX_SINGULAR_OFFSETS}"),
        ));
    }
    let n = grid.points_per_dim();
    let s = params.s;
    let m = params.m;
    let nu = 0.5 * (1.0 + 2.0 * s);
    let c = kernel_constants(params)?.c_ns * m.powf(nu);
    let kernel = move |r: f64| {
        let x = m * r;
        let k = if x > 700.0 {
            bessel_k_scaled(nu, x).map(|v| v * (-x).exp())
        } else {
            bessel_k(nu, x)
        };
        c * r.powf(-nu) * k.unwrap_or(0.0)
    };

    let radius = (max_offset as f64 + 0.5) * h;
    // The second difference 2u(x)-u(x+r)-u(x-r) behaves like r²; weighting
    // each cell by ∫ r²K / (jh)² keeps the rule second-order accurate.
    let weights: Vec<f64> = (1..=max_offset)
        .map(|j| {
            let lo = (j as f64 - 0.5) * h;
            let hi = (j as f64 + 0.5) * h;
            let r_j = j as f64 * h;
            integrate(kernel_moment(kernel), lo, hi, 0.0, 1e-12).map(|q| q.value / (r_j * r_j))
        })
        .collect::<Result<_>>()?;
    // ∫_0^{h/2} r² K(r) dr; integrand ~ r^{1-2s} near 0
    let central = integrate(kernel_moment(kernel), 0.0, 0.5 * h, 0.0, 1e-12)?.value;
    let tail = 2.0 * integrate_half_line(|t: f64| kernel(radius + t), 1.0 / m, 0.0, 1e-10)?.value;

    let v = u.values();
    let out: Vec<f64> = (0..n)
        .map(|i| {
            let ui = v[i];
            let plus = |j: usize| v[(i + j) % n];
            let minus = |j: usize| v[(i + n - j % n) % n];
            let second = (plus(1) - 2.0 * ui + minus(1)) / (h * h);
            let mut acc = -second * central;
            for (jm1, w) in weights.iter().enumerate() {
                let j = jm1 + 1;
                acc += (2.0 * ui - plus(j) - minus(j)) * w;
            }
            params.mass_floor() * ui + acc
        })
        .collect();
    Ok(SingularApplication {
        field: Field::new(grid, out)?,
        tail_estimate: 2.0 * u.norm_max() * tail,
        radius,
    })
}

fn kernel_moment<K: Fn(f64) -> f64>(kernel: K) -> impl Fn(f64) -> f64 {
    move |r: f64| if r > 0.0 { r * r * kernel(r) } else { 0.0 }
}

/// Bessel kernel `G_{2s,m}(r)`, the fundamental solution of `(-Δ+m²)^s`.
pub fn bessel_kernel(params: &FracParams, r: f64) -> Result<f64> {
    params.validate()?;
    if !(r > 0.0) {
        return Err(domain("bessel_kernel", format!("kernel is singular at r = {r}")));
    }
    let n = params.n_dim as f64;
    let s = params.s;
    let m = params.m;
    let nu = 0.5 * (n - 2.0 * s);
    let norm = 2f64.powf(0.5 * (n + 2.0 * s - 2.0)) * PI.powf(0.5 * n) * gamma(s);
    let x = m * r;
    let k = if x > 700.0 {
        (bessel_k_scaled(nu, x)?.ln() - x).exp()
    } else {
        bessel_k(nu, x)?
    };
    Ok(m.powf(nu) * k * r.powf(-nu) / norm)
}
