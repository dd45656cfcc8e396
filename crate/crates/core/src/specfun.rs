//! Closed-form constants and the one-dimensional profile `ϑ` that
//! diagonalizes the half-space extension of `(-Δ+m²)^s`.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::bessel::{bessel_k, bessel_k_scaled};
use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_half_line, observed_order, richardson};

/// Fractional order, mass and spatial dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    pub s: f64,
    pub m: f64,
    pub n_dim: usize,
}

impl FracParams {
    pub fn new(s: f64, m: f64, n_dim: usize) -> Result<Self> {
        let p = Self { s, m, n_dim };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for the linear operator alone, where `N > 2s` is not
    /// needed (e.g. `N = 1`, `s = 1/2`). Anything touching the critical
    /// exponent must go through [`FracParams::new`].
    pub fn operator(s: f64, m: f64, n_dim: usize) -> Result<Self> {
        let p = Self { s, m, n_dim };
        p.validate_operator()?;
        Ok(p)
    }

    pub fn validate_operator(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(domain("FracParams", format!("s must lie in (0,1), got {}", self.s)));
        }
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(domain("FracParams", format!("m must be > 0, got {}", self.m)));
        }
        if self.n_dim == 0 {
            return Err(domain("FracParams", "dimension must be >= 1"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_operator()?;
        if self.n_dim == 0 || (self.n_dim as f64) <= 2.0 * self.s {
            return Err(domain(
                "FracParams",
                format!("need N > 2s, got N = {}, s = {}", self.n_dim, self.s),
            ));
        }
        Ok(())
    }

    /// Critical exponent `2*_s = 2N / (N - 2s)`.
    pub fn critical_exponent(&self) -> f64 {
        let n = self.n_dim as f64;
        2.0 * n / (n - 2.0 * self.s)
    }

    /// `m^{2s}`, the bottom of the symbol.
    pub fn mass_floor(&self) -> f64 {
        self.m.powf(2.0 * self.s)
    }
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(domain("fractional order", format!("s must lie in (0,1), got {s}")))
    }
}

/// `ϑ(r) = (2/Γ(s)) (r/2)^s K_s(r)`, with the limiting value `ϑ(0) = 1`.
pub fn theta_profile(s: f64, r: f64) -> Result<f64> {
    check_order(s)?;
    if r < 0.0 || r.is_nan() {
        return Err(domain("theta_profile", format!("r must be >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    if r > 700.0 {
        // scaled evaluation avoids 0·∞ when e^{-r} underflows
        let log_val = (2.0 / gamma(s)).ln() + s * (0.5 * r).ln() - r
            + bessel_k_scaled(s, r)?.ln();
        return Ok(log_val.exp());
    }
    Ok(2.0 / gamma(s) * (0.5 * r).powf(s) * bessel_k(s, r)?)
}

/// `ϑ'(r) = -(2^{1-s}/Γ(s)) r^s K_{1-s}(r)`, from `(r^s K_s)' = -r^s K_{s-1}`.
pub fn theta_derivative(s: f64, r: f64) -> Result<f64> {
    check_order(s)?;
    if !(r > 0.0) {
        return Err(domain("theta_derivative", format!("r must be > 0, got {r}")));
    }
    if r > 700.0 {
        let log_val = (2f64.powf(1.0 - s) / gamma(s)).ln() + s * r.ln() - r
            + bessel_k_scaled(1.0 - s, r)?.ln();
        return Ok(-log_val.exp());
    }
    Ok(-(2f64.powf(1.0 - s) / gamma(s)) * r.powf(s) * bessel_k(1.0 - s, r)?)
}

/// `σ_s = 2^{1-2s} Γ(1-s) / Γ(s)`.
pub fn sigma_s(s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s))
}

/// `κ_s = ∫_0^∞ y^{1-2s} (ϑ'(y)² + ϑ(y)²) dy` by adaptive quadrature.
pub fn kappa_s(s: f64) -> Result<f64> {
    check_order(s)?;
    let weight = 1.0 - 2.0 * s;
    let q = integrate_half_line(
        |y: f64| {
            let t = theta_profile(s, y).unwrap_or(0.0);
            let dt = theta_derivative(s, y).unwrap_or(0.0);
            y.powf(weight) * (dt * dt + t * t)
        },
        1.0,
        1e-14,
        1e-12,
    )?;
    if q.error > 1e-9 * q.value.abs() {
        return Err(Error::Quadrature {
            value: q.value,
            error: q.error,
            tolerance: 1e-9 * q.value.abs(),
        });
    }
    Ok(q.value)
}

/// Limit form of `κ_s`: `-lim_{y→0} y^{1-2s} ϑ'(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaLimit {
    pub value: f64,
    pub error_estimate: f64,
    /// Observed order of the leading correction on the sample sequence.
    pub observed_order: f64,
}

/// `-lim_{y→0} y^{1-2s} ϑ'(y)` by Richardson extrapolation over
/// `y_j = 0.1 · 2^{-j}`; the expansion of `K_{1-s}` has corrections in
/// `y^{2-2s}`, `y^2`, `y^{4-2s}`, `y^4`.
pub fn kappa_s_limit(s: f64) -> Result<KappaLimit> {
    check_order(s)?;
    let ratio: f64 = 2.0;
    let samples: Vec<f64> = (0..6)
        .map(|j| {
            let y = 0.1 / ratio.powi(j);
            theta_derivative(s, y).map(|d| -y.powf(1.0 - 2.0 * s) * d)
        })
        .collect::<Result<_>>()?;
    let orders = [2.0 - 2.0 * s, 2.0, 4.0 - 2.0 * s, 4.0, 6.0 - 2.0 * s];
    let (value, error_estimate) = richardson(&samples, ratio, &orders)?;
    let order = observed_order(samples[3], samples[4], samples[5], ratio);
    Ok(KappaLimit {
        value,
        error_estimate,
        observed_order: order,
    })
}

/// Sharp constant of the trace inequality
/// `∬ y^{1-2s}|∇v|² ≥ S_* (∫|v(·,0)|^{2*_s})^{2/2*_s}`.
pub fn sobolev_trace_constant(n_dim: usize, s: f64) -> Result<f64> {
    check_order(s)?;
    let n = n_dim as f64;
    if n <= 2.0 * s {
        return Err(domain("sobolev_trace_constant", format!("need N > 2s, got N = {n_dim}, s = {s}")));
    }
    let num = 2.0 * PI.powf(s) * gamma(1.0 - s) * gamma(0.5 * (n + 2.0 * s)) * gamma(0.5 * n).powf(2.0 * s / n);
    let den = gamma(s) * gamma(0.5 * (n - 2.0 * s)) * gamma(n).powf(2.0 * s / n);
    Ok(num / den)
}

/// Sharp Sobolev constant of the trace-form seminorm `∫|k|^{2s}|û|²`,
/// i.e. `S_* / σ_s`. This is the constant that matches energies written
/// directly on `ℝ^N` without the `σ_s` factor of the extension.
pub fn trace_form_sobolev_constant(n_dim: usize, s: f64) -> Result<f64> {
    Ok(sobolev_trace_constant(n_dim, s)? / sigma_s(s)?)
}

/// Constants of the singular-integral form and of the Poisson kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    /// `C(N,s)` of the singular-integral representation.
    pub c_ns: f64,
    /// `p_{N,s}`, normalization of the `m = 0` Poisson kernel.
    pub p_ns: f64,
    /// `c'_{N,s} = p_{N,s} 2^{(N+2s)/2-1} / Γ((N+2s)/2)`, the normalization of
    /// `P_{s,m}` as usually printed.
    pub c_prime_ns: f64,
    /// `p_{N,s} 2^{1-(N+2s)/2} / Γ((N+2s)/2)`, the normalization for which
    /// `∫ P_{s,m}(x,y) dx = ϑ(my)` and `P_{s,m} → P_s` as `m → 0`. Agrees with
    /// `c_prime_ns` only when `N + 2s = 2`.
    pub poisson_normalization: f64,
}

pub fn kernel_constants(params: &FracParams) -> Result<KernelConstants> {
    params.validate_operator()?;
    let n = params.n_dim as f64;
    let s = params.s;
    let half = 0.5 * (n + 2.0 * s);
    let c_ns = 2f64.powf(-half + 1.0) * PI.powf(-0.5 * n) * 2f64.powf(2.0 * s) * s * (1.0 - s)
        / gamma(2.0 - s);
    let p_ns = PI.powf(-0.5 * n) * gamma(half) / gamma(s);
    let c_prime_ns = p_ns * 2f64.powf(half - 1.0) / gamma(half);
    let poisson_normalization = p_ns * 2f64.powf(1.0 - half) / gamma(half);
    Ok(KernelConstants {
        c_ns,
        p_ns,
        c_prime_ns,
        poisson_normalization,
    })
}

/// Poisson kernel `P_{s,m}(x, y)` as a function of `|x|` and `y > 0`, using
/// [`KernelConstants::poisson_normalization`].
pub fn poisson_kernel(params: &FracParams, x_norm: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(domain("poisson_kernel", format!("y must be > 0, got {y}")));
    }
    let k = kernel_constants(params)?;
    let n = params.n_dim as f64;
    let nu = 0.5 * (n + 2.0 * params.s);
    let rho = x_norm.hypot(y);
    let arg = params.m * rho;
    let log_k = bessel_k_scaled(nu, arg)?.ln() - arg;
    Ok(k.poisson_normalization * y.powf(2.0 * params.s) * params.m.powf(nu) * rho.powf(-nu) * log_k.exp())
}

/// Surface area of the unit sphere in `ℝ^N`.
pub fn unit_sphere_area(n_dim: usize) -> f64 {
    let n = n_dim as f64;
    2.0 * PI.powf(0.5 * n) / gamma(0.5 * n)
}

/// `∫_{ℝ^N} P_{s,m}(x, y) dx` by radial quadrature.
pub fn poisson_kernel_mass(params: &FracParams, y: f64) -> Result<f64> {
    let n = params.n_dim;
    let mut failure = None;
    let q = integrate_half_line(
        |r: f64| match poisson_kernel(params, r, y) {
            Ok(v) => v * r.powi(n as i32 - 1),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        y,
        1e-15,
        1e-11,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(unit_sphere_area(n) * q.value)
}
