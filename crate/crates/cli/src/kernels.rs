//! Invariant checks of the special functions, the extension and the
//! resolvent for one parameter set.

use frns_core::extension::{conormal_derivative, default_levels, extend};
use frns_core::specfun::{kappa_s, kappa_s_limit, poisson_kernel_mass, sigma_s, theta_derivative, theta_profile};
use frns_core::spectral::{apply_operator, apply_operator_singular, bessel_kernel, build_symbol};
use frns_core::{Field, FracParams, Grid};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|computed - expected| ≤ tolerance·|expected|`.
    fn relative(name: impl Into<String>, computed: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (computed - expected).abs() <= tolerance * expected.abs();
        Self {
            name: name.into(),
            computed,
            expected,
            tolerance,
            pass,
        }
    }

    /// `computed ≤ tolerance`, with `expected = 0`.
    fn bounded(name: impl Into<String>, computed: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            expected: 0.0,
            tolerance,
            pass: computed <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SuiteOptions {
    /// Negative control: perturb `σ_s` by 1% wherever it is used as a reference.
    pub corrupt_sigma: bool,
}

pub(crate) fn rel_l2(a: &Field, b: &Field) -> f64 {
    let d: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    let n: f64 = b.values().iter().map(|y| y * y).sum();
    (d / n).sqrt()
}

/// `∫P_{s,m}(x,y)dx = ϑ(my)` at `y ∈ {0.1, 1, 5}/m`.
pub fn poisson_mass_checks(frac: &FracParams) -> Result<Vec<Check>, CliError> {
    [0.1, 1.0, 5.0]
        .iter()
        .map(|&r| {
            let y = r / frac.m;
            Ok(Check::relative(
                format!("poisson mass y={r}/m"),
                poisson_kernel_mass(frac, y)?,
                theta_profile(frac.s, r)?,
                1e-6,
            ))
        })
        .collect()
}

/// `ϑ'' + (1-2s)/r ϑ' - ϑ = 0` on `[1e-3, 20]`, `ϑ(0) = 1` and, at `s = ½`, `ϑ = e^{-r}`.
pub fn theta_checks(s: f64) -> Result<Vec<Check>, CliError> {
    let mut worst: f64 = 0.0;
    for j in 0..=200 {
        let r = 1e-3 * (2e4f64).powf(j as f64 / 200.0);
        let d = 1e-4 * r;
        let second = (theta_derivative(s, r + d)? - theta_derivative(s, r - d)?) / (2.0 * d);
        let th = theta_profile(s, r)?;
        let res = second + (1.0 - 2.0 * s) / r * theta_derivative(s, r)? - th;
        worst = worst.max(res.abs() / th.abs());
    }
    let mut out = vec![
        Check::bounded("theta ODE residual on [1e-3, 20]", worst, 1e-4),
        Check::relative("theta(0)", theta_profile(s, 0.0)?, 1.0, 0.0),
    ];
    if s == 0.5 {
        let mut err: f64 = 0.0;
        for j in 0..=200 {
            let r = 20.0 * j as f64 / 200.0;
            err = err.max((theta_profile(s, r)? / (-r).exp() - 1.0).abs());
        }
        out.push(Check::bounded("theta = exp(-r) at s = 1/2", err, 1e-10));
    }
    Ok(out)
}

/// `κ_s = σ_s`, both as the energy integral and as the limit of `-y^{1-2s}ϑ'`.
pub fn kappa_checks(s: f64, opts: SuiteOptions) -> Result<Vec<Check>, CliError> {
    let sigma = sigma_s(s)? * if opts.corrupt_sigma { 1.01 } else { 1.0 };
    Ok(vec![
        Check::relative(format!("kappa_s integral = sigma_s, s={s}"), kappa_s(s)?, sigma, 1e-6),
        Check::relative(format!("kappa_s limit = sigma_s, s={s}"), kappa_s_limit(s)?.value, sigma, 1e-6),
    ])
}

/// Spectral vs singular-integral application on a 1D 512-point Gaussian.
pub fn operator_equivalence(s: f64, m: f64) -> Result<Check, CliError> {
    let grid = Grid::new(1, 512, 16.0)?;
    let p = FracParams::operator(s, m, 1)?;
    let u = Field::from_fn(grid, |x| (-2.0 * x[0] * x[0]).exp())?;
    let spectral = apply_operator(&u, &build_symbol(grid, p)?)?;
    let singular = apply_operator_singular(&u, &p, 40.0 / m)?;
    Ok(Check::bounded(
        "singular integral vs spectral (rel L2)",
        rel_l2(&singular.field, &spectral),
        1e-2,
    ))
}

fn band_limited(grid: Grid) -> Result<Field, CliError> {
    let base = std::f64::consts::PI / grid.half_length();
    let modes = [(1.0, 1.0, 0.0, 0.3), (-0.6, 2.0, 3.0, 1.1), (0.4, 4.0, -1.0, 2.0), (0.25, 0.0, 5.0, 0.7)];
    Ok(Field::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(a, p, q, ph)| a * (base * (p * x[0] + q * x[1]) + ph).cos())
            .sum()
    })?)
}

/// Conormal derivative of the extension vs `σ_s (-Δ+m²)^s u`.
pub fn dirichlet_to_neumann(frac: &FracParams, opts: SuiteOptions) -> Result<Check, CliError> {
    let grid = Grid::new(frac.n_dim, 64, 6.0)?;
    let u = band_limited(grid)?;
    let stack = extend(&u, frac, &default_levels(frac.m)?)?;
    let conormal = conormal_derivative(&stack, frac)?;
    let sigma = sigma_s(frac.s)? * if opts.corrupt_sigma { 1.01 } else { 1.0 };
    let expected = apply_operator(&u, &build_symbol(grid, *frac)?)?.scaled(sigma);
    Ok(Check::bounded(
        "conormal derivative vs sigma_s A u (rel L2)",
        rel_l2(&conormal.field, &expected),
        1e-2,
    ))
}

/// Positivity, `r^{2s-N}` near field and `e^{-m r}` far field of the Bessel kernel.
pub fn resolvent_checks(frac: &FracParams) -> Result<Vec<Check>, CliError> {
    let m = frac.m;
    let min = [1e-3, 0.1, 1.0, 5.0, 20.0]
        .iter()
        .map(|r| bessel_kernel(frac, r / m))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let expo = 2.0 * frac.s - frac.n_dim as f64;
    let near = |r: f64| bessel_kernel(frac, r / m).map(|g| g / (r / m).powf(expo));
    let rate = -(bessel_kernel(frac, 12.0 / m)?.ln() - bessel_kernel(frac, 4.0 / m)?.ln()) / (8.0 / m);
    Ok(vec![
        Check {
            name: "resolvent kernel positive".into(),
            computed: min,
            expected: 0.0,
            tolerance: 0.0,
            pass: min > 0.0,
        },
        Check::relative("resolvent kernel near field ~ r^(2s-N)", near(1e-6)?, near(1e-7)?, 1e-3),
        Check::relative("resolvent kernel decay rate ~ m", rate, m, 0.2),
    ])
}

/// The full suite for one parameter set.
pub fn kernel_suite(frac: &FracParams, opts: SuiteOptions) -> Result<Vec<Check>, CliError> {
    let mut out = poisson_mass_checks(frac)?;
    out.extend(theta_checks(frac.s)?);
    out.extend(kappa_checks(frac.s, opts)?);
    out.push(operator_equivalence(frac.s, frac.m)?);
    out.push(dirichlet_to_neumann(frac, opts)?);
    out.extend(resolvent_checks(frac)?);
    Ok(out)
}
