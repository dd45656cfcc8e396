//! Modified Bessel function of the second kind `K_ν(x)` for real order.
//!
//! The order is split as `ν = μ + n` with `|μ| ≤ 1/2`. `K_μ` and `K_{μ+1}`
//! come from Temme's series for `x ≤ 2` and from Steed's continued fraction
//! for `x > 2`; forward recurrence in the order (stable for `K`) then
//! lifts the pair to `ν`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const SERIES_LIMIT: f64 = 2.0;

/// Taylor coefficients of `1/Γ(z) = Σ c_k z^k`, k = 1..=26.
const RECIP_GAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// `gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)`, evaluated without cancellation.
fn gam1_series(mu: f64) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    let mu2 = mu * mu;
    for k in (1..RECIP_GAMMA.len()).step_by(2) {
        acc -= RECIP_GAMMA[k] * pow;
        pow *= mu2;
    }
    acc
}

/// `gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`.
fn gam2_series(mu: f64) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    let mu2 = mu * mu;
    for k in (0..RECIP_GAMMA.len()).step_by(2) {
        acc += RECIP_GAMMA[k] * pow;
        pow *= mu2;
    }
    acc
}

/// `(K_μ(x), K_{μ+1}(x))` by Temme's series, `|μ| ≤ 1/2`, `0 < x ≤ 2`.
fn temme_series(mu: f64, x: f64) -> (f64, f64) {
    let gam1 = gam1_series(mu);
    let gam2 = gam2_series(mu);
    let recip_plus = gam2 - mu * gam1;
    let recip_minus = gam2 + mu * gam1;
    let half_x = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS {
        1.0
    } else {
        pimu / pimu.sin()
    };
    let d = -half_x.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / recip_plus;
    let mut q = 0.5 / (ee * recip_minus);
    let mut c = 1.0;
    let quarter_x2 = half_x * half_x;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu * mu);
        c *= quarter_x2 / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// `(e^x K_μ(x), e^x K_{μ+1}(x))` by Steed's continued fraction, `x > 2`.
fn steed_cf2_scaled(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut c = a1;
    let mut q = c;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k_mu = (PI / (2.0 * x)).sqrt() / s;
    let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
    (k_mu, k_mu1)
}

/// Returns `e^{x}·K_ν(x)` when `scaled`, `K_ν(x)` otherwise.
fn bessel_k_impl(nu: f64, x: f64, scaled: bool) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("bessel_k", format!("argument must be > 0, got {x}")));
    }
    if !nu.is_finite() {
        return Err(domain("bessel_k", format!("order must be finite, got {nu}")));
    }
    let nu = nu.abs(); // K_{-ν} = K_ν
    let steps = (nu + 0.5).floor();
    let mu = nu - steps;
    let (mut k_lo, mut k_hi) = if x <= SERIES_LIMIT {
        let (a, b) = temme_series(mu, x);
        if scaled {
            let ex = x.exp();
            (a * ex, b * ex)
        } else {
            (a, b)
        }
    } else {
        let (a, b) = steed_cf2_scaled(mu, x);
        if scaled {
            (a, b)
        } else {
            let ex = (-x).exp();
            (a * ex, b * ex)
        }
    };
    let two_over_x = 2.0 / x;
    for i in 1..=(steps as usize) {
        let next = (mu + i as f64) * two_over_x * k_hi + k_lo;
        k_lo = k_hi;
        k_hi = next;
    }
    Ok(k_lo)
}

/// Modified Bessel function of the second kind `K_ν(x)`, `x > 0`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    bessel_k_impl(nu, x, false)
}

/// Exponentially scaled `e^{x} K_ν(x)`; finite for all `x > 0` where the
/// unscaled value would underflow.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    bessel_k_impl(nu, x, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;
    use approx::assert_relative_eq;

    /// Oracle: K_ν(x) = ∫_0^∞ e^{-x cosh t} cosh(νt) dt.
    fn k_by_quadrature(nu: f64, x: f64) -> f64 {
        // integrand is below e^{-745} once x cosh t - ν t > 745
        let mut t_max: f64 = 1.0;
        while x * t_max.cosh() - nu * t_max < 760.0 {
            t_max *= 1.25;
        }
        integrate(
            |t: f64| (-x * t.cosh() + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp()),
            0.0,
            t_max,
            0.0,
            1e-14,
        )
        .unwrap()
        .value
    }

    #[test]
    fn half_order_closed_form() {
        let k = |x: f64| (PI / (2.0 * x)).sqrt() * (-x).exp();
        assert_relative_eq!(bessel_k(0.5, 1.0).unwrap(), 0.461_068_504_4, max_relative = 1e-9);
        assert_relative_eq!(bessel_k(0.5, 2.0).unwrap(), 0.119_937_771_9, max_relative = 1e-9);
        for &x in &[1e-6, 1e-3, 0.3, 1.0, 1.9, 2.1, 7.5, 30.0, 50.0] {
            assert_relative_eq!(bessel_k(0.5, x).unwrap(), k(x), max_relative = 1e-13);
            // K_{3/2}(x) = K_{1/2}(x)(1 + 1/x)
            assert_relative_eq!(
                bessel_k(1.5, x).unwrap(),
                k(x) * (1.0 + 1.0 / x),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn matches_integral_representation() {
        let orders = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 2.3, 4.75, 7.5, 10.0];
        let args = [1e-6, 1e-4, 1e-2, 0.2, 1.0, 1.999, 2.001, 5.0, 12.0, 25.0, 50.0];
        for &nu in &orders {
            for &x in &args {
                let expected = k_by_quadrature(nu, x);
                let got = bessel_k(nu, x).unwrap();
                assert_relative_eq!(got, expected, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn large_argument_asymptotic_ratio() {
        for &nu in &[0.0, 0.3, 1.7, 4.0] {
            let x = 600.0;
            let asym = (PI / (2.0 * x)).sqrt();
            let ratio = bessel_k_scaled(nu, x).unwrap() / asym;
            let mu2 = 4.0 * nu * nu;
            let a1 = (mu2 - 1.0) / (8.0 * x);
            let a2 = a1 * (mu2 - 9.0) / (16.0 * x);
            assert!((ratio - 1.0 - a1 - a2).abs() < 1e-6);
        }
    }

    #[test]
    fn positive_and_decreasing() {
        for &nu in &[0.0, 0.25, 0.5, 1.0, 3.3, 10.0] {
            let mut prev = f64::INFINITY;
            let mut x = 1e-6;
            while x < 50.0 {
                let k = bessel_k(nu, x).unwrap();
                assert!(k > 0.0 && k < prev, "nu={nu} x={x}");
                prev = k;
                x *= 1.3;
            }
        }
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(bessel_k(0.5, 0.0).is_err());
        assert!(bessel_k(0.5, -1.0).is_err());
    }
}
