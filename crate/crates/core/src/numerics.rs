//! Small numerical kernels shared by the rest of the crate: adaptive
//! Gauss–Kronrod quadrature, bracketed root finding and Richardson
//! extrapolation.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive 15-point Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the
/// summed estimate drops below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut segments = vec![(a, b, v, e)];
    let mut value = v;
    let mut error = e;
    while error > abs_tol.max(rel_tol * value.abs()) {
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature {
                value,
                error,
                tolerance: abs_tol.max(rel_tol * value.abs()),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, seg)| {
                if seg.3 > acc.1 {
                    (i, seg.3)
                } else {
                    acc
                }
            });
        let (lo, hi, v_old, e_old) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval can no longer be split in floating point
            return Err(Error::Quadrature {
                value,
                error,
                tolerance: abs_tol.max(rel_tol * value.abs()),
            });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        value += v1 + v2 - v_old;
        error += e1 + e2 - e_old;
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
        // recompute sums periodically to avoid drift from the running update
        if segments.len() % 64 == 0 {
            value = segments.iter().map(|s| s.2).sum();
            error = segments.iter().map(|s| s.3).sum();
        }
    }
    value = segments.iter().map(|s| s.2).sum();
    error = segments.iter().map(|s| s.3).sum();
    Ok(Quadrature { value, error })
}

/// Integral of `f` over `(0, ∞)`.
///
/// The piece `(0, scale]` is mapped with `y = scale·e^t` (absorbs integrable
/// power singularities at the origin), the tail `[scale, ∞)` with
/// `y = scale + u/(1-u)`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    scale: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    let near = integrate(
        |t: f64| {
            let y = scale * t.exp();
            if y == 0.0 {
                0.0
            } else {
                f(y) * y
            }
        },
        -120.0,
        0.0,
        0.5 * abs_tol,
        rel_tol,
    )?;
    let far = integrate(
        |u: f64| {
            let one_minus = 1.0 - u;
            let y = scale + u / one_minus;
            let v = f(y) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        0.5 * abs_tol,
        rel_tol,
    )?;
    Ok(Quadrature {
        value: near.value + far.value,
        error: near.error + far.error,
    })
}

/// Bisection on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite
/// sign. Runs until the bracket cannot shrink further in floating point.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{lo:e}, {hi:e}]: f = ({f_lo:e}, {f_hi:e})"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Richardson extrapolation of samples `values[j] = A(h_j)` taken at
/// geometrically shrinking steps `h_j = h_0 / ratio^j`, assuming
/// `A(h) = A + Σ c_i h^{orders[i]}`. Eliminates `min(orders.len(), n-1)`
/// terms and returns the extrapolated limit together with the last
/// correction magnitude as an error estimate.
pub fn richardson(values: &[f64], ratio: f64, orders: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Extrapolation("no samples".into()));
    }
    let mut table = values.to_vec();
    let mut last_change = f64::INFINITY;
    for &order in orders.iter().take(values.len() - 1) {
        let factor = ratio.powf(order);
        let next: Vec<f64> = table
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        last_change = (next[next.len() - 1] - table[table.len() - 1]).abs();
        table = next;
    }
    let value = table[table.len() - 1];
    if !value.is_finite() {
        return Err(Error::Extrapolation("non-finite extrapolant".into()));
    }
    Ok((value, last_change))
}

/// Observed convergence order from three successive samples at steps
/// shrinking by `ratio`.
pub fn observed_order(a0: f64, a1: f64, a2: f64, ratio: f64) -> f64 {
    ((a1 - a0).abs() / (a2 - a1).abs()).ln() / ratio.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_kronrod_polynomial_exact() {
        let q = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(q.value, 10.5 - 9.0, epsilon = 1e-13);
    }

    #[test]
    fn half_line_handles_endpoint_singularity() {
        // ∫_0^∞ y^{-1/2} e^{-y} dy = Γ(1/2)
        let q = integrate_half_line(|y| y.powf(-0.5) * (-y).exp(), 1.0, 1e-13, 1e-12).unwrap();
        assert_relative_eq!(q.value, std::f64::consts::PI.sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn bisection_finds_cubic_root() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0).unwrap();
        assert_relative_eq!(r, 2f64.cbrt(), max_relative = 1e-15);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn richardson_removes_known_orders() {
        let h0: f64 = 0.1;
        let vals: Vec<f64> = (0..4)
            .map(|j| {
                let h = h0 / 2f64.powi(j);
                1.0 + 3.0 * h.powf(1.5) - 2.0 * h * h
            })
            .collect();
        let (v, _) = richardson(&vals, 2.0, &[1.5, 2.0]).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-13);
    }
}
