use frns_core::extension::{conormal_derivative, default_levels, extend, extension_energy, ExtensionStack};
use frns_core::specfun::{sigma_s, theta_profile};
use frns_core::spectral::{apply_operator, build_symbol};
use frns_core::{Field, FracParams, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_l2(a: &Field, b: &Field) -> f64 {
    let diff: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    let norm: f64 = b.values().iter().map(|y| y * y).sum();
    (diff / norm).sqrt()
}

fn band_limited(grid: Grid, rng: &mut ChaCha8Rng, modes: i32) -> Field {
    let coeffs: Vec<(f64, f64, f64, f64)> = (0..8)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-modes..=modes) as f64,
                rng.gen_range(-modes..=modes) as f64,
                rng.gen_range(0.0..6.3),
            )
        })
        .collect();
    let base = std::f64::consts::PI / grid.half_length();
    Field::from_fn(grid, |x| {
        coeffs
            .iter()
            .map(|(a, p, q, ph)| a * (base * (p * x[0] + q * x[1]) + ph).cos())
            .sum()
    })
    .unwrap()
}

#[test]
fn trace_is_bit_exact_and_constants_follow_theta() {
    let grid = Grid::new(2, 32, 4.0).unwrap();
    let p = FracParams::new(0.3, 0.8, 2).unwrap();
    let levels = default_levels(p.m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = band_limited(grid, &mut rng, 4);
    let st = extend(&u, &p, &levels).unwrap();
    assert_eq!(st.trace().values(), u.values());

    let one = extend(&Field::constant(grid, 1.0), &p, &levels).unwrap();
    for (y, slab) in st.y_levels().iter().zip(one.slabs()).skip(1) {
        let expected = theta_profile(p.s, p.m * y).unwrap();
        for v in slab.values() {
            assert!((v - expected).abs() <= 1e-12, "y={y}");
        }
    }
    let top = one.slabs().last().unwrap();
    assert!(top.norm_max() < 1e-6);
}

#[test]
fn single_mode_extension_is_diagonal() {
    let grid = Grid::new(1, 64, 5.0).unwrap();
    let p = FracParams::operator(0.6, 1.2, 1).unwrap();
    let k = grid.wavenumber(3);
    let u = Field::from_fn(grid, |x| (k * x[0]).cos()).unwrap();
    let st = extend(&u, &p, &[0.0, 0.01, 0.5, 2.0]).unwrap();
    let w = (k * k + p.m * p.m).sqrt();
    for (y, slab) in st.y_levels().iter().zip(st.slabs()) {
        let th = theta_profile(p.s, y * w).unwrap();
        for (a, b) in slab.values().iter().zip(u.values()) {
            assert!((a - th * b).abs() < 1e-13);
        }
    }
}

#[test]
fn conormal_derivative_of_mode_and_gaussian() {
    for &s in &[0.25, 0.5, 0.75] {
        let p = FracParams::new(s, 1.0, 2).unwrap();
        let sigma = sigma_s(s).unwrap();
        let levels = default_levels(p.m).unwrap();

        let grid = Grid::new(2, 64, 6.0).unwrap();
        let k = grid.wavevector(grid.flat_index([2, 5]));
        let u = Field::from_fn(grid, |x| (k[0] * x[0] + k[1] * x[1]).cos()).unwrap();
        let c = conormal_derivative(&extend(&u, &p, &levels).unwrap(), &p).unwrap();
        let lam = sigma * (k[0] * k[0] + k[1] * k[1] + 1.0).powf(s);
        let expected = u.scaled(lam);
        assert!(rel_l2(&c.field, &expected) <= 1e-2, "s={s}: mode");
        assert!(c.observed_order > 0.0);

        let g = Field::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let cg = conormal_derivative(&extend(&g, &p, &levels).unwrap(), &p).unwrap();
        let au = apply_operator(&g, &build_symbol(grid, p).unwrap()).unwrap();
        assert!(rel_l2(&cg.field, &au.scaled(sigma)) <= 1e-2, "s={s}: gaussian");
    }
    let grid = Grid::new(1, 32, 2.0).unwrap();
    let p = FracParams::new(0.4, 1.0, 1).unwrap();
    let zero = extend(&Field::zeros(grid), &p, &default_levels(1.0).unwrap()).unwrap();
    assert_eq!(conormal_derivative(&zero, &p).unwrap().field.norm_max(), 0.0);
    let short = extend(&Field::zeros(grid), &p, &[0.0, 0.1, 0.2]).unwrap();
    assert!(conormal_derivative(&short, &p).is_err());
}

#[test]
fn energy_of_single_mode_matches_closed_form() {
    for &s in &[0.25, 0.5, 0.75] {
        let grid = Grid::new(2, 32, 3.0).unwrap();
        let p = FracParams::new(s, 0.9, 2).unwrap();
        let k = grid.wavevector(grid.flat_index([1, 2]));
        let u = Field::from_fn(grid, |x| (k[0] * x[0] + k[1] * x[1]).cos()).unwrap();
        let e = extension_energy(&extend(&u, &p, &default_levels(p.m).unwrap()).unwrap(), &p).unwrap();
        assert!(e.warnings.is_empty(), "{:?}", e.warnings);
        let expected = sigma_s(s).unwrap()
            * (k[0] * k[0] + k[1] * k[1] + p.m * p.m).powf(s)
            * grid.box_volume()
            / 2.0;
        assert!((e.value / expected - 1.0).abs() <= 0.02, "s={s}: {} vs {expected}", e.value);
    }
}

#[test]
fn energy_is_quadratic_and_flags_coarse_levels() {
    let grid = Grid::new(1, 64, 4.0).unwrap();
    let p = FracParams::new(0.4, 1.0, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = band_limited(grid, &mut rng, 5);
    let levels = default_levels(1.0).unwrap();
    let e1 = extension_energy(&extend(&u, &p, &levels).unwrap(), &p).unwrap().value;
    let e2 = extension_energy(&extend(&u.scaled(2.0), &p, &levels).unwrap(), &p).unwrap().value;
    assert!((e2 / e1 - 4.0).abs() < 1e-12);
    let zero = extension_energy(&extend(&Field::zeros(grid), &p, &levels).unwrap(), &p).unwrap();
    assert_eq!(zero.value, 0.0);
    let coarse: Vec<f64> = std::iter::once(0.0).chain((0..8).map(|j| 0.01 * 2f64.powi(j))).collect();
    let e = extension_energy(&extend(&u, &p, &coarse).unwrap(), &p).unwrap();
    assert!(!e.warnings.is_empty());
}

#[test]
fn extension_minimizes_energy_and_trace_inequality_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for &s in &[0.3, 0.5, 0.7] {
        let grid = Grid::new(2, 32, 4.0).unwrap();
        let p = FracParams::new(s, 1.0, 2).unwrap();
        let levels = default_levels(1.0).unwrap();
        let u = band_limited(grid, &mut rng, 3);
        let table = build_symbol(grid, p).unwrap();
        let hs = sigma_s(s).unwrap() * table.quadratic_form(&u).unwrap();
        let stack = extend(&u, &p, &levels).unwrap();
        let base = extension_energy(&stack, &p).unwrap().value;
        assert!((base / hs - 1.0).abs() < 0.02);
        for _ in 0..10 {
            let noise = band_limited(grid, &mut rng, 3);
            let amp = rng.gen_range(0.05..0.5);
            let slabs: Vec<Field> = stack
                .slabs()
                .iter()
                .zip(&levels)
                .map(|(slab, &y)| {
                    // smooth bump in y, zero at the trace
                    let bump = amp * y * (-y).exp();
                    Field::new(
                        grid,
                        slab.values().iter().zip(noise.values()).map(|(a, b)| a + bump * b).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let competitor = ExtensionStack::new(grid, levels.clone(), slabs).unwrap();
            let e = extension_energy(&competitor, &p).unwrap().value;
            assert!(e >= base, "s={s}: competitor {e} below extension {base}");
            assert!(e >= hs, "s={s}: competitor {e} below trace form {hs}");
        }
    }
}
