use frns_core::spectral::{
    apply_operator, apply_operator_singular, bessel_kernel, build_symbol, solve_resolvent,
    KernelTable, SymbolKind,
};
use frns_core::{Field, FracParams, Grid};
use proptest::prelude::*;

fn rel_l2(a: &Field, b: &Field) -> f64 {
    let diff: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    let norm: f64 = b.values().iter().map(|y| y * y).sum();
    (diff / norm).sqrt()
}

#[test]
fn singular_integral_matches_spectral_gaussian() {
    for &(s, m) in &[(0.5, 1.0), (0.25, 1.0), (0.75, 0.6)] {
        let grid = Grid::new(1, 512, 16.0).unwrap();
        let p = FracParams::operator(s, m, 1).unwrap();
        let u = Field::from_fn(grid, |x| (-2.0 * x[0] * x[0]).exp()).unwrap();
        let spectral = apply_operator(&u, &build_symbol(grid, p).unwrap()).unwrap();
        let singular = apply_operator_singular(&u, &p, 40.0 / m).unwrap();
        let err = rel_l2(&singular.field, &spectral);
        assert!(err <= 1e-2, "s={s} m={m}: relative L2 discrepancy {err:e}");
        assert!(singular.tail_estimate < 1e-10);
    }
}

#[test]
fn singular_integral_converges_under_refinement() {
    let p = FracParams::operator(0.5, 1.0, 1).unwrap();
    let errs: Vec<f64> = [128usize, 256, 512]
        .iter()
        .map(|&n| {
            let grid = Grid::new(1, n, 16.0).unwrap();
            let u = Field::from_fn(grid, |x| (-x[0] * x[0]).exp()).unwrap();
            let spectral = apply_operator(&u, &build_symbol(grid, p).unwrap()).unwrap();
            let singular = apply_operator_singular(&u, &p, 40.0).unwrap();
            rel_l2(&singular.field, &spectral)
        })
        .collect();
    assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
}

#[test]
fn resolvent_of_spike_looks_like_bessel_kernel() {
    let grid = Grid::new(2, 128, 10.0).unwrap();
    let p = FracParams::new(0.5, 1.0, 2).unwrap();
    let table = build_symbol(grid, p).unwrap();
    // unit-mass Gaussian one cell wide
    let w = grid.spacing();
    let spike = Field::from_fn(grid, |x| {
        (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * w * w)).exp() / (2.0 * std::f64::consts::PI * w * w)
    })
    .unwrap();
    let z = solve_resolvent(&spike, &table).unwrap();
    let v = z.values();
    // radial symmetry under the lattice symmetries
    for d in [3usize, 10, 25] {
        let a = v[grid.flat_index([64 + d, 64])];
        let b = v[grid.flat_index([64, 64 - d])];
        let c = v[grid.flat_index([64 - d, 64])];
        assert!((a - b).abs() <= 1e-12 * a.abs() && (a - c).abs() <= 1e-12 * a.abs());
    }
    // positivity and decay along an axis, away from the Gibbs region
    let mut prev = f64::INFINITY;
    for d in 2..40 {
        let g = v[grid.flat_index([64 + d, 64])];
        assert!(g > 0.0 && g < prev, "d={d}");
        prev = g;
    }
    // far field matches the closed-form kernel
    for d in [16usize, 24, 32] {
        let r = d as f64 * grid.spacing();
        let exact = bessel_kernel(&p, r).unwrap();
        let got = v[grid.flat_index([64 + d, 64])];
        assert!((got - exact).abs() <= 0.05 * exact, "r={r}: {got} vs {exact}");
    }
}

#[test]
fn bessel_kernel_near_and_far_behaviour() {
    for &(n, s) in &[(1usize, 0.25), (2, 0.5), (2, 0.75)] {
        let p = FracParams::new(s, 1.0, n).unwrap();
        let expo = 2.0 * s - n as f64;
        let small: Vec<f64> = [1e-6, 1e-7]
            .iter()
            .map(|&r: &f64| bessel_kernel(&p, r).unwrap() / r.powf(expo))
            .collect();
        assert!((small[0] / small[1] - 1.0).abs() < 1e-3);
        // log G(r) + r is bounded for r >= 2: fitted rate close to m = 1
        let g2 = bessel_kernel(&p, 4.0).unwrap().ln();
        let g3 = bessel_kernel(&p, 12.0).unwrap().ln();
        let rate = -(g3 - g2) / 8.0;
        assert!(rate > 0.9 && rate < 1.2, "rate {rate}");
    }
}

#[test]
fn bessel_kernel_convolution_reproduces_resolvent() {
    let p = FracParams::new(0.4, 1.0, 1).unwrap();
    let grid = Grid::new(1, 1024, 20.0).unwrap();
    let h = grid.spacing();
    let mu = Field::from_fn(grid, |x| (-x[0] * x[0]).exp() * (1.0 + 0.3 * x[0])).unwrap();
    let z = solve_resolvent(&mu, &build_symbol(grid, p).unwrap()).unwrap();
    let n = grid.points_per_dim();
    // G has an integrable r^{2s-1} singularity: integrate it over each cell
    let cells: Vec<f64> = (0..n / 2)
        .map(|j| {
            let (lo, hi) = if j == 0 { (0.0, 0.5 * h) } else { ((j as f64 - 0.5) * h, (j as f64 + 0.5) * h) };
            let q = frns_core::numerics::integrate(
                |r: f64| if r > 0.0 { bessel_kernel(&p, r).unwrap() } else { 0.0 },
                lo,
                hi,
                0.0,
                1e-10,
            )
            .unwrap()
            .value;
            if j == 0 { 2.0 * q } else { q }
        })
        .collect();
    let mv = mu.values();
    let conv: Vec<f64> = (0..n)
        .map(|i| {
            let mut acc = cells[0] * mv[i];
            for (j, w) in cells.iter().enumerate().skip(1) {
                acc += w * (mv[(i + j) % n] + mv[(i + n - j) % n]);
            }
            acc
        })
        .collect();
    let err = rel_l2(&Field::new(grid, conv).unwrap(), &z);
    assert!(err <= 1e-2, "relative L2 {err:e}");
}

fn small_field(grid: Grid) -> impl Strategy<Value = Field> {
    prop::collection::vec(-1.0f64..1.0, grid.total_points())
        .prop_map(move |v| Field::new(grid, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operator_is_linear_and_self_adjoint(
        s in 0.05f64..0.95,
        m in 0.1f64..3.0,
        (u, v) in (small_field(Grid::new(1, 64, 4.0).unwrap()), small_field(Grid::new(1, 64, 4.0).unwrap())),
        a in -3.0f64..3.0,
    ) {
        let grid = *u.grid();
        let t = build_symbol(grid, FracParams::operator(s, m, 1).unwrap()).unwrap();
        let au = apply_operator(&u, &t).unwrap();
        let av = apply_operator(&v, &t).unwrap();
        let lhs = au.dot(&v).unwrap();
        let rhs = u.dot(&av).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs() + rhs.abs()) + 1e-14);
        let comb = Field::new(grid, u.values().iter().zip(v.values()).map(|(x, y)| a * x + y).collect()).unwrap();
        let ac = apply_operator(&comb, &t).unwrap();
        for ((c, x), y) in ac.values().iter().zip(au.values()).zip(av.values()) {
            prop_assert!((c - (a * x + y)).abs() <= 1e-11 * (1.0 + c.abs()));
        }
        let q = t.quadratic_form(&u).unwrap();
        prop_assert!(q >= m.powf(2.0 * s) * u.norm_l2().powi(2) * (1.0 - 1e-12));
    }

    #[test]
    fn lattice_symbol_never_exceeds_continuum(s in 0.05f64..0.95, m in 0.1f64..3.0) {
        let grid = Grid::new(2, 32, 3.0).unwrap();
        let p = FracParams::new(s, m, 2).unwrap();
        let c = build_symbol(grid, p).unwrap();
        let l = KernelTable::new(grid, p, SymbolKind::Lattice).unwrap();
        for (a, b) in l.symbol().iter().zip(c.symbol()) {
            prop_assert!(*a <= *b * (1.0 + 1e-14));
            prop_assert!(*a >= m.powf(2.0 * s) * (1.0 - 1e-14));
        }
    }
}
