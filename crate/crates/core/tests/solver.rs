use frns_core::model::{
    AutonomousConfig, DiscreteProblem, ModelConfig, NonlinearitySpec, PotentialShape, PotentialSpec, Region,
};
use frns_core::solver::{
    autonomous_ground_state, decay_fit, estimate_s_star, gaussian_bump, ground_state, initial_guesses,
    minimize_on_nehari, mp_threshold, nehari_scale, rayleigh_quotient, verify_solution_region, zeta,
    SolveResult, SolveStatus, Tolerances,
};
use frns_core::spectral::{bessel_kernel, build_symbol, solve_resolvent, KernelTable, SymbolKind};
use frns_core::{Error, Field, FracParams, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nonlin() -> NonlinearitySpec {
    NonlinearitySpec {
        lambda: 3.0,
        p: 3.0,
        ar_theta: 3.0,
        q: 3.5,
    }
}

fn config(eps: f64) -> ModelConfig {
    let frac = FracParams::new(0.5, 1.0, 2).unwrap();
    let potential = PotentialSpec {
        shape: PotentialShape::Wells { top: 0.5, width: 0.5 },
        v0: 0.2,
        v1: 0.2,
        lambda: Region::Balls {
            centers: vec![[0.0, 0.0]],
            radius: 1.0,
        },
        m_points: vec![[0.0, 0.0]],
    };
    ModelConfig::new(frac, eps, potential, nonlin(), 10.0).unwrap()
}

fn lattice(grid: Grid, frac: FracParams) -> KernelTable {
    KernelTable::new(grid, frac, SymbolKind::Lattice).unwrap()
}

fn solve_default(grid: Grid) -> (ModelConfig, SolveResult) {
    let c = config(0.25);
    let init = initial_guesses(&c, grid, 1, 0).remove(0);
    let r = ground_state(&c, &init, &Tolerances::default()).unwrap();
    (c, r)
}

#[test]
fn nehari_scale_closed_form_and_scaling() {
    let frac = FracParams::new(0.5, 1.0, 2).unwrap();
    let grid = Grid::new(2, 32, 4.0).unwrap();
    // negligible subcritical term: only the critical power is left
    let nl = NonlinearitySpec {
        lambda: 1e-300,
        ..nonlin()
    };
    let auto = AutonomousConfig::new(0.3, frac, nl).unwrap();
    let problem = DiscreteProblem::autonomous(&auto, &lattice(grid, frac)).unwrap();
    let u = Field::from_fn(grid, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() - 0.1).unwrap();
    let crit = frac.critical_exponent();
    let pos = Field::from_fn(grid, |x| ((-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() - 0.1).max(0.0)).unwrap();
    let expected = (problem.norm_sq(&u).unwrap() / pos.integral_abs_pow(crit)).powf(1.0 / (crit - 2.0));
    let t = nehari_scale(&problem, &u).unwrap();
    assert!((t / expected - 1.0).abs() < 1e-12, "{t} vs {expected}");
    let t3 = nehari_scale(&problem, &u.scaled(3.0)).unwrap();
    assert!((t3 * 3.0 / t - 1.0).abs() < 1e-12);
}

#[test]
fn nehari_scale_residual_and_errors() {
    let c = config(0.5);
    let grid = Grid::new(2, 64, 8.0).unwrap();
    let problem = DiscreteProblem::penalized(&c, &lattice(grid, c.frac)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let (cx, cy, w, amp) = (
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.3..2.0),
            rng.gen_range(0.01..50.0),
        );
        let u = Field::from_fn(grid, |x| amp * (-((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / (w * w)).exp()).unwrap();
        let t = nehari_scale(&problem, &u).unwrap();
        let v = u.scaled(t);
        let res = problem.nehari_functional(&v).unwrap().abs();
        assert!(res <= 1e-10 * problem.norm_sq(&v).unwrap(), "residual {res:e}");
    }
    let negative = Field::constant(grid, -1.0);
    assert_eq!(nehari_scale(&problem, &negative), Err(Error::NoPositivePart));
    // positive only outside Λ_ε (here |εx| > 1, i.e. |x| > 2)
    let outside = Field::from_fn(grid, |x| (-((x[0] - 6.0).powi(2) + x[1] * x[1])).exp()).unwrap();
    let outside = outside.map(|v| if v > 1e-3 { v } else { 0.0 }).unwrap();
    assert_eq!(nehari_scale(&problem, &outside), Err(Error::NoPositivePart));
}

#[test]
fn ground_state_contract_and_invariants() {
    let grid = Grid::new(2, 64, 8.0).unwrap();
    let (c, r) = solve_default(grid);
    let tol = Tolerances::default();
    assert_eq!(r.status, SolveStatus::Converged);
    let c_star = mp_threshold(&c).unwrap();
    assert!(r.energy > 0.0 && r.energy < c_star, "{} vs {c_star}", r.energy);
    assert!(r.nehari_residual <= tol.nehari && r.grad_residual <= tol.grad);
    assert!(r.field.values().iter().all(|v| *v >= -1e-12));

    let problem = DiscreteProblem::penalized(&c, &lattice(grid, c.frac)).unwrap();
    // Euler-Lagrange residual in L²
    let el = problem.gradient(&r.field).unwrap().norm_l2() / r.field.norm_l2();
    assert!(el <= 10.0 * tol.grad, "EL residual {el:e}");
    // t = 1 maximizes the fibering map
    for t in [0.5, 0.8, 1.2, 2.0] {
        assert!(problem.energy(&r.field.scaled(t)).unwrap() < r.energy);
    }
    // accepted energies never increase
    assert!(r.energy_history.windows(2).all(|w| w[1] <= w[0]));
    // fixed point
    let again = ground_state(&c, &r.field, &tol).unwrap();
    let diff = r.field.values().iter().zip(again.field.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-8 * r.sup_norm && again.iterations == 0);
    // argmax is scale-invariant
    for k in [1e-3, 0.7, 5.0] {
        assert_eq!(r.field.scaled(k).argmax(), r.argmax_index);
    }
    let region = verify_solution_region(&r, &c);
    assert!(region.nonnegative && region.below_threshold);
}

#[test]
fn ambrosetti_rabinowitz_bound_along_the_iteration() {
    let grid = Grid::new(2, 64, 8.0).unwrap();
    let c = config(0.25);
    let problem = DiscreteProblem::penalized(&c, &lattice(grid, c.frac)).unwrap();
    let theta = c.nonlin.ar_theta;
    let factor = (0.5 - 1.0 / theta) * (1.0 - c.potential.v1 / (c.pen.kappa * (c.frac.mass_floor() - c.potential.v1)));
    assert!(factor > 0.0);
    let init = initial_guesses(&c, grid, 3, 4);
    for budget in [0usize, 1, 2, 5, 20] {
        for u0 in &init {
            let tol = Tolerances {
                max_iterations: budget,
                ..Tolerances::default()
            };
            let r = minimize_on_nehari(&problem, u0, &tol).unwrap();
            let u = &r.field;
            let lhs = problem.energy(u).unwrap() - problem.nehari_functional(u).unwrap() / theta;
            let rhs = factor * problem.norm_sq(u).unwrap();
            assert!(lhs >= rhs * (1.0 - 1e-12) && rhs >= 0.0, "budget {budget}: {lhs} < {rhs}");
        }
    }
}

#[test]
fn autonomous_levels() {
    let frac = FracParams::new(0.5, 1.0, 2).unwrap();
    let grid = Grid::new(2, 64, 8.0).unwrap();
    let tol = Tolerances::default();
    let init = gaussian_bump(grid, [0.0, 0.0], 1.0);
    let levels: Vec<f64> = [-0.2, -0.1, 0.0]
        .iter()
        .map(|&mu| {
            let a = AutonomousConfig::new(mu, frac, nonlin()).unwrap();
            let r = autonomous_ground_state(&a, &init, &tol).unwrap();
            assert!(r.converged());
            r.energy
        })
        .collect();
    assert!(levels[0] < levels[1] && levels[1] < levels[2], "{levels:?}");
    let c_star = mp_threshold(&config(0.25)).unwrap();
    assert!(levels.iter().all(|d| *d > 0.0 && *d < c_star));

    let a = AutonomousConfig::new(-0.2, frac, nonlin()).unwrap();
    let base = autonomous_ground_state(&a, &init, &tol).unwrap();
    let moved = autonomous_ground_state(&a, &init.shifted([5, -3]), &tol).unwrap();
    assert!((moved.energy / base.energy - 1.0).abs() <= 1e-6);
    // μ ≤ -m^{2s} is rejected
    assert!(AutonomousConfig::new(-1.0, frac, nonlin()).is_err());
}

#[test]
fn constant_potential_level_equals_autonomous_level() {
    let frac = FracParams::new(0.5, 1.0, 2).unwrap();
    let potential = PotentialSpec {
        shape: PotentialShape::Constant,
        v0: 0.2,
        v1: 0.2,
        lambda: Region::Everywhere,
        m_points: vec![],
    };
    let c = ModelConfig::new(frac, 0.3, potential, nonlin(), 10.0).unwrap();
    let grid = Grid::new(2, 64, 8.0).unwrap();
    let tol = Tolerances::default();
    let init = gaussian_bump(grid, [0.0, 0.0], 1.0);
    let ce = ground_state(&c, &init, &tol).unwrap().energy;
    let d = autonomous_ground_state(&AutonomousConfig::new(-0.2, frac, nonlin()).unwrap(), &init, &tol)
        .unwrap()
        .energy;
    assert!((ce / d - 1.0).abs() <= 1e-2, "{ce} vs {d}");
}

#[test]
fn threshold_formula_and_limits() {
    let c = config(0.25);
    assert!((zeta(&c) - 0.78).abs() < 1e-15);
    // S_*(2, 1/2) = √π
    let expected = 0.25 * (0.78 * std::f64::consts::PI.sqrt()).powi(2);
    assert!((mp_threshold(&c).unwrap() / expected - 1.0).abs() < 1e-12);
    let mut big = c.clone();
    big.pen.kappa = 1e12;
    assert!((zeta(&big) - 0.8).abs() < 1e-11);
    let mut tiny = c.clone();
    tiny.potential.v1 = 1e-14;
    assert!((mp_threshold(&tiny).unwrap() / (0.25 * std::f64::consts::PI) - 1.0).abs() < 1e-12);
}

#[test]
fn s_star_estimates() {
    let two = FracParams::new(0.5, 1.0, 2).unwrap();
    let grid = Grid::new(2, 512, 1.0).unwrap();
    let e = estimate_s_star(&two, grid, &frns_core::solver::default_rho_values(&grid)).unwrap();
    assert!(e.relative_error.abs() <= 0.05, "{e:?}");

    let one = FracParams::new(0.25, 1.0, 1).unwrap();
    let grid1 = Grid::new(1, 1 << 18, 1.0).unwrap();
    let e1 = estimate_s_star(&one, grid1, &frns_core::solver::default_rho_values(&grid1)).unwrap();
    assert!(e1.relative_error.abs() <= 0.05, "{e1:?}");
    // still decreasing at the largest ρ: truncation dominates in one dimension
    assert!(!e1.warnings.is_empty());

    let u = Field::from_fn(grid, |x| (1.0 + x[0] * x[0] + x[1] * x[1]).powf(-0.5)).unwrap();
    let q1 = rayleigh_quotient(&u, &two).unwrap();
    let q2 = rayleigh_quotient(&u.scaled(7.5), &two).unwrap();
    assert!((q1 / q2 - 1.0).abs() < 1e-12);
    assert!(FracParams::new(0.6, 1.0, 1).is_err());
    assert!(estimate_s_star(&two, grid, &[2.0]).is_err());
}

#[test]
fn decay_fit_on_ground_state_and_resolvent() {
    // both boxes contain the whole annulus
    let (_, small) = solve_default(Grid::new(2, 128, 16.0).unwrap());
    let (_, large) = solve_default(Grid::new(2, 256, 32.0).unwrap());
    let f_small = decay_fit(&small).unwrap();
    let f_large = decay_fit(&large).unwrap();
    for f in [&f_small, &f_large] {
        assert!(f.c2 > 0.0 && f.r_squared >= 0.95 && f.bound_holds, "{f:?}");
    }
    assert!((f_large.c2 / f_small.c2 - 1.0).abs() <= 0.05, "{f_small:?} {f_large:?}");

    // spike resolvent against the closed-form kernel rate
    let p = FracParams::new(0.5, 1.0, 2).unwrap();
    let grid = Grid::new(2, 256, 16.0).unwrap();
    let w = grid.spacing();
    let spike = Field::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * w * w)).exp()).unwrap();
    let z = solve_resolvent(&spike, &build_symbol(grid, p).unwrap()).unwrap();
    let idx = z.argmax();
    let as_result = SolveResult {
        energy: 0.0,
        nehari_residual: 0.0,
        grad_residual: 0.0,
        argmax_index: idx,
        argmax_point: grid.point(idx),
        sup_norm: z.norm_max(),
        iterations: 0,
        status: SolveStatus::Converged,
        energy_history: vec![],
        field: z.clone(),
    };
    let fit = decay_fit(&as_result).unwrap();
    let (r1, r2) = (4.0, 12.0);
    let rate = -(bessel_kernel(&p, r2).unwrap() / bessel_kernel(&p, r1).unwrap()).ln() / (r2 - r1);
    assert!((fit.c2 / rate - 1.0).abs() <= 0.15, "fit {} vs kernel {rate}", fit.c2);

    let flat = SolveResult {
        field: Field::constant(grid, 1.0),
        sup_norm: 1.0,
        ..as_result
    };
    assert!(matches!(decay_fit(&flat), Err(Error::EmptyAnnulus(_))));
}

#[test]
fn large_eps_may_leave_the_region() {
    let grid = Grid::new(2, 64, 8.0).unwrap();
    let c = config(2.0);
    let init = initial_guesses(&c, grid, 1, 0).remove(0);
    let r = ground_state(&c, &init, &Tolerances::default()).unwrap();
    let region = verify_solution_region(&r, &c);
    // reported, not an error
    assert!(region.nonnegative);
    assert!(region.max_outside > 0.0);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn nehari_point_is_scale_free(
            cx in -1.5f64..1.5,
            w in 0.3f64..2.0,
            amp in 0.05f64..20.0,
            c in 0.01f64..100.0,
        ) {
            let cfg = config(0.5);
            let grid = Grid::new(2, 32, 6.0).unwrap();
            let problem = DiscreteProblem::penalized(&cfg, &lattice(grid, cfg.frac)).unwrap();
            let u = Field::from_fn(grid, |x| amp * (-((x[0] - cx).powi(2) + x[1] * x[1]) / (w * w)).exp()).unwrap();
            let t = nehari_scale(&problem, &u).unwrap();
            let tc = nehari_scale(&problem, &u.scaled(c)).unwrap();
            prop_assert!((tc * c / t - 1.0).abs() < 1e-10);
            let v = u.scaled(t);
            prop_assert!(problem.nehari_functional(&v).unwrap().abs() <= 1e-10 * problem.norm_sq(&v).unwrap());
            // the Nehari point maximizes the fibering map
            let e = problem.energy(&v).unwrap();
            prop_assert!(problem.energy(&v.scaled(0.9)).unwrap() < e);
            prop_assert!(problem.energy(&v.scaled(1.1)).unwrap() < e);
        }
    }
}
