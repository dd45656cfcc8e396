//! Problem data: the potential `V` with its concentration region `Λ`, the
//! power nonlinearity, the penalized nonlinearity `g` and the trace-form
//! energies `J_ε` and `L_μ` on a lattice.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::grid::{Field, Point};
use crate::numerics::bisect;
use crate::specfun::FracParams;
use crate::spectral::{apply_operator, KernelTable};

fn assumption(name: &str, detail: impl Into<String>) -> Error {
    Error::Assumption {
        name: name.to_string(),
        detail: detail.into(),
    }
}

fn dist(a: Point, b: Point, n_dim: usize) -> f64 {
    (0..n_dim).map(|c| (a[c] - b[c]) * (a[c] - b[c])).sum::<f64>().sqrt()
}

/// Analytic family for `V`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialShape {
    /// `V(x) = -V0 + (top + V0)(1 - exp(-d(x)²/width²))`, `d` the distance to
    /// the nearest point of `M`.
    Wells { top: f64, width: f64 },
    /// `V ≡ -V0`; `Λ` is then the whole space and `M` is vacuous.
    Constant,
}

/// The region `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Union of open balls of a common radius.
    Balls { centers: Vec<Point>, radius: f64 },
    /// Union of open axis-aligned cubes `|x_c - center_c| < half_width`.
    Boxes { centers: Vec<Point>, half_width: f64 },
    Everywhere,
}

impl Region {
    pub fn contains(&self, x: Point, n_dim: usize) -> bool {
        match self {
            Region::Balls { centers, radius } => centers.iter().any(|c| dist(x, *c, n_dim) < *radius),
            Region::Boxes { centers, half_width } => centers
                .iter()
                .any(|c| (0..n_dim).all(|k| (x[k] - c[k]).abs() < *half_width)),
            Region::Everywhere => true,
        }
    }

    /// Sample points of `∂Λ` (points of one piece lying inside another piece
    /// are dropped).
    pub fn boundary_samples(&self, n_dim: usize) -> Vec<Point> {
        let raw: Vec<Point> = match self {
            Region::Balls { centers, radius } => centers
                .iter()
                .flat_map(|c| {
                    let c = *c;
                    let r = *radius;
                    if n_dim == 1 {
                        vec![[c[0] - r, 0.0], [c[0] + r, 0.0]]
                    } else {
                        (0..720)
                            .map(|j| {
                                let phi = 2.0 * PI * j as f64 / 720.0;
                                [c[0] + r * phi.cos(), c[1] + r * phi.sin()]
                            })
                            .collect()
                    }
                })
                .collect(),
            Region::Boxes { centers, half_width } => centers
                .iter()
                .flat_map(|c| {
                    let c = *c;
                    let w = *half_width;
                    if n_dim == 1 {
                        vec![[c[0] - w, 0.0], [c[0] + w, 0.0]]
                    } else {
                        (0..=200)
                            .flat_map(|j| {
                                let t = -w + 2.0 * w * j as f64 / 200.0;
                                [
                                    [c[0] + t, c[1] - w],
                                    [c[0] + t, c[1] + w],
                                    [c[0] - w, c[1] + t],
                                    [c[0] + w, c[1] + t],
                                ]
                            })
                            .collect()
                    }
                })
                .collect(),
            Region::Everywhere => Vec::new(),
        };
        raw.into_iter().filter(|p| !self.contains(*p, n_dim)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub shape: PotentialShape,
    /// `V0 > 0`, with `-V0 = inf_Λ V`.
    pub v0: f64,
    /// Depth bound `V1`: `V ≥ -V1` everywhere.
    pub v1: f64,
    pub lambda: Region,
    /// Designated minima `M`.
    pub m_points: Vec<Point>,
}

impl PotentialSpec {
    pub fn eval(&self, x: Point, n_dim: usize) -> f64 {
        match &self.shape {
            PotentialShape::Constant => -self.v0,
            PotentialShape::Wells { top, width } => {
                let d = self
                    .m_points
                    .iter()
                    .map(|c| dist(x, *c, n_dim))
                    .fold(f64::INFINITY, f64::min);
                -self.v0 + (top + self.v0) * (1.0 - (-(d * d) / (width * width)).exp())
            }
        }
    }

    /// `inf V` over `ℝ^N` (attained at `M`, or everywhere for the constant shape).
    pub fn infimum(&self) -> f64 {
        -self.v0
    }

    /// Checks (V1) and (V2); returns one line per verified assumption.
    pub fn validate(&self, frac: &FracParams) -> Result<Vec<String>> {
        let n = frac.n_dim;
        let floor = frac.mass_floor();
        let mut report = Vec::new();
        if !(self.v1 > 0.0 && self.v1 < floor) {
            return Err(assumption(
                "(V1)",
                format!("need 0 < V1 < m^(2s) = {floor}, got V1 = {}", self.v1),
            ));
        }
        if self.infimum() < -self.v1 {
            return Err(assumption(
                "(V1)",
                format!("inf V = {} lies below -V1 = {}", self.infimum(), -self.v1),
            ));
        }
        report.push(format!("(V1): 0 < V1 = {} < m^(2s) = {floor}, inf V = {} >= -V1", self.v1, self.infimum()));
        if !(self.v0 > 0.0) {
            return Err(assumption("(V2)", format!("need V0 > 0, got {}", self.v0)));
        }
        match &self.shape {
            PotentialShape::Constant => {
                if self.lambda != Region::Everywhere {
                    return Err(domain(
                        "PotentialSpec",
                        "a constant potential uses Lambda = everywhere",
                    ));
                }
                report.push("(V2): vacuous for a constant potential (Lambda is the whole space)".into());
            }
            PotentialShape::Wells { top, width } => {
                if !(*width > 0.0) || !(*top > -self.v0) || !top.is_finite() {
                    return Err(domain(
                        "PotentialSpec",
                        format!("need width > 0 and top > -V0, got width = {width}, top = {top}"),
                    ));
                }
                if self.m_points.is_empty() {
                    return Err(assumption("(V2)", "the set M of minima is empty"));
                }
                match &self.lambda {
                    Region::Everywhere => {
                        return Err(assumption("(V2)", "Lambda must be bounded"));
                    }
                    Region::Balls { radius: r, .. } | Region::Boxes { half_width: r, .. } => {
                        if !(*r > 0.0) {
                            return Err(domain("PotentialSpec", format!("Lambda size must be > 0, got {r}")));
                        }
                    }
                }
                for m in &self.m_points {
                    if !self.lambda.contains(*m, n) {
                        return Err(assumption("(V2)", format!("M point {:?} is not inside Lambda", &m[..n])));
                    }
                    let vm = self.eval(*m, n);
                    if (vm + self.v0).abs() > 1e-12 * self.v0.max(1.0) {
                        return Err(assumption("(V2)", format!("V(M point) = {vm} differs from -V0")));
                    }
                }
                let boundary = self.lambda.boundary_samples(n);
                let min_boundary = boundary
                    .iter()
                    .map(|p| self.eval(*p, n))
                    .fold(f64::INFINITY, f64::min);
                if !(min_boundary > -self.v0) {
                    return Err(assumption(
                        "(V2)",
                        format!("min of V on the boundary of Lambda is {min_boundary}, not above -V0 = {}", -self.v0),
                    ));
                }
                report.push(format!(
                    "(V2): -V0 = {} = inf over Lambda < min over boundary = {min_boundary}; {} point(s) of M inside Lambda",
                    -self.v0,
                    self.m_points.len()
                ));
            }
        }
        Ok(report)
    }

    /// Distance from `x` to the set `M` (`None` when `M` is empty).
    pub fn dist_to_m(&self, x: Point, n_dim: usize) -> Option<f64> {
        self.m_points.iter().map(|c| dist(x, *c, n_dim)).reduce(f64::min)
    }
}

/// `f(t) = λ (t⁺)^{p-1}` with growth cap `q` and AR exponent `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearitySpec {
    pub lambda: f64,
    pub p: f64,
    pub ar_theta: f64,
    pub q: f64,
}

impl NonlinearitySpec {
    pub fn f(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.lambda * t.powf(self.p - 1.0)
        } else {
            0.0
        }
    }

    pub fn primitive(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.lambda * t.powf(self.p) / self.p
        } else {
            0.0
        }
    }

    /// Checks (f1)–(f4) for the power model.
    pub fn validate(&self, frac: &FracParams) -> Result<Vec<String>> {
        let crit = frac.critical_exponent();
        let n = frac.n_dim as f64;
        let s = frac.s;
        let mut report = Vec::new();
        if !(self.p > 2.0) {
            return Err(assumption("(f1)", format!("f(t)/t -> 0 needs p > 2, got p = {}", self.p)));
        }
        report.push(format!("(f1): p = {} > 2", self.p));
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(assumption("(f2)", format!("need lambda > 0, got {}", self.lambda)));
        }
        if !(self.p < crit) {
            return Err(assumption("(f2)", format!("need p < 2*_s = {crit}, got p = {}", self.p)));
        }
        if !(self.q > self.p && self.q < crit) {
            return Err(assumption(
                "(f2)",
                format!("need p < q < 2*_s = {crit}, got q = {}", self.q),
            ));
        }
        if n < 4.0 * s && self.p <= crit - 2.0 {
            report.push(format!(
                "(f2): p = {} <= 2*_s - 2 with N < 4s; lambda = {} must be large enough, which is not checked a priori",
                self.p, self.lambda
            ));
        } else {
            report.push(format!("(f2): lambda = {} > 0, p < q = {} < 2*_s = {crit}", self.lambda, self.q));
        }
        if !(self.ar_theta > 2.0 && self.ar_theta < self.q && self.ar_theta <= self.p) {
            return Err(assumption(
                "(f3)",
                format!(
                    "need 2 < theta < q and theta <= p (theta F <= t f), got theta = {}",
                    self.ar_theta
                ),
            ));
        }
        report.push(format!("(f3): theta = {} in (2, q), theta <= p", self.ar_theta));
        report.push(format!("(f4): f(t)/t = lambda t^(p-2) increasing since p = {} > 2", self.p));
        Ok(report)
    }
}

/// `κ` and the threshold `a` of the penalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenalizationSpec {
    pub kappa: f64,
    pub a: f64,
}

/// Lower bound `max{V1/(m^{2s}-V1), θ/(θ-2)}` for `κ`.
pub fn kappa_lower_bound(frac: &FracParams, v1: f64, ar_theta: f64) -> f64 {
    let floor = frac.mass_floor();
    (v1 / (floor - v1)).max(ar_theta / (ar_theta - 2.0))
}

/// Smallest positive root of `f(a) + a^{2*-1} = (V1/κ) a`, i.e. of
/// `λ a^{p-2} + a^{2*-2} = V1/κ`, by bisection followed by a Newton polish.
pub fn solve_penalization_threshold(
    frac: &FracParams,
    nonlin: &NonlinearitySpec,
    v1: f64,
    kappa: f64,
) -> Result<f64> {
    let crit = frac.critical_exponent();
    let target = v1 / kappa;
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::NoRoot(format!("V1/kappa = {target} must be positive")));
    }
    let lhs = |a: f64| nonlin.lambda * a.powf(nonlin.p - 2.0) + a.powf(crit - 2.0);
    let mut hi = 1.0;
    while lhs(hi) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoRoot("threshold a exceeds 1e12".into()));
        }
    }
    let mut a = bisect(|a| lhs(a) - target, 0.0, hi)?;
    for _ in 0..3 {
        let d = nonlin.lambda * (nonlin.p - 2.0) * a.powf(nonlin.p - 3.0)
            + (crit - 2.0) * a.powf(crit - 3.0);
        let step = (lhs(a) - target) / d;
        if !step.is_finite() {
            break;
        }
        let next = a - step;
        if next > 0.0 && (lhs(next) - target).abs() <= (lhs(a) - target).abs() {
            a = next;
        }
    }
    let residual = (nonlin.f(a) + a.powf(crit - 1.0) - target * a).abs();
    if residual > 1e-12 * (target * a).max(f64::MIN_POSITIVE) {
        return Err(Error::NoRoot(format!("threshold residual {residual:e} too large")));
    }
    Ok(a)
}

impl PenalizationSpec {
    pub fn new(frac: &FracParams, nonlin: &NonlinearitySpec, v1: f64, kappa: f64) -> Result<Self> {
        let bound = kappa_lower_bound(frac, v1, nonlin.ar_theta);
        if !(kappa > bound) {
            return Err(assumption(
                "kappa bound",
                format!("need kappa > max{{V1/(m^(2s)-V1), theta/(theta-2)}} = {bound}, got {kappa}"),
            ));
        }
        let a = solve_penalization_threshold(frac, nonlin, v1, kappa)?;
        Ok(Self { kappa, a })
    }
}

/// All parameters of the penalized problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub frac: FracParams,
    pub eps: f64,
    pub potential: PotentialSpec,
    pub nonlin: NonlinearitySpec,
    pub pen: PenalizationSpec,
}

impl ModelConfig {
    /// Validates every assumption and computes the threshold `a`.
    pub fn new(
        frac: FracParams,
        eps: f64,
        potential: PotentialSpec,
        nonlin: NonlinearitySpec,
        kappa: f64,
    ) -> Result<Self> {
        let cfg = Self::assemble(frac, eps, potential, nonlin, kappa)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn assemble(
        frac: FracParams,
        eps: f64,
        potential: PotentialSpec,
        nonlin: NonlinearitySpec,
        kappa: f64,
    ) -> Result<Self> {
        frac.validate()?;
        potential.validate(&frac)?;
        nonlin.validate(&frac)?;
        let pen = PenalizationSpec::new(&frac, &nonlin, potential.v1, kappa)?;
        Ok(Self {
            frac,
            eps,
            potential,
            nonlin,
            pen,
        })
    }

    /// Re-runs all checks; returns the report lines.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.frac.validate()?;
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(domain("ModelConfig", format!("eps must be > 0, got {}", self.eps)));
        }
        let mut report = self.potential.validate(&self.frac)?;
        report.extend(self.nonlin.validate(&self.frac)?);
        let bound = kappa_lower_bound(&self.frac, self.potential.v1, self.nonlin.ar_theta);
        if !(self.pen.kappa > bound) {
            return Err(assumption(
                "kappa bound",
                format!("need kappa > {bound}, got {}", self.pen.kappa),
            ));
        }
        report.push(format!("kappa bound: kappa = {} > {bound}", self.pen.kappa));
        let crit = self.frac.critical_exponent();
        let a = self.pen.a;
        let residual = (self.nonlin.f(a) + a.powf(crit - 1.0) - self.potential.v1 / self.pen.kappa * a).abs();
        if !(a > 0.0) || residual > 1e-12 * (self.potential.v1 / self.pen.kappa * a) {
            return Err(assumption(
                "threshold a",
                format!("a = {a} leaves residual {residual:e} in f(a) + a^(2*-1) = (V1/kappa) a"),
            ));
        }
        report.push(format!("threshold a: a = {a}, residual {residual:e}"));
        Ok(report)
    }

    /// Same configuration with a different `ε`.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let mut c = self.clone();
        c.eps = eps;
        c.validate()?;
        Ok(c)
    }

    pub fn in_lambda(&self, x: Point) -> bool {
        self.potential.lambda.contains(x, self.frac.n_dim)
    }
}

fn pos_pow(t: f64, e: f64) -> f64 {
    if t > 0.0 {
        t.powf(e)
    } else {
        0.0
    }
}

/// `g(x, t)` at a point `x` of the unscaled potential variable.
pub fn g_eval(config: &ModelConfig, x: Point, t: f64) -> f64 {
    local_g(config, config.in_lambda(x), t)
}

/// `G(x, t) = ∫_0^t g(x, τ) dτ`.
#[allow(non_snake_case)]
pub fn G_eval(config: &ModelConfig, x: Point, t: f64) -> f64 {
    local_big_g(config, config.in_lambda(x), t)
}

fn local_g(config: &ModelConfig, inside: bool, t: f64) -> f64 {
    let crit = config.frac.critical_exponent();
    if inside || t < config.pen.a {
        config.nonlin.f(t) + pos_pow(t, crit - 1.0)
    } else {
        config.potential.v1 / config.pen.kappa * t
    }
}

fn local_big_g(config: &ModelConfig, inside: bool, t: f64) -> f64 {
    let crit = config.frac.critical_exponent();
    let a = config.pen.a;
    if inside || t < a {
        config.nonlin.primitive(t) + pos_pow(t, crit) / crit
    } else {
        config.nonlin.primitive(a)
            + a.powf(crit) / crit
            + 0.5 * config.potential.v1 / config.pen.kappa * (t * t - a * a)
    }
}

/// Constant-potential problem `(-Δ+m²)^s u + μu = f(u) + (u⁺)^{2*-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutonomousConfig {
    pub mu: f64,
    pub frac: FracParams,
    pub nonlin: NonlinearitySpec,
}

impl AutonomousConfig {
    pub fn new(mu: f64, frac: FracParams, nonlin: NonlinearitySpec) -> Result<Self> {
        frac.validate()?;
        nonlin.validate(&frac)?;
        if !(mu > -frac.mass_floor()) || !mu.is_finite() {
            return Err(assumption(
                "norm equivalence",
                format!("need mu > -m^(2s) = {}, got {mu}", -frac.mass_floor()),
            ));
        }
        Ok(Self { mu, frac, nonlin })
    }
}

/// `t^e` with an integer fast path (the default exponents are integers).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Power {
    e: f64,
    int: Option<i32>,
}

impl Power {
    fn new(e: f64) -> Self {
        let int = (e.fract() == 0.0 && e.abs() < 64.0).then_some(e as i32);
        Self { e, int }
    }

    fn of(&self, t: f64) -> f64 {
        match self.int {
            Some(k) => t.powi(k),
            None => t.powf(self.e),
        }
    }
}

/// Pointwise nonlinearity of a discrete problem.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Local {
    lambda: f64,
    p: f64,
    crit: f64,
    pow_p: Power,
    pow_p1: Power,
    pow_p2: Power,
    pow_c: Power,
    pow_c1: Power,
    pow_c2: Power,
    /// `(a, V1/κ)` when the penalization is active.
    penalty: Option<(f64, f64)>,
}

impl Local {
    fn new(lambda: f64, p: f64, crit: f64, penalty: Option<(f64, f64)>) -> Self {
        Self {
            lambda,
            p,
            crit,
            pow_p: Power::new(p),
            pow_p1: Power::new(p - 1.0),
            pow_p2: Power::new(p - 2.0),
            pow_c: Power::new(crit),
            pow_c1: Power::new(crit - 1.0),
            pow_c2: Power::new(crit - 2.0),
            penalty,
        }
    }

    fn linear_branch(&self, inside: bool, t: f64) -> Option<f64> {
        match self.penalty {
            Some((a, slope)) if !inside && t >= a => Some(slope),
            _ => None,
        }
    }

    fn g(&self, inside: bool, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.linear_branch(inside, t) {
            Some(slope) => slope * t,
            None => self.lambda * self.pow_p1.of(t) + self.pow_c1.of(t),
        }
    }

    /// `∂_t g`.
    fn g_prime(&self, inside: bool, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.linear_branch(inside, t) {
            Some(slope) => slope,
            None => self.lambda * (self.p - 1.0) * self.pow_p2.of(t) + (self.crit - 1.0) * self.pow_c2.of(t),
        }
    }

    fn big_g(&self, inside: bool, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.penalty {
            Some((a, slope)) if !inside && t >= a => {
                self.lambda * self.pow_p.of(a) / self.p + self.pow_c.of(a) / self.crit + 0.5 * slope * (t * t - a * a)
            }
            _ => self.lambda * self.pow_p.of(t) / self.p + self.pow_c.of(t) / self.crit,
        }
    }
}

/// A discretized functional: operator table, `V` sampled on the grid and the
/// pointwise nonlinearity. Covers both `J_ε` and `L_μ`.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    table: KernelTable,
    potential: Vec<f64>,
    inside: Vec<bool>,
    local: Local,
}

impl DiscreteProblem {
    /// `J_ε` on the grid of `table`: `V(εx)` and `χ_Λ(εx)`.
    pub fn penalized(config: &ModelConfig, table: &KernelTable) -> Result<Self> {
        check_params(&config.frac, table)?;
        let grid = *table.grid();
        let n = grid.n_dim();
        let eps = config.eps;
        let mut potential = Vec::with_capacity(grid.total_points());
        let mut inside = Vec::with_capacity(grid.total_points());
        for x in grid.points() {
            let ex = [eps * x[0], eps * x[1]];
            potential.push(config.potential.eval(ex, n));
            inside.push(config.potential.lambda.contains(ex, n));
        }
        Ok(Self {
            table: table.clone(),
            potential,
            inside,
            local: Local::new(
                config.nonlin.lambda,
                config.nonlin.p,
                config.frac.critical_exponent(),
                Some((config.pen.a, config.potential.v1 / config.pen.kappa)),
            ),
        })
    }

    /// `L_μ` on the grid of `table`.
    pub fn autonomous(config: &AutonomousConfig, table: &KernelTable) -> Result<Self> {
        check_params(&config.frac, table)?;
        let total = table.grid().total_points();
        Ok(Self {
            table: table.clone(),
            potential: vec![config.mu; total],
            inside: vec![true; total],
            local: Local::new(config.nonlin.lambda, config.nonlin.p, config.frac.critical_exponent(), None),
        })
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `χ_{Λ_ε}` on the grid.
    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn is_penalized(&self) -> bool {
        self.local.penalty.is_some()
    }

    fn check(&self, u: &Field) -> Result<()> {
        if u.grid() != self.table.grid() {
            return Err(Error::GridMismatch(format!(
                "field on {:?}, problem on {:?}",
                u.grid(),
                self.table.grid()
            )));
        }
        Ok(())
    }

    /// `‖u‖² = ⟨Au, u⟩ + h^N Σ V u²`.
    pub fn norm_sq(&self, u: &Field) -> Result<f64> {
        self.check(u)?;
        let q = self.table.quadratic_form(u)?;
        let pot: f64 = u.values().iter().zip(&self.potential).map(|(v, w)| w * v * v).sum();
        Ok(q + u.grid().cell_volume() * pot)
    }

    /// `h^N Σ G(x, u)`.
    pub fn nonlinear_energy(&self, u: &Field) -> f64 {
        u.grid().cell_volume()
            * u.values()
                .iter()
                .zip(&self.inside)
                .map(|(&v, &ins)| self.local.big_g(ins, v))
                .sum::<f64>()
    }

    /// `h^N Σ g(x, u) u`.
    pub fn nonlinear_pairing(&self, u: &Field) -> f64 {
        u.grid().cell_volume()
            * u.values()
                .iter()
                .zip(&self.inside)
                .map(|(&v, &ins)| self.local.g(ins, v) * v)
                .sum::<f64>()
    }

    pub fn nonlinearity(&self, u: &Field) -> Field {
        Field::from_parts_unchecked(
            *u.grid(),
            u.values()
                .iter()
                .zip(&self.inside)
                .map(|(&v, &ins)| self.local.g(ins, v))
                .collect(),
        )
    }

    /// `½‖u‖² - h^N Σ G(x, u)`.
    pub fn energy(&self, u: &Field) -> Result<f64> {
        Ok(0.5 * self.norm_sq(u)? - self.nonlinear_energy(u))
    }

    /// `L²` gradient `Au + V u - g(x, u)`.
    pub fn gradient(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        let au = apply_operator(u, &self.table)?;
        let values = au
            .values()
            .iter()
            .zip(u.values())
            .zip(self.potential.iter().zip(&self.inside))
            .map(|((a, &v), (w, &ins))| a + w * v - self.local.g(ins, v))
            .collect();
        Ok(Field::from_parts_unchecked(*u.grid(), values))
    }

    /// Along the ray `t ↦ t u`: `ψ(t) = h^N Σ g(x, t u) u / t` and `ψ'(t)`.
    /// `⟨J'(tu), tu⟩ = t² (‖u‖² - ψ(t))`.
    pub fn ray_pairing(&self, u: &Field, t: f64) -> (f64, f64) {
        let mut psi = 0.0;
        let mut dpsi = 0.0;
        for (&v, &ins) in u.values().iter().zip(&self.inside) {
            let tv = t * v;
            if tv <= 0.0 {
                continue;
            }
            let g = self.local.g(ins, tv);
            psi += g * v;
            dpsi += self.local.g_prime(ins, tv) * v * v * t - g * v;
        }
        let h = u.grid().cell_volume();
        (h * psi / t, h * dpsi / (t * t))
    }

    /// Whether `u > 0` somewhere in `Λ_ε`.
    pub fn has_positive_part_inside(&self, u: &Field) -> bool {
        u.values().iter().zip(&self.inside).any(|(&v, &ins)| ins && v > 0.0)
    }

    /// `⟨J'(u), u⟩ = ‖u‖² - h^N Σ g(x, u) u`.
    pub fn nehari_functional(&self, u: &Field) -> Result<f64> {
        Ok(self.norm_sq(u)? - self.nonlinear_pairing(u))
    }
}

fn check_params(frac: &FracParams, table: &KernelTable) -> Result<()> {
    let t = table.params();
    if t.s != frac.s || t.m != frac.m || t.n_dim != frac.n_dim {
        return Err(Error::GridMismatch(format!(
            "table built for {t:?}, problem uses {frac:?}"
        )));
    }
    Ok(())
}

/// `J_ε(u)` in trace form.
pub fn energy(config: &ModelConfig, u: &Field, table: &KernelTable) -> Result<f64> {
    DiscreteProblem::penalized(config, table)?.energy(u)
}

/// `L²` gradient of `J_ε`.
pub fn energy_gradient(config: &ModelConfig, u: &Field, table: &KernelTable) -> Result<Field> {
    DiscreteProblem::penalized(config, table)?.gradient(u)
}
