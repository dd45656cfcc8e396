//! Uniform periodic lattices on `[-L, L)^N` and real fields sampled on them.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest admissible number of lattice points.
pub const MAX_TOTAL_POINTS: usize = 1 << 22;

/// A point of `ℝ^N`, `N ≤ 2`; unused trailing components are zero.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_dim: usize,
    points_per_dim: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(n_dim: usize, points_per_dim: usize, half_length: f64) -> Result<Self> {
        if !(1..=2).contains(&n_dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {n_dim}")));
        }
        if points_per_dim < 32 || !points_per_dim.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per dimension must be a power of two >= 32, got {points_per_dim}"
            )));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidGrid(format!("half length must be > 0, got {half_length}")));
        }
        let total = points_per_dim
            .checked_pow(n_dim as u32)
            .filter(|&t| t <= MAX_TOTAL_POINTS)
            .ok_or_else(|| {
                Error::InvalidGrid(format!(
                    "{points_per_dim}^{n_dim} points exceed the cap of {MAX_TOTAL_POINTS}"
                ))
            })?;
        debug_assert!(total > 0);
        Ok(Self {
            n_dim,
            points_per_dim,
            half_length,
        })
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Lattice spacing `h = 2L / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points_per_dim as f64
    }

    pub fn total_points(&self) -> usize {
        self.points_per_dim.pow(self.n_dim as u32)
    }

    /// Volume element `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n_dim as i32)
    }

    /// Box volume `(2L)^N`.
    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_length).powi(self.n_dim as i32)
    }

    /// Coordinate of lattice index `j` along one axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    /// Per-axis lattice indices of a flat (row-major) index.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        if self.n_dim == 1 {
            [flat, 0]
        } else {
            [flat / self.points_per_dim, flat % self.points_per_dim]
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.n_dim == 1 {
            idx[0]
        } else {
            idx[0] * self.points_per_dim + idx[1]
        }
    }

    pub fn point(&self, flat: usize) -> Point {
        let [i, j] = self.multi_index(flat);
        if self.n_dim == 1 {
            [self.coordinate(i), 0.0]
        } else {
            [self.coordinate(i), self.coordinate(j)]
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.total_points()).map(move |i| self.point(i))
    }

    /// Angular wavenumber `π·q/L` of FFT bin `j` (bins past `n/2` are negative).
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.points_per_dim as i64;
        let q = if (j as i64) <= n / 2 { j as i64 } else { j as i64 - n };
        PI * q as f64 / self.half_length
    }

    /// Wavevector of flat FFT bin `flat`.
    pub fn wavevector(&self, flat: usize) -> Point {
        let [i, j] = self.multi_index(flat);
        if self.n_dim == 1 {
            [self.wavenumber(i), 0.0]
        } else {
            [self.wavenumber(i), self.wavenumber(j)]
        }
    }

    /// Euclidean distance under the minimum-image convention of the torus.
    pub fn periodic_distance(&self, a: Point, b: Point) -> f64 {
        let period = 2.0 * self.half_length;
        let mut d2 = 0.0;
        for c in 0..self.n_dim {
            let mut d = (a[c] - b[c]).rem_euclid(period);
            if d > 0.5 * period {
                d -= period;
            }
            d2 += d * d;
        }
        d2.sqrt()
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.total_points()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain {
                what: "Field",
                detail: format!("non-finite value {} at index {i}", values[i]),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.total_points()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.total_points()],
        }
    }

    pub fn from_fn<F: FnMut(Point) -> f64>(grid: Grid, mut f: F) -> Result<Self> {
        let values = grid.points().map(&mut f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.total_points());
        Self { grid, values }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_parts_unchecked(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    pub fn map<F: FnMut(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.grid, self.values.iter().copied().map(f).collect())
    }

    /// Discrete `L²` inner product `h^N Σ u v`.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `h^N Σ |u|^p`.
    pub fn integral_abs_pow(&self, p: f64) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()
    }

    /// Flat index of the maximum, lowest index among ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Translate by a whole number of lattice cells (periodic shift).
    pub fn shifted(&self, cells: [isize; 2]) -> Self {
        let n = self.grid.points_per_dim() as isize;
        let mut out = vec![0.0; self.values.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let [i, j] = self.grid.multi_index(flat);
            let ni = (i as isize + cells[0]).rem_euclid(n) as usize;
            let nj = if self.grid.n_dim() == 2 {
                (j as isize + cells[1]).rem_euclid(n) as usize
            } else {
                0
            };
            out[self.grid.flat_index([ni, nj])] = *v;
        }
        Self::from_parts_unchecked(self.grid, out)
    }
}
