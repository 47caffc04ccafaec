//! Characteristic-aligned space-time grid (`dx == dt == h`) and fields on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes `x_i = (i - nx_half) h` for `i in 0..=2 nx_half` and levels
/// `t_n = n h` for `n in 0..=nt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicGrid {
    pub h: f64,
    pub nx_half: usize,
    pub nt: usize,
    /// support radius of the data; fields vanish for `|x| > t + r`
    pub r: f64,
}

impl CharacteristicGrid {
    /// Smallest grid with half-width at least `t_max + r + 2h`.
    pub fn new(h: f64, t_max: f64, r: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Grid(format!("step h = {h} must be positive")));
        }
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(Error::Grid(format!(
                "horizon T = {t_max} must be finite and >= 0"
            )));
        }
        let nt = (t_max / h - 1e-9).ceil().max(0.0) as usize;
        let nx_half = ((nt as f64 * h + r) / h - 1e-9).ceil() as usize + 2;
        Ok(Self { h, nx_half, nt, r })
    }

    /// Grid with an explicit half-width; errors when it cannot hold the cone.
    pub fn with_half_width(h: f64, half_width: f64, t_max: f64, r: f64) -> Result<Self> {
        let mut g = Self::new(h, t_max, r)?;
        let nx_half = (half_width / h + 1e-9).floor() as usize;
        if (nx_half as f64) * h < g.t_max() + r - 1e-12 {
            return Err(Error::Grid(format!(
                "half-width {half_width} < T + R = {}",
                g.t_max() + r
            )));
        }
        g.nx_half = nx_half;
        Ok(g)
    }

    pub fn nx(&self) -> usize {
        2 * self.nx_half + 1
    }

    pub fn half_width(&self) -> f64 {
        self.nx_half as f64 * self.h
    }

    pub fn t_max(&self) -> f64 {
        self.nt as f64 * self.h
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.nx_half as f64) * self.h
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.h
    }

    /// Node index of `x`, if `x` lies on a node.
    pub fn x_index(&self, x: f64) -> Option<usize> {
        let s = x / self.h + self.nx_half as f64;
        let i = s.round();
        ((s - i).abs() < 1e-6 && i >= 0.0 && i <= (2 * self.nx_half) as f64).then_some(i as usize)
    }

    pub fn t_index(&self, t: f64) -> Option<usize> {
        let s = t / self.h;
        let n = s.round();
        ((s - n).abs() < 1e-6 && n >= 0.0 && n <= self.nt as f64).then_some(n as usize)
    }

    /// `(i, n)` for a node whose backward light triangle stays on the grid.
    pub fn triangle_node(&self, x: f64, t: f64) -> Result<(usize, usize)> {
        let (i, n) = match (self.x_index(x), self.t_index(t)) {
            (Some(i), Some(n)) => (i, n),
            _ => {
                return Err(Error::Domain(format!(
                    "({x}, {t}) is not a node of the grid (h = {})",
                    self.h
                )))
            }
        };
        if i < n || i + n > 2 * self.nx_half {
            return Err(Error::Domain(format!(
                "backward triangle of ({x}, {t}) leaves [-{0}, {0}]",
                self.half_width()
            )));
        }
        Ok((i, n))
    }

    /// Whether node `(i, n)` lies in the support cone `|x| <= t + r`.
    #[inline]
    pub fn in_cone(&self, i: usize, n: usize) -> bool {
        self.x(i).abs() <= self.t(n) + self.r + 1e-12
    }
}

/// Values of a function on every node of a grid, stored level by level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub grid: CharacteristicGrid,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(grid: CharacteristicGrid) -> Self {
        Self {
            values: vec![0.0; grid.nx() * (grid.nt + 1)],
            grid,
        }
    }

    /// Samples `f(x, t)` at every node. Values outside the cone are set to zero.
    pub fn from_fn(grid: CharacteristicGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for n in 0..=grid.nt {
            for i in 0..grid.nx() {
                if grid.in_cone(i, n) {
                    out.values[n * grid.nx() + i] = f(grid.x(i), grid.t(n));
                }
            }
        }
        out
    }

    /// Elementwise map, keeping the grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, n: usize) -> f64 {
        self.values[n * self.grid.nx() + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, n: usize, v: f64) {
        let nx = self.grid.nx();
        self.values[n * nx + i] = v;
    }

    pub fn level(&self, n: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.values[n * nx..(n + 1) * nx]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        let nx = self.grid.nx();
        &mut self.values[n * nx..(n + 1) * nx]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `|v|` over nodes outside the support cone.
    pub fn support_violation(&self) -> f64 {
        let g = self.grid;
        let mut worst = 0.0f64;
        for n in 0..=g.nt {
            for i in 0..g.nx() {
                if !g.in_cone(i, n) {
                    worst = worst.max(self.get(i, n).abs());
                }
            }
        }
        worst
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|a - b|` over all nodes.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}
