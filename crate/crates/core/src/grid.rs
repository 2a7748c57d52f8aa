//! Truncated uniform trapezoid grids on `[-L, L]`.
//!
//! The trapezoid rule is spectrally accurate for integrands that are analytic
//! in a strip and decay at the ends of the interval, which covers every
//! integrand this crate produces.

use std::ops::{Add, Mul};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the truncated line.
pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
/// Default node count; spacing 0.05 on the default half-width.
pub const DEFAULT_NODES: usize = 801;
/// Spacing kept by [`Grid::scale_aware`] when it widens the domain.
pub const DEFAULT_SPACING: f64 = 2.0 * DEFAULT_HALF_WIDTH / (DEFAULT_NODES - 1) as f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Uniform grid of `n` nodes on `[-L, L]` with trapezoid weights.
    ///
    /// `n` must be odd so that the origin is a node.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::param(format!("grid half-width must be positive, got {half_width}")));
        }
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::param(format!("grid node count must be odd and >= 3, got {n}")));
        }
        let intervals = (n - 1) as f64;
        let h = 2.0 * half_width / intervals;
        let mid = (n - 1) / 2;
        // Integer offsets from the centre keep the layout exactly antisymmetric.
        let nodes: Vec<f64> = (0..n)
            .map(|i| half_width * (2.0 * i as f64 - intervals) / intervals)
            .collect();
        debug_assert_eq!(nodes[mid], 0.0);
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Grid { half_width, nodes, weights })
    }

    /// `L = 20, n = 801`.
    pub fn standard() -> Self {
        Grid::new(DEFAULT_HALF_WIDTH, DEFAULT_NODES).expect("default grid parameters are valid")
    }

    /// Widens the domain to `max(20, 20 / min_scale + max_center)` while keeping
    /// the default spacing, so narrow or shifted atoms stay resolved.
    pub fn scale_aware(min_scale: f64, max_abs_center: f64) -> Result<Self> {
        if !(min_scale > 0.0) {
            return Err(Error::param("minimum atom scale must be positive"));
        }
        let half_width = DEFAULT_HALF_WIDTH.max(DEFAULT_HALF_WIDTH / min_scale + max_abs_center.abs());
        let half_intervals = (half_width / DEFAULT_SPACING).ceil() as usize;
        let half_width = half_intervals as f64 * DEFAULT_SPACING;
        Grid::new(half_width, 2 * half_intervals + 1)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nodes.len() - 1) as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node at the origin.
    pub fn center_index(&self) -> usize {
        (self.nodes.len() - 1) / 2
    }

    /// Same node count on `[-L/factor, L/factor]`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Grid::new(self.half_width / factor, self.len())
    }

    /// Trapezoid sum of `samples` against the grid weights.
    pub fn integrate<T>(&self, samples: &[T]) -> Result<T>
    where
        T: Copy + Zero + Add<Output = T> + Mul<f64, Output = T>,
    {
        if samples.len() != self.len() {
            return Err(Error::param(format!(
                "sample count {} does not match grid size {}",
                samples.len(),
                self.len()
            )));
        }
        Ok(samples
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&s, &w)| acc + s * w))
    }

    /// Integrates `f` sampled at the nodes.
    pub fn integrate_fn<T, F>(&self, f: F) -> T
    where
        T: Copy + Zero + Add<Output = T> + Mul<f64, Output = T>,
        F: Fn(f64) -> T,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + f(x) * w)
    }
}

/// Convenience wrapper matching the free-function form used in the examples.
pub fn build_grid(half_width: f64, n: usize) -> Result<Grid> {
    Grid::new(half_width, n)
}
