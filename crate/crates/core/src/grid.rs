//! Uniform periodic Cartesian mesh on `[-a, a]^2`.
//!
//! Nodes are indexed `(i, j)` with `i, j` in `0..=n`; cells are indexed
//! `(i, j)` with `i, j` in `0..n`. Cell `(i, j)` has its south-west corner at
//! node `(i, j)`. Flat storage is row-major with `i` fastest.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n: usize,
    dx: f64,
}

impl Grid {
    /// Builds the mesh. `n` must be even and at least 2 so the origin is a node.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::config("a", format!("half-width must be > 0, got {half_width}")));
        }
        if n < 2 {
            return Err(Error::config("N", format!("need at least 2 cells per axis, got {n}")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::config("N", format!("cells per axis must be even, got {n}")));
        }
        Ok(Grid {
            half_width,
            n,
            dx: 2.0 * half_width / n as f64,
        })
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Cells per axis.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dx
    }

    pub fn num_cells(&self) -> usize {
        self.n * self.n
    }

    pub fn num_nodes(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    /// Node coordinate along either axis, exactly antisymmetric about the origin.
    #[inline]
    pub fn node_coord(&self, i: usize) -> f64 {
        self.half_width * (2.0 * i as f64 - self.n as f64) / self.n as f64
    }

    /// Cell-center coordinate along either axis.
    #[inline]
    pub fn center_coord(&self, i: usize) -> f64 {
        self.half_width * (2.0 * i as f64 + 1.0 - self.n as f64) / self.n as f64
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.node_coord(i), self.node_coord(j))
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.center_coord(i), self.center_coord(j))
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    /// Periodic neighbour index along one axis: `offset` is -1, 0 or +1.
    #[inline]
    pub fn wrap(&self, i: usize, offset: isize) -> usize {
        let n = self.n as isize;
        ((i as isize + offset).rem_euclid(n)) as usize
    }

    /// Index of the cell containing coordinate `x`, clamped to the domain.
    pub fn locate(&self, x: f64) -> usize {
        let s = ((x + self.half_width) / self.dx).floor();
        if s < 0.0 {
            0
        } else {
            (s as usize).min(self.n - 1)
        }
    }

    /// True when both grids cover the same square to within rounding.
    pub fn same_domain(&self, other: &Grid) -> bool {
        (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width.max(other.half_width)
    }
}

/// Polar coordinates with the principal angle in `(-pi, pi]`; the origin maps to `(0, 0)`.
pub fn polar(x: f64, y: f64) -> (f64, f64) {
    let r = x.hypot(y);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let theta = y.atan2(x);
    (r, if theta <= -PI { PI } else { theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spacing_matches_reference_meshes() {
        assert_relative_eq!(Grid::new(0.2, 200).unwrap().dx(), 0.002, max_relative = 1e-15);
        assert_relative_eq!(Grid::new(0.2, 800).unwrap().dx(), 0.0005, max_relative = 1e-15);
        let g = Grid::new(1.0, 2).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!((0..=2).map(|i| g.node_coord(i)).collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(0.2, 7).is_err());
        assert!(Grid::new(0.2, 0).is_err());
        assert!(Grid::new(0.0, 10).is_err());
        assert!(Grid::new(-1.0, 10).is_err());
    }

    #[test]
    fn origin_is_a_node() {
        for n in [2, 10, 200, 1024] {
            let g = Grid::new(0.2, n).unwrap();
            assert_eq!(g.node(n / 2, n / 2), (0.0, 0.0));
        }
    }

    #[test]
    fn centers_are_corner_means() {
        let g = Grid::new(0.2, 50).unwrap();
        for i in 0..g.n() {
            let mean = 0.5 * (g.node_coord(i) + g.node_coord(i + 1));
            assert!((g.center_coord(i) - mean).abs() <= 1e-16);
        }
    }

    #[test]
    fn wrap_is_periodic() {
        let g = Grid::new(0.2, 8).unwrap();
        assert_eq!(g.wrap(7, 1), 0);
        assert_eq!(g.wrap(0, -1), 7);
        let mut i = 3;
        for _ in 0..g.n() {
            i = g.wrap(i, 1);
        }
        assert_eq!(i, 3);
    }

    #[test]
    fn polar_conventions() {
        assert_eq!(polar(1.0, 0.0), (1.0, 0.0));
        assert_eq!(polar(0.0, 0.0), (0.0, 0.0));
        let (r, t) = polar(-0.1, 0.0);
        assert_relative_eq!(r, 0.1);
        assert_eq!(t, PI);
        assert_eq!(polar(-0.1, -0.0).1, PI);
    }
}
