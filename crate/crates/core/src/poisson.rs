//! Five-point Poisson solver with homogeneous Dirichlet data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Scalar samples at the `(n + 1)^2` grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeField {
    grid: Grid,
    values: Vec<f64>,
}

impl NodeField {
    pub fn zeros(grid: Grid) -> Self {
        NodeField {
            values: vec![0.0; grid.num_nodes()],
            grid,
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.num_nodes());
        for j in 0..=n {
            for i in 0..=n {
                let (x, y) = grid.node(i, j);
                values.push(f(x, y));
            }
        }
        NodeField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.node_index(i, j);
        self.values[k] = v;
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        let n = self.grid.n();
        i == 0 || j == 0 || i == n || j == n
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Five-point Laplacian at an interior node.
    pub fn laplacian_at(&self, i: usize, j: usize) -> f64 {
        let h2 = self.grid.dx() * self.grid.dx();
        (self.get(i + 1, j) + self.get(i - 1, j) + self.get(i, j + 1) + self.get(i, j - 1)
            - 4.0 * self.get(i, j))
            / h2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Relative residual `||lap(psi) - omega|| / ||omega||` over interior nodes.
pub fn relative_residual(psi: &NodeField, omega: &NodeField) -> f64 {
    let n = psi.grid().n();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 1..n {
        for i in 1..n {
            let w = omega.get(i, j);
            let r = psi.laplacian_at(i, j) - w;
            num += r * r;
            den += w * w;
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Solves `psi_xx + psi_yy = omega` at interior nodes with `psi = 0` on the boundary.
pub fn solve_poisson(grid: &Grid, omega: &NodeField, tol: f64) -> Result<NodeField> {
    solve_poisson_with_report(grid, omega, tol).map(|(psi, _)| psi)
}

/// Jacobi-preconditioned conjugate gradients on the interior unknowns,
/// capped at `50 * n` iterations.
pub fn solve_poisson_with_report(
    grid: &Grid,
    omega: &NodeField,
    tol: f64,
) -> Result<(NodeField, PoissonReport)> {
    if !(tol > 0.0) {
        return Err(Error::config("poisson_tol", format!("must be > 0, got {tol}")));
    }
    if omega.grid() != grid {
        return Err(Error::GridMismatch("vorticity sampled on a different grid".into()));
    }
    let n = grid.n();
    let m = n - 1;
    let h2 = grid.dx() * grid.dx();

    // SPD system (4 psi - neighbours) = -h^2 omega on the interior block.
    let mut b = vec![0.0; m * m];
    for j in 0..m {
        for i in 0..m {
            let w = omega.get(i + 1, j + 1);
            if !w.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "vorticity is not finite at node ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            b[j * m + i] = -h2 * w;
        }
    }
    let b_norm = dot(&b, &b).sqrt();
    let mut psi = NodeField::zeros(*grid);
    if b_norm == 0.0 {
        return Ok((
            psi,
            PoissonReport {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }

    let cap = 50 * n;
    let mut x = vec![0.0; m * m];
    let mut r = b.clone();
    let mut z = vec![0.0; m * m];
    let mut p = vec![0.0; m * m];
    let mut q = vec![0.0; m * m];
    let mut iterations = 0;
    let mut rel = 1.0;

    // Outer loop restarts from the true residual if the recursive one drifted.
    while iterations < cap {
        precondition(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < cap {
            apply_operator(m, &p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > 0.0) {
                // breakdown: the residual is already at roundoff level
                iterations += 1;
                break;
            }
            let alpha = rz / pq;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &q, &mut r);
            iterations += 1;
            rel = dot(&r, &r).sqrt() / b_norm;
            if rel <= tol {
                break;
            }
            precondition(&r, &mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for (pk, zk) in p.iter_mut().zip(&z) {
                *pk = zk + beta * *pk;
            }
        }
        apply_operator(m, &x, &mut q);
        for k in 0..r.len() {
            r[k] = b[k] - q[k];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= tol || !rel.is_finite() {
            break;
        }
    }
    if !(rel <= tol) {
        return Err(Error::PoissonDiverged {
            iterations,
            residual: rel,
            tol,
        });
    }
    for j in 0..m {
        for i in 0..m {
            psi.set(i + 1, j + 1, x[j * m + i]);
        }
    }
    Ok((
        psi,
        PoissonReport {
            iterations,
            relative_residual: rel,
        },
    ))
}

fn apply_operator(m: usize, x: &[f64], out: &mut [f64]) {
    for j in 0..m {
        for i in 0..m {
            let k = j * m + i;
            let mut s = 4.0 * x[k];
            if i > 0 {
                s -= x[k - 1];
            }
            if i + 1 < m {
                s -= x[k + 1];
            }
            if j > 0 {
                s -= x[k - m];
            }
            if j + 1 < m {
                s -= x[k + m];
            }
            out[k] = s;
        }
    }
}

// The diagonal is the constant 4.
fn precondition(r: &[f64], z: &mut [f64]) {
    for (zk, rk) in z.iter_mut().zip(r) {
        *zk = 0.25 * rk;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yk, xk) in y.iter_mut().zip(x) {
        *yk += alpha * xk;
    }
}
