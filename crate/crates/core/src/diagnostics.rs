//! Post-processing of DG fields: cell-center vorticity, comparison metrics,
//! conservation audits and peak counting.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::dg::{eval_p1, DGField, DENSITY, MOMENTUM_X, MOMENTUM_Y};

/// Scalar values at the `n^2` cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterField {
    grid: Grid,
    values: Vec<f64>,
}

impl CenterField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_cells() {
            return Err(Error::GridMismatch(format!(
                "expected {} center values, got {}",
                grid.num_cells(),
                values.len()
            )));
        }
        Ok(CenterField { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.num_cells());
        for j in 0..n {
            for i in 0..n {
                let (x, y) = grid.center(i, j);
                values.push(f(x, y));
            }
        }
        CenterField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.cell_index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> CenterField {
        CenterField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// Values of a scalar diagnostic at increasing sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl MetricSeries {
    pub fn new(label: impl Into<String>) -> Self {
        MetricSeries {
            label: label.into(),
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidArgument(format!(
                    "metric times must increase: {t} after {last}"
                )));
            }
        }
        self.times.push(t);
        self.values.push(value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Velocity at each cell center, `u = m1 / rho` from the leading coefficients.
pub fn center_velocity(field: &DGField, rho_floor: f64) -> (CenterField, CenterField) {
    let grid = *field.grid();
    let (mut u, mut v) = (Vec::with_capacity(grid.num_cells()), Vec::with_capacity(grid.num_cells()));
    for c in field.cells() {
        let rho = c[DENSITY][0].max(rho_floor);
        u.push(c[MOMENTUM_X][0] / rho);
        v.push(c[MOMENTUM_Y][0] / rho);
    }
    (CenterField { grid, values: u }, CenterField { grid, values: v })
}

/// Density at each cell center.
pub fn center_density(field: &DGField) -> CenterField {
    CenterField {
        grid: *field.grid(),
        values: field.cells().iter().map(|c| c[DENSITY][0]).collect(),
    }
}

/// `u_y - v_x` by central differences with periodic wrap.
pub fn vorticity_field(u: &CenterField, v: &CenterField) -> Result<CenterField> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch("velocity components on different grids".into()));
    }
    let g = u.grid;
    let n = g.n();
    let mut values = Vec::with_capacity(g.num_cells());
    for j in 0..n {
        let (jn, js) = (g.wrap(j, 1), g.wrap(j, -1));
        for i in 0..n {
            let (ie, iw) = (g.wrap(i, 1), g.wrap(i, -1));
            let uy = (u.get(i, jn) - u.get(i, js)) / (2.0 * g.dy());
            let vx = (v.get(ie, j) - v.get(iw, j)) / (2.0 * g.dx());
            values.push(uy - vx);
        }
    }
    Ok(CenterField { grid: g, values })
}

/// Cell-center vorticity of a DG state.
pub fn field_vorticity(field: &DGField, rho_floor: f64) -> CenterField {
    let (u, v) = center_velocity(field, rho_floor);
    vorticity_field(&u, &v).expect("components share a grid")
}

/// `sum |a - b| dx dy`.
pub fn l1_distance(a: &CenterField, b: &CenterField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch("l1_distance on different grids".into()));
    }
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum();
    Ok(s * a.grid.cell_area())
}

// Candidate (cell, reference coordinate) pairs for a point along one axis.
fn containing_cells(grid: &Grid, x: f64) -> Vec<(usize, f64)> {
    const SNAP: f64 = 1e-9;
    let n = grid.n();
    let s = (x + grid.half_width()) / grid.dx();
    let k = s.floor();
    let frac = s - k;
    let k = (k.max(0.0) as usize).min(n - 1);
    if frac < SNAP && k > 0 {
        vec![(k - 1, 1.0), (k, -1.0)]
    } else if frac > 1.0 - SNAP && k + 1 < n {
        vec![(k, 1.0), (k + 1, -1.0)]
    } else {
        vec![(k, (2.0 * frac - 1.0).clamp(-1.0, 1.0))]
    }
}

/// Density of `field` at physical point `(x, y)`. Points on a cell
/// boundary take the mean of the adjacent cells' traces.
pub fn density_at(field: &DGField, x: f64, y: f64) -> f64 {
    let g = field.grid();
    let xs = containing_cells(g, x);
    let ys = containing_cells(g, y);
    let mut sum = 0.0;
    for &(i, xi) in &xs {
        for &(j, eta) in &ys {
            sum += eval_p1(&field.cell(i, j)[DENSITY], xi, eta);
        }
    }
    sum / (xs.len() * ys.len()) as f64
}

/// Discrete `L2` density difference at the coarse cell centers.
pub fn l2_density_error(coarse: &DGField, reference: &DGField) -> Result<f64> {
    let g = coarse.grid();
    if !g.same_domain(reference.grid()) {
        return Err(Error::GridMismatch(format!(
            "domains differ: a = {} vs {}",
            g.half_width(),
            reference.grid().half_width()
        )));
    }
    let n = g.n();
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (x, y) = g.center(i, j);
            let d = coarse.cell(i, j)[DENSITY][0] - density_at(reference, x, y);
            sum += d * d;
        }
    }
    Ok((sum * g.cell_area()).sqrt())
}

/// `sum c0 dx dy` for density and both momenta.
pub fn conserved_totals(field: &DGField) -> [f64; 3] {
    let area = field.grid().cell_area();
    let mut t = [0.0; 3];
    for c in field.cells() {
        for q in 0..3 {
            t[q] += c[q][0];
        }
    }
    t.map(|s| s * area)
}

/// `sum |c0| dx dy`, a scale for judging drift of near-zero totals.
pub fn conserved_magnitudes(field: &DGField) -> [f64; 3] {
    let area = field.grid().cell_area();
    let mut t = [0.0; 3];
    for c in field.cells() {
        for q in 0..3 {
            t[q] += c[q][0].abs();
        }
    }
    t.map(|s| s * area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSettings {
    /// Fraction of the window maximum used as the threshold.
    pub threshold: f64,
    /// Half-width of the square window about the origin.
    pub window: f64,
    /// Smallest component (in cells) that counts as a peak.
    pub min_size: usize,
}

impl Default for PeakSettings {
    fn default() -> Self {
        PeakSettings {
            threshold: 0.3,
            window: 0.05,
            min_size: 2,
        }
    }
}

impl PeakSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::config("peak_threshold", format!("must lie in (0, 1), got {}", self.threshold)));
        }
        if !(self.window > 0.0) {
            return Err(Error::config("peak_window", format!("must be > 0, got {}", self.window)));
        }
        if self.min_size == 0 {
            return Err(Error::config("peak_min_size", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub cells: usize,
    pub centroid: (f64, f64),
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub count: usize,
    pub peaks: Vec<Peak>,
    pub window_max: f64,
}

/// Connected components of `{omega >= threshold * max|omega|}` inside the
/// window, 4-connectivity, ignoring components smaller than `min_size`.
pub fn count_peaks(omega: &CenterField, settings: &PeakSettings) -> PeakReport {
    let g = omega.grid;
    let n = g.n();
    let inside: Vec<usize> = (0..n)
        .filter(|&i| g.center_coord(i).abs() <= settings.window)
        .collect();
    let empty = PeakReport {
        count: 0,
        peaks: Vec::new(),
        window_max: 0.0,
    };
    let (Some(&lo), Some(&hi)) = (inside.first(), inside.last()) else {
        return empty;
    };
    let m = hi - lo + 1;
    let window_max = inside
        .iter()
        .flat_map(|&j| inside.iter().map(move |&i| (i, j)))
        .fold(0.0_f64, |acc, (i, j)| acc.max(omega.get(i, j).abs()));
    if window_max == 0.0 {
        return empty;
    }
    let level = settings.threshold * window_max;
    let above = |a: usize, b: usize| omega.get(lo + a, lo + b) >= level;

    let mut seen = vec![false; m * m];
    let mut peaks = Vec::new();
    let mut queue = VecDeque::new();
    for b in 0..m {
        for a in 0..m {
            if seen[b * m + a] || !above(a, b) {
                continue;
            }
            seen[b * m + a] = true;
            queue.push_back((a, b));
            let (mut cells, mut sw, mut sx, mut sy, mut wmax) = (0usize, 0.0, 0.0, 0.0, f64::NEG_INFINITY);
            while let Some((p, q)) = queue.pop_front() {
                let w = omega.get(lo + p, lo + q);
                let (x, y) = g.center(lo + p, lo + q);
                cells += 1;
                sw += w;
                sx += w * x;
                sy += w * y;
                wmax = wmax.max(w);
                let nbrs = [
                    (p.wrapping_sub(1), q),
                    (p + 1, q),
                    (p, q.wrapping_sub(1)),
                    (p, q + 1),
                ];
                for (r, s) in nbrs {
                    if r < m && s < m && !seen[s * m + r] && above(r, s) {
                        seen[s * m + r] = true;
                        queue.push_back((r, s));
                    }
                }
            }
            if cells >= settings.min_size {
                peaks.push(Peak {
                    cells,
                    centroid: (sx / sw, sy / sw),
                    max: wmax,
                });
            }
        }
    }
    PeakReport {
        count: peaks.len(),
        peaks,
        window_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{node_velocities, VorticityProfile};
    use crate::poisson::{solve_poisson, NodeField};
    use crate::solver::{ConservedState, FluidParams};

    fn uniform(n: usize, state: ConservedState) -> DGField {
        DGField::uniform(Grid::new(0.2, n).unwrap(), FluidParams::default(), state)
    }

    #[test]
    fn rest_state_has_zero_velocity_and_known_totals() {
        let f = uniform(10, ConservedState::new(1.0, 0.0, 0.0));
        let (u, v) = center_velocity(&f, 1e-13);
        assert_eq!(u.max_abs(), 0.0);
        assert_eq!(v.max_abs(), 0.0);
        let t = conserved_totals(&f);
        assert!((t[0] - 0.16).abs() < 1e-15);
        assert_eq!((t[1], t[2]), (0.0, 0.0));
    }

    #[test]
    fn velocity_divides_by_density() {
        let f = uniform(6, ConservedState::new(2.0, 3.0, -1.0));
        let (u, v) = center_velocity(&f, 1e-13);
        assert!(u.values().iter().all(|&x| x == 1.5));
        assert!(v.values().iter().all(|&x| x == -0.5));
        assert_eq!(field_vorticity(&f, 1e-13).max_abs(), 0.0);
    }

    #[test]
    fn linear_rotation_has_vorticity_two() {
        let g = Grid::new(0.2, 20).unwrap();
        let u = CenterField::from_fn(g, |_, y| y);
        let v = CenterField::from_fn(g, |x, _| -x);
        let w = vorticity_field(&u, &v).unwrap();
        for j in 1..19 {
            for i in 1..19 {
                assert!((w.get(i, j) - 2.0).abs() < 1e-12);
            }
        }
        assert!(w.values().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn l1_distance_single_cell() {
        let g = Grid::new(0.2, 200).unwrap();
        let a = CenterField::from_fn(g, |_, _| 0.0);
        let mut vals = a.values().to_vec();
        vals[12345] = 1.0;
        let b = CenterField::new(g, vals).unwrap();
        assert!((l1_distance(&a, &b).unwrap() - 4e-6).abs() < 1e-18);
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        let c = CenterField::from_fn(Grid::new(0.2, 100).unwrap(), |_, _| 0.0);
        assert!(matches!(l1_distance(&a, &c), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn l2_error_of_constant_offset() {
        let coarse = uniform(20, ConservedState::new(1.0, 0.0, 0.0));
        let reference = uniform(50, ConservedState::new(1.1, 0.0, 0.0));
        assert!((l2_density_error(&coarse, &reference).unwrap() - 0.04).abs() < 1e-14);
        assert!(l2_density_error(&coarse, &coarse).unwrap() == 0.0);
        let other = DGField::uniform(Grid::new(0.3, 50).unwrap(), FluidParams::default(), ConservedState::new(1.0, 0.0, 0.0));
        assert!(l2_density_error(&coarse, &other).is_err());
    }

    #[test]
    fn boundary_points_average_neighbors() {
        let g = Grid::new(0.2, 4).unwrap();
        let cells = (0..16)
            .map(|k| [[k as f64, 0.0, 0.0], [0.0; 3], [0.0; 3]])
            .map(|mut c| {
                c[DENSITY][0] += 1.0;
                c
            })
            .collect();
        let f = DGField::new(g, FluidParams::default(), cells).unwrap();
        // x = 0 separates columns 1 and 2 in row 0.
        let (_, y) = g.center(0, 0);
        assert!((density_at(&f, 0.0, y) - 2.5).abs() < 1e-14);
        // The origin is a corner shared by cells 5, 6, 9, 10.
        assert!((density_at(&f, 0.0, 0.0) - 8.5).abs() < 1e-14);
    }

    fn bump(g: Grid, cx: f64, cy: f64, w: f64) -> CenterField {
        CenterField::from_fn(g, |x, y| (-((x - cx).powi(2) + (y - cy).powi(2)) / (w * w)).exp())
    }

    #[test]
    fn peak_counts() {
        let g = Grid::new(0.2, 200).unwrap();
        let s = PeakSettings::default();
        let one = bump(g, 0.0, 0.0, 0.01);
        let r = count_peaks(&one, &s);
        assert_eq!(r.count, 1);
        assert!(r.peaks[0].centroid.0.abs() < 1e-12 && r.peaks[0].centroid.1.abs() < 1e-12);

        let a = bump(g, -0.02, 0.0, 0.006);
        let b = bump(g, 0.02, 0.0, 0.006);
        let two = CenterField::new(g, a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect()).unwrap();
        assert_eq!(count_peaks(&two, &s).count, 2);
        for k in [1e-6, 0.5, 3.0, 1e8] {
            assert_eq!(count_peaks(&two.scaled(k), &s).count, 2);
            assert_eq!(count_peaks(&one.scaled(k), &s).count, 1);
        }
        assert_eq!(count_peaks(&CenterField::from_fn(g, |_, _| 0.0), &s).count, 0);
        // Outside the window.
        assert_eq!(count_peaks(&bump(g, 0.15, 0.15, 0.005), &s).count, 0);
    }

    #[test]
    fn single_cell_spikes_are_ignored() {
        let g = Grid::new(0.2, 40).unwrap();
        let mut vals = vec![0.0; g.num_cells()];
        vals[g.cell_index(20, 20)] = 1.0;
        vals[g.cell_index(17, 17)] = 1.0;
        vals[g.cell_index(17, 18)] = 1.0;
        let w = CenterField::new(g, vals).unwrap();
        assert_eq!(count_peaks(&w, &PeakSettings::default()).count, 1);
    }

    #[test]
    fn series_times_must_increase() {
        let mut s = MetricSeries::new("d");
        s.push(0.0, 1.0).unwrap();
        s.push(0.5, 2.0).unwrap();
        assert!(s.push(0.5, 3.0).is_err());
        assert_eq!(s.len(), 2);
    }

    // Node-level analog of the center stencil after a Poisson solve.
    fn round_trip_error(n: usize) -> f64 {
        let g = Grid::new(0.2, n).unwrap();
        let profile = VorticityProfile::SmoothBump {
            amplitude: 100.0,
            width: 0.04,
        };
        let omega = NodeField::from_fn(g, |x, y| profile.at(x, y));
        let psi = solve_poisson(&g, &omega, 1e-12).unwrap();
        let (u, v) = node_velocities(&psi);
        let mut err = 0.0_f64;
        for j in 2..=n - 2 {
            for i in 2..=n - 2 {
                let uy = (u.get(i, j + 1) - u.get(i, j - 1)) / (2.0 * g.dy());
                let vx = (v.get(i + 1, j) - v.get(i - 1, j)) / (2.0 * g.dx());
                err = err.max((uy - vx - omega.get(i, j)).abs());
            }
        }
        err
    }

    #[test]
    fn poisson_velocity_vorticity_round_trip_is_second_order() {
        let e: Vec<f64> = [64, 128, 256].iter().map(|&n| round_trip_error(n)).collect();
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "errors {e:?}, order {order}");
        }
    }
}
