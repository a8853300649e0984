//! One-dimensional monotone rearrangement `T = Fbar^{-1} o F`.

use crate::fields::IntervalDensity;

/// Number of fine quadrature cells per output grid point used for the CDF tables.
const CELLS_PER_NODE: usize = 32;
const MIN_CELLS: usize = 8192;

/// A monotone map sampled on a uniform grid of its source interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl MonotoneMap {
    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Second-order finite-difference derivative at the grid nodes
    /// (central inside, one-sided three-point at the ends).
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.values.len();
        let h = self.spacing();
        let t = &self.values;
        (0..n)
            .map(|k| {
                if k == 0 {
                    (-3.0 * t[0] + 4.0 * t[1] - t[2]) / (2.0 * h)
                } else if k == n - 1 {
                    (3.0 * t[n - 1] - 4.0 * t[n - 2] + t[n - 3]) / (2.0 * h)
                } else {
                    (t[k + 1] - t[k - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Cumulative trapezoid integral of the map, zero at the left end: a convex potential.
    pub fn potential(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.values.len());
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// Piecewise-linear interpolation; constant beyond the ends.
    pub fn interpolate(&self, x: f64) -> f64 {
        interpolate(&self.grid, &self.values, x)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let s = (x - x0) / (x1 - x0);
    ys[k - 1] + s * (ys[k] - ys[k - 1])
}

/// Normalized cumulative trapezoid table of a density on its interval.
fn cdf_table(density: &IntervalDensity, cells: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = density.interval();
    let h = (hi - lo) / cells as f64;
    let xs: Vec<f64> = (0..=cells).map(|k| lo + k as f64 * h).collect();
    let mut cdf = Vec::with_capacity(cells + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for w in xs.windows(2) {
        acc += 0.5 * h * (density.eval(w[0]) + density.eval(w[1]));
        cdf.push(acc);
    }
    let total = acc;
    cdf.iter_mut().for_each(|v| *v /= total);
    (xs, cdf)
}

/// Monotone map pushing `source` to `target`, sampled at `grid_n` equispaced
/// nodes spanning the source interval.
pub fn solve_monotone_1d(
    source: &IntervalDensity,
    target: &IntervalDensity,
    grid_n: usize,
) -> MonotoneMap {
    assert!(grid_n >= 3, "need at least three grid nodes");
    let cells = (CELLS_PER_NODE * grid_n).max(MIN_CELLS);
    let (src_x, src_cdf) = cdf_table(source, cells);
    let (tgt_x, tgt_cdf) = cdf_table(target, cells);
    let (lo, hi) = source.interval();
    let h = (hi - lo) / (grid_n - 1) as f64;
    let grid: Vec<f64> = (0..grid_n).map(|k| lo + k as f64 * h).collect();
    let values = grid
        .iter()
        .map(|&x| {
            let p = interpolate(&src_x, &src_cdf, x);
            // the target CDF is strictly increasing, so its inverse is interpolation with axes swapped
            interpolate(&tgt_cdf, &tgt_x, p)
        })
        .collect();
    MonotoneMap { grid, values }
}
