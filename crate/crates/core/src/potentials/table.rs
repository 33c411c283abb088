//! Piecewise cubic Hermite interpolation for sampled potentials.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, tail_eps: f64) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidPotential("grid and values differ in length".into()));
        }
        if grid.len() < 4 {
            return Err(Error::InvalidPotential("tabulated potential needs at least 4 samples".into()));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidPotential("tabulated grid must start at x = 0".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential("tabulated grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("tabulated values must be finite".into()));
        }
        let last = *values.last().unwrap();
        if last.abs() >= tail_eps {
            return Err(Error::InvalidPotential(format!(
                "tabulated potential must end where |V| < {tail_eps:e} (last value {last:e})"
            )));
        }
        let slopes = three_point_slopes(&grid, &values);
        Ok(Table { grid, values, slopes })
    }

    pub fn x_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    fn locate(&self, x: f64) -> usize {
        match self.grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.grid.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.grid.len() - 2),
        }
    }

    /// Value and first two derivatives of the interpolant.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        let hi = self.x_max();
        if x < 0.0 || x > hi {
            return Err(Error::OutOfRange { x, lo: 0.0, hi });
        }
        Ok(self.eval_unchecked(x))
    }

    pub fn eval_unchecked(&self, x: f64) -> (f64, f64, f64) {
        if x >= self.x_max() {
            return (0.0, 0.0, 0.0);
        }
        let i = self.locate(x);
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        let d2v = ((12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1)
            / (h * h);
        (v, dv, d2v)
    }

    pub fn scaled(&self, f: f64) -> Table {
        Table {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * f).collect(),
            slopes: self.slopes.iter().map(|v| v * f).collect(),
        }
    }
}

/// Second-order derivative estimates on a non-uniform grid.
fn three_point_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut s = vec![0.0; n];
    let d = |i: usize, j: usize, k: usize, at: usize| {
        // derivative at x[at] of the parabola through i, j, k
        let (xi, xj, xk) = (x[i], x[j], x[k]);
        let xa = x[at];
        y[i] * ((xa - xj) + (xa - xk)) / ((xi - xj) * (xi - xk))
            + y[j] * ((xa - xi) + (xa - xk)) / ((xj - xi) * (xj - xk))
            + y[k] * ((xa - xi) + (xa - xj)) / ((xk - xi) * (xk - xj))
    };
    s[0] = d(0, 1, 2, 0);
    s[n - 1] = d(n - 3, n - 2, n - 1, n - 1);
    for i in 1..n - 1 {
        s[i] = d(i - 1, i, i + 1, i);
    }
    s
}
