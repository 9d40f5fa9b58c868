//! Natural cubic spline with exact antiderivative.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
    /// `∫_{x_0}^{x_k}` at every knot.
    cumulative: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InsufficientData(format!(
                "spline needs at least 2 matching samples, got {} knots and {} values",
                n,
                y.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvariantViolation(
                "spline knots must be strictly increasing".into(),
            ));
        }
        let m = second_derivatives(&x, &y);
        let mut spline = Self {
            x,
            y,
            m,
            cumulative: vec![0.0; n],
        };
        for k in 1..n {
            let h = spline.x[k] - spline.x[k - 1];
            spline.cumulative[k] = spline.cumulative[k - 1] + spline.piece_integral(k - 1, h);
        }
        Ok(spline)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    /// Index `k` of the piece `[x_k, x_{k+1}]` containing `t` (clamped to the end pieces).
    pub fn piece(&self, t: f64) -> usize {
        let k = self.x.partition_point(|&xi| xi <= t);
        k.saturating_sub(1).min(self.x.len() - 2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.piece(t);
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - t) / h;
        let b = (t - self.x[k]) / h;
        a * self.y[k]
            + b * self.y[k + 1]
            + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h * h / 6.0
    }

    /// `∫_{x_k}^{x_k + u}` on piece `k`.
    fn piece_integral(&self, k: usize, u: f64) -> f64 {
        let h = self.x[k + 1] - self.x[k];
        let (y0, y1, m0, m1) = (self.y[k], self.y[k + 1], self.m[k], self.m[k + 1]);
        // in terms of b = s/h: A = 1 - b
        let b = u / h;
        let int_a = h * (b - 0.5 * b * b);
        let int_b = h * 0.5 * b * b;
        let int_a3 = h * (1.0 - (1.0 - b).powi(4)) / 4.0;
        let int_b3 = h * b.powi(4) / 4.0;
        y0 * int_a + y1 * int_b + ((int_a3 - int_a) * m0 + (int_b3 - int_b) * m1) * h * h / 6.0
    }

    /// `∫_{x_0}^{t}`.
    pub fn integral(&self, t: f64) -> f64 {
        let k = self.piece(t);
        self.cumulative[k] + self.piece_integral(k, t - self.x[k])
    }

    /// `∫_{x_0}^{x_k}`.
    pub fn integral_at_knot(&self, k: usize) -> f64 {
        self.cumulative[k]
    }
}

fn second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations
    let inner = n - 2;
    let mut diag = vec![0.0; inner];
    let mut rhs = vec![0.0; inner];
    let mut upper = vec![0.0; inner];
    for i in 0..inner {
        let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
    }
    for i in 1..inner {
        let lower = x[i + 1] - x[i];
        let w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for i in (0..inner - 1).rev() {
        m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
    m
}
