//! Forward marching of linear second-kind Volterra equations
//! `c0 x(t_n) + sum_k coeff_k (w_k * x)(t_n) = f(t_n)`.

use thiserror::Error;

use crate::kernels::ConvWeights;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolterraError {
    #[error("degenerate step coefficient {diagonal:e} at step {step}")]
    Degenerate { step: usize, diagonal: f64 },
    #[error("forcing has {got} samples, expected {want}")]
    ForcingLength { got: usize, want: usize },
    #[error("non-finite solution value at step {step}")]
    NonFinite { step: usize },
}

#[derive(Debug, Clone)]
pub struct VolterraOp {
    pub c0: f64,
    pub terms: Vec<(f64, ConvWeights)>,
    pub dt: f64,
    pub n: usize,
}

impl VolterraOp {
    pub fn new(c0: f64, dt: f64, n: usize) -> Self {
        VolterraOp { c0, terms: Vec::new(), dt, n }
    }

    /// Adds `coeff * (w * x)`; zero coefficients and empty tables are dropped.
    pub fn with_term(mut self, coeff: f64, w: ConvWeights) -> Self {
        if coeff != 0.0 && !w.is_empty() {
            self.terms.push((coeff, w));
        }
        self
    }

    /// `sum_k coeff_k w_k[m]` for `m = 0..=N`.
    pub fn effective_weights(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.n + 1];
        for (c, w) in &self.terms {
            for (m, t) in total.iter_mut().enumerate() {
                *t += c * w.get(m);
            }
        }
        total
    }

    /// Coefficient of the unknown in each step's scalar equation.
    pub fn diagonal(&self) -> f64 {
        self.c0 + self.terms.iter().map(|(c, w)| c * w.get(0)).sum::<f64>()
    }

    /// Solves for `x[0..=N]`. At `t = 0` every convolution vanishes, so
    /// `x[0] = f[0]/c0`; later steps move the history to the right-hand side.
    pub fn march(&self, f: &[f64]) -> Result<Vec<f64>, VolterraError> {
        if f.len() != self.n + 1 {
            return Err(VolterraError::ForcingLength { got: f.len(), want: self.n + 1 });
        }
        let w = self.effective_weights();
        march_with(self.c0, &w, f)
    }
}

pub(crate) fn march_with(c0: f64, w: &[f64], f: &[f64]) -> Result<Vec<f64>, VolterraError> {
    let n = f.len() - 1;
    let mut x = vec![0.0; n + 1];
    if c0 == 0.0 {
        return Err(VolterraError::Degenerate { step: 0, diagonal: c0 });
    }
    x[0] = f[0] / c0;
    let diag = c0 + w.first().copied().unwrap_or(0.0);
    if n > 0 && (diag == 0.0 || !diag.is_finite()) {
        return Err(VolterraError::Degenerate { step: 1, diagonal: diag });
    }
    for i in 1..=n {
        let mut hist = 0.0;
        for j in 1..i {
            hist += w[i - j] * x[j];
        }
        x[i] = (f[i] - hist) / diag;
        if !x[i].is_finite() {
            return Err(VolterraError::NonFinite { step: i });
        }
    }
    Ok(x)
}

/// History part of `(w * x)(t_n)`: `sum_{j=1..n-1} w[n-j] x[j]`.
pub fn convolve_tail(w: &ConvWeights, history: &[f64], n: usize) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    (1..n.min(history.len())).map(|j| w.get(n - j) * history[j]).sum()
}
