use crate::profile::Profile;

/// Product-integration weights `w[m] = int_{m dt}^{(m+1) dt} k(s) ds`.
///
/// With right-endpoint samples `y[j] ~ y(t_j)` standing for `y` on
/// `(t_{j-1}, t_j]`, the convolution is `(k * y)(t_n) ~ sum_{j=1..n} w[n-j] y[j]`.
/// Sample `y[0]` belongs to no cell and never enters a convolution.
/// An empty table is the zero function.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    pub dt: f64,
    pub w: Vec<f64>,
    /// Set when every weight equals this value (convolution is a running sum).
    uniform: Option<f64>,
}

/// Weights of `profile` on `N` cells of width `dt` (entries `0..=N`).
pub fn conv_weights(profile: &Profile, dt: f64, n: usize) -> ConvWeights {
    if profile.is_zero() {
        return ConvWeights::empty(dt);
    }
    if let Profile::Constant(c) = profile {
        return ConvWeights::uniform(*c, dt, n);
    }
    let w = (0..=n)
        .map(|m| profile.integral(m as f64 * dt, (m + 1) as f64 * dt))
        .collect();
    ConvWeights { dt, w, uniform: None }
}

impl ConvWeights {
    pub fn empty(dt: f64) -> Self {
        ConvWeights { dt, w: Vec::new(), uniform: None }
    }

    /// Weights of the constant function `c`.
    pub fn uniform(c: f64, dt: f64, n: usize) -> Self {
        if c == 0.0 {
            return ConvWeights::empty(dt);
        }
        ConvWeights { dt, w: vec![c * dt; n + 1], uniform: Some(c * dt) }
    }

    pub fn from_vec(dt: f64, w: Vec<f64>) -> Self {
        ConvWeights { dt, w, uniform: None }
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn get(&self, m: usize) -> f64 {
        self.w.get(m).copied().unwrap_or(0.0)
    }

    /// `sum_{m < n} w[m]`, the rule's value of `int_0^{t_n} k`.
    pub fn cumulative(&self, n: usize) -> f64 {
        self.w.iter().take(n).sum()
    }

    /// Discrete convolution of two tables, `(a * b)[m] = sum_{l<=m} a[m-l] b[l]`;
    /// the table of the composed kernel consistent with nested application.
    pub fn compose(&self, other: &ConvWeights) -> ConvWeights {
        if self.is_empty() || other.is_empty() {
            return ConvWeights::empty(self.dt);
        }
        let n = self.len().min(other.len());
        let w = match (self.uniform, other.uniform) {
            (Some(u), _) => running_sum(&other.w[..n], u),
            (_, Some(u)) => running_sum(&self.w[..n], u),
            _ => (0..n)
                .map(|m| (0..=m).map(|l| self.w[m - l] * other.w[l]).sum())
                .collect(),
        };
        ConvWeights { dt: self.dt, w, uniform: None }
    }

    /// `y[n] = sum_{j=1..n} w[n-j] x[j]` for every `n`, with `y[0] = 0`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        if self.is_empty() {
            return y;
        }
        if let Some(u) = self.uniform {
            let mut acc = 0.0;
            for n in 1..x.len() {
                acc += x[n];
                y[n] = u * acc;
            }
            return y;
        }
        for n in 1..x.len() {
            let mut s = 0.0;
            for j in 1..=n {
                s += self.get(n - j) * x[j];
            }
            y[n] = s;
        }
        y
    }
}

fn running_sum(w: &[f64], u: f64) -> Vec<f64> {
    let mut acc = 0.0;
    w.iter()
        .map(|v| {
            acc += v;
            u * acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use proptest::prelude::*;

    #[test]
    fn exponential_first_weight() {
        let k = Kernel::parse("exponential(beta=1.0)").unwrap();
        let w = conv_weights(&k.density, 0.1, 10);
        assert!((w.w[0] - 0.09516258196404048).abs() < 1e-16);
    }

    #[test]
    fn abel_first_weight_is_exact_moment() {
        let k = Kernel::parse("abel(alpha=0.5)").unwrap();
        let w = conv_weights(&k.density, 0.01, 10);
        // 2 sqrt(0.01)/Gamma(1/2)
        assert!((w.w[0] - 0.11283791670955126).abs() < 1e-15);
    }

    #[test]
    fn dirac_density_gives_empty_table() {
        let k = Kernel::parse("dirac()").unwrap();
        let w = conv_weights(&k.density, 0.1, 10);
        assert!(w.is_empty());
        assert!(w.apply(&[1.0, 2.0, 3.0]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn weight_sums_match_closed_integrals() {
        let dt = 10.0 / 1024.0;
        let e = Kernel::parse("exponential(beta=1.0)").unwrap();
        let a = Kernel::parse("abel(alpha=0.5)").unwrap();
        let we = conv_weights(&e.density, dt, 1024);
        let wa = conv_weights(&a.density, dt, 1024);
        for n in [1usize, 7, 100, 1024] {
            let t = n as f64 * dt;
            assert!((we.cumulative(n) - (1.0 - (-t).exp())).abs() < 1e-10);
            assert!((wa.cumulative(n) - 2.0 * t.sqrt() / std::f64::consts::PI.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_compose_matches_general() {
        let k = Kernel::parse("exponential(beta=1.5)").unwrap();
        let w = conv_weights(&k.density, 0.05, 40);
        let one = ConvWeights::uniform(1.0, 0.05, 40);
        let general = ConvWeights::from_vec(0.05, one.w.clone());
        let a = one.compose(&w);
        let b = general.compose(&w);
        for (x, y) in a.w.iter().zip(&b.w) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    proptest! {
        // applying a composed table equals nested application
        #[test]
        fn compose_is_nested_apply(x in prop::collection::vec(-1.0f64..1.0, 2..30), b in 0.2f64..3.0) {
            let n = x.len();
            let k = Kernel::new(crate::kernels::KernelSpec::Exponential { beta: b }).unwrap();
            let a = Kernel::new(crate::kernels::KernelSpec::Abel { alpha: 0.4 }).unwrap();
            let wk = conv_weights(&k.density, 0.1, n);
            let wa = conv_weights(&a.density, 0.1, n);
            let lhs = wk.compose(&wa).apply(&x);
            let rhs = wk.apply(&wa.apply(&x));
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()));
            }
        }
    }
}
