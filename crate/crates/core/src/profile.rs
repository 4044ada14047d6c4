//! Scalar functions of time on `(0, inf)` with closed-form integrals where
//! available. Kernel densities and resolvent regular parts are profiles.

use std::fmt;
use std::sync::Arc;

use crate::quad;
use crate::special::{gamma, gamma_p, mittag_leffler, rgamma};

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Profile {
    Zero,
    Constant(f64),
    /// `scale * exp(-rate t)`
    Exponential { scale: f64, rate: f64 },
    /// `scale * t^exponent`, `exponent > -1`
    Power { scale: f64, exponent: f64 },
    /// `scale * t^exponent * exp(-rate t)`
    TemperedPower { scale: f64, exponent: f64, rate: f64 },
    /// `scale * (1 + t)^(-p)`
    AlgebraicDecay { scale: f64, p: f64 },
    /// `scale * t^(beta-1) E_{alpha,beta}(-t^alpha)`
    MittagLeffler { scale: f64, alpha: f64, beta: f64 },
    /// `scale * P(a, rate t)`, regularized lower incomplete gamma
    GammaRamp { scale: f64, a: f64, rate: f64 },
    Sum(Vec<Profile>),
    /// `base(t) * exp(-rate t)`
    Damped { base: Box<Profile>, rate: f64 },
    /// Piecewise-linear interpolant of uniform samples `values[n] ~ f(n dt)`,
    /// held constant past the last node.
    Sampled { dt: f64, values: Arc<Vec<f64>> },
    Custom(TimeFn),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Exponential { scale, rate } => write!(f, "{scale}*exp(-{rate} t)"),
            Profile::Power { scale, exponent } => write!(f, "{scale}*t^{exponent}"),
            Profile::TemperedPower { scale, exponent, rate } => {
                write!(f, "{scale}*t^{exponent}*exp(-{rate} t)")
            }
            Profile::AlgebraicDecay { scale, p } => write!(f, "{scale}*(1+t)^-{p}"),
            Profile::MittagLeffler { scale, alpha, beta } => {
                write!(f, "{scale}*t^({beta}-1)*E[{alpha},{beta}](-t^{alpha})")
            }
            Profile::GammaRamp { scale, a, rate } => write!(f, "{scale}*P({a}, {rate} t)"),
            Profile::Sum(parts) => f.debug_list().entries(parts).finish(),
            Profile::Damped { base, rate } => write!(f, "({base:?})*exp(-{rate} t)"),
            Profile::Sampled { dt, values } => write!(f, "Sampled(dt={dt}, n={})", values.len()),
            Profile::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Profile {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Profile::Custom(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Zero => true,
            Profile::Constant(c) => *c == 0.0,
            Profile::Sum(parts) => parts.iter().all(Profile::is_zero),
            _ => false,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant(c) => *c,
            Profile::Exponential { scale, rate } => scale * (-rate * t).exp(),
            Profile::Power { scale, exponent } => {
                if *exponent == 0.0 {
                    *scale
                } else {
                    scale * t.powf(*exponent)
                }
            }
            Profile::TemperedPower { scale, exponent, rate } => {
                scale * t.powf(*exponent) * (-rate * t).exp()
            }
            Profile::AlgebraicDecay { scale, p } => scale * (1.0 + t).powf(-p),
            Profile::MittagLeffler { scale, alpha, beta } => {
                if t <= 0.0 {
                    return if *beta < 1.0 {
                        f64::INFINITY * scale.signum()
                    } else if *beta == 1.0 {
                        *scale
                    } else {
                        0.0
                    };
                }
                let e = mittag_leffler(*alpha, *beta, -t.powf(*alpha)).unwrap_or(f64::NAN);
                scale * t.powf(beta - 1.0) * e
            }
            Profile::GammaRamp { scale, a, rate } => scale * gamma_p(*a, rate * t),
            Profile::Sum(parts) => parts.iter().map(|p| p.eval(t)).sum(),
            Profile::Damped { base, rate } => base.eval(t) * (-rate * t).exp(),
            Profile::Sampled { dt, values } => sampled_eval(*dt, values, t),
            Profile::Custom(f) => f(t),
        }
    }

    /// Limit of the profile as `t -> 0+` (may be infinite).
    pub fn value_at_zero(&self) -> f64 {
        match self {
            Profile::Power { scale, exponent } | Profile::TemperedPower { scale, exponent, .. } => {
                if *exponent < 0.0 {
                    f64::INFINITY * scale.signum()
                } else if *exponent == 0.0 {
                    *scale
                } else {
                    0.0
                }
            }
            Profile::Sum(parts) => parts.iter().map(Profile::value_at_zero).sum(),
            Profile::Damped { base, .. } => base.value_at_zero(),
            Profile::Custom(f) => {
                let v = f(0.0);
                if v.is_nan() {
                    f(1e-12)
                } else {
                    v
                }
            }
            _ => self.eval(0.0),
        }
    }

    pub fn singular_at_zero(&self) -> bool {
        !self.value_at_zero().is_finite()
    }

    /// `int_a^b f(t) dt` for `0 <= a <= b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            Profile::Zero => 0.0,
            Profile::Constant(c) => c * (b - a),
            Profile::Exponential { scale, rate } => {
                if *rate == 0.0 {
                    scale * (b - a)
                } else {
                    // e^{-ra} (1 - e^{-r(b-a)}) / r
                    scale * (-rate * a).exp() * (-(-rate * (b - a)).exp_m1()) / rate
                }
            }
            Profile::Power { scale, exponent } => {
                let q = exponent + 1.0;
                scale * (b.powf(q) - a.powf(q)) / q
            }
            Profile::TemperedPower { scale, exponent, rate } => {
                let q = exponent + 1.0;
                if *rate == 0.0 {
                    return scale * (b.powf(q) - a.powf(q)) / q;
                }
                let c = scale * gamma(q) * rate.powf(-q);
                let pa = gamma_p(q, rate * a);
                if pa > 0.5 {
                    let qa = statrs::function::gamma::gamma_ur(q, rate * a);
                    let qb = if (rate * b).is_finite() && rate * b < 1e300 {
                        statrs::function::gamma::gamma_ur(q, rate * b)
                    } else {
                        0.0
                    };
                    c * (qa - qb)
                } else {
                    c * (gamma_p(q, rate * b) - pa)
                }
            }
            Profile::AlgebraicDecay { scale, p } => {
                if (*p - 1.0).abs() < 1e-14 {
                    scale * ((1.0 + b) / (1.0 + a)).ln()
                } else {
                    scale * ((1.0 + a).powf(1.0 - p) - (1.0 + b).powf(1.0 - p)) / (p - 1.0)
                }
            }
            Profile::MittagLeffler { scale, alpha, beta } => {
                // d/dt [t^beta E_{alpha,beta+1}(-t^alpha)] = t^{beta-1} E_{alpha,beta}(-t^alpha)
                let anti = |t: f64| -> f64 {
                    if t <= 0.0 {
                        0.0
                    } else {
                        t.powf(*beta)
                            * mittag_leffler(*alpha, beta + 1.0, -t.powf(*alpha)).unwrap_or(f64::NAN)
                    }
                };
                scale * (anti(b) - anti(a))
            }
            Profile::GammaRamp { scale, a: s, rate } => {
                // int P(s, r t) dt = [v P(s, v) - s P(s+1, v)] / r, v = r t
                let anti = |t: f64| -> f64 {
                    let v = rate * t;
                    (v * gamma_p(*s, v) - s * gamma_p(s + 1.0, v)) / rate
                };
                scale * (anti(b) - anti(a))
            }
            Profile::Sum(parts) => parts.iter().map(|p| p.integral(a, b)).sum(),
            Profile::Damped { base, rate } => match **base {
                Profile::Constant(c) => c * ((-rate * a).exp() - (-rate * b).exp()) / rate,
                _ => quad::tanh_sinh(|t| self.eval(t), a, b, 1e-13).value,
            },
            Profile::Sampled { dt, values } => sampled_integral(*dt, values, a, b),
            Profile::Custom(f) => quad::tanh_sinh(|t| f(t), a, b, 1e-13).value,
        }
    }

    /// Time derivative; closed form where simple, central differences otherwise.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Profile::Zero | Profile::Constant(_) => 0.0,
            Profile::Exponential { scale, rate } => -rate * scale * (-rate * t).exp(),
            Profile::Power { scale, exponent } => {
                if *exponent == 0.0 {
                    0.0
                } else {
                    scale * exponent * t.powf(exponent - 1.0)
                }
            }
            Profile::TemperedPower { scale, exponent, rate } => {
                scale * (-rate * t).exp() * t.powf(exponent - 1.0) * (exponent - rate * t)
            }
            Profile::AlgebraicDecay { scale, p } => -p * scale * (1.0 + t).powf(-p - 1.0),
            Profile::GammaRamp { scale, a, rate } => {
                let v = rate * t;
                scale * rate * v.powf(a - 1.0) * (-v).exp() * rgamma(*a)
            }
            Profile::Sum(parts) => parts.iter().map(|p| p.derivative(t)).sum(),
            Profile::Damped { base, rate } => (base.derivative(t) - rate * base.eval(t)) * (-rate * t).exp(),
            _ => {
                let h = 1e-5 * t.abs().max(1e-3);
                let lo = (t - h).max(0.0);
                if lo == t {
                    (self.eval(t + h) - self.eval(t)) / h
                } else {
                    (self.eval(t + h) - self.eval(lo)) / (t + h - lo)
                }
            }
        }
    }

    pub fn scaled(self, s: f64) -> Profile {
        if s == 1.0 {
            return self;
        }
        match self {
            Profile::Zero => Profile::Zero,
            Profile::Constant(c) => Profile::Constant(c * s),
            Profile::Exponential { scale, rate } => Profile::Exponential { scale: scale * s, rate },
            Profile::Power { scale, exponent } => Profile::Power { scale: scale * s, exponent },
            Profile::TemperedPower { scale, exponent, rate } => {
                Profile::TemperedPower { scale: scale * s, exponent, rate }
            }
            Profile::AlgebraicDecay { scale, p } => Profile::AlgebraicDecay { scale: scale * s, p },
            Profile::MittagLeffler { scale, alpha, beta } => {
                Profile::MittagLeffler { scale: scale * s, alpha, beta }
            }
            Profile::GammaRamp { scale, a, rate } => Profile::GammaRamp { scale: scale * s, a, rate },
            Profile::Sum(parts) => Profile::Sum(parts.into_iter().map(|p| p.scaled(s)).collect()),
            Profile::Damped { base, rate } => Profile::Damped { base: Box::new(base.scaled(s)), rate },
            Profile::Sampled { dt, values } => Profile::Sampled {
                dt,
                values: Arc::new(values.iter().map(|v| v * s).collect()),
            },
            Profile::Custom(f) => Profile::Custom(Arc::new(move |t| s * f(t))),
        }
    }
}

fn sampled_eval(dt: f64, values: &[f64], t: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let x = (t / dt).max(0.0);
    let i = x.floor() as usize;
    if i + 1 >= values.len() {
        return *values.last().unwrap();
    }
    let f = x - i as f64;
    values[i] * (1.0 - f) + values[i + 1] * f
}

fn sampled_integral(dt: f64, values: &[f64], a: f64, b: f64) -> f64 {
    // exact integral of the piecewise-linear interpolant
    let mut s = 0.0;
    let mut lo = a;
    while lo < b {
        let cell = (lo / dt).floor();
        let hi = ((cell + 1.0) * dt).min(b);
        let hi = if hi <= lo { b.min(lo + dt) } else { hi };
        s += 0.5 * (hi - lo) * (sampled_eval(dt, values, lo) + sampled_eval(dt, values, hi));
        lo = hi;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_integral(p: &Profile, a: f64, b: f64, tol: f64) {
        let exact = p.integral(a, b);
        let num = quad::tanh_sinh(|t| p.eval(t), a, b, 1e-14).value;
        assert!((exact - num).abs() <= tol * num.abs().max(1e-12), "{p:?} on [{a},{b}]: {exact} vs {num}");
    }

    #[test]
    fn closed_form_integrals_match_quadrature() {
        let cases = vec![
            Profile::Exponential { scale: 2.0, rate: 1.5 },
            Profile::Power { scale: 1.0 / gamma(0.5), exponent: -0.5 },
            Profile::TemperedPower { scale: 0.7, exponent: -0.4, rate: 2.0 },
            Profile::AlgebraicDecay { scale: 1.0, p: 2.0 },
            Profile::MittagLeffler { scale: 1.0, alpha: 0.5, beta: 0.8 },
            Profile::MittagLeffler { scale: 1.0, alpha: 0.6, beta: 1.0 },
            Profile::GammaRamp { scale: 1.3, a: 0.6, rate: 2.0 },
        ];
        for p in &cases {
            for &(a, b) in &[(0.0, 0.1), (0.0, 1.0), (0.3, 0.7), (1.0, 5.0), (2.0, 2.001)] {
                check_integral(p, a, b, 1e-10);
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let cases = vec![
            Profile::Exponential { scale: 2.0, rate: 1.5 },
            Profile::TemperedPower { scale: 0.7, exponent: -0.4, rate: 2.0 },
            Profile::AlgebraicDecay { scale: 1.0, p: 2.0 },
            Profile::GammaRamp { scale: 1.3, a: 0.6, rate: 2.0 },
        ];
        for p in &cases {
            for &t in &[0.2, 1.0, 3.0] {
                let h = 1e-6;
                let fd = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
                assert!((fd - p.derivative(t)).abs() < 1e-6 * fd.abs().max(1.0), "{p:?} at {t}");
            }
        }
    }

    #[test]
    fn sampled_integral_is_trapezoid() {
        let p = Profile::Sampled { dt: 0.5, values: Arc::new(vec![0.0, 1.0, 4.0]) };
        assert!((p.integral(0.0, 1.0) - (0.25 + 1.25)).abs() < 1e-15);
        assert!((p.integral(0.25, 0.75) - 0.625).abs() < 1e-15);
        assert_eq!(p.eval(3.0), 4.0);
    }

    #[test]
    fn values_at_zero() {
        assert!(Profile::Power { scale: 1.0, exponent: -0.5 }.singular_at_zero());
        assert_eq!(Profile::AlgebraicDecay { scale: 1.0, p: 3.0 }.value_at_zero(), 1.0);
        assert_eq!(Profile::MittagLeffler { scale: 2.0, alpha: 0.5, beta: 1.0 }.value_at_zero(), 2.0);
    }
}
