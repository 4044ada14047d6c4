//! Spectral Galerkin setup on `(0, L)` with Dirichlet conditions: eigenvalues
//! `mu_i = (i pi / L)^2`, orthonormal modes `sqrt(2/L) sin(i pi x / L)`,
//! projected initial data and the compatibility condition on the data.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::kernels::{Kernel, Resolvent};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("{name} = {value} must be {rule}")]
    OutOfRange { name: &'static str, value: f64, rule: &'static str },
    #[error("well-posedness needs gamma >= tau c^2 and nu > 0 (gamma = {gamma}, tau c^2 = {tau_c2}, nu = {nu})")]
    NotWellPosed { gamma: f64, tau_c2: f64, nu: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizationError {
    #[error("domain length must be positive and finite, got {0}")]
    Length(f64),
    #[error("mode count must be at least 1")]
    NoModes,
    #[error("{datum}: {reason}")]
    Datum { datum: &'static str, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("compatibility violated: |xi1 - A xi2| = {defect:e} exceeds {bound:e} ({rule})")]
pub struct CompatibilityViolation {
    pub defect: f64,
    pub bound: f64,
    pub rule: String,
}

/// Coefficients `tau`, `c`, `gamma`, `nu` of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationParams {
    pub tau: f64,
    pub c: f64,
    pub gamma: f64,
    pub nu: f64,
}

impl EquationParams {
    pub fn new(tau: f64, c: f64, gamma: f64, nu: f64) -> Result<Self, ParamsError> {
        let p = EquationParams { tau, c, gamma, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        for (name, value) in [("tau", self.tau), ("c", self.c), ("gamma", self.gamma)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParamsError::OutOfRange { name, value, rule: "positive" });
            }
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(ParamsError::OutOfRange { name: "nu", value: self.nu, rule: "nonnegative" });
        }
        Ok(())
    }

    pub fn tau_c2(&self) -> f64 {
        self.tau * self.c * self.c
    }

    /// `gamma >= tau c^2` and `nu > 0`.
    pub fn wellposed_ok(&self) -> bool {
        self.gamma >= self.tau_c2() && self.nu > 0.0
    }

    /// `gamma > tau c^2` and `nu > 0`.
    pub fn decay_ok(&self) -> bool {
        self.gamma > self.tau_c2() && self.nu > 0.0
    }

    pub fn require_wellposed(&self) -> Result<(), ParamsError> {
        self.validate()?;
        if self.wellposed_ok() {
            Ok(())
        } else {
            Err(ParamsError::NotWellPosed { gamma: self.gamma, tau_c2: self.tau_c2(), nu: self.nu })
        }
    }
}

/// Closed-form initial profiles on `(0, L)`.
#[derive(Clone)]
pub enum InitFunction {
    /// `amp * sin(k pi x / L)`
    SinModes { k: usize, amp: f64 },
    /// `amp * exp(-((x - center)/width)^2)`
    Gaussian { center: f64, width: f64, amp: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for InitFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitFunction::Custom(_) => write!(f, "Custom"),
            other => write!(f, "{other}"),
        }
    }
}

impl PartialEq for InitFunction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (InitFunction::SinModes { k: a, amp: b }, InitFunction::SinModes { k: c, amp: d }) => a == c && b == d,
            (
                InitFunction::Gaussian { center: a, width: b, amp: c },
                InitFunction::Gaussian { center: d, width: e, amp: f },
            ) => a == d && b == e && c == f,
            (InitFunction::Custom(a), InitFunction::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for InitFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitFunction::SinModes { k, amp } => write!(f, "sin_modes(k={k}, amp={amp:?})"),
            InitFunction::Gaussian { center, width, amp } => {
                write!(f, "gaussian(center={center:?}, width={width:?}, amp={amp:?})")
            }
            InitFunction::Custom(_) => write!(f, "custom"),
        }
    }
}

impl FromStr for InitFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (name, body) = s
            .strip_suffix(')')
            .and_then(|b| b.split_once('('))
            .ok_or_else(|| format!("`{s}` is not of the form name(key=value, ...)"))?;
        let mut kv = Vec::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("`{part}` is not key=value"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("`{}` is not a number", v.trim()))?;
            kv.push((k.trim().to_string(), v));
        }
        let get = |key: &str, default: Option<f64>| -> Result<f64, String> {
            kv.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| format!("{name}: missing `{key}`"))
        };
        let allowed: &[&str] = match name.trim() {
            "sin_modes" => &["k", "amp"],
            "gaussian" => &["center", "width", "amp"],
            other => return Err(format!("unknown initial profile `{other}` (expected sin_modes or gaussian)")),
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(format!("{name}: unknown key `{k}`"));
        }
        match name.trim() {
            "sin_modes" => {
                let k = get("k", None)?;
                if k < 1.0 || k.fract() != 0.0 {
                    return Err(format!("sin_modes: k must be a positive integer, got {k}"));
                }
                Ok(InitFunction::SinModes { k: k as usize, amp: get("amp", Some(1.0))? })
            }
            _ => {
                let width = get("width", None)?;
                if !(width > 0.0) {
                    return Err(format!("gaussian: width must be positive, got {width}"));
                }
                Ok(InitFunction::Gaussian { center: get("center", None)?, width, amp: get("amp", Some(1.0))? })
            }
        }
    }
}

impl InitFunction {
    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match self {
            InitFunction::SinModes { k, amp } => amp * (*k as f64 * std::f64::consts::PI * x / length).sin(),
            InitFunction::Gaussian { center, width, amp } => amp * (-((x - center) / width).powi(2)).exp(),
            InitFunction::Custom(f) => f(x),
        }
    }
}

/// One initial datum: zero, explicit mode coefficients, or a profile to project.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialDatum {
    #[default]
    Zero,
    Coefficients(Vec<f64>),
    Function(InitFunction),
}

/// Initial data `psi(0)`, `psi_t(0)` and `(K * psi_t)_t(0)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialData {
    pub psi0: InitialDatum,
    pub psi1: InitialDatum,
    pub psi2: InitialDatum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinSystem {
    pub length: f64,
    pub n: usize,
    pub mu: Vec<f64>,
    pub xi0: Vec<f64>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
}

impl GalerkinSystem {
    /// Keeps only the modes listed in `order`, in that order.
    pub fn select_modes(&self, order: &[usize]) -> GalerkinSystem {
        let pick = |v: &Vec<f64>| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        GalerkinSystem {
            length: self.length,
            n: order.len(),
            mu: pick(&self.mu),
            xi0: pick(&self.xi0),
            xi1: pick(&self.xi1),
            xi2: pick(&self.xi2),
        }
    }

    /// Mode-wise `a * self + b * other` (same domain and mode count).
    pub fn combine(&self, a: f64, other: &GalerkinSystem, b: f64) -> GalerkinSystem {
        let lin = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        GalerkinSystem {
            length: self.length,
            n: self.n,
            mu: self.mu.clone(),
            xi0: lin(&self.xi0, &other.xi0),
            xi1: lin(&self.xi1, &other.xi1),
            xi2: lin(&self.xi2, &other.xi2),
        }
    }
}

pub fn eigenvalues(length: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| (i as f64 * std::f64::consts::PI / length).powi(2)).collect()
}

/// Orthonormal Dirichlet mode `i >= 1`.
pub fn mode(i: usize, length: f64, x: f64) -> f64 {
    (2.0 / length).sqrt() * (i as f64 * std::f64::consts::PI * x / length).sin()
}

/// Coefficients of `f` on the first `n` modes by composite Simpson with
/// `8n` panels, which is exact on the span of those modes.
pub fn project<F: Fn(f64) -> f64>(f: F, length: f64, n: usize) -> Vec<f64> {
    let panels = 8 * n;
    let values: Vec<f64> = (0..=panels).map(|k| f(k as f64 * length / panels as f64)).collect();
    (1..=n)
        .map(|i| {
            let h = length / panels as f64;
            let mut s = 0.0;
            for (k, v) in values.iter().enumerate() {
                let w = if k == 0 || k == panels { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * v * mode(i, length, k as f64 * h);
            }
            s * h / 3.0
        })
        .collect()
}

fn datum_coeffs(d: &InitialDatum, name: &'static str, length: f64, n: usize) -> Result<Vec<f64>, DiscretizationError> {
    let v = match d {
        InitialDatum::Zero => vec![0.0; n],
        InitialDatum::Coefficients(c) => {
            if c.len() > n {
                return Err(DiscretizationError::Datum {
                    datum: name,
                    reason: format!("{} coefficients given for {n} modes", c.len()),
                });
            }
            let mut v = c.clone();
            v.resize(n, 0.0);
            v
        }
        InitialDatum::Function(f) => project(|x| f.eval(x, length), length, n),
    };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(DiscretizationError::Datum { datum: name, reason: "non-finite coefficient".into() });
    }
    Ok(v)
}

pub fn build_system(length: f64, n: usize, init: &InitialData) -> Result<GalerkinSystem, DiscretizationError> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(DiscretizationError::Length(length));
    }
    if n == 0 {
        return Err(DiscretizationError::NoModes);
    }
    Ok(GalerkinSystem {
        length,
        n,
        mu: eigenvalues(length, n),
        xi0: datum_coeffs(&init.psi0, "psi0", length, n)?,
        xi1: datum_coeffs(&init.psi1, "psi1", length, n)?,
        xi2: datum_coeffs(&init.psi2, "psi2", length, n)?,
    })
}

/// Without a point mass in the kernel the data must satisfy `psi1 = A psi2`.
pub fn validate_compatibility(
    system: &GalerkinSystem,
    kernel: &Kernel,
    resolvent: &Resolvent,
) -> Result<(), CompatibilityViolation> {
    if kernel.point_mass != 0.0 {
        return Ok(());
    }
    let a = resolvent.atom;
    let defect = system.xi1.iter().zip(&system.xi2).map(|(x1, x2)| (x1 - a * x2).powi(2)).sum::<f64>().sqrt();
    let norm2 = system.xi2.iter().map(|x| x * x).sum::<f64>().sqrt();
    let bound = 1e-12 * (1.0 + norm2);
    if defect <= bound {
        Ok(())
    } else {
        let rule = if a == 0.0 {
            "kernel without point mass and A = 0 forces psi1 = 0".to_string()
        } else {
            format!("kernel without point mass requires psi1 = A psi2 with A = {a}")
        };
        Err(CompatibilityViolation { defect, bound, rule })
    }
}

/// `sum_i mu_i c_i^2`, the squared gradient norm of a mode expansion.
pub fn grad_norm_sq(mu: &[f64], c: &[f64]) -> f64 {
    mu.iter().zip(c).map(|(m, x)| m * x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::resolvent;
    use crate::quad;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn eigenvalues_on_pi_interval() {
        assert_eq!(eigenvalues(PI, 3).iter().map(|m| m.round()).collect::<Vec<_>>(), vec![1.0, 4.0, 9.0]);
    }

    #[test]
    fn sine_projects_to_first_mode() {
        let init = InitialData { psi0: InitialDatum::Function("sin_modes(k=1, amp=1.0)".parse().unwrap()), ..Default::default() };
        let s = build_system(PI, 3, &init).unwrap();
        assert!((s.xi0[0] - (PI / 2.0).sqrt()).abs() < 1e-13);
        assert!(s.xi0[1].abs() < 1e-13 && s.xi0[2].abs() < 1e-13);
    }

    #[test]
    fn zero_data() {
        let s = build_system(2.0, 4, &InitialData::default()).unwrap();
        assert!(s.xi0.iter().chain(&s.xi1).chain(&s.xi2).all(|v| *v == 0.0));
    }

    #[test]
    fn init_function_grammar() {
        let f: InitFunction = "gaussian(center=1.5, width=0.3)".parse().unwrap();
        assert_eq!(f, InitFunction::Gaussian { center: 1.5, width: 0.3, amp: 1.0 });
        let again: InitFunction = f.to_string().parse().unwrap();
        assert_eq!(f, again);
        assert!("sin_modes(k=0.5)".parse::<InitFunction>().is_err());
        assert!("bump(k=1)".parse::<InitFunction>().is_err());
    }

    #[test]
    fn compatibility_rules() {
        let dt = 0.01;
        let exp = Kernel::parse("exponential(beta=1.0)").unwrap();
        let abel = Kernel::parse("abel(alpha=0.5)").unwrap();
        let dirac = Kernel::parse("dirac()").unwrap();
        let sys = |x1: Vec<f64>, x2: Vec<f64>| GalerkinSystem {
            length: PI,
            n: 2,
            mu: eigenvalues(PI, 2),
            xi0: vec![1.0, 0.0],
            xi1: x1,
            xi2: x2,
        };
        let re = resolvent(&exp, dt, 10).unwrap();
        assert!(validate_compatibility(&sys(vec![0.3, 0.1], vec![0.3, 0.1]), &exp, &re).is_ok());
        assert!(validate_compatibility(&sys(vec![0.3, 0.1], vec![0.0, 0.1]), &exp, &re).is_err());
        let ra = resolvent(&abel, dt, 10).unwrap();
        let e = validate_compatibility(&sys(vec![0.1, 0.0], vec![0.0, 0.0]), &abel, &ra).unwrap_err();
        assert!(e.rule.contains("psi1 = 0"));
        let rd = resolvent(&dirac, dt, 10).unwrap();
        assert!(validate_compatibility(&sys(vec![5.0, 1.0], vec![0.0, 0.0]), &dirac, &rd).is_ok());
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(c in prop::collection::vec(-2.0f64..2.0, 1..12), len in 0.5f64..5.0) {
            let n = c.len();
            let cc = c.clone();
            let f = move |x: f64| cc.iter().enumerate().map(|(i, a)| a * mode(i + 1, len, x)).sum::<f64>();
            let p = project(f, len, n);
            for i in 0..n {
                prop_assert!((p[i] - c[i]).abs() < 1e-10);
            }
        }

        #[test]
        fn discrete_parseval_for_gradient(c in prop::collection::vec(-2.0f64..2.0, 1..8), len in 0.5f64..4.0) {
            let n = c.len();
            let mu = eigenvalues(len, n);
            let cc = c.clone();
            let df = move |x: f64| {
                cc.iter().enumerate().map(|(i, a)| {
                    let k = (i + 1) as f64 * PI / len;
                    a * (2.0 / len).sqrt() * k * (k * x).cos()
                }).sum::<f64>()
            };
            let direct = quad::simpson(|x| df(x).powi(2), 0.0, len, 4000);
            let spectral = grad_norm_sq(&mu, &c);
            prop_assert!((direct - spectral).abs() < 1e-8 * (1.0 + spectral));
        }
    }
}
