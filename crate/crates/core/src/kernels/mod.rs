//! Memory kernels `K = B delta_0 + k(t)`: construction, the text grammar
//! `family(name=value, ...)`, resolvents, product-integration weights and
//! Fourier transforms.

mod fourier;
mod resolvent;
mod weights;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::profile::Profile;
use crate::special::{gamma, rgamma, SpecialError};

pub use fourier::{fourier_transform, generic_transform, FourierError};
pub use resolvent::{resolvent, resolvent_identity_residuals, Resolvent};
pub use weights::{conv_weights, ConvWeights};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("{family}: parameter {name} = {value} violates {rule}")]
    InvalidParameter { family: &'static str, name: &'static str, value: f64, rule: &'static str },
    #[error("kernel spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
    #[error("no resolvent available for this kernel ({reason}); supply the resolvent explicitly")]
    UnsupportedResolvent { reason: String },
    #[error("resolvent march broke down at step {step}: {reason}")]
    ResolventBreakdown { step: usize, reason: String },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Dirac,
    Exponential,
    Abel,
    AbelTempered,
    MittagLeffler,
    Polynomial,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Dirac => "dirac",
            Family::Exponential => "exponential",
            Family::Abel => "abel",
            Family::AbelTempered => "abel_tempered",
            Family::MittagLeffler => "mittag_leffler",
            Family::Polynomial => "polynomial",
            Family::Custom => "custom",
        }
    }
}

/// Parameters of a built-in kernel family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Dirac,
    Exponential { beta: f64 },
    Abel { alpha: f64 },
    AbelTempered { alpha: f64, beta: f64 },
    MittagLeffler { alpha: f64, beta: f64 },
    Polynomial { p: f64 },
}

impl KernelSpec {
    pub fn family(&self) -> Family {
        match self {
            KernelSpec::Dirac => Family::Dirac,
            KernelSpec::Exponential { .. } => Family::Exponential,
            KernelSpec::Abel { .. } => Family::Abel,
            KernelSpec::AbelTempered { .. } => Family::AbelTempered,
            KernelSpec::MittagLeffler { .. } => Family::MittagLeffler,
            KernelSpec::Polynomial { .. } => Family::Polynomial,
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            KernelSpec::Dirac => vec![],
            KernelSpec::Exponential { beta } => vec![("beta", beta)],
            KernelSpec::Abel { alpha } => vec![("alpha", alpha)],
            KernelSpec::AbelTempered { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            KernelSpec::MittagLeffler { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            KernelSpec::Polynomial { p } => vec![("p", p)],
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family().name())?;
        for (i, (k, v)) in self.params().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            // `{:?}` keeps a decimal point and round-trips exactly
            write!(f, "{k}={v:?}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for KernelSpec {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| KernelError::Parse { spec: s.to_string(), reason };
        let s_trim = s.trim();
        let open = s_trim.find('(').ok_or_else(|| err("expected `family(name=value, ...)`".into()))?;
        if !s_trim.ends_with(')') {
            return Err(err("missing closing parenthesis".into()));
        }
        let name = s_trim[..open].trim();
        let body = &s_trim[open + 1..s_trim.len() - 1];
        let mut args: Vec<(String, f64)> = Vec::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| err(format!("argument `{part}` is not name=value")))?;
            let k = k.trim().to_string();
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| err(format!("value of `{k}` is not a number: `{}`", v.trim())))?;
            if args.iter().any(|(a, _)| *a == k) {
                return Err(err(format!("duplicate argument `{k}`")));
            }
            args.push((k, v));
        }
        let allowed: &[&str] = match name {
            "dirac" => &[],
            "exponential" => &["beta"],
            "abel" => &["alpha"],
            "abel_tempered" | "mittag_leffler" => &["alpha", "beta"],
            "polynomial" => &["p"],
            other => return Err(err(format!("unknown kernel family `{other}`"))),
        };
        for (k, _) in &args {
            if !allowed.contains(&k.as_str()) {
                return Err(err(format!("unknown parameter `{k}` for {name}")));
            }
        }
        let get = |key: &str| -> Result<f64, KernelError> {
            args.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| err(format!("missing parameter `{key}`")))
        };
        Ok(match name {
            "dirac" => KernelSpec::Dirac,
            "exponential" => KernelSpec::Exponential { beta: get("beta")? },
            "abel" => KernelSpec::Abel { alpha: get("alpha")? },
            "abel_tempered" => KernelSpec::AbelTempered { alpha: get("alpha")?, beta: get("beta")? },
            "mittag_leffler" => KernelSpec::MittagLeffler { alpha: get("alpha")?, beta: get("beta")? },
            _ => KernelSpec::Polynomial { p: get("p")? },
        })
    }
}

/// Factorization `density = base(t) * exp(-rate t)` used for the coercivity
/// constant of tempered kernels.
#[derive(Debug, Clone)]
pub struct Tempering {
    pub rate: f64,
    pub base: Profile,
    /// `Some(a)` when `base = scale * t^(a-1)/Gamma(a)`, whose Laplace
    /// transform is `scale * s^-a`.
    pub base_power: Option<f64>,
}

/// A memory kernel: point mass at zero plus a locally integrable density.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub family: Family,
    pub spec: Option<KernelSpec>,
    pub point_mass: f64,
    pub density: Profile,
    pub tempering: Option<Tempering>,
    /// Overall multiplier applied to a built-in kernel.
    pub scale: f64,
}

fn check(cond: bool, family: &'static str, name: &'static str, value: f64, rule: &'static str) -> Result<(), KernelError> {
    if cond && value.is_finite() {
        Ok(())
    } else {
        Err(KernelError::InvalidParameter { family, name, value, rule })
    }
}

impl Kernel {
    /// Build a catalog kernel, enforcing the family's parameter ranges.
    pub fn new(spec: KernelSpec) -> Result<Kernel, KernelError> {
        let (point_mass, density, tempering) = match spec {
            KernelSpec::Dirac => (1.0, Profile::Zero, None),
            KernelSpec::Exponential { beta } => {
                check(beta > 0.0, "exponential", "beta", beta, "beta > 0")?;
                let t = Tempering { rate: beta, base: Profile::Constant(1.0), base_power: Some(1.0) };
                (0.0, Profile::Exponential { scale: 1.0, rate: beta }, Some(t))
            }
            KernelSpec::Abel { alpha } => {
                check(alpha > 0.0 && alpha < 1.0, "abel", "alpha", alpha, "0 < alpha < 1")?;
                (0.0, Profile::Power { scale: rgamma(alpha), exponent: alpha - 1.0 }, None)
            }
            KernelSpec::AbelTempered { alpha, beta } => {
                check(alpha > 0.0 && alpha < 1.0, "abel_tempered", "alpha", alpha, "0 < alpha < 1")?;
                check(beta > 0.0, "abel_tempered", "beta", beta, "beta > 0")?;
                let base = Profile::Power { scale: rgamma(alpha), exponent: alpha - 1.0 };
                let t = Tempering { rate: beta, base, base_power: Some(alpha) };
                (0.0, Profile::TemperedPower { scale: rgamma(alpha), exponent: alpha - 1.0, rate: beta }, Some(t))
            }
            KernelSpec::MittagLeffler { alpha, beta } => {
                check(alpha > 0.0 && alpha < 1.0, "mittag_leffler", "alpha", alpha, "0 < alpha < 1")?;
                check(beta > 0.0 && beta <= 1.0, "mittag_leffler", "beta", beta, "0 < beta <= 1")?;
                check(alpha <= beta, "mittag_leffler", "alpha", alpha, "alpha <= beta")?;
                (0.0, Profile::MittagLeffler { scale: 1.0 / gamma(1.0 - alpha), alpha, beta }, None)
            }
            KernelSpec::Polynomial { p } => {
                check(p > 1.0, "polynomial", "p", p, "p > 1")?;
                (0.0, Profile::AlgebraicDecay { scale: 1.0, p }, None)
            }
        };
        Ok(Kernel { family: spec.family(), spec: Some(spec), point_mass, density, tempering, scale: 1.0 })
    }

    pub fn parse(s: &str) -> Result<Kernel, KernelError> {
        Kernel::new(s.parse()?)
    }

    /// A user-supplied kernel `point_mass * delta_0 + density`.
    pub fn custom(point_mass: f64, density: Profile) -> Result<Kernel, KernelError> {
        check(point_mass >= 0.0, "custom", "point_mass", point_mass, "point_mass >= 0")?;
        Ok(Kernel { family: Family::Custom, spec: None, point_mass, density, tempering: None, scale: 1.0 })
    }

    /// A custom tempered kernel `base(t) * exp(-rate t)`.
    pub fn custom_tempered(base: Profile, rate: f64) -> Result<Kernel, KernelError> {
        check(rate > 0.0, "custom", "rate", rate, "rate > 0")?;
        let density = Profile::Damped { base: Box::new(base.clone()), rate };
        Ok(Kernel {
            family: Family::Custom,
            spec: None,
            point_mass: 0.0,
            density,
            tempering: Some(Tempering { rate, base, base_power: None }),
            scale: 1.0,
        })
    }

    /// The kernel multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Kernel {
        let mut k = self.clone();
        k.point_mass *= s;
        k.density = k.density.scaled(s);
        k.scale *= s;
        if let Some(t) = &mut k.tempering {
            t.base = t.base.clone().scaled(s);
        }
        k
    }

    pub fn density_at(&self, t: f64) -> f64 {
        self.density.eval(t)
    }

    pub fn is_dirac(&self) -> bool {
        self.family == Family::Dirac
    }

    pub fn describe(&self) -> String {
        match (&self.spec, self.scale) {
            (Some(s), x) if x == 1.0 => s.to_string(),
            (Some(s), x) => format!("{x} * {s}"),
            (None, _) => format!("custom(point_mass={})", self.point_mass),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_has_unit_mass_and_no_density() {
        let k = Kernel::new(KernelSpec::Dirac).unwrap();
        assert_eq!(k.point_mass, 1.0);
        assert!(k.density.is_zero());
        assert_eq!(k.density_at(0.7), 0.0);
    }

    #[test]
    fn exponential_density() {
        let k = Kernel::parse("exponential(beta=2.0)").unwrap();
        assert_eq!(k.point_mass, 0.0);
        assert_eq!(k.density.value_at_zero(), 1.0);
        assert!((k.density_at(1.5) - (-3.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn abel_density_at_one() {
        let k = Kernel::parse("abel(alpha=0.5)").unwrap();
        // 1/Gamma(1/2) = 1/sqrt(pi)
        assert!((k.density_at(1.0) - 0.5641895835477563).abs() < 1e-15);
        assert!(k.density.singular_at_zero());
    }

    #[test]
    fn range_violations_name_the_constraint() {
        let cases = [
            "abel(alpha=1.0)",
            "abel(alpha=0.0)",
            "polynomial(p=1.0)",
            "exponential(beta=0.0)",
            "mittag_leffler(alpha=0.9,beta=0.5)",
            "abel_tempered(alpha=0.5,beta=-1)",
        ];
        for c in cases {
            match Kernel::parse(c) {
                Err(KernelError::InvalidParameter { rule, .. }) => assert!(!rule.is_empty()),
                other => panic!("{c}: {other:?}"),
            }
        }
    }

    #[test]
    fn grammar_round_trip() {
        for s in [
            "dirac()",
            "exponential(beta=2.0)",
            "abel(alpha=0.5)",
            "mittag_leffler(alpha=0.5,beta=0.8)",
            "polynomial(p=2.0)",
            "abel_tempered(alpha=0.3, beta=1.5)",
        ] {
            let spec: KernelSpec = s.parse().unwrap();
            let again: KernelSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
    }

    #[test]
    fn grammar_errors() {
        for s in ["exponential", "exponential(beta=)", "gauss(beta=1)", "abel(alpha=0.5, beta=1)", "polynomial()", "abel(alpha=0.5"] {
            assert!(matches!(s.parse::<KernelSpec>(), Err(KernelError::Parse { .. })), "{s}");
        }
    }

    #[test]
    fn built_in_densities_are_positive_and_nonincreasing() {
        for s in [
            "exponential(beta=2.0)",
            "abel(alpha=0.5)",
            "abel_tempered(alpha=0.4,beta=1.0)",
            "mittag_leffler(alpha=0.5,beta=0.8)",
            "mittag_leffler(alpha=0.7,beta=1.0)",
            "polynomial(p=2.0)",
        ] {
            let k = Kernel::parse(s).unwrap();
            let mut prev = f64::INFINITY;
            for i in 1..=2000 {
                let t = i as f64 * 0.01;
                let v = k.density_at(t);
                assert!(v > 0.0 && v <= prev * (1.0 + 1e-13), "{s} at {t}");
                prev = v;
            }
        }
    }
}
