//! Scenario files: TOML with sections `equation`, `kernel`, `domain`,
//! `initial`, `time`, `output` and `diagnostics`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretization::{
    build_system, DiscretizationError, EquationParams, GalerkinSystem, InitFunction, InitialData, InitialDatum,
};
use crate::kernels::{Kernel, KernelError, KernelSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
}

fn field(field: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Field { field: field.to_string(), reason: reason.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    pub tau: f64,
    pub c: f64,
    pub gamma: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub spec: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub length: f64,
    pub n_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub psi0: DatumSection,
    #[serde(default)]
    pub psi1: DatumSection,
    #[serde(default)]
    pub psi2: DatumSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_svg")]
    pub svg: String,
    #[serde(default = "default_report")]
    pub report: String,
}

fn default_csv() -> String {
    "energy.csv".into()
}
fn default_svg() -> String {
    "energy.svg".into()
}
fn default_report() -> String {
    "report.txt".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { csv: default_csv(), svg: default_svg(), report: default_report() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Decay-fit window `[t0, t1]`; defaults to the second half of the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default = "yes")]
    pub lyapunov: bool,
    #[serde(default = "yes")]
    pub bound_checks: bool,
    #[serde(default = "yes")]
    pub svg: bool,
}

fn yes() -> bool {
    true
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection { fit_window: None, lyapunov: true, bound_checks: true, svg: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub equation: EquationSection,
    pub kernel: KernelSection,
    pub domain: DomainSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub time: TimeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

/// Everything a run needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: EquationParams,
    pub kernel: Kernel,
    pub system: GalerkinSystem,
    pub dt: f64,
    pub steps: usize,
}

fn datum(d: &DatumSection, name: &str) -> Result<InitialDatum, ConfigError> {
    match (&d.coeffs, &d.function) {
        (Some(_), Some(_)) => Err(field(&format!("initial.{name}"), "give either `coeffs` or `function`, not both")),
        (Some(c), None) => Ok(InitialDatum::Coefficients(c.clone())),
        (None, Some(f)) => f
            .parse::<InitFunction>()
            .map(InitialDatum::Function)
            .map_err(|e| field(&format!("initial.{name}.function"), e)),
        (None, None) => Ok(InitialDatum::Zero),
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(s).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    /// Structural checks that do not depend on the physics (ranges of the
    /// physical coefficients are reported separately as parameter errors).
    fn check(&self) -> Result<(), ConfigError> {
        self.kernel.spec.parse::<KernelSpec>().map_err(|e| field("kernel.spec", e))?;
        if !(self.domain.length > 0.0 && self.domain.length.is_finite()) {
            return Err(field("domain.length", "must be positive"));
        }
        if self.domain.n_modes == 0 {
            return Err(field("domain.n_modes", "must be at least 1"));
        }
        if !(self.time.dt > 0.0 && self.time.dt.is_finite()) {
            return Err(field("time.dt", "must be positive"));
        }
        if self.time.n_steps == 0 {
            return Err(field("time.n_steps", "must be at least 1"));
        }
        if let Some([a, b]) = self.diagnostics.fit_window {
            if !(a < b) {
                return Err(field("diagnostics.fit_window", "needs t0 < t1"));
            }
        }
        for (d, n) in [(&self.initial.psi0, "psi0"), (&self.initial.psi1, "psi1"), (&self.initial.psi2, "psi2")] {
            datum(d, n)?;
            if let Some(c) = &d.coeffs {
                if c.len() > self.domain.n_modes {
                    return Err(field(
                        &format!("initial.{n}.coeffs"),
                        format!("{} coefficients for {} modes", c.len(), self.domain.n_modes),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Canonical form: kernel and profile strings rewritten by their parsers.
    pub fn normalized(&self) -> Self {
        let mut c = self.clone();
        if let Ok(k) = c.kernel.spec.parse::<KernelSpec>() {
            c.kernel.spec = k.to_string();
        }
        for d in [&mut c.initial.psi0, &mut c.initial.psi1, &mut c.initial.psi2] {
            if let Some(f) = &d.function {
                if let Ok(p) = f.parse::<InitFunction>() {
                    d.function = Some(p.to_string());
                }
            }
        }
        c
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.normalized()).expect("config serializes")
    }

    pub fn params(&self) -> EquationParams {
        let e = &self.equation;
        EquationParams { tau: e.tau, c: e.c, gamma: e.gamma, nu: e.nu }
    }

    pub fn kernel(&self) -> Result<Kernel, KernelError> {
        Kernel::parse(&self.kernel.spec)
    }

    pub fn initial_data(&self) -> Result<InitialData, ConfigError> {
        Ok(InitialData {
            psi0: datum(&self.initial.psi0, "psi0")?,
            psi1: datum(&self.initial.psi1, "psi1")?,
            psi2: datum(&self.initial.psi2, "psi2")?,
        })
    }

    pub fn system(&self) -> Result<GalerkinSystem, ConfigError> {
        build_system(self.domain.length, self.domain.n_modes, &self.initial_data()?).map_err(|e| match e {
            DiscretizationError::Datum { datum, reason } => field(&format!("initial.{datum}"), reason),
            other => field("domain", other),
        })
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        Ok(Scenario {
            params: self.params(),
            kernel: self.kernel().map_err(|e| field("kernel.spec", e))?,
            system: self.system()?,
            dt: self.time.dt,
            steps: self.time.n_steps,
        })
    }

    pub fn fit_window(&self) -> Option<(f64, f64)> {
        self.diagnostics.fit_window.map(|[a, b]| (a, b))
    }
}
