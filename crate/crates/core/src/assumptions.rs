//! Numerical checks of the kernel conditions behind well-posedness (positivity,
//! a one-sided bound on `(K * y)_t`, a resolvent), exponential decay
//! (coercivity constant `c~`, nonincreasing convex tempered base) and weak decay.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::kernels::{fourier_transform, generic_transform, resolvent, Kernel, KernelSpec};
use crate::profile::Profile;

pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Pass, Verdict::Pass) => Verdict::Pass,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Log-spaced frequencies on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub lo: f64,
    pub hi: f64,
    pub m: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid { lo: 1e-3, hi: 1e3, m: 2048 }
    }
}

impl FrequencyGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.m < 2 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..self.m).map(|i| (a + (b - a) * i as f64 / (self.m - 1) as f64).exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierCheck {
    pub verdict: Verdict,
    pub min_re: f64,
    pub argmin: f64,
    /// `inf Re K^ / |K^|^2` on the grid.
    pub min_coercivity: f64,
    pub note: Option<String>,
}

/// Samples `Re K^(omega)` on the grid; pass iff the minimum is `>= -1e-9`.
pub fn check_positivity_fourier(kernel: &Kernel, grid: FrequencyGrid) -> FourierCheck {
    let mut out = FourierCheck {
        verdict: Verdict::Pass,
        min_re: f64::INFINITY,
        argmin: f64::NAN,
        min_coercivity: f64::INFINITY,
        note: None,
    };
    for w in grid.points() {
        match fourier_transform(kernel, w) {
            Ok(v) => {
                if v.re < out.min_re {
                    out.min_re = v.re;
                    out.argmin = w;
                }
                let n2 = v.norm_sqr();
                let coer = if n2 > 0.0 { v.re / n2 } else { f64::INFINITY };
                out.min_coercivity = out.min_coercivity.min(coer);
            }
            Err(e) => {
                out.verdict = Verdict::Inconclusive;
                out.note = Some(e.to_string());
                return out;
            }
        }
    }
    if out.min_re < -TOLERANCE {
        out.verdict = Verdict::Fail;
    }
    out
}

/// Uniform sample grid for derivative sign checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid { t0: 0.01, t1: 20.0, h: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmCheck {
    /// Highest order `n <= n_max` such that `(-1)^k f^(k) >= 0` for all `k <= n`; `None` if even `f >= 0` fails.
    pub passed_up_to: Option<usize>,
    /// Most negative sampled `(-1)^k f^(k)` per order.
    pub min_signed: Vec<f64>,
    pub n_max: usize,
}

impl CmCheck {
    pub fn verdict(&self, order: usize) -> Verdict {
        match self.passed_up_to {
            Some(k) if k >= order => Verdict::Pass,
            _ => Verdict::Fail,
        }
    }
}

/// Signs of central differences `(-1)^n D^n f` for `n <= n_max <= 2` at interior nodes.
pub fn check_cm_samples(f: &Profile, n_max: usize, grid: SampleGrid) -> CmCheck {
    let n_max = n_max.min(2);
    let count = ((grid.t1 - grid.t0) / grid.h).round() as usize;
    let vals: Vec<f64> = (0..=count).map(|i| f.eval(grid.t0 + i as f64 * grid.h)).collect();
    let mut min_signed = vec![f64::INFINITY; n_max + 1];
    let mut ok = vec![true; n_max + 1];
    let eps = f64::EPSILON;
    for i in 1..count {
        let (a, b, c) = (vals[i - 1], vals[i], vals[i + 1]);
        let mag = a.abs() + b.abs() + c.abs();
        let d = [b, -(c - a) / (2.0 * grid.h), (c - 2.0 * b + a) / (grid.h * grid.h)];
        let round = [eps * mag, 4.0 * eps * mag / grid.h, 8.0 * eps * mag / (grid.h * grid.h)];
        for k in 0..=n_max {
            if !d[k].is_finite() {
                ok[k] = false;
                min_signed[k] = f64::NEG_INFINITY;
                continue;
            }
            min_signed[k] = min_signed[k].min(d[k]);
            if d[k] < -(TOLERANCE + round[k]) {
                ok[k] = false;
            }
        }
    }
    let passed_up_to = ok.iter().take_while(|x| **x).count().checked_sub(1);
    CmCheck { passed_up_to, min_signed, n_max }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CTildeError {
    #[error("coercivity constant needs a tempered kernel k(t) exp(-beta t) or the Dirac kernel: {0}")]
    Unsupported(String),
    #[error("transform failed: {0}")]
    Transform(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CTilde {
    /// `min` over the lambda grid of `c~_lambda`.
    pub value: f64,
    pub argmin_lambda: f64,
    /// Largest lambda for which the tempered argument is valid, `2 beta`.
    pub lambda_sup: f64,
    pub lambda_cap: f64,
    pub grid_points: usize,
}

/// `Re k^ / |k^|^2` for the tempered base at shifted rate `beta - lambda/2`.
fn tempered_transform(kernel: &Kernel, lambda: f64, z: f64) -> Result<Complex64, CTildeError> {
    let t = kernel.tempering.as_ref().ok_or_else(|| CTildeError::Unsupported(kernel.describe()))?;
    let shift = t.rate - lambda / 2.0;
    let s = Complex64::new(shift, z);
    if let Some(a) = t.base_power {
        return Ok(kernel.scale * s.powf(-a));
    }
    let damped = Profile::Damped { base: Box::new(t.base.clone()), rate: shift };
    if z <= 0.0 {
        // zero frequency: plain integral of the damped base
        let v = crate::quad::exp_sinh(|x| damped.eval(x), 0.0, 1e-12).value;
        return Ok(Complex64::new(v, 0.0));
    }
    generic_transform(&damped, z).map_err(|e| CTildeError::Transform(e.to_string()))
}

/// `c~_lambda = inf_z Re k^_lambda(z) / |k^_lambda(z)|^2` on `{0} U grid`.
pub fn ctilde_lambda(kernel: &Kernel, lambda: f64, grid: FrequencyGrid) -> Result<f64, CTildeError> {
    if kernel.is_dirac() {
        return Ok(1.0 / kernel.point_mass);
    }
    if kernel.point_mass != 0.0 || kernel.tempering.is_none() {
        return Err(CTildeError::Unsupported(kernel.describe()));
    }
    let mut best = f64::INFINITY;
    for z in std::iter::once(0.0).chain(grid.points()) {
        let v = tempered_transform(kernel, lambda, z)?;
        let n2 = v.norm_sqr();
        if n2 > 0.0 {
            best = best.min(v.re / n2);
        }
    }
    Ok(best)
}

/// Minimum of `c~_lambda` over `lambda_j = j lambda_cap / 64`, `j = 0..63`,
/// with `lambda_cap = min(2 beta, 10)`. The endpoint `2 beta` is excluded: there
/// the damping vanishes and `c~` degenerates to zero for the exponential kernel.
pub fn compute_ctilde(kernel: &Kernel) -> Result<CTilde, CTildeError> {
    if kernel.is_dirac() {
        let v = 1.0 / kernel.point_mass;
        return Ok(CTilde { value: v, argmin_lambda: 0.0, lambda_sup: f64::INFINITY, lambda_cap: 0.0, grid_points: 1 });
    }
    let t = kernel.tempering.as_ref().ok_or_else(|| CTildeError::Unsupported(kernel.describe()))?;
    let lambda_sup = 2.0 * t.rate;
    let lambda_cap = lambda_sup.min(10.0);
    let points = 64;
    let grid = if t.base_power.is_some() { FrequencyGrid::default() } else { FrequencyGrid { m: 256, ..FrequencyGrid::default() } };
    let mut out = CTilde { value: f64::INFINITY, argmin_lambda: 0.0, lambda_sup, lambda_cap, grid_points: points };
    for j in 0..points {
        let lambda = j as f64 * lambda_cap / points as f64;
        let v = ctilde_lambda(kernel, lambda, grid)?;
        if v < out.value {
            out.value = v;
            out.argmin_lambda = lambda;
        }
    }
    Ok(out)
}

/// One line of an [`AssumptionReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub verdict: Verdict,
    pub evidence: Vec<(&'static str, f64)>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub kernel: String,
    pub checks: Vec<Check>,
    pub wellposed: Verdict,
    pub decay: Verdict,
    pub weak: Verdict,
    /// Constant of the one-sided bound on `(K * y)_t`, when certified.
    pub c_a2: Option<f64>,
    pub ctilde: Option<f64>,
    pub ctilde0: Option<f64>,
    pub lambda_sup: Option<f64>,
    pub notes: Vec<String>,
}

impl AssumptionReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("assumption,verdict,evidence\n");
        for c in &self.checks {
            let ev: Vec<String> = c.evidence.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
            s.push_str(&format!("{},{},{}\n", c.name, c.verdict, ev.join(";")));
        }
        s
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kernel: {}", self.kernel)?;
        writeln!(f, "{:<6} {:<13} evidence", "check", "verdict")?;
        for c in &self.checks {
            let ev: Vec<String> = c.evidence.iter().map(|(k, v)| format!("{k} = {v:.6e}")).collect();
            write!(f, "{:<6} {:<13} {}", c.name, c.verdict.to_string(), ev.join(", "))?;
            if !c.note.is_empty() {
                write!(f, "  ({})", c.note)?;
            }
            writeln!(f)?;
        }
        writeln!(f, "well-posedness set (A0-A3): {}", self.wellposed)?;
        writeln!(f, "exponential decay set (A4-A5): {}", self.decay)?;
        writeln!(f, "weak decay set (A4w-A5w): {}", self.weak)?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

pub fn classify(kernel: &Kernel) -> AssumptionReport {
    classify_with(kernel, FrequencyGrid::default(), SampleGrid::default())
}

pub fn classify_with(kernel: &Kernel, fgrid: FrequencyGrid, sgrid: SampleGrid) -> AssumptionReport {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let density = &kernel.density;

    // A0: locally finite measure
    let mass = kernel.point_mass + density.integral(0.0, 1.0);
    let a0 = if mass.is_finite() && kernel.point_mass >= 0.0 { Verdict::Pass } else { Verdict::Fail };
    checks.push(Check { name: "A0", verdict: a0, evidence: vec![("mass_on_[0,1]", mass)], note: String::new() });

    let cm = check_cm_samples(density, 2, sgrid);
    let fourier = check_positivity_fourier(kernel, fgrid);

    // A1: Fourier positivity, or complete monotonicity up to order 2
    let a1 = match fourier.verdict {
        Verdict::Pass => Verdict::Pass,
        Verdict::Fail => Verdict::Fail,
        Verdict::Inconclusive => {
            if cm.verdict(2).passed() {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            }
        }
    };
    let mut ev = vec![("min_re_fourier", fourier.min_re), ("argmin_omega", fourier.argmin)];
    for (k, v) in cm.min_signed.iter().enumerate() {
        ev.push((["min_f", "min_-f'", "min_f''"][k], *v));
    }
    checks.push(Check { name: "A1", verdict: a1, evidence: ev, note: fourier.note.clone().unwrap_or_default() });

    // A2: C = 0 for nonnegative nonincreasing densities, plus the point-mass contribution
    let (a2, c_a2) = if cm.verdict(1).passed() {
        (Verdict::Pass, Some(kernel.point_mass))
    } else {
        (Verdict::Inconclusive, None)
    };
    checks.push(Check {
        name: "A2",
        verdict: a2,
        evidence: vec![("C_A2", c_a2.unwrap_or(f64::NAN))],
        note: if a2.passed() { String::new() } else { "no computable bound outside nonincreasing densities".into() },
    });

    // A3: resolvent exists (with differentiable regular part under a point mass)
    let (a3, a3_ev, a3_note) = match resolvent(kernel, 10.0 / 1024.0, 1024) {
        Ok(r) => {
            let rt_ok = kernel.point_mass == 0.0 || r.r_t.as_ref().is_some_and(|v| v.iter().all(|x| x.is_finite()));
            if r.atom >= 0.0 && rt_ok {
                (Verdict::Pass, vec![("A", r.atom)], String::new())
            } else {
                (Verdict::Fail, vec![("A", r.atom)], "negative atom or non-differentiable r under a point mass".into())
            }
        }
        Err(e) => (Verdict::Inconclusive, vec![], e.to_string()),
    };
    checks.push(Check { name: "A3", verdict: a3, evidence: a3_ev, note: a3_note });

    // A4: coercivity of the tempered kernel
    let (a4, ctilde, lambda_sup) = match compute_ctilde(kernel) {
        Ok(c) => {
            let v = if c.value > TOLERANCE { Verdict::Pass } else { Verdict::Fail };
            checks.push(Check {
                name: "A4",
                verdict: v,
                evidence: vec![("c_tilde", c.value), ("argmin_lambda", c.argmin_lambda), ("lambda_sup", c.lambda_sup)],
                note: String::new(),
            });
            (v, Some(c.value), Some(c.lambda_sup))
        }
        Err(e) => {
            let v = match e {
                CTildeError::Unsupported(_) => Verdict::Fail,
                CTildeError::Transform(_) => Verdict::Inconclusive,
            };
            checks.push(Check { name: "A4", verdict: v, evidence: vec![], note: e.to_string() });
            (v, None, None)
        }
    };
    if ctilde.is_some() && !kernel.is_dirac() {
        notes.push(
            "c_tilde is computed as inf Re k^/|k^|^2, the coercive direction; the reciprocal sup |k^|^2/Re k^ would be an upper constant"
                .into(),
        );
    }

    // A5: tempered base nonnegative, nonincreasing, convex
    let a5 = if kernel.is_dirac() {
        checks.push(Check { name: "A5", verdict: Verdict::Pass, evidence: vec![], note: "point mass".into() });
        Verdict::Pass
    } else {
        let (target, what) = match &kernel.tempering {
            Some(t) => (&t.base, "tempered base"),
            None => (density, "density"),
        };
        let c = check_cm_samples(target, 2, sgrid);
        let v = c.verdict(2);
        checks.push(Check {
            name: "A5",
            verdict: v,
            evidence: c.min_signed.iter().enumerate().map(|(k, x)| (["min_k", "min_-k'", "min_k''"][k], *x)).collect(),
            note: format!("checked on the {what}"),
        });
        v
    };

    // weak set
    let ctilde0 = if kernel.is_dirac() { Some(1.0 / kernel.point_mass) } else { fourier.min_coercivity.is_finite().then_some(fourier.min_coercivity) };
    let a4w = match (fourier.verdict, ctilde0) {
        (Verdict::Inconclusive, _) | (_, None) => Verdict::Inconclusive,
        (_, Some(c)) if c > TOLERANCE => Verdict::Pass,
        _ => Verdict::Fail,
    };
    checks.push(Check {
        name: "A4w",
        verdict: a4w,
        evidence: vec![("c_tilde0", ctilde0.unwrap_or(f64::NAN))],
        note: "infimum over the frequency grid".into(),
    });
    let a5w = cm.verdict(2);
    checks.push(Check {
        name: "A5w",
        verdict: a5w,
        evidence: vec![("orders_passed", cm.passed_up_to.map_or(-1.0, |k| k as f64))],
        note: String::new(),
    });

    if matches!(kernel.spec, Some(KernelSpec::Abel { .. }) | Some(KernelSpec::MittagLeffler { .. })) && a4w.passed() {
        notes.push("the weak coercivity constant is a grid infimum; for power-law kernels the continuum infimum is approached only as omega -> 0".into());
    }

    AssumptionReport {
        kernel: kernel.describe(),
        wellposed: a0.and(a1).and(a2).and(a3),
        decay: a4.and(a5),
        weak: a4w.and(a5w),
        checks,
        c_a2,
        ctilde,
        ctilde0,
        lambda_sup,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(s: &str) -> Kernel {
        Kernel::parse(s).unwrap()
    }

    #[test]
    fn exponential_fourier_minimum() {
        let c = check_positivity_fourier(&k("exponential(beta=1.0)"), FrequencyGrid::default());
        assert_eq!(c.verdict, Verdict::Pass);
        assert!((c.min_re - 1.0 / (1.0 + 1e6)).abs() < 1e-15);
    }

    #[test]
    fn abel_real_part_closed_form() {
        let c = check_positivity_fourier(&k("abel(alpha=0.5)"), FrequencyGrid::default());
        assert_eq!(c.verdict, Verdict::Pass);
        let want = (0.25 * std::f64::consts::PI).cos() * 1e3f64.powf(-0.5);
        assert!((c.min_re - want).abs() < 1e-12);
    }

    #[test]
    fn dirac_real_part_is_one() {
        let c = check_positivity_fourier(&k("dirac()"), FrequencyGrid::default());
        assert_eq!((c.verdict, c.min_re), (Verdict::Pass, 1.0));
    }

    #[test]
    fn cm_samples() {
        let g = SampleGrid::default();
        for s in ["exponential(beta=1.0)", "polynomial(p=2.0)", "abel(alpha=0.5)"] {
            assert_eq!(check_cm_samples(&k(s).density, 2, g).passed_up_to, Some(2), "{s}");
        }
        let wavy = Profile::custom(|t| t.sin() + 2.0);
        let c = check_cm_samples(&wavy, 2, g);
        assert_eq!(c.passed_up_to, Some(0));
        assert_eq!(c.verdict(1), Verdict::Fail);
    }

    #[test]
    fn ctilde_values() {
        // c~_lambda = beta - lambda/2 for the exponential kernel; grid stops one step short of 2 beta
        let e = compute_ctilde(&k("exponential(beta=1.0)")).unwrap();
        assert!((e.value - 1.0 / 64.0).abs() < 1e-12, "{e:?}");
        assert_eq!(e.lambda_sup, 2.0);
        let l0 = ctilde_lambda(&k("exponential(beta=1.0)"), 0.0, FrequencyGrid::default()).unwrap();
        assert!((l0 - 1.0).abs() < 1e-12);
        assert_eq!(compute_ctilde(&k("dirac()")).unwrap().value, 1.0);
        assert!(matches!(compute_ctilde(&k("abel(alpha=0.5)")), Err(CTildeError::Unsupported(_))));
        // tempered Abel: Re (iz + b)^a is smallest at z = 0
        let t = ctilde_lambda(&k("abel_tempered(alpha=0.5, beta=2.0)"), 1.0, FrequencyGrid::default()).unwrap();
        assert!((t - 1.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ctilde_scales_inversely() {
        for s in ["exponential(beta=1.5)", "abel_tempered(alpha=0.3, beta=1.0)"] {
            let base = compute_ctilde(&k(s)).unwrap().value;
            let scaled = compute_ctilde(&k(s).scaled(2.5)).unwrap().value;
            assert!((scaled - base / 2.5).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn custom_tempered_matches_catalog() {
        let cat = compute_ctilde(&k("exponential(beta=1.0)")).unwrap().value;
        let custom = Kernel::custom_tempered(Profile::Constant(1.0), 1.0).unwrap();
        let v = compute_ctilde(&custom).unwrap().value;
        assert!((v - cat).abs() < 1e-6, "{v} vs {cat}");
    }

    #[test]
    fn classification_matrix() {
        let d = classify(&k("dirac()"));
        assert!(d.wellposed.passed() && d.decay.passed() && d.weak.passed());
        assert_eq!(d.c_a2, Some(1.0));
        let e = classify(&k("exponential(beta=1.0)"));
        assert!(e.wellposed.passed() && e.decay.passed() && e.weak.passed(), "{e}");
        let a = classify(&k("abel(alpha=0.5)"));
        assert!(a.wellposed.passed() && a.weak.passed(), "{a}");
        assert_eq!(a.check("A4").unwrap().verdict, Verdict::Fail);
        let p = classify(&k("polynomial(p=2.0)"));
        assert!(p.wellposed.passed() && p.weak.passed(), "{p}");
        assert_eq!(p.decay, Verdict::Fail);
    }

    #[test]
    fn fourier_check_is_additive() {
        let e = k("exponential(beta=1.0)");
        let a = k("abel(alpha=0.5)");
        let sum = Kernel::custom(0.0, Profile::Sum(vec![e.density.clone(), a.density.clone()])).unwrap();
        let grid = FrequencyGrid { m: 64, ..FrequencyGrid::default() };
        assert!(check_positivity_fourier(&e, grid).verdict.passed());
        assert!(check_positivity_fourier(&a, grid).verdict.passed());
        let s = check_positivity_fourier(&sum, grid);
        assert_ne!(s.verdict, Verdict::Fail);
    }

    #[test]
    fn verdicts_stable_under_refinement() {
        for s in ["exponential(beta=1.0)", "abel(alpha=0.5)", "polynomial(p=2.0)"] {
            let a = check_positivity_fourier(&k(s), FrequencyGrid { m: 512, ..FrequencyGrid::default() });
            let b = check_positivity_fourier(&k(s), FrequencyGrid { m: 1024, ..FrequencyGrid::default() });
            assert!(!(a.verdict == Verdict::Pass && b.verdict == Verdict::Fail && b.min_re < -TOLERANCE));
        }
    }
}
