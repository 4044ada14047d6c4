//! Energies, Lyapunov functionals, the dissipation budget and decay fits,
//! all evaluated spectrally on a [`Trajectory`].

use std::fmt::Write as _;
use std::io;

use rayon::prelude::*;
use thiserror::Error;

use crate::discretization::EquationParams;
use crate::stepper::Trajectory;

/// Mode-summed quadratic quantities at one time level.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Snapshot {
    pub e: f64,
    pub emod: f64,
    pub norm_mod: f64,
    pub f1: f64,
    pub f2: f64,
    /// `sum mu xi^2`
    pub grad_psi: f64,
    /// `sum (tau w_t)^2`
    pub pressure: f64,
    /// `sum mu xi_t^2`
    pub grad_psi_t: f64,
}

pub fn snapshot(traj: &Trajectory, n: usize) -> Snapshot {
    let EquationParams { tau, c, gamma, .. } = traj.params;
    let c2 = c * c;
    let k = tau * c2 / gamma;
    let mut s = Snapshot::default();
    let (mut a2, mut g2, mut w2) = (0.0, 0.0, 0.0);
    let (mut m1, mut m3) = (0.0, 0.0);
    let (mut wt2, mut xt2, mut gw2) = (0.0, 0.0, 0.0);
    for i in 0..traj.n_modes() {
        let mu = traj.mu[i];
        let (x, xt, w, wt) = (traj.xi[i][n], traj.xi_t[i][n], traj.conv_xi_t[i][n], traj.conv_xi_t_dt[i][n]);
        let a = tau * wt + xt;
        let g = tau * w + x;
        a2 += a * a;
        g2 += mu * g * g;
        w2 += mu * w * w;
        m1 += (tau * wt + k * xt).powi(2);
        m3 += mu * (tau * w + k * x).powi(2);
        wt2 += wt * wt;
        xt2 += xt * xt;
        gw2 += mu * w * w;
        s.f1 += a * g;
        s.f2 -= tau * w * a;
        s.grad_psi += mu * x * x;
        s.pressure += (tau * wt).powi(2);
        s.grad_psi_t += mu * xt * xt;
    }
    s.e = 0.5 * (a2 + c2 * g2 + tau * (gamma - tau * c2) * w2);
    s.emod = m1 + k * ((gamma - tau * c2) / gamma) * xt2 + (gamma / tau) * m3;
    s.norm_mod = wt2 + xt2 + gw2 + s.grad_psi;
    s
}

pub fn energy_e(traj: &Trajectory, n: usize) -> f64 {
    snapshot(traj, n).e
}

pub fn energy_mod(traj: &Trajectory, n: usize) -> f64 {
    snapshot(traj, n).emod
}

pub fn norm_mod(traj: &Trajectory, n: usize) -> f64 {
    snapshot(traj, n).norm_mod
}

pub fn functional_f1(traj: &Trajectory, n: usize) -> f64 {
    snapshot(traj, n).f1
}

pub fn functional_f2(traj: &Trajectory, n: usize) -> f64 {
    snapshot(traj, n).f2
}

pub fn lyapunov(traj: &Trajectory, n: usize, n0: f64, n1: f64) -> f64 {
    let s = snapshot(traj, n);
    n0 * s.e + s.f1 + n1 * s.f2
}

/// `2 (1 + max{0, (2 tau c^2 - gamma)/(gamma - tau c^2)})`, the constant bounding
/// `c^2 |grad psi|^2` by `E` and `|tau (K * psi_t)_t|^2` by `E_mod`. Requires `gamma > tau c^2`.
pub fn pointwise_bound_constant(p: &EquationParams) -> f64 {
    let tc2 = p.tau_c2();
    2.0 * (1.0 + ((2.0 * tc2 - p.gamma) / (p.gamma - tc2)).max(0.0))
}

/// Constants fixing the Lyapunov functional `N0 E + F1 + N1 F2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConstants {
    pub n0: f64,
    pub n1: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    /// Poincare constant `L / pi`.
    pub c_p: f64,
    /// `|F1| + N1 |F2| <= c0 E`.
    pub c0: f64,
    pub ctilde: Option<f64>,
    pub c_eps1: f64,
    pub c_eps2_eps3: f64,
    pub c_eps3: f64,
}

/// Defaults `eps1 = c^2/4`, `eps2 = 1/2`, `N1 = 2/(1 - eps2)`, `eps3 = (c^2 - eps1)/(2 N1)`,
/// and `N0` the smallest power of two making the two dissipation coefficients
/// positive and exceeding `c0`. Without `ctilde` only the `nu` coefficient is
/// enforced. `None` unless `gamma > tau c^2`.
pub fn lyapunov_constants(p: &EquationParams, length: f64, ctilde: Option<f64>) -> Option<LyapunovConstants> {
    let tc2 = p.tau_c2();
    let gap = p.gamma - tc2;
    if !(gap > 0.0) {
        return None;
    }
    let c2 = p.c * p.c;
    let eps1 = c2 / 4.0;
    let eps2 = 0.5;
    let n1 = 2.0 / (1.0 - eps2);
    let eps3 = (c2 - eps1) / (2.0 * n1);
    let c_p = length / std::f64::consts::PI;
    let c0 = 2.0 * c_p * (1.0 / p.c + n1 * (p.tau / gap).sqrt());
    let c_eps1 = gap.powi(2).max(p.nu.powi(2)) / (2.0 * eps1);
    let c_eps2_eps3 = c_p * c_p / (4.0 * eps2) + p.tau * p.nu / 2.0;
    let c_eps3 = p.tau.powi(2) * c2 * c2 / (4.0 * eps3) + p.tau * gap + p.tau * p.nu / 2.0;
    let ok = |n0: f64| {
        let memory = match ctilde {
            Some(ct) if ct > 0.0 => n0 * gap * ct - c_eps1 - n1 * c_eps3 > 0.0,
            _ => true,
        };
        let viscous = p.nu <= 0.0 || n0 * p.nu - c_eps1 - n1 * c_eps2_eps3 > 0.0;
        memory && viscous && n0 > c0
    };
    let mut n0 = 1.0;
    while !ok(n0) && n0 < 1e300 {
        n0 *= 2.0;
    }
    Some(LyapunovConstants { n0, n1, eps1, eps2, eps3, c_p, c0, ctilde, c_eps1, c_eps2_eps3, c_eps3 })
}

/// Dissipation budget `2E(t) + 2 nu int_0^t |grad psi_t|^2 <= RHS`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationCheck {
    pub rhs: f64,
    pub residual: Vec<f64>,
    pub min_residual: f64,
    pub pass: bool,
}

/// `c_a2` is the constant of the kernel's positivity estimate (0 for kernels
/// without point mass in the catalog, 1 for the Dirac kernel).
pub fn dissipation_check(traj: &Trajectory, c_a2: f64) -> DissipationCheck {
    let snaps = snapshots(traj);
    dissipation_from(traj, &snaps, c_a2)
}

fn dissipation_from(traj: &Trajectory, snaps: &[Snapshot], c_a2: f64) -> DissipationCheck {
    let EquationParams { tau, c, nu, .. } = traj.params;
    let s = &traj.system;
    let b = traj.kernel.point_mass;
    let mut rhs = 0.0;
    for i in 0..s.n {
        rhs += (tau * s.xi2[i] + s.xi1[i]).powi(2)
            + c * c * s.mu[i] * s.xi0[i].powi(2)
            + (c * c * tau * tau * b * b + nu * tau * c_a2) * s.mu[i] * s.xi1[i].powi(2);
    }
    let mut acc = 0.0;
    let residual: Vec<f64> = snaps
        .iter()
        .enumerate()
        .map(|(n, sn)| {
            if n > 0 {
                acc += traj.dt * sn.grad_psi_t;
            }
            rhs - 2.0 * sn.e - 2.0 * nu * acc
        })
        .collect();
    let min_residual = residual.iter().copied().fold(f64::INFINITY, f64::min);
    DissipationCheck { rhs, pass: min_residual >= -1e-6 * rhs, residual, min_residual }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("series has a nonpositive value {value:e} at t = {t} inside the fit window; try a longer horizon or report non-decay")]
    Nonpositive { t: f64, value: f64 },
    #[error("fit window [{0}, {1}] holds fewer than two samples")]
    Window(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `-slope` of `log E` against `t`.
    pub rate: f64,
    pub r2: f64,
    /// `r2` was undefined (constant series) and reported as 0.
    pub degenerate: bool,
}

impl DecayFit {
    /// Decay rate when the fit supports exponential decay (`r2 >= 0.98`, positive rate).
    pub fn lambda(&self) -> Option<f64> {
        (!self.degenerate && self.r2 >= 0.98 && self.rate > 0.0).then_some(self.rate)
    }

    pub fn verdict(&self) -> String {
        match self.lambda() {
            Some(l) => format!("exponential decay, lambda = {l:.6}, r2 = {:.6}", self.r2),
            None => format!("no exponential fit (rate {:.6}, r2 = {:.6})", self.rate, self.r2),
        }
    }
}

/// Least-squares line through `(t, log y)` for `t` in `window`.
pub fn fit_decay(times: &[f64], series: &[f64], window: (f64, f64)) -> Result<DecayFit, FitError> {
    let mut pts = Vec::new();
    for (&t, &y) in times.iter().zip(series) {
        if t >= window.0 && t <= window.1 {
            if !(y > 0.0) {
                return Err(FitError::Nonpositive { t, value: y });
            }
            pts.push((t, y.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(FitError::Window(window.0, window.1));
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - ym).powi(2)).sum();
    let slope = sty / stt;
    // relative to the data scale, a flat log-series carries no slope information
    if syy <= 1e-24 * (1.0 + ym * ym) * m {
        return Ok(DecayFit { rate: 0.0, r2: 0.0, degenerate: true });
    }
    let r2 = (slope * sty / syy).clamp(0.0, 1.0);
    Ok(DecayFit { rate: -slope, r2, degenerate: false })
}

/// Pointwise checks of the two pointwise energy bounds; counts violations beyond rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub constant: f64,
    /// `max_n c^2 |grad psi|^2 / E`
    pub worst_gradient_ratio: f64,
    /// `max_n |tau (K*psi_t)_t|^2 / E_mod`
    pub worst_pressure_ratio: f64,
    pub gradient_violations: usize,
    pub pressure_violations: usize,
}

pub fn bound_check(params: &EquationParams, snaps: &[Snapshot]) -> Option<BoundCheck> {
    if !(params.gamma > params.tau_c2()) {
        return None;
    }
    let k = pointwise_bound_constant(params);
    let c2 = params.c * params.c;
    let mut out = BoundCheck {
        constant: k,
        worst_gradient_ratio: 0.0,
        worst_pressure_ratio: 0.0,
        gradient_violations: 0,
        pressure_violations: 0,
    };
    for s in snaps {
        let g = c2 * s.grad_psi;
        if g > k * s.e * (1.0 + 1e-12) + 1e-300 {
            out.gradient_violations += 1;
        }
        if s.e > 0.0 {
            out.worst_gradient_ratio = out.worst_gradient_ratio.max(g / s.e);
        }
        if s.pressure > k * s.emod * (1.0 + 1e-12) + 1e-300 {
            out.pressure_violations += 1;
        }
        if s.emod > 0.0 {
            out.worst_pressure_ratio = out.worst_pressure_ratio.max(s.pressure / s.emod);
        }
    }
    Some(out)
}

/// Counts steps where `(N0 - c0) E <= L <= (N0 + c0) E` fails.
pub fn sandwich_violations(snaps: &[Snapshot], lc: &LyapunovConstants) -> usize {
    snaps
        .iter()
        .filter(|s| {
            let l = lc.n0 * s.e + s.f1 + lc.n1 * s.f2;
            let slack = 1e-12 * lc.n0 * s.e.abs() + 1e-300;
            l < (lc.n0 - lc.c0) * s.e - slack || l > (lc.n0 + lc.c0) * s.e + slack
        })
        .count()
}

pub fn snapshots(traj: &Trajectory) -> Vec<Snapshot> {
    (0..=traj.steps).into_par_iter().map(|n| snapshot(traj, n)).collect()
}

#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub snaps: Vec<Snapshot>,
    pub lyapunov: Vec<f64>,
    pub constants: Option<LyapunovConstants>,
    pub dissipation: DissipationCheck,
    pub fit: Result<DecayFit, FitError>,
    pub window: (f64, f64),
    pub bounds: Option<BoundCheck>,
    pub sandwich_violations: Option<usize>,
    /// Steps where `E`, `E_mod` or the modified norm went negative beyond rounding.
    pub negative_energy_steps: usize,
}

impl EnergyReport {
    pub fn series(&self, f: impl Fn(&Snapshot) -> f64) -> Vec<f64> {
        self.snaps.iter().map(f).collect()
    }

    pub fn lambda_fit(&self) -> Option<f64> {
        self.fit.as_ref().ok().and_then(|f| f.lambda())
    }

    pub fn fit_r2(&self) -> f64 {
        self.fit.as_ref().map(|f| f.r2).unwrap_or(0.0)
    }
}

/// Full diagnostic pass. `window` defaults to `[T/2, T]`.
pub fn analyze(traj: &Trajectory, c_a2: f64, ctilde: Option<f64>, window: Option<(f64, f64)>) -> EnergyReport {
    let snaps = snapshots(traj);
    let t_end = traj.steps as f64 * traj.dt;
    let window = window.unwrap_or((0.5 * t_end, t_end));
    let constants = lyapunov_constants(&traj.params, traj.system.length, ctilde);
    let lyapunov = match &constants {
        Some(lc) => snaps.iter().map(|s| lc.n0 * s.e + s.f1 + lc.n1 * s.f2).collect(),
        None => vec![f64::NAN; snaps.len()],
    };
    let e: Vec<f64> = snaps.iter().map(|s| s.e).collect();
    let scale = snaps.iter().map(|s| s.e.abs() + s.emod.abs() + s.norm_mod.abs()).fold(0.0, f64::max);
    let negative_energy_steps = if traj.params.wellposed_ok() {
        snaps
            .iter()
            .filter(|s| s.e.min(s.emod).min(s.norm_mod) < -1e-12 * scale)
            .count()
    } else {
        0
    };
    EnergyReport {
        times: traj.times.clone(),
        dissipation: dissipation_from(traj, &snaps, c_a2),
        fit: fit_decay(&traj.times, &e, window),
        window,
        bounds: bound_check(&traj.params, &snaps),
        sandwich_violations: constants.as_ref().map(|lc| sandwich_violations(&snaps, lc)),
        lyapunov,
        constants,
        snaps,
        negative_energy_steps,
    }
}

pub const CSV_HEADER: &str = "t,E,Emod,norm_mod,F1,F2,L,dissipation_residual";

pub fn write_csv<W: io::Write>(report: &EnergyReport, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (n, s) in report.snaps.iter().enumerate() {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            report.times[n], s.e, s.emod, s.norm_mod, s.f1, s.f2, report.lyapunov[n], report.dissipation.residual[n]
        )?;
    }
    Ok(())
}

/// Line chart of `log10 E` against `t`, with the fitted line over the fit window.
pub fn render_svg(report: &EnergyReport) -> String {
    let (w, h, pad) = (640.0, 400.0, 56.0);
    let pts: Vec<(f64, f64)> = report
        .times
        .iter()
        .zip(&report.snaps)
        .filter(|(_, s)| s.e > 0.0)
        .map(|(&t, s)| (t, s.e.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if pts.is_empty() {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">E is zero</text></svg>"#, w / 2.0, h / 2.0);
        return svg;
    }
    let t0 = pts[0].0;
    let t1 = pts.last().unwrap().0.max(t0 + 1e-300);
    let mut y0 = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    let mut y1 = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
    if y1 <= y0 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let sx = |t: f64| pad + (t - t0) / (t1 - t0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" fill="none"><line x1="{pad}" y1="{}" x2="{}" y2="{}"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}"/></g>"#,
        h - pad,
        w - pad,
        h - pad,
        h - pad
    );
    let mut y = y0;
    let step = ((y1 - y0) / 8.0).ceil().max(1.0);
    while y <= y1 + 1e-9 {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">1e{}</text>"#,
            pad - 4.0,
            sy(y) + 4.0,
            y as i64
        );
        y += step;
    }
    for k in 0..=4 {
        let t = t0 + (t1 - t0) * k as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{t:.3}</text>"#, sx(t), h - pad + 16.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">t</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(svg, r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})">E (log scale)</text>"#, h / 2.0, h / 2.0);
    // thin out to at most ~2000 vertices
    let stride = (pts.len() / 2000).max(1);
    let mut path = String::new();
    for (i, p) in pts.iter().enumerate().filter(|(i, _)| i % stride == 0 || *i == pts.len() - 1) {
        let _ = write!(path, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, sx(p.0), sy(p.1));
    }
    let _ = writeln!(svg, r#"<path d="{}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#, path.trim_end());
    if let Ok(fit) = &report.fit {
        if !fit.degenerate {
            let (a, b) = report.window;
            let in_win: Vec<&(f64, f64)> = pts.iter().filter(|p| p.0 >= a && p.0 <= b).collect();
            if let Some(first) = in_win.first() {
                let mean_t = in_win.iter().map(|p| p.0).sum::<f64>() / in_win.len() as f64;
                let mean_y = in_win.iter().map(|p| p.1).sum::<f64>() / in_win.len() as f64;
                let slope = -fit.rate / std::f64::consts::LN_10;
                let line = |t: f64| (mean_y + slope * (t - mean_t)).clamp(y0, y1);
                let (ta, tb) = (first.0, in_win.last().unwrap().0);
                let _ = writeln!(
                    svg,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-dasharray="6 4" stroke-width="1.5"/>"#,
                    sx(ta),
                    sy(line(ta)),
                    sx(tb),
                    sy(line(tb))
                );
                let _ = writeln!(
                    svg,
                    r#"<text x="{}" y="{}" font-size="12" text-anchor="end" fill="crimson">{}</text>"#,
                    w - pad,
                    pad - 10.0,
                    fit.verdict()
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_system, GalerkinSystem, InitialData};
    use crate::kernels::Kernel;
    use crate::stepper::{run, DiracModal};
    use std::f64::consts::PI;

    fn p() -> EquationParams {
        EquationParams::new(0.5, 1.0, 1.0, 0.5).unwrap()
    }

    fn single(d: (f64, f64, f64)) -> GalerkinSystem {
        GalerkinSystem { length: PI, n: 1, mu: vec![1.0], xi0: vec![d.0], xi1: vec![d.1], xi2: vec![d.2] }
    }

    #[test]
    fn zero_trajectory_has_zero_functionals() {
        let k = Kernel::parse("exponential(beta=1.0)").unwrap();
        let s = build_system(PI, 3, &InitialData::default()).unwrap();
        let tr = run(&s, &p(), &k, 0.01, 50).unwrap();
        let rep = analyze(&tr, 0.0, Some(1.0), None);
        assert!(rep.snaps.iter().all(|s| s.e == 0.0 && s.emod == 0.0 && s.norm_mod == 0.0 && s.f1 == 0.0 && s.f2 == 0.0));
        assert!(rep.lyapunov.iter().all(|l| *l == 0.0));
        assert!(rep.dissipation.residual.iter().all(|r| *r == 0.0) && rep.dissipation.pass);
    }

    #[test]
    fn initial_energy_formula() {
        let k = Kernel::parse("exponential(beta=1.0)").unwrap();
        let s = GalerkinSystem { length: PI, n: 2, mu: vec![1.0, 4.0], xi0: vec![0.3, -0.7], xi1: vec![0.0; 2], xi2: vec![0.0; 2] };
        let tr = run(&s, &p(), &k, 0.01, 5).unwrap();
        let e0 = 0.5 * (0.09 + 4.0 * 0.49);
        assert!((energy_e(&tr, 0) - e0).abs() < 1e-15);
    }

    #[test]
    fn emod_middle_weight() {
        // gamma = 2 tau c^2: (tau c^2/gamma)((gamma - tau c^2)/gamma) = 1/4
        let q = EquationParams::new(0.5, 2.0, 4.0, 0.1).unwrap();
        let k = q.tau_c2() / q.gamma * ((q.gamma - q.tau_c2()) / q.gamma);
        assert_eq!(k, 0.25);
    }

    #[test]
    fn dirac_energy_matches_closed_form() {
        let k = Kernel::parse("dirac()").unwrap();
        let q = p();
        let tr = run(&single((1.0, 0.0, 0.0)), &q, &k, 1e-3, 10_000).unwrap();
        let ex = DiracModal::new(&q, 1.0, 1.0, (1.0, 0.0, 0.0)).unwrap();
        let (tau, c, g) = (q.tau, q.c, q.gamma);
        let mut worst = 0.0f64;
        for n in (0..=10_000).step_by(50) {
            let t = n as f64 * 1e-3;
            let (x, xt, xtt) = (ex.eval(t, 0), ex.eval(t, 1), ex.eval(t, 2));
            // K = delta: w = xi_t, w_t = xi_tt
            let e = 0.5 * ((tau * xtt + xt).powi(2) + c * c * (tau * xt + x).powi(2) + tau * (g - tau * c * c) * xt * xt);
            worst = worst.max((energy_e(&tr, n) - e).abs());
        }
        assert!(worst <= 5e-3, "{worst}");
    }

    #[test]
    fn dissipation_passes_for_dirac_and_exponential() {
        for spec in ["dirac()", "exponential(beta=1.0)"] {
            let k = Kernel::parse(spec).unwrap();
            let c_a2 = if k.is_dirac() { 1.0 } else { 0.0 };
            let tr = run(&single((1.0, 0.0, 0.0)), &p(), &k, 1e-3, 10_000).unwrap();
            let d = dissipation_check(&tr, c_a2);
            assert!(d.pass, "{spec}: min residual {}", d.min_residual);
        }
    }

    #[test]
    fn fit_exact_exponential() {
        let t: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|t| (-2.0 * t).exp()).collect();
        let f = fit_decay(&t, &y, (5.0, 10.0)).unwrap();
        assert!((f.rate - 2.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        assert_eq!(f.lambda(), Some(f.rate));
    }

    #[test]
    fn fit_constant_series_is_flagged() {
        let t: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let f = fit_decay(&t, &[3.0; 21], (10.0, 20.0)).unwrap();
        assert_eq!((f.rate, f.r2, f.degenerate), (0.0, 0.0, true));
        assert_eq!(f.lambda(), None);
        assert!(f.verdict().starts_with("no exponential fit"));
    }

    #[test]
    fn fit_rejects_nonpositive() {
        let t = [0.0, 1.0, 2.0];
        assert!(matches!(fit_decay(&t, &[1.0, 0.0, 1.0], (0.0, 2.0)), Err(FitError::Nonpositive { .. })));
    }

    #[test]
    fn dirac_decay_rate_matches_spectral_abscissa() {
        let k = Kernel::parse("dirac()").unwrap();
        let q = p();
        let tr = run(&single((1.0, 0.0, 0.0)), &q, &k, 2e-3, 15_000).unwrap();
        let rep = analyze(&tr, 1.0, Some(1.0), None);
        let ex = DiracModal::new(&q, 1.0, 1.0, (1.0, 0.0, 0.0)).unwrap();
        let want = -2.0 * ex.spectral_abscissa();
        let got = rep.fit.as_ref().unwrap().rate;
        assert!((got - want).abs() <= 0.1 * want, "{got} vs {want}");
    }

    #[test]
    fn n0_selection() {
        let q = EquationParams::new(0.1, 1.0, 0.5, 0.2).unwrap();
        let lc = lyapunov_constants(&q, PI, Some(1.0 / 64.0)).unwrap();
        assert!(lc.n0 > lc.c0);
        assert!(lc.n0 * q.nu - lc.c_eps1 - lc.n1 * lc.c_eps2_eps3 > 0.0);
        assert!(lc.n0 * (q.gamma - q.tau_c2()) / 64.0 - lc.c_eps1 - lc.n1 * lc.c_eps3 > 0.0);
        // minimal: half of it fails one of the conditions
        let h = lc.n0 / 2.0;
        assert!(
            !(h > lc.c0
                && h * q.nu - lc.c_eps1 - lc.n1 * lc.c_eps2_eps3 > 0.0
                && h * (q.gamma - q.tau_c2()) / 64.0 - lc.c_eps1 - lc.n1 * lc.c_eps3 > 0.0)
        );
        assert_eq!(lc.n1, 4.0);
        assert!(lyapunov_constants(&EquationParams::new(1.0, 1.0, 1.0, 0.2).unwrap(), PI, None).is_none());
    }

    #[test]
    fn svg_and_csv_render() {
        let k = Kernel::parse("exponential(beta=1.0)").unwrap();
        let tr = run(&single((1.0, 0.0, 0.0)), &p(), &k, 0.01, 400).unwrap();
        let rep = analyze(&tr, 0.0, Some(1.0), None);
        let svg = render_svg(&rep);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        let mut buf = Vec::new();
        write_csv(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 402);
    }
}
