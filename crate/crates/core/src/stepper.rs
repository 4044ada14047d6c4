//! Time integration of the modal system. For each mode the unknown is
//! `chi = (K * xi_t)_tt`; with the resolvent `A delta_0 + r` of the kernel,
//! every other quantity is an explicit functional of `chi`:
//!
//! ```text
//! b        = point_mass * xi1            (K * xi_t)(0)
//! w        = b + xi2 t + 1*1*chi         K * xi_t
//! w_t      = xi2 + 1*chi
//! xi_t     = xi2 (A + 1*r) + b r + A 1*chi + 1*r*chi
//! xi       = xi0 + xi2 (A t + 1*1*r) + b 1*r + A 1*1*chi + 1*1*r*chi
//! ```
//!
//! Substituting into `tau chi + xi_tt + c^2 mu xi + gamma mu w + nu mu xi_t = 0`
//! gives a second-kind Volterra equation for `chi`, solved by product
//! integration with the same weight tables used for the reconstruction.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::discretization::{validate_compatibility, CompatibilityViolation, EquationParams, GalerkinSystem, ParamsError};
use crate::kernels::{conv_weights, resolvent, ConvWeights, Kernel, KernelError, Resolvent};
use crate::volterra::{march_with, VolterraError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepperError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Compatibility(#[from] CompatibilityViolation),
    #[error("resolvent: {0}")]
    Kernel(#[from] KernelError),
    #[error("kernel has a point mass but r_t is unavailable or not finite; a point mass needs a resolvent with integrable derivative")]
    MissingRateOfChange,
    #[error("time grid needs dt > 0 and at least one step (dt = {dt}, steps = {steps})")]
    Grid { dt: f64, steps: usize },
    #[error("resolvent grid (dt = {dt}, steps = {steps}) does not cover the run")]
    ResolventGrid { dt: f64, steps: usize },
    #[error("mode {mode}: {source}")]
    Solver { mode: usize, source: VolterraError },
}

/// Per-mode samples on `t_n = n dt`, `n = 0..=N`, indexed `[mode][n]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub mu: Vec<f64>,
    pub chi_hat: Vec<Vec<f64>>,
    pub xi: Vec<Vec<f64>>,
    pub xi_t: Vec<Vec<f64>>,
    pub conv_xi_t: Vec<Vec<f64>>,
    pub conv_xi_t_dt: Vec<Vec<f64>>,
    pub params: EquationParams,
    pub kernel: Kernel,
    pub resolvent: Resolvent,
    /// Initial data the run started from.
    pub system: GalerkinSystem,
}

impl Trajectory {
    pub fn n_modes(&self) -> usize {
        self.mu.len()
    }
}

/// Weight tables shared by every mode of a run.
#[derive(Debug, Clone)]
pub struct SharedTables {
    pub dt: f64,
    pub steps: usize,
    pub atom: f64,
    pub w1: ConvWeights,
    pub wr: ConvWeights,
    pub w11: ConvWeights,
    pub w1r: ConvWeights,
    pub w11r: ConvWeights,
    /// `r(t_n)`, `+inf` allowed at `n = 0`.
    pub r: Vec<f64>,
    pub r_t: Vec<f64>,
    /// Rule values of `(1*r)(t_n)` and `(1*1*r)(t_n)`.
    pub r1: Vec<f64>,
    pub r11: Vec<f64>,
}

impl SharedTables {
    pub fn new(kernel: &Kernel, res: &Resolvent, dt: f64, steps: usize) -> Result<Self, StepperError> {
        if res.dt != dt || res.n < steps {
            return Err(StepperError::ResolventGrid { dt: res.dt, steps: res.n });
        }
        let r_t = if kernel.point_mass != 0.0 {
            match &res.r_t {
                Some(v) if v.len() > steps && v[..=steps].iter().all(|x| x.is_finite()) => v[..=steps].to_vec(),
                _ => return Err(StepperError::MissingRateOfChange),
            }
        } else {
            vec![0.0; steps + 1]
        };
        let w1 = ConvWeights::uniform(1.0, dt, steps);
        let wr = conv_weights(&res.regular, dt, steps);
        let w11 = w1.compose(&w1);
        let w1r = w1.compose(&wr);
        let w11r = w1.compose(&w1r);
        let mut r1 = vec![0.0; steps + 1];
        let mut r11 = vec![0.0; steps + 1];
        for n in 1..=steps {
            r1[n] = r1[n - 1] + wr.get(n - 1);
            r11[n] = r11[n - 1] + dt * r1[n];
        }
        let mut r = res.r_samples();
        r.truncate(steps + 1);
        Ok(SharedTables { dt, steps, atom: res.atom, w1, wr, w11, w1r, w11r, r, r_t, r1, r11 })
    }
}

// a * x with 0 * inf = 0
fn smul(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x
    }
}

/// Scalar Volterra problem of one mode: `c0 chi[n] + sum_j w[n-j] chi[j] = f[n]`.
#[derive(Debug, Clone)]
pub struct ModeOp {
    pub c0: f64,
    pub weights: Vec<f64>,
    pub forcing: Vec<f64>,
}

impl ModeOp {
    pub fn solve(&self) -> Result<Vec<f64>, VolterraError> {
        march_with(self.c0, &self.weights, &self.forcing)
    }
}

/// Builds the mode equation for eigenvalue `mu` and mode data `(xi0, xi1, xi2)`.
pub fn assemble_mode_op(
    mu: f64,
    data: (f64, f64, f64),
    params: &EquationParams,
    point_mass: f64,
    tab: &SharedTables,
) -> ModeOp {
    let (xi0, xi1, xi2) = data;
    let EquationParams { tau, c, gamma, nu } = *params;
    let a = tab.atom;
    let c2m = c * c * mu;
    let gm = gamma * mu;
    let nm = nu * mu;
    let n = tab.steps;
    let weights: Vec<f64> = (0..=n)
        .map(|m| {
            tab.wr.get(m)
                + c2m * (a * tab.w11.get(m) + tab.w11r.get(m))
                + gm * tab.w11.get(m)
                + nm * (a * tab.w1.get(m) + tab.w1r.get(m))
        })
        .collect();
    let b = point_mass * xi1;
    let forcing = (0..=n)
        .map(|i| {
            let t = i as f64 * tab.dt;
            let (r, r1, r11) = (tab.r[i], tab.r1[i], tab.r11[i]);
            -smul(xi2, r)
                - smul(b, tab.r_t[i])
                - c2m * (xi0 + xi2 * (a * t + r11) + b * r1)
                - gm * (xi2 * t + b)
                - nm * (xi2 * (a + r1) + smul(b, r))
        })
        .collect();
    ModeOp { c0: tau + a, weights, forcing }
}

struct ModeSeries {
    chi: Vec<f64>,
    xi: Vec<f64>,
    xi_t: Vec<f64>,
    w: Vec<f64>,
    w_t: Vec<f64>,
}

fn run_mode(
    mu: f64,
    data: (f64, f64, f64),
    params: &EquationParams,
    point_mass: f64,
    tab: &SharedTables,
) -> Result<ModeSeries, VolterraError> {
    let (xi0, xi1, xi2) = data;
    let chi = assemble_mode_op(mu, data, params, point_mass, tab).solve()?;
    let a = tab.atom;
    let b = point_mass * xi1;
    let s1 = tab.w1.apply(&chi);
    let s11 = tab.w1.apply(&s1);
    let sr = tab.wr.apply(&chi);
    let s1r = tab.w1.apply(&sr);
    let s11r = tab.w1.apply(&s1r);
    let n = tab.steps;
    let mut out = ModeSeries {
        chi,
        xi: vec![0.0; n + 1],
        xi_t: vec![0.0; n + 1],
        w: vec![0.0; n + 1],
        w_t: vec![0.0; n + 1],
    };
    for i in 0..=n {
        let t = i as f64 * tab.dt;
        out.w_t[i] = xi2 + s1[i];
        out.w[i] = b + xi2 * t + s11[i];
        out.xi_t[i] = xi2 * (a + tab.r1[i]) + smul(b, tab.r[i]) + a * s1[i] + s1r[i];
        out.xi[i] = xi0 + xi2 * (a * t + tab.r11[i]) + b * tab.r1[i] + a * s11[i] + s11r[i];
    }
    // exact initial values; the point-mass formula above already gives xi1 at n = 0
    out.xi_t[0] = xi1;
    out.xi[0] = xi0;
    Ok(out)
}

/// Integrates every mode of `system` over `steps` steps of size `dt`.
pub fn run(
    system: &GalerkinSystem,
    params: &EquationParams,
    kernel: &Kernel,
    dt: f64,
    steps: usize,
) -> Result<Trajectory, StepperError> {
    if !(dt > 0.0 && dt.is_finite()) || steps == 0 {
        return Err(StepperError::Grid { dt, steps });
    }
    params.require_wellposed()?;
    let res = resolvent(kernel, dt, steps)?;
    run_with_resolvent(system, params, kernel, res)
}

/// As [`run`] with a precomputed resolvent whose grid fixes `dt` and the step count.
pub fn run_with_resolvent(
    system: &GalerkinSystem,
    params: &EquationParams,
    kernel: &Kernel,
    res: Resolvent,
) -> Result<Trajectory, StepperError> {
    let (dt, steps) = (res.dt, res.n);
    if !(dt > 0.0 && dt.is_finite()) || steps == 0 {
        return Err(StepperError::Grid { dt, steps });
    }
    params.require_wellposed()?;
    validate_compatibility(system, kernel, &res)?;
    let tab = SharedTables::new(kernel, &res, dt, steps)?;
    let modes: Vec<ModeSeries> = (0..system.n)
        .into_par_iter()
        .map(|i| {
            run_mode(system.mu[i], (system.xi0[i], system.xi1[i], system.xi2[i]), params, kernel.point_mass, &tab)
                .map_err(|source| StepperError::Solver { mode: i + 1, source })
        })
        .collect::<Result<_, _>>()?;
    let mut traj = Trajectory {
        dt,
        steps,
        times: (0..=steps).map(|i| i as f64 * dt).collect(),
        mu: system.mu.clone(),
        chi_hat: Vec::with_capacity(system.n),
        xi: Vec::with_capacity(system.n),
        xi_t: Vec::with_capacity(system.n),
        conv_xi_t: Vec::with_capacity(system.n),
        conv_xi_t_dt: Vec::with_capacity(system.n),
        params: *params,
        kernel: kernel.clone(),
        resolvent: res,
        system: system.clone(),
    };
    for m in modes {
        traj.chi_hat.push(m.chi);
        traj.xi.push(m.xi);
        traj.xi_t.push(m.xi_t);
        traj.conv_xi_t.push(m.w);
        traj.conv_xi_t_dt.push(m.w_t);
    }
    Ok(traj)
}

/// Exact solution of one mode under the kernel `scale * delta_0`:
/// `tau s x''' + x'' + (gamma s + nu) mu x' + c^2 mu x = 0` with
/// `x(0) = xi0`, `x'(0) = xi1`, `s x''(0) = xi2`.
#[derive(Debug, Clone)]
pub struct DiracModal {
    pub roots: [Complex64; 3],
    coeffs: [Complex64; 3],
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModalError {
    #[error("characteristic cubic has (nearly) repeated roots; the exponential basis is degenerate")]
    RepeatedRoots,
    #[error("root iteration did not converge")]
    NoConvergence,
}

impl DiracModal {
    pub fn new(params: &EquationParams, scale: f64, mu: f64, data: (f64, f64, f64)) -> Result<Self, ModalError> {
        let EquationParams { tau, c, gamma, nu } = *params;
        let lead = tau * scale;
        // monic cubic s^3 + p2 s^2 + p1 s + p0
        let p = [c * c * mu / lead, (gamma * scale + nu) * mu / lead, 1.0 / lead];
        let roots = cubic_roots(p)?;
        let scale_min = roots.iter().map(|r| r.norm()).fold(1.0f64, f64::max);
        for i in 0..3 {
            for j in 0..i {
                if (roots[i] - roots[j]).norm() < 1e-6 * scale_min {
                    return Err(ModalError::RepeatedRoots);
                }
            }
        }
        let (x0, x1, x2) = (data.0, data.1, data.2 / scale);
        // Vandermonde solve by Lagrange form
        let mut coeffs = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let (rj, rk) = (roots[j], roots[k]);
            coeffs[i] = (x2 - (rj + rk) * x1 + rj * rk * x0) / ((roots[i] - rj) * (roots[i] - rk));
        }
        Ok(DiracModal { roots, coeffs })
    }

    /// Derivative of order `k` (0..=3) at `t`.
    pub fn eval(&self, t: f64, k: i32) -> f64 {
        self.roots
            .iter()
            .zip(&self.coeffs)
            .map(|(r, a)| a * r.powi(k) * (r * t).exp())
            .sum::<Complex64>()
            .re
    }

    /// Largest real part of the characteristic roots.
    pub fn spectral_abscissa(&self) -> f64 {
        self.roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Roots of `s^3 + p[2] s^2 + p[1] s + p[0]` by Durand-Kerner iteration and Newton polishing.
pub fn cubic_roots(p: [f64; 3]) -> Result<[Complex64; 3], ModalError> {
    let poly = |z: Complex64| ((z + p[2]) * z + p[1]) * z + p[0];
    let dpoly = |z: Complex64| (3.0 * z + 2.0 * p[2]) * z + p[1];
    let bound = 1.0 + p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z = [seed * bound, seed.powi(2) * bound, seed.powi(3) * bound];
    let mut converged = false;
    for _ in 0..500 {
        let mut change = 0.0f64;
        for i in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = poly(z[i]) / den;
            z[i] -= step;
            change = change.max(step.norm());
        }
        if change <= 1e-15 * bound {
            converged = true;
            break;
        }
    }
    if !converged || z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(ModalError::NoConvergence);
    }
    for v in z.iter_mut() {
        for _ in 0..3 {
            let d = dpoly(*v);
            if d.norm() == 0.0 {
                break;
            }
            *v -= poly(*v) / d;
        }
    }
    Ok(z)
}
