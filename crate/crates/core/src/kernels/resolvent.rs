use std::sync::Arc;

use super::{Kernel, KernelError, KernelSpec};
use crate::profile::Profile;
use crate::quad;
use crate::special::{gamma, rgamma};

/// Resolvent `A delta_0 + r` of a kernel, so that `K * (A delta_0 + r) = 1`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    /// Point-mass coefficient `A`.
    pub atom: f64,
    /// Regular part `r`.
    pub regular: Profile,
    /// `r_t` sampled on `t_n = n dt`, present when the kernel has a point mass.
    pub r_t: Option<Vec<f64>>,
    pub dt: f64,
    pub n: usize,
    pub closed_form: bool,
}

impl Resolvent {
    pub fn r(&self, t: f64) -> f64 {
        self.regular.eval(t)
    }

    /// `r(t_n)` for `n = 0..=N`; the value at `n = 0` is the `t -> 0+` limit.
    pub fn r_samples(&self) -> Vec<f64> {
        (0..=self.n)
            .map(|i| if i == 0 { self.regular.value_at_zero() } else { self.r(i as f64 * self.dt) })
            .collect()
    }
}

/// Resolvent of `kernel` on the grid `t_n = n dt`, `n <= N`. Catalog families
/// use closed forms; other kernels march a second-kind Volterra equation.
pub fn resolvent(kernel: &Kernel, dt: f64, n: usize) -> Result<Resolvent, KernelError> {
    let s = kernel.scale;
    let closed = match kernel.spec {
        Some(KernelSpec::Dirac) => Some((0.0, Profile::Constant(1.0 / s))),
        Some(KernelSpec::Exponential { beta }) => Some((1.0 / s, Profile::Constant(beta / s))),
        Some(KernelSpec::Abel { alpha }) => {
            Some((0.0, Profile::Power { scale: rgamma(1.0 - alpha) / s, exponent: -alpha }))
        }
        Some(KernelSpec::AbelTempered { alpha, beta }) => Some((
            0.0,
            Profile::Sum(vec![
                Profile::TemperedPower { scale: rgamma(1.0 - alpha) / s, exponent: -alpha, rate: beta },
                Profile::GammaRamp { scale: beta.powf(alpha) / s, a: 1.0 - alpha, rate: beta },
            ]),
        )),
        Some(KernelSpec::MittagLeffler { alpha, beta }) => {
            let g = gamma(1.0 - alpha) / s;
            if beta == 1.0 {
                Some((g, Profile::Power { scale: g * rgamma(alpha), exponent: alpha - 1.0 }))
            } else {
                Some((
                    0.0,
                    Profile::Sum(vec![
                        Profile::Power { scale: g * rgamma(1.0 - beta), exponent: -beta },
                        Profile::Power { scale: g * rgamma(1.0 + alpha - beta), exponent: alpha - beta },
                    ]),
                ))
            }
        }
        _ => None,
    };
    let (atom, regular, closed_form) = match closed {
        Some((a, r)) => (a, r, true),
        None => {
            let (a, r) = numeric_resolvent(kernel, dt, n)?;
            (a, r, false)
        }
    };
    let mut res = Resolvent { atom, regular, r_t: None, dt, n, closed_form };
    if kernel.point_mass != 0.0 {
        res.r_t = Some(finite_difference(&res.r_samples(), dt));
    }
    Ok(res)
}

fn numeric_resolvent(kernel: &Kernel, dt: f64, n: usize) -> Result<(f64, Profile), KernelError> {
    let k = &kernel.density;
    let b = kernel.point_mass;
    let mut r = vec![0.0; n + 1];
    if b > 0.0 {
        // B r + k * r = 1
        r[0] = 1.0 / b;
        if k.singular_at_zero() {
            let w = super::conv_weights(k, dt, n);
            for i in 1..=n {
                let hist: f64 = (1..i).map(|j| w.get(i - j) * r[j]).sum();
                let d = b + w.get(0);
                r[i] = (1.0 - hist) / d;
            }
        } else {
            let ks: Vec<f64> = (0..=n).map(|m| if m == 0 { k.value_at_zero() } else { k.eval(m as f64 * dt) }).collect();
            let d = b + 0.5 * dt * ks[0];
            if d == 0.0 {
                return Err(KernelError::ResolventBreakdown { step: 1, reason: "zero diagonal".into() });
            }
            for i in 1..=n {
                let hist: f64 = 0.5 * ks[i] * r[0] + (1..i).map(|j| ks[i - j] * r[j]).sum::<f64>();
                r[i] = (1.0 - dt * hist) / d;
            }
        }
        return Ok((0.0, Profile::Sampled { dt, values: Arc::new(r) }));
    }
    let k0 = k.value_at_zero();
    if !k0.is_finite() || k0 == 0.0 {
        return Err(KernelError::UnsupportedResolvent {
            reason: format!("density(0+) = {k0}; the numeric scheme needs a finite nonzero limit"),
        });
    }
    let a = 1.0 / k0;
    // differentiated identity: k(0) r + k' * r = -A k'
    let kd: Vec<f64> = (0..=n).map(|m| k.derivative(m as f64 * dt)).collect();
    if kd.iter().any(|v| !v.is_finite()) {
        return Err(KernelError::UnsupportedResolvent { reason: "density derivative is not finite on the grid".into() });
    }
    r[0] = -a * kd[0] / k0;
    let d = k0 + 0.5 * dt * kd[0];
    if d == 0.0 {
        return Err(KernelError::ResolventBreakdown { step: 1, reason: "zero diagonal".into() });
    }
    for i in 1..=n {
        let hist = 0.5 * kd[i] * r[0] + (1..i).map(|j| kd[i - j] * r[j]).sum::<f64>();
        r[i] = (-a * kd[i] - dt * hist) / d;
        if !r[i].is_finite() {
            return Err(KernelError::ResolventBreakdown { step: i, reason: "non-finite value".into() });
        }
    }
    Ok((a, Profile::Sampled { dt, values: Arc::new(r) }))
}

/// Central differences, second-order one-sided at both ends.
fn finite_difference(r: &[f64], dt: f64) -> Vec<f64> {
    let n = r.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * r[0] + 4.0 * r[1] - r[2]) / (2.0 * dt);
    for i in 1..n - 1 {
        d[i] = (r[i + 1] - r[i - 1]) / (2.0 * dt);
    }
    d[n - 1] = (3.0 * r[n - 1] - 4.0 * r[n - 2] + r[n - 3]) / (2.0 * dt);
    d
}

/// `(K * (A delta_0 + r))(t_n) - 1` for `n = 1..=N`, the convolution integral
/// evaluated by adaptive quadrature.
pub fn resolvent_identity_residuals(kernel: &Kernel, res: &Resolvent) -> Vec<f64> {
    let s = &kernel.density;
    let b = kernel.point_mass;
    (1..=res.n)
        .map(|i| {
            let t = i as f64 * res.dt;
            let mut v = b * res.r(t) + res.atom * s.eval(t);
            v += convolution_at(s, &res.regular, t, res.dt);
            v - 1.0
        })
        .collect()
}

fn convolution_at(s: &Profile, r: &Profile, t: f64, dt: f64) -> f64 {
    if s.is_zero() || r.is_zero() {
        return 0.0;
    }
    match r {
        Profile::Constant(c) => c * s.integral(0.0, t),
        Profile::Sampled { .. } => {
            // r is linear on each grid cell: integrate cell by cell
            let cells = (t / dt).round() as usize;
            let singular = s.singular_at_zero();
            (0..cells)
                .map(|m| {
                    let lo = m as f64 * dt;
                    let hi = lo + dt;
                    if m == 0 && singular {
                        quad::tanh_sinh_dist(|l, _| s.eval(l) * r.eval(t - l), lo, hi, 1e-13).value
                    } else {
                        quad::gl8(|u| s.eval(u) * r.eval(t - u), lo, hi)
                    }
                })
                .sum()
        }
        _ => quad::tanh_sinh_dist(|l, rr| s.eval(l) * r.eval(rr), 0.0, t, 1e-13).value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn dirac_resolvent_is_constant_one() {
        let k = Kernel::parse("dirac()").unwrap();
        let r = resolvent(&k, 0.01, 100).unwrap();
        assert_eq!(r.atom, 0.0);
        assert_eq!(r.r(3.3), 1.0);
        assert!(r.r_t.as_ref().unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn exponential_resolvent() {
        let k = Kernel::parse("exponential(beta=3.0)").unwrap();
        let r = resolvent(&k, 0.01, 100).unwrap();
        assert_eq!(r.atom, 1.0);
        assert_eq!(r.r(0.5), 3.0);
        assert!(r.r_t.is_none());
    }

    #[test]
    fn abel_resolvent() {
        let k = Kernel::parse("abel(alpha=0.5)").unwrap();
        let r = resolvent(&k, 0.01, 100).unwrap();
        assert_eq!(r.atom, 0.0);
        assert!((r.r(1.0) - 0.5641895835477563).abs() < 1e-15);
        assert!((r.r(4.0) - 0.5 * 0.5641895835477563).abs() < 1e-15);
    }

    #[test]
    fn closed_form_identities() {
        let dt = 10.0 / 1024.0;
        for s in ["dirac()", "exponential(beta=1.0)", "abel(alpha=0.5)", "abel_tempered(alpha=0.4,beta=0.8)"] {
            let k = Kernel::parse(s).unwrap();
            let r = resolvent(&k, dt, 1024).unwrap();
            let e = max_abs(&resolvent_identity_residuals(&k, &r));
            assert!(e < 1e-9, "{s}: {e}");
        }
    }

    #[test]
    fn mittag_leffler_identities() {
        let dt = 10.0 / 64.0;
        for s in ["mittag_leffler(alpha=0.5,beta=0.8)", "mittag_leffler(alpha=0.6,beta=1.0)"] {
            let k = Kernel::parse(s).unwrap();
            let r = resolvent(&k, dt, 64).unwrap();
            let e = max_abs(&resolvent_identity_residuals(&k, &r));
            assert!(e < 1e-8, "{s}: {e}");
        }
    }

    #[test]
    fn continuous_kernel_atom_is_reciprocal_limit() {
        let k = Kernel::parse("mittag_leffler(alpha=0.6,beta=1.0)").unwrap();
        let r = resolvent(&k, 0.1, 10).unwrap();
        assert!((r.atom - 1.0 / k.density.value_at_zero()).abs() < 1e-14);
        let p = Kernel::parse("polynomial(p=2.0)").unwrap();
        let r = resolvent(&p, 0.1, 10).unwrap();
        assert_eq!(r.atom, 1.0);
    }

    #[test]
    fn polynomial_numeric_identity() {
        let dt = 10.0 / 1024.0;
        let k = Kernel::parse("polynomial(p=2.0)").unwrap();
        let r = resolvent(&k, dt, 1024).unwrap();
        assert!(!r.closed_form);
        let e = max_abs(&resolvent_identity_residuals(&k, &r));
        assert!(e < 1e-3, "{e}");
    }

    #[test]
    fn numeric_resolvent_is_second_order() {
        let k = Kernel::parse("polynomial(p=2.0)").unwrap();
        let err = |n: usize| {
            let r = resolvent(&k, 10.0 / n as f64, n).unwrap();
            max_abs(&resolvent_identity_residuals(&k, &r))
        };
        let (e1, e2) = (err(256), err(512));
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn numeric_scheme_reproduces_exponential() {
        // the exponential kernel through the generic path: r = beta exactly
        let k = Kernel::custom(0.0, Profile::custom(|t| (-2.0 * t).exp())).unwrap();
        let r = resolvent(&k, 0.01, 200).unwrap();
        assert!((r.atom - 1.0).abs() < 1e-12);
        for i in 0..=200 {
            // trapezoid truncation grows like t dt^2
            assert!((r.r(i as f64 * 0.01) - 2.0).abs() < 2e-4 * (i as f64 * 0.01).max(0.01));
        }
    }

    #[test]
    fn point_mass_custom_kernel() {
        // delta_0 + e^{-t}: K^ = (z+2)/(z+1), so r = (1 + e^{-2t})/2 and no atom
        let k = Kernel::custom(1.0, Profile::Exponential { scale: 1.0, rate: 1.0 }).unwrap();
        let r = resolvent(&k, 0.001, 2000).unwrap();
        assert_eq!(r.atom, 0.0);
        for &t in &[0.0, 0.5, 1.0, 2.0] {
            assert!((r.r(t) - 0.5 * (1.0 + (-2.0 * t).exp())).abs() < 1e-6, "{t}");
        }
        let rt = r.r_t.as_ref().unwrap();
        assert!((rt[1000] + (-2.0f64).exp()).abs() < 1e-5);
        let e = max_abs(&resolvent_identity_residuals(&k, &r));
        assert!(e < 1e-5, "{e}");
    }

    #[test]
    fn unsupported_custom_kernel() {
        let k = Kernel::custom(0.0, Profile::custom(|t: f64| t.powf(-0.3))).unwrap();
        assert!(matches!(resolvent(&k, 0.1, 10), Err(KernelError::UnsupportedResolvent { .. })));
        let k = Kernel::custom(0.0, Profile::custom(|t: f64| t)).unwrap();
        assert!(matches!(resolvent(&k, 0.1, 10), Err(KernelError::UnsupportedResolvent { .. })));
    }

    #[test]
    fn scaling_divides_resolvent() {
        let k = Kernel::parse("exponential(beta=2.0)").unwrap().scaled(4.0);
        let r = resolvent(&k, 0.1, 10).unwrap();
        assert_eq!(r.atom, 0.25);
        assert_eq!(r.r(1.0), 0.5);
        let e = max_abs(&resolvent_identity_residuals(&k, &r));
        assert!(e < 1e-12);
    }
}
