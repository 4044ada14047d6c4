//! Quadrature rules: Gauss-Legendre panels, tanh-sinh on finite intervals and
//! exp-sinh on half lines. The double-exponential rules tolerate integrable
//! endpoint singularities.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl_table(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static GL8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static GL16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        8 => GL8.get_or_init(|| gauss_legendre(8)),
        16 => GL16.get_or_init(|| gauss_legendre(16)),
        _ => panic!("only 8 and 16 point tables are cached"),
    }
}

/// Cached 16-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gl16_table() -> (&'static [f64], &'static [f64]) {
    let t = gl_table(16);
    (&t.0, &t.1)
}

/// 8-point Gauss-Legendre on one panel `[a, b]`.
pub fn gl8<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    panel(gl_table(8), f, a, b)
}

/// 16-point Gauss-Legendre on one panel `[a, b]`.
pub fn gl16<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    panel(gl_table(16), f, a, b)
}

fn panel<F: Fn(f64) -> f64>(t: &(Vec<f64>, Vec<f64>), f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    t.0.iter().zip(&t.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Tanh-sinh rule on `[a, b]`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> QuadResult {
    tanh_sinh_dist(|l, _| f(a + l), a, b, tol)
}

/// Tanh-sinh rule on `[a, b]` where the integrand receives the distances
/// `(x - a, b - x)` instead of `x`. The distance to the nearer endpoint is
/// exact, so integrands singular at either end keep full relative accuracy.
pub fn tanh_sinh_dist<F: Fn(f64, f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0 };
    }
    if b < a {
        let r = ts_core(&|l, r| f(r, l), b, a, tol);
        return QuadResult { value: -r.value, error: r.error };
    }
    ts_core(&f, a, b, tol)
}

fn ts_core(f: &dyn Fn(f64, f64) -> f64, a: f64, b: f64, tol: f64) -> QuadResult {
    let len = b - a;
    let half = 0.5 * len;
    // contribution of nodes +t and -t
    let pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        let delta = half * (-u).exp() / ch;
        if delta <= 0.0 || !w.is_finite() || w == 0.0 {
            return 0.0;
        }
        let far = len - delta;
        let mut s = f(delta, far);
        if t != 0.0 {
            s += f(far, delta);
        }
        w * s * half
    };
    let tmax = 6.56;
    let mut h = 1.0;
    let mut sum = pair(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += pair(k as f64 * h);
        k += 1;
    }
    let mut value = sum * h;
    let mut error = f64::INFINITY;
    for _level in 0..10 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while k as f64 * h <= tmax {
            add += pair(k as f64 * h);
            k += 2;
        }
        sum += add;
        let new = sum * h;
        error = (new - value).abs();
        value = new;
        if error <= tol * value.abs() || error < 1e-300 {
            break;
        }
    }
    QuadResult { value, error }
}

/// Exp-sinh rule on `[a, inf)` for integrands decaying at infinity.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> QuadResult {
    let node = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = u.exp();
        if !e.is_finite() || e == 0.0 {
            return 0.0;
        }
        let w = FRAC_PI_2 * t.cosh() * e;
        let x = a + e;
        if x == a {
            return 0.0;
        }
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            w * v
        }
    };
    let tmin: f64 = -4.5;
    let tmax = 4.0;
    let mut h: f64 = 0.5;
    let mut sum = 0.0;
    let mut k = (tmin / h).ceil() as i64;
    while k as f64 * h <= tmax {
        sum += node(k as f64 * h);
        k += 1;
    }
    let mut value = sum * h;
    let mut error = f64::INFINITY;
    for _level in 0..10 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = (tmin / h).ceil() as i64;
        if k % 2 == 0 {
            k += 1;
        }
        while k as f64 * h <= tmax {
            add += node(k as f64 * h);
            k += 2;
        }
        sum += add;
        let new = sum * h;
        error = (new - value).abs();
        value = new;
        if error <= tol * value.abs() || error < 1e-300 {
            break;
        }
    }
    QuadResult { value, error }
}

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 15 monomial x^14 integrates to 2/15
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
        assert!((gl16(|t| t.exp(), 0.0, 1.0) - (1.0f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        let r = tanh_sinh(|t| 1.0 / t.sqrt(), 0.0, 1.0, 1e-14);
        assert!((r.value - 2.0).abs() < 1e-12, "{}", r.value);
        let r = tanh_sinh_dist(|l, r| r.powf(-0.7) * l.powf(-0.2), 0.0, 1.0, 1e-14);
        // Beta(0.8, 0.3)
        let want = crate::special::gamma(0.8) * crate::special::gamma(0.3) / crate::special::gamma(1.1);
        assert!((r.value - want).abs() < 1e-10 * want, "{} vs {want}", r.value);
    }

    #[test]
    fn exp_sinh_half_line() {
        let r = exp_sinh(|t| (-t).exp(), 0.0, 1e-14);
        assert!((r.value - 1.0).abs() < 1e-13);
        let r = exp_sinh(|t| (-t).exp() / t.sqrt(), 0.0, 1e-14);
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let r = exp_sinh(|t| 1.0 / (1.0 + t * t), 1.0, 1e-14);
        assert!((r.value - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn simpson_cubic_exact() {
        let v = simpson(|x| x * x * x - x, 0.0, 2.0, 4);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
