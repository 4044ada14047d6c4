//! Resolvents `A delta_0 + r` with `K * (A delta_0 + r) = 1`, and the
//! worst residual of that identity on a grid of 1024 steps up to t = 10.

use mgt_memory::kernels::{resolvent, resolvent_identity_residuals, Kernel};

fn main() {
    let (dt, n) = (10.0 / 1024.0, 1024);
    println!("{:<36} {:>8} {:>12} {:>12} {:>12} {:>10}", "kernel", "A", "r(0.5)", "r(5)", "max resid", "closed");
    for s in ["dirac()", "exponential(beta=1)", "abel(alpha=0.5)", "mittag_leffler(alpha=0.5, beta=1)", "polynomial(p=2)"] {
        let k = Kernel::parse(s).unwrap();
        let res = resolvent(&k, dt, n).unwrap();
        let worst = resolvent_identity_residuals(&k, &res).into_iter().fold(0.0f64, |a, b| a.max(b.abs()));
        println!(
            "{:<36} {:>8.4} {:>12.6} {:>12.6} {:>12.3e} {:>10}",
            s,
            res.atom,
            res.r(0.5),
            res.r(5.0),
            worst,
            res.closed_form
        );
    }
}
