//! Marching a second-kind Volterra equation with product-integration weights:
//! `x(t) + int_0^t exp(-(t-s)) x(s) ds = 1`, whose solution is
//! `x(t) = (1 + exp(-2t)) / 2`. The error shrinks linearly with the step.

use mgt_memory::kernels::conv_weights;
use mgt_memory::profile::Profile;
use mgt_memory::volterra::VolterraOp;

fn main() {
    let kernel = Profile::Exponential { scale: 1.0, rate: 1.0 };
    let t_end = 5.0;
    let mut prev: Option<f64> = None;
    for n in [100, 200, 400, 800, 1600] {
        let dt = t_end / n as f64;
        let op = VolterraOp::new(1.0, dt, n).with_term(1.0, conv_weights(&kernel, dt, n));
        let x = op.march(&vec![1.0; n + 1]).expect("well-posed march");
        let err = (0..=n)
            .map(|i| (x[i] - 0.5 * (1.0 + (-2.0 * i as f64 * dt).exp())).abs())
            .fold(0.0, f64::max);
        let ratio = prev.map_or(String::new(), |p| format!("ratio {:.3}", p / err));
        println!("dt = {dt:.5}  max error = {err:.3e}  {ratio}");
        prev = Some(err);
    }
}
