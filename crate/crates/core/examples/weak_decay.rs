//! Polynomially decaying memory: the solution still decays, but the local
//! log-slope of the energy drifts, so a single exponential rate is not a
//! faithful description.

use mgt_memory::diagnostics::{fit_decay, snapshots};
use mgt_memory::discretization::{build_system, EquationParams, InitFunction, InitialData, InitialDatum};
use mgt_memory::kernels::Kernel;
use mgt_memory::stepper::run;

fn main() {
    let l = std::f64::consts::PI;
    let params = EquationParams::new(0.1, 1.0, 0.5, 0.2).unwrap();
    let bump = InitFunction::Gaussian { center: l / 2.0, width: 0.3, amp: 1.0 };
    let data = InitialData { psi0: InitialDatum::Function(bump), ..Default::default() };
    let system = build_system(l, 16, &data).unwrap();
    let kernel = Kernel::parse("polynomial(p=2)").unwrap();

    let dt = 5e-3;
    let traj = run(&system, &params, &kernel, dt, 8000).unwrap();
    let snaps = snapshots(&traj);
    let e: Vec<f64> = snaps.iter().map(|s| s.e).collect();
    println!("norm_mod(40) / norm_mod(0) = {:.3e}", snaps[8000].norm_mod / snaps[0].norm_mod);
    for (a, b) in [(5.0, 10.0), (10.0, 20.0), (20.0, 40.0)] {
        match fit_decay(&traj.times, &e, (a, b)) {
            Ok(f) => println!("window [{a:>4}, {b:>4}]: local rate {:.4}, r2 {:.4}", f.rate, f.r2),
            Err(err) => println!("window [{a:>4}, {b:>4}]: {err}"),
        }
    }
}
