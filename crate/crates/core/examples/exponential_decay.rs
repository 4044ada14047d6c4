//! Sixteen modes under exponential memory: the energy decays exponentially,
//! and the Lyapunov functional stays between (N0 - c0) E and (N0 + c0) E.

use mgt_memory::assumptions::classify;
use mgt_memory::diagnostics::analyze;
use mgt_memory::discretization::{build_system, EquationParams, InitFunction, InitialData, InitialDatum};
use mgt_memory::kernels::Kernel;
use mgt_memory::stepper::run;

fn main() {
    let l = std::f64::consts::PI;
    let params = EquationParams::new(0.1, 1.0, 0.5, 0.2).unwrap();
    let bump = InitFunction::Gaussian { center: l / 2.0, width: 0.3, amp: 1.0 };
    let data = InitialData { psi0: InitialDatum::Function(bump), ..Default::default() };
    let system = build_system(l, 16, &data).unwrap();
    let kernel = Kernel::parse("exponential(beta=1)").unwrap();
    let checks = classify(&kernel);

    let traj = run(&system, &params, &kernel, 5e-3, 8000).unwrap();
    let report = analyze(&traj, checks.c_a2.unwrap_or(0.0), checks.ctilde, None);

    for n in (0..=8000).step_by(1000) {
        let s = &report.snaps[n];
        println!("t = {:>5.1}  E = {:.4e}  L/E = {:.3}", traj.times[n], s.e, report.lyapunov[n] / s.e);
    }
    let lc = report.constants.as_ref().unwrap();
    println!("N0 = {}, c0 = {:.3}, sandwich violations = {:?}", lc.n0, lc.c0, report.sandwich_violations);
    println!("{}", report.fit.as_ref().map(|f| f.verdict()).unwrap_or_else(|e| e.to_string()));
    println!("dissipation budget: {}", if report.dissipation.pass { "pass" } else { "fail" });
}
