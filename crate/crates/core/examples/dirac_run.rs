//! One Galerkin mode with the Dirac kernel, integrated by the Volterra stepper
//! and compared with the exact solution built from the characteristic cubic.

use mgt_memory::discretization::{build_system, EquationParams, InitialData, InitialDatum};
use mgt_memory::kernels::Kernel;
use mgt_memory::stepper::{run, DiracModal};

fn main() {
    let params = EquationParams::new(0.5, 1.0, 1.0, 0.5).unwrap();
    let data = InitialData { psi0: InitialDatum::Coefficients(vec![1.0]), ..Default::default() };
    let system = build_system(std::f64::consts::PI, 1, &data).unwrap();
    let kernel = Kernel::parse("dirac()").unwrap();
    let exact = DiracModal::new(&params, kernel.point_mass, system.mu[0], (system.xi0[0], system.xi1[0], system.xi2[0])).unwrap();
    println!("spectral abscissa {:.6}", exact.spectral_abscissa());

    for dt in [4e-3_f64, 2e-3, 1e-3, 5e-4] {
        let steps = (10.0 / dt).round() as usize;
        let traj = run(&system, &params, &kernel, dt, steps).unwrap();
        let err = (0..=steps).map(|n| (traj.xi[0][n] - exact.eval(traj.times[n], 0)).abs()).fold(0.0, f64::max);
        println!("dt = {dt:.0e}  max |xi - exact| on [0, 10] = {err:.3e}");
    }
}
