//! Built-in memory kernels: density samples, mass on [0, 1] and the
//! real part of the Fourier transform at a few frequencies.

use mgt_memory::kernels::{fourier_transform, Kernel};

fn main() {
    let specs = [
        "dirac()",
        "exponential(beta=1)",
        "abel(alpha=0.5)",
        "abel_tempered(alpha=0.5, beta=1)",
        "mittag_leffler(alpha=0.5, beta=1)",
        "polynomial(p=2)",
    ];
    println!("{:<36} {:>10} {:>10} {:>10} {:>12} {:>12}", "kernel", "k(0.1)", "k(1)", "k(10)", "Re k^(1)", "Re k^(100)");
    for s in specs {
        let k = Kernel::parse(s).expect("catalog spec");
        let re = |w: f64| fourier_transform(&k, w).map(|z| format!("{:.4e}", z.re)).unwrap_or_else(|e| e.to_string());
        println!(
            "{:<36} {:>10.4} {:>10.4} {:>10.4} {:>12} {:>12}",
            k.describe(),
            k.density_at(0.1),
            k.density_at(1.0),
            k.density_at(10.0),
            re(1.0),
            re(100.0)
        );
    }
    println!("\nthe Dirac kernel has no density; its transform is the constant point mass");
}
