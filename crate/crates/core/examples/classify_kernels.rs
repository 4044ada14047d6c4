//! Which kernels satisfy the well-posedness, exponential-decay and weak-decay
//! conditions, with the constants that feed the energy estimates.

use mgt_memory::assumptions::classify;
use mgt_memory::kernels::Kernel;
use mgt_memory::profile::Profile;

fn main() {
    let mut kernels: Vec<Kernel> = ["dirac()", "exponential(beta=1)", "abel(alpha=0.5)", "abel_tempered(alpha=0.5, beta=1)", "polynomial(p=2)"]
        .iter()
        .map(|s| Kernel::parse(s).unwrap())
        .collect();
    // k(t) = (1 + t)^-1 exp(-t/2), a user-supplied tempered kernel
    kernels.push(Kernel::custom_tempered(Profile::AlgebraicDecay { scale: 1.0, p: 1.0 }, 0.5).unwrap());

    println!("{:<34} {:>10} {:>10} {:>10} {:>8} {:>12}", "kernel", "wellposed", "decay", "weak", "C_A2", "c_tilde");
    for k in &kernels {
        let r = classify(k);
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4e}"));
        println!(
            "{:<34} {:>10} {:>10} {:>10} {:>8} {:>12}",
            k.describe(),
            r.wellposed.to_string(),
            r.decay.to_string(),
            r.weak.to_string(),
            opt(r.c_a2),
            opt(r.ctilde)
        );
    }
    println!("\nfull report for the Abel kernel:\n{}", classify(&kernels[2]));
}
