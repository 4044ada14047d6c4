//! Two-parameter Mittag-Leffler function against closed forms:
//! `E_{1,1}(z) = exp(z)` and `E_{1/2,1}(-x) = exp(x^2) erfc(x)`.

use mgt_memory::special::mittag_leffler;
use statrs::function::erf::erfc;

fn main() {
    println!("{:>8} {:>22} {:>10}   {:>22} {:>10}", "x", "E_{1,1}(-x)", "err", "E_{1/2,1}(-x)", "err");
    for x in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let e1 = mittag_leffler(1.0, 1.0, -x).unwrap();
        let e_half = mittag_leffler(0.5, 1.0, -x).unwrap();
        let exact_half = (x * x).exp() * erfc(x);
        println!(
            "{x:>8.2} {e1:>22.15e} {:>10.2e}   {e_half:>22.15e} {:>10.2e}",
            (e1 - (-x).exp()).abs(),
            (e_half - exact_half).abs()
        );
    }
}
