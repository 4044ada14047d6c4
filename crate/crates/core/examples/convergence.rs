//! Step-halving study driven by a scenario file, as `mgt convergence` does.

use mgt_memory::cli::cmd_convergence;
use mgt_memory::config::ScenarioConfig;

const SCENARIO: &str = r#"
[equation]
tau = 0.5
c = 1.0
gamma = 1.0
nu = 0.5

[kernel]
spec = "exponential(beta=1)"

[domain]
length = 3.141592653589793
n_modes = 4

[initial.psi0]
function = "sin_modes(k=1, amp=1)"

[time]
dt = 0.02
n_steps = 250
"#;

fn main() {
    let mut cfg = ScenarioConfig::from_toml_str(SCENARIO).unwrap();
    println!("{}", cmd_convergence(&cfg, 4).unwrap());
    cfg.kernel.spec = "dirac()".into();
    println!("{}", cmd_convergence(&cfg, 4).unwrap());
}
