//! α, β, δ, the step law and C̃ for a given κ.
//!
//! cargo run --release --example constants -- [kappa]

use planar_peeling::params::KappaInput;
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "9/128".into());
    let p = PeelParams::from_kappa_input(&KappaInput::parse(&arg)?)?;
    println!("kappa {}  alpha {:.12}  beta {:.12}  delta {:.12}", p.kappa, p.alpha, p.beta, p.drift);
    println!("q_1 = {:.6}", p.q_1);
    for k in 1..=6 {
        println!("q_-{k} = {:.6e}", p.q_neg(k));
    }
    for q in [2, 3, 5, 10, 50, 200] {
        println!("C~_{q:<3} = {:.8}", p.c_tilde(q)?);
    }
    if !p.is_critical() {
        println!("C~ limit 1/(alpha delta) = {:.8}", p.c_tilde_limit());
    }
    println!("normalization residual {:.2e}, drift residual {:.2e}", p.normalization_residual(), p.drift_residual());
    Ok(())
}
