//! E[1/deg(root)] by peeling until the root vertex is enclosed.
//!
//! cargo run --release --example inverse_degree -- [kappa] [trials]

use planar_peeling::params::KappaInput;
use planar_peeling::walk::estimate_inv_degree;
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kappa = args.first().cloned().unwrap_or_else(|| "2/27".into());
    let trials: u64 = args.get(1).map_or(Ok(20_000), |s| s.parse())?;
    let p = PeelParams::from_kappa_input(&KappaInput::parse(&kappa)?)?;
    let r = estimate_inv_degree(&p, trials, 3, 0.99, 5_000_000)?;
    println!("kappa {kappa}: E[1/deg] = {:.5} ± {:.5}, mean degree {:.3}, {} discarded", r.estimate.mean, r.estimate.se, r.mean_degree, r.discarded);
    Ok(())
}
