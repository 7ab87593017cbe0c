//! Simple random walk on the peeled map: hull distance d(n)/n.
//!
//! cargo run --release --example walk_speed -- [kappa] [steps] [walks]

use planar_peeling::params::KappaInput;
use planar_peeling::walk::speed_experiment;
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kappa = args.first().cloned().unwrap_or_else(|| "9/128".into());
    let steps: usize = args.get(1).map_or(Ok(5_000), |s| s.parse())?;
    let walks: u64 = args.get(2).map_or(Ok(10), |s| s.parse())?;
    let p = PeelParams::from_kappa_input(&KappaInput::parse(&kappa)?)?;
    let r = speed_experiment(&p, steps, walks, 4, 1, 0.99)?;
    println!("d(n)/n = {:.4}, 99% interval [{:.4}, {:.4}]", r.estimate.mean, r.estimate.lo, r.estimate.hi);
    println!("mean curve slope {:.4}, R^2 {:.4}; range grows like {:.3} n", r.mean_curve_fit.slope, r.mean_curve_fit.r_squared, r.range_slope);
    println!("audit: {} of {} small distances disagree", r.audit.discrepancies, r.audit.checked);
    Ok(())
}
