//! How often X_0 is still on the boundary of the hull of the walk.
//!
//! cargo run --release --example non_intersection -- [steps] [trials]

use planar_peeling::walk::intersection_experiment;
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(300), |s| s.parse())?;
    let trials: u64 = args.get(1).map_or(Ok(300), |s| s.parse())?;
    let p = PeelParams::new(9.0 / 128.0)?;
    let cps: Vec<usize> = [n / 30, n / 10, n / 3, n].into_iter().filter(|&c| c > 0).collect();
    let r = intersection_experiment(&p, &cps, trials, 6, 0.99)?;
    for c in &r.checkpoints {
        println!("n = {:>6}: {:.3} [{:.3}, {:.3}]", c.n, c.estimate.mean, c.estimate.lo, c.estimate.hi);
    }
    Ok(())
}
