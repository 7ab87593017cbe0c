//! Radius-1 balls around the root edge, its reverse and a walk edge.
//!
//! cargo run --release --example local_limit -- [k] [trials]

use planar_peeling::walk::{stationarity_test, BallView};
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.first().map_or(Ok(5), |s| s.parse())?;
    let trials: u64 = args.get(1).map_or(Ok(5_000), |s| s.parse())?;
    let p = PeelParams::new(9.0 / 128.0)?;
    for view in [BallView::Reversed, BallView::WalkStep(k)] {
        let r = stationarity_test(&p, view, 1, trials, 8)?;
        println!("{view:?}: {} root balls seen, chi2 p-value {:.3}", r.distinct_root_balls, r.test.p_value);
    }
    Ok(())
}
