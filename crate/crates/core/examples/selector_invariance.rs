//! Law of (P_n, V_n) under three edge-selection rules.
//!
//! cargo run --release --example selector_invariance -- [n] [runs]

use planar_peeling::lab::{selector_invariance, selector_invariance_nearest};
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: u64 = args.first().map_or(Ok(5), |s| s.parse())?;
    let runs: u64 = args.get(1).map_or(Ok(20_000), |s| s.parse())?;
    let p = PeelParams::new(9.0 / 128.0)?;
    for r in [selector_invariance(&p, n, runs, 4)?, selector_invariance_nearest(&p, n, runs, 4)?] {
        println!("{} vs {}: chi2 {:.2}, df {}, p {:.3}", r.selectors[0], r.selectors[1], r.test.statistic, r.test.df, r.test.p_value);
    }
    Ok(())
}
