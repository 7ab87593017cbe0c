//! Time needed to complete one layer, relative to the perimeter.
//!
//! cargo run --release --example layer_time -- [alpha] [r_hi] [trials]

use planar_peeling::lab::layer_times;
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().map_or(Ok(0.75), |s| s.parse())?;
    let r_hi: u32 = args.get(1).map_or(Ok(8), |s| s.parse())?;
    let trials: u64 = args.get(2).map_or(Ok(20), |s| s.parse())?;
    let p = PeelParams::from_alpha(alpha)?;
    let t0 = std::time::Instant::now();
    let rep = layer_times(&p, r_hi.saturating_sub(4).max(1), r_hi, trials, 2, 500_000_000)?;
    println!(
        "alpha = {alpha}: (tau_(r+1) - tau_r) / P over r in [{}, {}] = {:.4} ± {:.4}, limit {:.4}",
        rep.r_lo, rep.r_hi, rep.ratio.mean, rep.ratio.se, rep.expected
    );
    println!("{:.1?}", t0.elapsed());
    Ok(())
}
