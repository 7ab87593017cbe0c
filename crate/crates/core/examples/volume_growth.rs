//! Hull perimeter growth and volume-to-perimeter ratio under layered peeling.
//!
//! cargo run --release --example volume_growth -- [alpha] [r_max] [trials]

use planar_peeling::lab::hull_growth;
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().map_or(Ok(0.70), |s| s.parse())?;
    let r_max: u32 = args.get(1).map_or(Ok(12), |s| s.parse())?;
    let trials: u64 = args.get(2).map_or(Ok(20), |s| s.parse())?;
    let p = PeelParams::from_alpha(alpha)?;
    let t0 = std::time::Instant::now();
    let rep = hull_growth(&p, r_max.saturating_sub(4).max(1), r_max, trials, 1, 200_000_000)?;
    println!("alpha = {alpha}, r in [{}, {}], {trials} maps", rep.r_lo, rep.r_hi);
    println!("perimeter ratio  {:.4} ± {:.4}   (limit {:.4})", rep.ratio.mean, rep.ratio.se, rep.expected_ratio);
    println!("volume/perimeter {:.4} ± {:.4}   (limit {:.4})", rep.volume_ratio.mean, rep.volume_ratio.se, rep.expected_volume_ratio);
    println!("{:.1?}", t0.elapsed());
    Ok(())
}
