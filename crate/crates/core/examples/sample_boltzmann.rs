//! Boltzmann triangulations of the p-gon: volumes against their mean.
//!
//! cargo run --release --example sample_boltzmann -- [p] [alpha] [samples]

use planar_peeling::boltzmann::sample_boltzmann;
use planar_peeling::params::mean_hole_volume;
use planar_peeling::seed::trial_rng;
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: usize = args.first().map_or(Ok(4), |s| s.parse())?;
    let alpha: f64 = args.get(1).map_or(Ok(0.75), |s| s.parse())?;
    let samples: u64 = args.get(2).map_or(Ok(20_000), |s| s.parse())?;
    let params = PeelParams::from_alpha(alpha)?;
    let mut total = 0.0;
    let mut biggest = 0;
    for i in 0..samples {
        let t = sample_boltzmann(p, &params, &mut trial_rng(5, i))?;
        t.validate()?;
        let inner = t.vertex_count() - p;
        total += inner as f64;
        biggest = biggest.max(inner);
    }
    // the filler of a (k+1)-gon swallow
    let expected = mean_hole_volume(p - 1, alpha)?;
    println!("p = {p}, alpha = {alpha}: mean inner vertices {:.4} (expected {expected:.4}), largest {biggest}", total / samples as f64);
    Ok(())
}
