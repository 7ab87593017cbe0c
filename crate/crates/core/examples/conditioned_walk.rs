//! Perimeter after n steps against the free step walk conditioned to stay ≥ 2.
//!
//! cargo run --release --example conditioned_walk -- [alpha] [n] [samples]

use planar_peeling::lab::law_equivalence;
use planar_peeling::PeelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().map_or(Ok(0.75), |s| s.parse())?;
    let n: usize = args.get(1).map_or(Ok(10), |s| s.parse())?;
    let samples: u64 = args.get(2).map_or(Ok(20_000), |s| s.parse())?;
    let p = PeelParams::from_alpha(alpha)?;
    let r = law_equivalence(&p, n, samples, 500, 2)?;
    println!("rejection acceptance {:.3}", r.acceptance);
    println!("chi2 {:.2} on {} df, p-value {:.3}", r.test.statistic, r.test.df, r.test.p_value);
    Ok(())
}
