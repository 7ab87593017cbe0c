//! Peel with a random selector, export the trace as CSV and replay it.
//!
//! cargo run --release --example export_trace -- [steps] [seed]

use planar_peeling::map::canonical_encoding;
use planar_peeling::peeling::{read_trace_csv, replay, run_algorithm, write_trace_csv, UniformSelector};
use planar_peeling::PeelParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let steps: u64 = args.first().map_or(Ok(50), |s| s.parse())?;
    let seed: u64 = args.get(1).map_or(Ok(9), |s| s.parse())?;
    let p = PeelParams::new(9.0 / 128.0)?;
    let ex = run_algorithm(&p, &mut UniformSelector::new(seed), steps, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let mut csv = Vec::new();
    write_trace_csv(&mut csv, ex.trace())?;
    let text = String::from_utf8(csv)?;
    for line in text.lines().take(8) {
        println!("{line}");
    }
    let records = read_trace_csv(text.as_bytes())?;
    let back = replay(&p, &records)?;
    println!("...\nreplayed {} steps, identical map: {}", records.len(), canonical_encoding(&back) == canonical_encoding(ex.map()));
    Ok(())
}
