//! One layered exploration: hull records, then the map written to a file.
//!
//! cargo run --release --example peel_layers -- [alpha] [radius] [seed]

use planar_peeling::map::{canonical_encoding, hull, write_map};
use planar_peeling::peeling::run_layers;
use planar_peeling::PeelParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().map_or(Ok(0.75), |s| s.parse())?;
    let radius: u32 = args.get(1).map_or(Ok(6), |s| s.parse())?;
    let seed: u64 = args.get(2).map_or(Ok(1), |s| s.parse())?;
    let p = PeelParams::from_alpha(alpha)?;
    let run = run_layers(&p, radius, &mut ChaCha8Rng::seed_from_u64(seed), 20_000_000)?;
    println!("{:>3} {:>8} {:>9} {:>10}", "r", "tau", "perimeter", "volume");
    for h in &run.hulls.records {
        println!("{:>3} {:>8} {:>9} {:>10}", h.r, h.tau, h.perimeter, h.volume);
    }
    let map = run.exploration.map();
    map.validate()?;
    let h2 = hull(map, 2)?;
    println!("hull of radius 2: {} vertices, code {:032x}", h2.map.vertex_count(), canonical_encoding(&h2.map).digest128());
    let path = std::env::temp_dir().join(format!("peel_layers_{seed}.map"));
    write_map(map, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    println!("map with {} vertices written to {}", map.vertex_count(), path.display());
    Ok(())
}
