//! Brute-force counts of rooted triangulations of the p-gon against the closed form.
//!
//! cargo run --release --example enumerate -- [max n+p]

use planar_peeling::lab::enumeration_table;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let max_sum: usize = std::env::args().nth(1).map_or(Ok(8), |s| s.parse())?;
    println!("{:>3} {:>3} {:>12} {:>12}", "n", "p", "enumerated", "formula");
    for row in enumeration_table(max_sum)? {
        let mark = if row.agree { "" } else { "  <-- differs" };
        println!("{:>3} {:>3} {:>12} {:>12}{mark}", row.n, row.p, row.enumerated, row.formula);
    }
    Ok(())
}
