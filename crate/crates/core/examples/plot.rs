//! Renders an aggregate regret CSV as SVG; with no input, plots a synthetic one.
//!
//! `cargo run --example plot -- [aggregate.csv] [out.svg]`

use mpmab::cli::{render_svg, series_from_rows};
use mpmab::harness::{read_aggregate_csv, AGGREGATE_COLUMNS};

fn main() -> mpmab::Result<()> {
    let mut args = std::env::args().skip(1);
    let input = args.next();
    let out = args.next().unwrap_or_else(|| "target/plot_example.svg".into());
    let text = match &input {
        Some(p) => std::fs::read_to_string(p).map_err(|e| mpmab::Error::io(p, e))?,
        None => {
            let mut s = AGGREGATE_COLUMNS.join(",") + "\n";
            for t in (1..=10).map(|i| i * 10_000) {
                let x = t as f64;
                s += &format!("fast,demo,{t},{},{},5\n", 3.0 * x.powf(0.6), 0.2 * x.powf(0.5));
                s += &format!("slow,demo,{t},{},{},5\n", 0.5 * x.powf(0.85), 0.5 * x.powf(0.5));
            }
            s
        }
    };
    let series = series_from_rows(&read_aggregate_csv(text.as_bytes())?);
    std::fs::write(&out, render_svg(&series, "cumulative regret")).map_err(|e| mpmab::Error::io(&out, e))?;
    println!("{} series written to {out}", series.len());
    Ok(())
}
