//! Monte-Carlo regret of every protocol on the burst adversary, written as CSV
//! and plotted to SVG.
//!
//! `cargo run --release --example burst_comparison -- [T] [runs] [out_dir]`

use std::fs;
use std::path::PathBuf;

use mpmab::cli::{render_svg, series_from_rows, AdversaryConfig, ExperimentConfig};
use mpmab::harness::{monte_carlo, read_aggregate_csv, write_aggregate_csv};

fn main() -> mpmab::Result<()> {
    let mut args = std::env::args().skip(1);
    let t: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let runs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/burst_comparison".into()));

    let cfg = ExperimentConfig { horizon: t, runs, adversary: AdversaryConfig::default_burst(), ..ExperimentConfig::default() };
    cfg.validate()?;
    let mut reports = Vec::new();
    for spec in cfg.monte_carlo_specs()? {
        let rep = monte_carlo(&spec)?;
        println!("{:<14} final mean regret {:>10.1} (std {:.1})", rep.protocol, rep.mean.last().unwrap(), rep.std.last().unwrap());
        reports.push(rep);
    }

    let mut csv = Vec::new();
    write_aggregate_csv(&reports, &mut csv)?;
    fs::create_dir_all(&out).map_err(|e| mpmab::Error::io(&out, e))?;
    let svg = render_svg(&series_from_rows(&read_aggregate_csv(&csv[..])?), "burst adversary");
    for (name, bytes) in [("aggregate.csv", csv), ("regret.svg", svg.into_bytes())] {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(|e| mpmab::Error::io(&path, e))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
