//! Parses an experiment config, applies an override and prints the resolved form.
//!
//! `cargo run --example config -- [file]`

use mpmab::cli::{ConfigDocument, ExperimentConfig, Section};

const SAMPLE: &str = "\
# small burst experiment
M = 3
K = 8
T = 20000
runs = 4
checkpoints = 5000, 10000, 20000

[protocol]
protocols = alpha-unaware, parallel-exp3
alpha = auto
epsilon_step = 0.02

[adversary]
generator = burst
burst_len = 40
n_bursts = 10
";

fn main() -> mpmab::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(&p).map_err(|e| mpmab::Error::io(&p, e))?,
        None => SAMPLE.to_owned(),
    };
    let mut doc = match ConfigDocument::parse(&text) {
        Ok(doc) => doc,
        Err(issues) => {
            for i in issues {
                eprintln!("{i}");
            }
            std::process::exit(1);
        }
    };
    doc.set(Section::Top, "seed", "42");
    doc.set_assignment("adversary.n_bursts=12")?;
    let cfg = ExperimentConfig::from_document(&doc)?;
    println!("{cfg}");
    println!("environment label: {}", cfg.environment_label());
    println!("checkpoints: {:?}", cfg.checkpoint_list());
    for spec in cfg.monte_carlo_specs()? {
        println!("{}: alpha {:.4}, {} runs", spec.settings.protocol.name(), spec.settings.alpha, spec.seeds.len());
    }

    match mpmab::cli::parse_config("M = 1\nK = x\n[nowhere]\n") {
        Err(e) => println!("\na broken config reports every issue:\n{e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
