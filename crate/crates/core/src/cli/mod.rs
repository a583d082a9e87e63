//! Command-line front end: `run`, `bounds`, `plot` and `probe-sync`.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, invalid config), 2 when
//! a valid request fails at runtime (unreadable or unwritable files and the like).

mod config;
mod plot;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, AdversaryConfig, AttackSetting, ConfigDocument, ConfigIssue, ExperimentConfig, Section};
pub use plot::{render_svg, series_from_rows, Frame, Series};

use crate::harness::{
    monte_carlo, read_aggregate_csv, sync_failure_probe, theory_bound, write_aggregate_csv, write_runs_csv,
    BoundModel, ProbeResult, ProbeSpec, RegretReport, SyncAttack, TargetRound,
};
use crate::protocol::{Protocol, ProtocolSettings};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "mpmab", version, about = "Adversarial multi-player bandits without collision sensing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo regret of one or more protocols; writes per-run and aggregate CSVs.
    Run(RunArgs),
    /// Theory-bound values on a grid of player counts and attack exponents.
    Bounds(BoundsArgs),
    /// SVG of mean regret curves from an aggregate CSV.
    Plot(PlotArgs),
    /// Empirical rate at which one jammed sync round splits the estimates.
    ProbeSync(ProbeArgs),
}

/// Every flag overrides the matching config key.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Config file; defaults apply without one.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(short = 'M', long = "players")]
    pub players: Option<String>,
    #[arg(short = 'K', long = "arms")]
    pub arms: Option<String>,
    #[arg(short = 'T', long = "horizon", value_parser = parse_count)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub runs: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Comma-separated slots.
    #[arg(long)]
    pub checkpoints: Option<String>,
    #[arg(long)]
    pub environment: Option<String>,
    #[arg(long)]
    pub runs_csv: Option<String>,
    #[arg(long)]
    pub aggregate_csv: Option<String>,
    #[arg(long)]
    pub loss_csv: Option<String>,
    /// Comma-separated protocol names.
    #[arg(long)]
    pub protocols: Option<String>,
    /// Number in [0, 1] or `auto`.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub epsilon_step: Option<String>,
    #[arg(long)]
    pub initial_estimate: Option<String>,
    /// burst, changepoint or file.
    #[arg(long)]
    pub generator: Option<String>,
    /// Any key, e.g. `adversary.n_bursts=10`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Print the resolved config and exit without running.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Comma-separated models (default: all).
    #[arg(long)]
    pub models: Option<String>,
    /// Player counts: a list `2,4,8` or an inclusive range `2:16`.
    #[arg(short = 'M', long = "players", default_value = "2:16")]
    pub players: String,
    #[arg(short = 'K', long = "arms", default_value_t = 10)]
    pub arms: usize,
    #[arg(short = 'T', long = "horizon", default_value = "1e6", value_parser = parse_count)]
    pub horizon: usize,
    /// Attack exponents: a list or `start:end:step`.
    #[arg(long, default_value = "0.7")]
    pub attack: String,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Aggregate CSV written by `run`.
    pub csv: PathBuf,
    /// Output SVG path.
    pub out: PathBuf,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(short = 'M', long = "players", default_value_t = 4)]
    pub players: usize,
    #[arg(short = 'K', long = "arms", default_value_t = 10)]
    pub arms: usize,
    #[arg(short = 'T', long = "horizon", default_value_t = 400, value_parser = parse_count)]
    pub horizon: usize,
    /// Estimate the first phase starts from; fixes the round range `ceil(T^xi)`.
    #[arg(long, default_value_t = 0.0)]
    pub estimate: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Jammed downlink round: `last` or a 1-based index.
    #[arg(long, default_value = "last")]
    pub round: String,
    #[arg(long, default_value_t = 2)]
    pub follower: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Probe without any attack.
    #[arg(long)]
    pub no_attack: bool,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => run_command(&a),
        Command::Bounds(a) => bounds_command(&a),
        Command::Plot(a) => plot_command(&a),
        Command::ProbeSync(a) => probe_command(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// The config file (if any) with the flag overrides applied, validated.
pub fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            ConfigDocument::parse(&text).map_err(Error::Config)?
        }
        None => ConfigDocument::default(),
    };
    let horizon = args.horizon.map(|t| t.to_string());
    let flags = [
        (Section::Top, "M", &args.players),
        (Section::Top, "K", &args.arms),
        (Section::Top, "T", &horizon),
        (Section::Top, "runs", &args.runs),
        (Section::Top, "seed", &args.seed),
        (Section::Top, "checkpoints", &args.checkpoints),
        (Section::Top, "environment", &args.environment),
        (Section::Top, "runs_csv", &args.runs_csv),
        (Section::Top, "aggregate_csv", &args.aggregate_csv),
        (Section::Top, "loss_csv", &args.loss_csv),
        (Section::Protocol, "protocols", &args.protocols),
        (Section::Protocol, "alpha", &args.alpha),
        (Section::Protocol, "beta", &args.beta),
        (Section::Protocol, "epsilon_step", &args.epsilon_step),
        (Section::Protocol, "initial_estimate", &args.initial_estimate),
        (Section::Adversary, "generator", &args.generator),
    ];
    for (section, key, value) in flags {
        if let Some(v) = value {
            doc.set(section, key, v.as_str());
        }
    }
    for a in &args.set {
        doc.set_assignment(a)?;
    }
    ExperimentConfig::from_document(&doc)
}

fn run_command(args: &RunArgs) -> Result<(), Failure> {
    let cfg = resolve_config(args).map_err(|e| match e {
        Error::Io { .. } => Failure::Runtime(e),
        other => usage(other),
    })?;
    if args.print_config {
        print!("{cfg}");
        return Ok(());
    }
    let reports = cmd_run(&cfg)?;
    for r in &reports {
        let last = r.checkpoints.len() - 1;
        println!(
            "{:<14} {:<12} t={:<8} mean={:.1} std={:.1} runs={}",
            r.protocol, r.environment, r.checkpoints[last], r.mean[last], r.std[last], r.n_runs
        );
    }
    println!("wrote {} and {}", cfg.runs_csv.display(), cfg.aggregate_csv.display());
    Ok(())
}

/// Runs every protocol of the config over the same seeds and writes both CSVs.
/// Nothing is written unless all runs succeed.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<Vec<RegretReport>> {
    let specs = cfg.monte_carlo_specs()?;
    let reports = specs.iter().map(monte_carlo).collect::<Result<Vec<_>>>()?;
    let mut runs = Vec::new();
    write_runs_csv(&reports, &mut runs)?;
    let mut agg = Vec::new();
    write_aggregate_csv(&reports, &mut agg)?;
    write_file(&cfg.runs_csv, &runs)?;
    write_file(&cfg.aggregate_csv, &agg)?;
    if let Some(path) = &cfg.loss_csv {
        let seeds = crate::harness::RunSeeds::from_run_seed(specs[0].seeds[0]);
        specs[0].adversary.generate(seeds.env)?.save_csv(path)?;
    }
    Ok(reports)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub const BOUNDS_COLUMNS: [&str; 6] = ["model", "M", "K", "T", "attack_param", "bound"];

/// One row per (model, M, attack) in that nesting order.
pub fn cmd_bounds<W: Write>(
    models: &[BoundModel],
    players: &[usize],
    num_arms: usize,
    horizon: usize,
    attacks: &[f64],
    eps: f64,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUNDS_COLUMNS)?;
    for &model in models {
        for &m in players {
            for &a in attacks {
                let b = theory_bound(model, m, num_arms, horizon, a, eps)?;
                w.write_record([
                    model.name().to_owned(),
                    m.to_string(),
                    num_arms.to_string(),
                    horizon.to_string(),
                    a.to_string(),
                    b.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<bounds>", e))
}

fn bounds_command(a: &BoundsArgs) -> Result<(), Failure> {
    let models = match &a.models {
        Some(s) => s
            .split(',')
            .map(|m| m.parse())
            .collect::<Result<Vec<BoundModel>>>()
            .map_err(usage)?,
        None => BoundModel::ALL.to_vec(),
    };
    let players = parse_int_range(&a.players).map_err(usage)?;
    let attacks = parse_real_range(&a.attack).map_err(usage)?;
    // check every point before writing anything
    for &m in &models {
        for &p in &players {
            for &x in &attacks {
                theory_bound(m, p, a.arms, a.horizon, x, a.eps).map_err(usage)?;
            }
        }
    }
    match &a.out {
        Some(path) => {
            let mut buf = Vec::new();
            cmd_bounds(&models, &players, a.arms, a.horizon, &attacks, a.eps, &mut buf)?;
            write_file(path, &buf)?;
        }
        None => cmd_bounds(&models, &players, a.arms, a.horizon, &attacks, a.eps, std::io::stdout().lock())?,
    }
    Ok(())
}

/// Reads an aggregate CSV and writes the SVG.
pub fn cmd_plot(csv_path: &Path, out_path: &Path, title: Option<&str>) -> Result<()> {
    let file = fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let rows = read_aggregate_csv(file)?;
    let series = series_from_rows(&rows);
    let default_title = rows
        .first()
        .map_or_else(|| "regret".to_owned(), |r| format!("regret, {}", r.environment));
    let svg = render_svg(&series, title.unwrap_or(&default_title));
    write_file(out_path, svg.as_bytes())
}

fn plot_command(a: &PlotArgs) -> Result<(), Failure> {
    cmd_plot(&a.csv, &a.out, a.title.as_deref())?;
    println!("wrote {}", a.out.display());
    Ok(())
}

pub fn cmd_probe_sync(spec: &ProbeSpec) -> Result<ProbeResult> {
    sync_failure_probe(spec)
}

fn probe_command(a: &ProbeArgs) -> Result<(), Failure> {
    let round = match a.round.trim() {
        "last" => TargetRound::Last,
        r => TargetRound::Index(
            r.parse()
                .map_err(|_| Failure::Usage(format!("--round: expected `last` or an index, got `{r}`")))?,
        ),
    };
    let spec = ProbeSpec {
        settings: ProtocolSettings::new(Protocol::AlphaUnaware)
            .with_epsilon(a.epsilon)
            .with_initial_estimate(a.estimate),
        players: a.players,
        num_arms: a.arms,
        horizon: a.horizon,
        attack: (!a.no_attack).then_some(SyncAttack { round, follower: a.follower }),
        trials: a.trials,
        seed: a.seed,
    };
    let r = cmd_probe_sync(&spec).map_err(usage)?;
    let expected = if a.no_attack {
        0.0
    } else {
        match round {
            TargetRound::Last => 1.0 / r.max_rounds as f64,
            TargetRound::Index(i) if i <= r.max_rounds => 1.0 / r.max_rounds as f64,
            TargetRound::Index(_) => 0.0,
        }
    };
    println!("max_rounds = {}", r.max_rounds);
    println!("trials = {}", r.trials);
    println!("failures = {}", r.failures);
    println!("rate = {}", r.rate());
    println!("expected = {expected}");
    println!("sigma = {}", r.binomial_sigma(expected));
    Ok(())
}

/// A whole number, also written in scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<usize, String> {
    let s = s.trim();
    if let Ok(n) = s.parse() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(53) => Ok(x as usize),
        _ => Err(format!("expected a whole number, got `{s}`")),
    }
}

/// `2,4,8` or the inclusive range `2:16`.
pub fn parse_int_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::invalid(format!("expected a list or `a:b`, got `{s}`"));
    let v: Vec<usize> = match s.split_once(':') {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            (a..=b).collect()
        }
        None => s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?,
    };
    if v.is_empty() {
        return Err(bad());
    }
    Ok(v)
}

/// `0.1,0.5` or `start:end:step` (end included up to rounding).
pub fn parse_real_range(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("expected a list or `start:end:step`, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let v: Vec<f64> = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if !(step > 0.0) || b < a {
                return Err(bad());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * step).collect()
        }
        [_] => s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_int_range("2:5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_int_range("4, 8").unwrap(), vec![4, 8]);
        assert!(parse_int_range("5:2").is_err());
        let r = parse_real_range("0:1:0.25").unwrap();
        assert_eq!(r.len(), 5);
        assert!((r[4] - 1.0).abs() < 1e-12);
        assert_eq!(parse_real_range("0.7").unwrap(), vec![0.7]);
        assert!(parse_real_range("0:1").is_err());
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert!(parse_count("1.5").is_err() && parse_count("-3").is_err());
    }

    #[test]
    fn bounds_single_point() {
        let mut buf = Vec::new();
        cmd_bounds(&[BoundModel::NoSensingReference], &[4], 10, 1_000_000, &[0.7], 0.0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("model,M,K,T,attack_param,bound"));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        let v: f64 = fields[5].parse().unwrap();
        let want = 4.0 * 10f64.powf(1.5) * 1e6f64.powf(0.875);
        assert!((v - want).abs() < 1e-9 * want);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_cli(["mpmab", "bogus"]), 1);
        assert_eq!(run_cli(["mpmab", "run", "-M", "12", "-K", "10"]), 1);
        assert_eq!(run_cli(["mpmab", "run", "--runs", "0"]), 1);
        assert_eq!(run_cli(["mpmab", "bounds", "--players", "0:3"]), 1);
        assert_eq!(run_cli(["mpmab", "plot", "/nonexistent/agg.csv", "/tmp/x.svg"]), 2);
        assert_eq!(run_cli(["mpmab", "run", "--config", "/nonexistent.cfg"]), 2);
        assert_eq!(run_cli(["mpmab", "run", "--print-config", "-T", "5000"]), 0);
    }
}
