//! Experiment configuration: a line-oriented `key = value` text format.
//!
//! The grammar, in full:
//!
//! - The text is UTF-8 and read line by line. Line numbers start at 1.
//! - `#` starts a comment that runs to the end of the line.
//! - After stripping comments, surrounding whitespace is trimmed; blank lines are
//!   ignored.
//! - `[protocol]` or `[adversary]` on a line of its own starts that section. Keys
//!   before the first header belong to the top level. Sections may appear in any
//!   order and more than once.
//! - Any other line is `key = value`, split at the first `=`. Key and value are
//!   trimmed; neither may be empty. A key may be set only once per section.
//! - Lists are comma separated; items are trimmed.
//!
//! Keys (defaults in parentheses):
//!
//! | section | key | value |
//! |---|---|---|
//! | top | `M` | players (4) |
//! | top | `K` | arms (10) |
//! | top | `T` | horizon (100000) |
//! | top | `runs` | Monte-Carlo runs (20) |
//! | top | `seed` | experiment seed (1) |
//! | top | `checkpoints` | list of slots (10 evenly spaced up to `T`) |
//! | top | `environment` | label in the CSVs (generator name) |
//! | top | `runs_csv` | per-run CSV path (`runs.csv`) |
//! | top | `aggregate_csv` | aggregate CSV path (`aggregate.csv`) |
//! | top | `loss_csv` | where to save run 0's loss matrix (unset) |
//! | protocol | `protocols` | list of protocol names (all five) |
//! | protocol | `alpha`, `beta` | number in `[0, 1]` or `auto` (`auto`) |
//! | protocol | `epsilon_step` | escalation step and margin (0.01) |
//! | protocol | `initial_estimate` | warm start of the unaware protocols (unset) |
//! | adversary | `generator` | `burst`, `changepoint` or `file` (`burst`) |
//! | adversary | `c_low`, `c_high`, `l_high` | burst base draw (0.2, 0.9, 0.9) |
//! | adversary | `burst_len`, `n_bursts` | planted runs of ones (50, 20) |
//! | adversary | `means_before`, `means_after` | changepoint means, `K` each |
//! | adversary | `t_change` | first slot after the change (`0.4 T`) |
//! | adversary | `halfwidth` | changepoint uniform half width (0.15) |
//! | adversary | `path` | loss CSV for `file` |
//!
//! `auto` gives the aware protocols the exponent measured on run 0's loss matrix.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::env::{AttackabilityProfile, BurstSpec, ChangepointSpec, LossMatrix};
use crate::harness::{run_seeds, AdversarySpec, MonteCarloSpec, RunSeeds};
use crate::protocol::{Protocol, ProtocolSettings};
use crate::{Error, Result};

/// A violated rule, with the line it was found on when there is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigIssue {
    fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Section {
    Top,
    Protocol,
    Adversary,
}

impl Section {
    fn label(self) -> &'static str {
        match self {
            Section::Top => "top level",
            Section::Protocol => "[protocol]",
            Section::Adversary => "[adversary]",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    section: Section,
    key: String,
    value: String,
    line: Option<usize>,
}

/// Raw `key = value` entries before typing. Command-line overrides go through
/// [`ConfigDocument::set`] so they are checked exactly like file values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDocument {
    entries: Vec<Entry>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, Vec<ConfigIssue>> {
        let (doc, issues) = Self::parse_lenient(text);
        if issues.is_empty() {
            Ok(doc)
        } else {
            Err(issues)
        }
    }

    // Keeps every well-formed line; lines under an unknown header are skipped.
    fn parse_lenient(text: &str) -> (Self, Vec<ConfigIssue>) {
        let mut doc = ConfigDocument::default();
        let mut issues = Vec::new();
        let mut section = Some(Section::Top);
        for (i, raw) in text.lines().enumerate() {
            let line = Some(i + 1);
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = match name.trim() {
                    "protocol" => Some(Section::Protocol),
                    "adversary" => Some(Section::Adversary),
                    other => {
                        issues.push(ConfigIssue::new(line, format!("unknown section `[{other}]`")));
                        None
                    }
                };
                continue;
            }
            let Some(section) = section else { continue };
            let Some((key, value)) = content.split_once('=') else {
                issues.push(ConfigIssue::new(line, format!("expected `key = value`, got `{content}`")));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                issues.push(ConfigIssue::new(line, format!("empty key or value in `{content}`")));
                continue;
            }
            if let Some(first) = doc.find(section, key) {
                let at = first.line.map_or(String::new(), |l| format!(" (first set on line {l})"));
                issues.push(ConfigIssue::new(line, format!("duplicate key `{key}` in {}{at}", section.label())));
                continue;
            }
            doc.entries.push(Entry {
                section,
                key: key.to_owned(),
                value: value.to_owned(),
                line,
            });
        }
        (doc, issues)
    }

    /// Sets or replaces a value. The entry carries no line number.
    pub fn set(&mut self, section: Section, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|e| e.section == section && e.key == key) {
            Some(e) => {
                e.value = value;
                e.line = None;
            }
            None => self.entries.push(Entry {
                section,
                key: key.to_owned(),
                value,
                line: None,
            }),
        }
    }

    /// [`ConfigDocument::set`] from `key=value`, `protocol.key=value` or
    /// `adversary.key=value`.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("expected key=value, got `{assignment}`")))?;
        let (section, key) = match path.trim().split_once('.') {
            Some(("protocol", k)) => (Section::Protocol, k),
            Some(("adversary", k)) => (Section::Adversary, k),
            Some((s, _)) => return Err(Error::Unknown { what: "section", name: s.to_owned() }),
            None => (Section::Top, path.trim()),
        };
        if key.trim().is_empty() || value.trim().is_empty() {
            return Err(Error::invalid(format!("empty key or value in `{assignment}`")));
        }
        self.set(section, key.trim(), value.trim());
        Ok(())
    }

    fn find(&self, section: Section, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }
}

/// An attackability exponent given outright or measured from the adversary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackSetting {
    Auto,
    Value(f64),
}

impl fmt::Display for AttackSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSetting::Auto => f.write_str("auto"),
            AttackSetting::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for AttackSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(AttackSetting::Auto);
        }
        s.trim()
            .parse()
            .map(AttackSetting::Value)
            .map_err(|_| Error::invalid(format!("expected a number or `auto`, got `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryConfig {
    Burst {
        c_low: f64,
        c_high: f64,
        l_high: f64,
        burst_len: usize,
        n_bursts: usize,
    },
    Changepoint {
        means_before: Vec<f64>,
        means_after: Vec<f64>,
        /// Defaults to `0.4 T` when unset.
        t_change: Option<usize>,
        halfwidth: f64,
        burst_len: usize,
        n_bursts: usize,
    },
    File {
        path: PathBuf,
    },
}

impl AdversaryConfig {
    pub fn generator(&self) -> &'static str {
        match self {
            AdversaryConfig::Burst { .. } => "burst",
            AdversaryConfig::Changepoint { .. } => "changepoint",
            AdversaryConfig::File { .. } => "file",
        }
    }

    pub fn default_burst() -> Self {
        AdversaryConfig::Burst {
            c_low: 0.2,
            c_high: 0.9,
            l_high: 0.9,
            burst_len: 50,
            n_bursts: 20,
        }
    }

    pub fn default_changepoint() -> Self {
        AdversaryConfig::Changepoint {
            means_before: vec![0.2, 0.2, 0.2, 0.2, 0.4, 0.4, 0.4, 0.4, 0.4, 0.4],
            means_after: vec![0.8, 0.2, 0.2, 0.8, 0.2, 0.2, 0.4, 0.4, 0.4, 0.4],
            t_change: None,
            halfwidth: 0.15,
            burst_len: 50,
            n_bursts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub players: usize,
    pub num_arms: usize,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    /// `None` means 10 evenly spaced checkpoints ending at `T`.
    pub checkpoints: Option<Vec<usize>>,
    /// `None` means the generator name.
    pub environment: Option<String>,
    pub runs_csv: PathBuf,
    pub aggregate_csv: PathBuf,
    pub loss_csv: Option<PathBuf>,
    pub protocols: Vec<Protocol>,
    pub alpha: AttackSetting,
    pub beta: AttackSetting,
    pub epsilon_step: f64,
    pub initial_estimate: Option<f64>,
    pub adversary: AdversaryConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            players: 4,
            num_arms: 10,
            horizon: 100_000,
            runs: 20,
            seed: 1,
            checkpoints: None,
            environment: None,
            runs_csv: "runs.csv".into(),
            aggregate_csv: "aggregate.csv".into(),
            loss_csv: None,
            protocols: Protocol::ALL.to_vec(),
            alpha: AttackSetting::Auto,
            beta: AttackSetting::Auto,
            epsilon_step: 0.01,
            initial_estimate: None,
            adversary: AdversaryConfig::default_burst(),
        }
    }
}

/// Parses and validates; every problem found is reported, not just the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let (doc, issues) = ConfigDocument::parse_lenient(text);
    ExperimentConfig::build(&doc, issues)
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_config(s)
    }
}

impl ExperimentConfig {
    pub fn from_document(doc: &ConfigDocument) -> Result<Self> {
        Self::build(doc, Vec::new())
    }

    fn build(doc: &ConfigDocument, issues: Vec<ConfigIssue>) -> Result<Self> {
        let mut r = Reader::new(doc);
        r.issues = issues;
        let d = ExperimentConfig::default();
        use Section::*;

        let players = r.get(Top, "M", d.players, "an integer");
        let num_arms = r.get(Top, "K", d.num_arms, "an integer");
        let horizon = r.get(Top, "T", d.horizon, "an integer");
        let runs = r.get(Top, "runs", d.runs, "an integer");
        let seed = r.get(Top, "seed", d.seed, "an integer");
        let checkpoints = r.opt_list(Top, "checkpoints", "integers");
        let environment = r.opt::<String>(Top, "environment", "a label");
        let runs_csv = r.get(Top, "runs_csv", d.runs_csv, "a path");
        let aggregate_csv = r.get(Top, "aggregate_csv", d.aggregate_csv, "a path");
        let loss_csv = r.opt::<PathBuf>(Top, "loss_csv", "a path");

        let protocols = r.opt_list(Protocol, "protocols", "protocol names").unwrap_or(d.protocols);
        let alpha = r.get(Protocol, "alpha", d.alpha, "a number or `auto`");
        let beta = r.get(Protocol, "beta", d.beta, "a number or `auto`");
        let epsilon_step = r.get(Protocol, "epsilon_step", d.epsilon_step, "a number");
        let initial_estimate = r.opt::<f64>(Protocol, "initial_estimate", "a number");

        let generator = r.get(Adversary, "generator", "burst".to_owned(), "a generator name");
        let adversary = match generator.as_str() {
            "burst" => {
                let AdversaryConfig::Burst { c_low, c_high, l_high, burst_len, n_bursts } = AdversaryConfig::default_burst()
                else {
                    unreachable!()
                };
                AdversaryConfig::Burst {
                    c_low: r.get(Adversary, "c_low", c_low, "a number"),
                    c_high: r.get(Adversary, "c_high", c_high, "a number"),
                    l_high: r.get(Adversary, "l_high", l_high, "a number"),
                    burst_len: r.get(Adversary, "burst_len", burst_len, "an integer"),
                    n_bursts: r.get(Adversary, "n_bursts", n_bursts, "an integer"),
                }
            }
            "changepoint" => {
                let AdversaryConfig::Changepoint { means_before, means_after, halfwidth, burst_len, n_bursts, .. } =
                    AdversaryConfig::default_changepoint()
                else {
                    unreachable!()
                };
                AdversaryConfig::Changepoint {
                    means_before: r.opt_list(Adversary, "means_before", "numbers").unwrap_or(means_before),
                    means_after: r.opt_list(Adversary, "means_after", "numbers").unwrap_or(means_after),
                    t_change: r.opt(Adversary, "t_change", "an integer"),
                    halfwidth: r.get(Adversary, "halfwidth", halfwidth, "a number"),
                    burst_len: r.get(Adversary, "burst_len", burst_len, "an integer"),
                    n_bursts: r.get(Adversary, "n_bursts", n_bursts, "an integer"),
                }
            }
            "file" => match r.opt::<PathBuf>(Adversary, "path", "a path") {
                Some(path) => AdversaryConfig::File { path },
                None => {
                    let line = r.line(Adversary, "generator");
                    r.issue(line, "generator `file` needs `path`");
                    AdversaryConfig::File { path: PathBuf::new() }
                }
            },
            other => {
                let line = r.line(Adversary, "generator");
                r.issue(line, format!("unknown generator `{other}` (expected burst, changepoint or file)"));
                AdversaryConfig::default_burst()
            }
        };

        let cfg = ExperimentConfig {
            players,
            num_arms,
            horizon,
            runs,
            seed,
            checkpoints,
            environment,
            runs_csv,
            aggregate_csv,
            loss_csv,
            protocols,
            alpha,
            beta,
            epsilon_step,
            initial_estimate,
            adversary,
        };
        r.unknown_keys();
        cfg.check(&mut r);
        if r.issues.is_empty() {
            Ok(cfg)
        } else {
            // line order; issues without a line come last
            r.issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
            Err(Error::Config(r.issues))
        }
    }

    /// Validates a config built in code. Parsed configs are already valid.
    pub fn validate(&self) -> Result<()> {
        let doc = ConfigDocument::default();
        let mut r = Reader::new(&doc);
        self.check(&mut r);
        if r.issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(r.issues))
        }
    }

    fn check(&self, r: &mut Reader<'_>) {
        use Section::*;
        let (m, k, t) = (self.players, self.num_arms, self.horizon);
        if m < 2 {
            let l = r.line(Top, "M");
            r.issue(l, "M must be at least 2");
        }
        if m > k {
            let l = r.line(Top, "M").or(r.line(Top, "K"));
            r.issue(l, format!("M exceeds K ({m} > {k})"));
        }
        if t == 0 {
            let l = r.line(Top, "T");
            r.issue(l, "T must be at least 1");
        }
        if self.runs == 0 {
            let l = r.line(Top, "runs");
            r.issue(l, "runs must be at least 1");
        }
        if let Some(cps) = &self.checkpoints {
            let l = r.line(Top, "checkpoints");
            if cps.is_empty() {
                r.issue(l, "checkpoints must not be empty");
            }
            if cps.windows(2).any(|w| w[0] >= w[1]) {
                r.issue(l, "checkpoints must be strictly increasing");
            }
            if let Some(c) = cps.iter().find(|&&c| c == 0 || c > t) {
                r.issue(l, format!("checkpoint {c} outside 1..={t}"));
            }
        }
        if self.protocols.is_empty() {
            let l = r.line(Protocol, "protocols");
            r.issue(l, "protocols must not be empty");
        }
        for (i, p) in self.protocols.iter().enumerate() {
            if self.protocols[..i].contains(p) {
                let l = r.line(Protocol, "protocols");
                r.issue(l, format!("protocol `{p}` listed twice"));
            }
        }
        for (key, setting) in [("alpha", self.alpha), ("beta", self.beta)] {
            if let AttackSetting::Value(v) = setting {
                if !(0.0..=1.0).contains(&v) {
                    let l = r.line(Protocol, key);
                    r.issue(l, format!("{key} must lie in [0, 1], got {v}"));
                }
            }
        }
        if !(self.epsilon_step > 0.0 && self.epsilon_step <= 1.0) {
            let l = r.line(Protocol, "epsilon_step");
            r.issue(l, format!("epsilon_step must lie in (0, 1], got {}", self.epsilon_step));
        }
        if let Some(e) = self.initial_estimate {
            if !(0.0..=1.0).contains(&e) {
                let l = r.line(Protocol, "initial_estimate");
                r.issue(l, format!("initial_estimate must lie in [0, 1], got {e}"));
            }
        }
        let line = r.line(Adversary, "generator");
        match &self.adversary {
            AdversaryConfig::File { path } => {
                if path.as_os_str().is_empty() {
                    r.issue(r.line(Adversary, "path").or(line), "empty loss file path");
                }
            }
            _ if k == 0 || t == 0 => {}
            _ => {
                if let Err(e) = self.generated_adversary().map(|_| ()) {
                    r.issue(line, format!("adversary: {e}"));
                }
            }
        }
    }

    /// Checkpoints to report; the default is 10 evenly spaced slots ending at `T`.
    pub fn checkpoint_list(&self) -> Vec<usize> {
        match &self.checkpoints {
            Some(c) => c.clone(),
            None => {
                let mut v: Vec<usize> = (1..=10).map(|i| (i * self.horizon).div_ceil(10)).collect();
                v.dedup();
                v
            }
        }
    }

    pub fn environment_label(&self) -> String {
        self.environment
            .clone()
            .unwrap_or_else(|| self.adversary.generator().to_owned())
    }

    fn generated_adversary(&self) -> Result<AdversarySpec> {
        let (k, t) = (self.num_arms, self.horizon);
        match &self.adversary {
            &AdversaryConfig::Burst { c_low, c_high, l_high, burst_len, n_bursts } => {
                let spec = BurstSpec { num_arms: k, horizon: t, c_low, c_high, l_high, burst_len, n_bursts };
                spec.validate()?;
                Ok(AdversarySpec::Burst(spec))
            }
            AdversaryConfig::Changepoint { means_before, means_after, t_change, halfwidth, burst_len, n_bursts } => {
                if means_before.len() != k {
                    return Err(Error::invalid(format!("means_before has {} entries, K is {k}", means_before.len())));
                }
                let spec = ChangepointSpec {
                    horizon: t,
                    means_before: means_before.clone(),
                    means_after: means_after.clone(),
                    t_change: t_change.unwrap_or((2 * t / 5).max(1)),
                    halfwidth: *halfwidth,
                    burst_len: *burst_len,
                    n_bursts: *n_bursts,
                };
                spec.validate()?;
                Ok(AdversarySpec::Changepoint(spec))
            }
            AdversaryConfig::File { .. } => Err(Error::invalid("not a generator")),
        }
    }

    /// The adversary of every run; a loss file is read here and must be `K x T`.
    pub fn adversary_spec(&self) -> Result<AdversarySpec> {
        match &self.adversary {
            AdversaryConfig::File { path } => {
                let m = LossMatrix::load_csv(path)?;
                if m.num_arms() != self.num_arms || m.horizon() != self.horizon {
                    return Err(Error::invalid(format!(
                        "{} is {} x {}, config says K = {}, T = {}",
                        path.display(),
                        m.num_arms(),
                        m.horizon(),
                        self.num_arms,
                        self.horizon
                    )));
                }
                Ok(AdversarySpec::Fixed(m.into()))
            }
            _ => self.generated_adversary(),
        }
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        run_seeds(self.seed, self.runs)
    }

    /// One Monte-Carlo spec per protocol, all over the same run seeds.
    pub fn monte_carlo_specs(&self) -> Result<Vec<MonteCarloSpec>> {
        self.validate()?;
        let adversary = self.adversary_spec()?;
        let seeds = self.run_seeds();
        let needs_auto = (self.alpha == AttackSetting::Auto && self.protocols.contains(&Protocol::AlphaAware))
            || (self.beta == AttackSetting::Auto && self.protocols.contains(&Protocol::BetaAware));
        let measured = if needs_auto {
            let first = adversary.generate(RunSeeds::from_run_seed(seeds[0]).env)?;
            Some(AttackabilityProfile::of(&first))
        } else {
            None
        };
        let resolve = |s: AttackSetting, pick: fn(&AttackabilityProfile, usize) -> f64| match s {
            AttackSetting::Value(v) => v,
            AttackSetting::Auto => measured.as_ref().map_or(0.0, |p| pick(p, self.horizon)),
        };
        let alpha = resolve(self.alpha, AttackabilityProfile::alpha);
        let beta = resolve(self.beta, AttackabilityProfile::beta);
        let checkpoints = self.checkpoint_list();
        Ok(self
            .protocols
            .iter()
            .map(|&p| {
                let mut settings = ProtocolSettings::new(p)
                    .with_alpha(alpha)
                    .with_beta(beta)
                    .with_epsilon(self.epsilon_step);
                settings.initial_estimate = self.initial_estimate;
                MonteCarloSpec {
                    settings,
                    adversary: adversary.clone(),
                    environment: self.environment_label(),
                    players: self.players,
                    seeds: seeds.clone(),
                    checkpoints: checkpoints.clone(),
                }
            })
            .collect())
    }

    /// The config in the documented grammar; parsing it gives back `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv(&mut s, "M", &self.players);
        kv(&mut s, "K", &self.num_arms);
        kv(&mut s, "T", &self.horizon);
        kv(&mut s, "runs", &self.runs);
        kv(&mut s, "seed", &self.seed);
        if let Some(c) = &self.checkpoints {
            kv(&mut s, "checkpoints", &join(c));
        }
        if let Some(e) = &self.environment {
            kv(&mut s, "environment", e);
        }
        kv(&mut s, "runs_csv", &self.runs_csv.display());
        kv(&mut s, "aggregate_csv", &self.aggregate_csv.display());
        if let Some(p) = &self.loss_csv {
            kv(&mut s, "loss_csv", &p.display());
        }

        s.push_str("\n[protocol]\n");
        kv(&mut s, "protocols", &join(&self.protocols));
        kv(&mut s, "alpha", &self.alpha);
        kv(&mut s, "beta", &self.beta);
        kv(&mut s, "epsilon_step", &self.epsilon_step);
        if let Some(e) = self.initial_estimate {
            kv(&mut s, "initial_estimate", &e);
        }

        s.push_str("\n[adversary]\n");
        kv(&mut s, "generator", &self.adversary.generator());
        match &self.adversary {
            AdversaryConfig::Burst { c_low, c_high, l_high, burst_len, n_bursts } => {
                kv(&mut s, "c_low", c_low);
                kv(&mut s, "c_high", c_high);
                kv(&mut s, "l_high", l_high);
                kv(&mut s, "burst_len", burst_len);
                kv(&mut s, "n_bursts", n_bursts);
            }
            AdversaryConfig::Changepoint { means_before, means_after, t_change, halfwidth, burst_len, n_bursts } => {
                kv(&mut s, "means_before", &join(means_before));
                kv(&mut s, "means_after", &join(means_after));
                if let Some(tc) = t_change {
                    kv(&mut s, "t_change", tc);
                }
                kv(&mut s, "halfwidth", halfwidth);
                kv(&mut s, "burst_len", burst_len);
                kv(&mut s, "n_bursts", n_bursts);
            }
            AdversaryConfig::File { path } => kv(&mut s, "path", &path.display()),
        }
        s
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Typed access to a document; remembers which entries were read and every issue.
struct Reader<'a> {
    doc: &'a ConfigDocument,
    used: Vec<bool>,
    issues: Vec<ConfigIssue>,
}

impl<'a> Reader<'a> {
    fn new(doc: &'a ConfigDocument) -> Self {
        Self {
            doc,
            used: vec![false; doc.entries.len()],
            issues: Vec::new(),
        }
    }

    fn issue(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.issues.push(ConfigIssue::new(line, message));
    }

    fn line(&self, section: Section, key: &str) -> Option<usize> {
        self.doc.find(section, key).and_then(|e| e.line)
    }

    fn raw(&mut self, section: Section, key: &str) -> Option<(&'a str, Option<usize>)> {
        let i = self
            .doc
            .entries
            .iter()
            .position(|e| e.section == section && e.key == key)?;
        self.used[i] = true;
        let e = &self.doc.entries[i];
        Some((e.value.as_str(), e.line))
    }

    fn opt<T: FromStr>(&mut self, section: Section, key: &str, kind: &str) -> Option<T> {
        let (v, line) = self.raw(section, key)?;
        match v.parse() {
            Ok(x) => Some(x),
            Err(_) => {
                self.issue(line, format!("`{key}`: expected {kind}, got `{v}`"));
                None
            }
        }
    }

    fn get<T: FromStr>(&mut self, section: Section, key: &str, default: T, kind: &str) -> T {
        self.opt(section, key, kind).unwrap_or(default)
    }

    fn opt_list<T: FromStr>(&mut self, section: Section, key: &str, kind: &str) -> Option<Vec<T>> {
        let (v, line) = self.raw(section, key)?;
        let parsed: Option<Vec<T>> = v.split(',').map(|x| x.trim().parse().ok()).collect();
        if parsed.is_none() {
            self.issue(line, format!("`{key}`: expected a list of {kind}, got `{v}`"));
        }
        parsed
    }

    fn unknown_keys(&mut self) {
        for (e, used) in self.doc.entries.iter().zip(&self.used) {
            if !used {
                let msg = format!("unknown key `{}` in {}", e.key, e.section.label());
                self.issues.push(ConfigIssue::new(e.line, msg));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issues(text: &str) -> Vec<ConfigIssue> {
        match parse_config(text) {
            Err(Error::Config(v)) => v,
            other => panic!("expected config issues, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_takes_the_experiment_defaults() {
        let c = parse_config("M = 4\nK = 10\n[protocol]\nepsilon_step = 0.01\n").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.checkpoint_list().last(), Some(&100_000));
    }

    #[test]
    fn too_many_players() {
        let v = issues("M = 12\nK = 10\n");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].line, Some(1));
        assert!(v[0].message.contains("M exceeds K"));
    }

    #[test]
    fn all_issues_are_collected() {
        let text = "M = x\nruns = 0\nbogus = 1\n[protocol]\nalpha = 2\n[adversary]\ngenerator = nope\n[weird]\n";
        let v = issues(&format!("{text}ignored = 1\n"));
        let lines: Vec<_> = v.iter().map(|i| i.line).collect();
        assert_eq!(v.len(), 6, "{v:?}");
        for l in [1, 2, 3, 5, 7, 8] {
            assert!(lines.contains(&Some(l)), "{v:?}");
        }
    }

    #[test]
    fn duplicates_and_syntax() {
        let v = issues("M = 4\nM = 5\nnot a pair\n");
        assert_eq!(v.len(), 2);
        assert!(v[0].message.contains("first set on line 1"));
    }

    #[test]
    fn round_trips() {
        let text = "# fig 7\nT = 2000 # short\ncheckpoints = 500, 2000\nenvironment = cp\n\
                    [adversary]\ngenerator = changepoint\nt_change = 800\nn_bursts = 3\n\
                    [protocol]\nprotocols = alpha-unaware, parallel_exp3\nbeta = 0.25\ninitial_estimate = 0.1\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.protocols, vec![Protocol::AlphaUnaware, Protocol::ParallelExp3]);
        assert_eq!(c.beta, AttackSetting::Value(0.25));
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        let d = ExperimentConfig::default();
        assert_eq!(parse_config(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn adversary_rules_are_checked_up_front() {
        let v = issues("T = 100\n[adversary]\nburst_len = 50\nn_bursts = 2\n");
        assert!(v[0].message.contains("separated bursts"), "{v:?}");
        let v = issues("K = 5\nM = 2\n[adversary]\ngenerator = changepoint\n");
        assert!(v[0].message.contains("means_before"), "{v:?}");
        let v = issues("[adversary]\ngenerator = file\n");
        assert!(v[0].message.contains("path"));
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut doc = ConfigDocument::parse("M = 12\n").unwrap();
        assert!(ExperimentConfig::from_document(&doc).is_err());
        doc.set_assignment("M=3").unwrap();
        doc.set_assignment("adversary.n_bursts=4").unwrap();
        let c = ExperimentConfig::from_document(&doc).unwrap();
        assert_eq!(c.players, 3);
        assert!(matches!(c.adversary, AdversaryConfig::Burst { n_bursts: 4, .. }));
        assert!(doc.set_assignment("nope.x=1").is_err());
    }

    #[test]
    fn auto_measures_the_first_run() {
        let c = parse_config("T = 5000\nruns = 2\n[protocol]\nprotocols = alpha-aware, beta-aware\n[adversary]\nburst_len = 12\nn_bursts = 3\n")
            .unwrap();
        let specs = c.monte_carlo_specs().unwrap();
        let t = 5000f64;
        assert!((specs[0].settings.alpha - 12f64.ln() / t.ln()).abs() < 1e-12);
        assert!((specs[1].settings.beta - 36f64.ln() / t.ln()).abs() < 1e-12);
        assert_eq!(specs[0].seeds, specs[1].seeds);
    }
}
