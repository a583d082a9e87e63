//! CSV forms of regret reports.

use std::io::{Read, Write};

use super::monte_carlo::RegretReport;
use crate::{Error, Result};

pub const RUN_COLUMNS: [&str; 10] = [
    "protocol",
    "environment",
    "run_id",
    "seed",
    "checkpoint_t",
    "cum_regret",
    "final_estimate",
    "comm_slots",
    "explore_collisions",
    "sync_failures",
];

pub const AGGREGATE_COLUMNS: [&str; 6] = [
    "protocol",
    "environment",
    "checkpoint_t",
    "mean_regret",
    "std_regret",
    "n_runs",
];

/// One line per (report, run, checkpoint), in report then run order.
pub fn write_runs_csv<W: Write>(reports: &[RegretReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_COLUMNS)?;
    for rep in reports {
        for run in &rep.runs {
            for (c, r) in rep.checkpoints.iter().zip(&run.regret) {
                w.write_record([
                    rep.protocol.clone(),
                    rep.environment.clone(),
                    run.run_id.to_string(),
                    run.seed.to_string(),
                    c.to_string(),
                    r.to_string(),
                    run.final_estimate.to_string(),
                    run.comm_slots.to_string(),
                    run.explore_collisions.to_string(),
                    run.sync_failures.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// One line per (report, checkpoint).
pub fn write_aggregate_csv<W: Write>(reports: &[RegretReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_COLUMNS)?;
    for rep in reports {
        for (i, c) in rep.checkpoints.iter().enumerate() {
            w.write_record([
                rep.protocol.clone(),
                rep.environment.clone(),
                c.to_string(),
                rep.mean[i].to_string(),
                rep.std[i].to_string(),
                rep.n_runs.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub protocol: String,
    pub environment: String,
    pub checkpoint_t: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub n_runs: usize,
}

pub fn read_aggregate_csv<R: Read>(input: R) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != AGGREGATE_COLUMNS {
        return Err(Error::Malformed(format!(
            "expected columns {}, found {}",
            AGGREGATE_COLUMNS.join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |j: usize| rec.get(j).unwrap_or("").trim();
        let bad = |what: &str| Error::Malformed(format!("line {line}: bad {what} `{}`", get(col(what))));
        rows.push(AggregateRow {
            protocol: get(0).to_owned(),
            environment: get(1).to_owned(),
            checkpoint_t: get(2).parse().map_err(|_| bad("checkpoint_t"))?,
            mean_regret: get(3).parse().map_err(|_| bad("mean_regret"))?,
            std_regret: get(4).parse().map_err(|_| bad("std_regret"))?,
            n_runs: get(5).parse().map_err(|_| bad("n_runs"))?,
        });
    }
    Ok(rows)
}

fn col(name: &str) -> usize {
    AGGREGATE_COLUMNS.iter().position(|c| *c == name).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RunResult;

    fn report() -> RegretReport {
        RegretReport {
            protocol: "alpha-unaware".into(),
            environment: "burst".into(),
            checkpoints: vec![10, 20],
            mean: vec![1.5, 2.25],
            std: vec![0.5, 0.0],
            n_runs: 2,
            runs: vec![
                RunResult {
                    run_id: 0,
                    seed: 9,
                    regret: vec![1.0, 2.25],
                    final_estimate: 0.02,
                    comm_slots: 30,
                    explore_collisions: 1,
                    sync_failures: 0,
                    decode_errors: 0,
                },
                RunResult {
                    run_id: 1,
                    seed: 10,
                    regret: vec![2.0, 2.25],
                    final_estimate: 0.0,
                    comm_slots: 31,
                    explore_collisions: 0,
                    sync_failures: 1,
                    decode_errors: 0,
                },
            ],
        }
    }

    #[test]
    fn run_rows() {
        let mut buf = Vec::new();
        write_runs_csv(&[report()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RUN_COLUMNS.join(","));
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "alpha-unaware,burst,0,9,10,1,0.02,30,1,0");
    }

    #[test]
    fn aggregate_roundtrip() {
        let mut buf = Vec::new();
        write_aggregate_csv(&[report()], &mut buf).unwrap();
        let rows = read_aggregate_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].checkpoint_t, 20);
        assert_eq!(rows[1].mean_regret, 2.25);
        assert!(read_aggregate_csv("a,b\n".as_bytes()).is_err());
        let broken = format!("{}\np,e,x,1,1,1\n", AGGREGATE_COLUMNS.join(","));
        assert!(read_aggregate_csv(broken.as_bytes()).is_err());
    }
}
