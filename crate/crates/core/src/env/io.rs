//! CSV form of a loss matrix: header `arm,t,loss`, one row per (arm, slot), arm-major.

use std::io::{Read, Write};
use std::path::Path;

use super::LossMatrix;
use crate::{Error, Result};

const HEADER: [&str; 3] = ["arm", "t", "loss"];

impl LossMatrix {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for (a, row) in self.rows().enumerate() {
            for (t, l) in row.iter().enumerate() {
                w.write_record([(a + 1).to_string(), (t + 1).to_string(), l.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Reads the CSV written by [`LossMatrix::write_csv`]. Rows may come in any order
    /// but every (arm, slot) pair of the implied `K x T` grid must appear once.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        if r.headers()?.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::Malformed(format!(
                "expected header {}",
                HEADER.join(",")
            )));
        }
        let mut cells = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("").trim().to_owned();
            let arm: usize = field(0)
                .parse()
                .map_err(|_| Error::Malformed(format!("bad arm `{}`", field(0))))?;
            let t: usize = field(1)
                .parse()
                .map_err(|_| Error::Malformed(format!("bad slot `{}`", field(1))))?;
            let loss: f64 = field(2)
                .parse()
                .map_err(|_| Error::Malformed(format!("bad loss `{}`", field(2))))?;
            if arm == 0 || t == 0 {
                return Err(Error::Malformed("arm and t are 1-based".into()));
            }
            cells.push((arm, t, loss));
        }
        let k = cells.iter().map(|c| c.0).max().unwrap_or(0);
        let horizon = cells.iter().map(|c| c.1).max().unwrap_or(0);
        if cells.len() != k * horizon {
            return Err(Error::Malformed(format!(
                "{} rows do not fill a {k} x {horizon} grid",
                cells.len()
            )));
        }
        let mut losses = vec![f64::NAN; k * horizon];
        for (arm, t, l) in cells {
            let slot = &mut losses[(arm - 1) * horizon + (t - 1)];
            if !slot.is_nan() {
                return Err(Error::Malformed(format!("duplicate row arm {arm}, t {t}")));
            }
            *slot = l;
        }
        LossMatrix::new(k, horizon, losses)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
