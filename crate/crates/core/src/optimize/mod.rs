//! Sampling-pattern optimizers: BASS, forward greedy and a POSS-style
//! baseline. All of them drive an [`Objective`] and emit a [`TraceRow`] per
//! evaluation step.

mod bass;
mod greedy;
mod poss;
mod select;

pub use bass::{bass_run, bass_step, BassConfig, BassOutcome, OptimizerState, RhoRule};
pub use greedy::{greedy_forward, GreedyConfig, GreedyOutcome};
pub use poss::{poss_run, PossConfig, PossOutcome};
pub use select::{add_count, remove_count, select_add, select_remove, Selection};

use std::io::{self, BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::objective::{criterion_value, efficacy, Criterion, Efficacy};
use crate::pattern::SamplingPattern;
use crate::recon::{CoilSensitivities, Reconstructor};

/// Training data plus reconstructor, the thing every optimizer evaluates.
pub struct Objective<'a> {
    pub dataset: &'a Dataset,
    pub recon: &'a dyn Reconstructor,
    pub sens: Option<&'a CoilSensitivities>,
    clock: Option<Instant>,
}

/// Criterion value of one pattern together with its residuals.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: f64,
    pub efficacy: Efficacy,
}

impl<'a> Objective<'a> {
    pub fn new(dataset: &'a Dataset, recon: &'a dyn Reconstructor) -> Self {
        Self {
            dataset,
            recon,
            sens: None,
            clock: None,
        }
    }

    pub fn with_sensitivities(mut self, sens: &'a CoilSensitivities) -> Self {
        self.sens = Some(sens);
        self
    }

    /// Record wall-clock milliseconds in traces. Off by default so traces are
    /// reproducible byte for byte.
    pub fn with_timing(mut self) -> Self {
        self.clock = Some(Instant::now());
        self
    }

    pub(crate) fn elapsed_ms(&self) -> u64 {
        self.clock.map_or(0, |c| c.elapsed().as_millis() as u64)
    }

    /// Reconstruction calls one evaluation of `pattern` costs.
    pub fn cost_of(&self, pattern: &SamplingPattern) -> u64 {
        if pattern.is_empty() {
            0
        } else {
            self.dataset.len() as u64
        }
    }

    /// Evaluates `pattern`. The empty pattern is handled without calling the
    /// reconstructor: its estimate is zero everywhere.
    pub fn evaluate(&self, pattern: &SamplingPattern, criterion: Criterion) -> Result<Evaluation> {
        self.dataset.grid().check_points(&pattern.grid())?;
        let eff = if pattern.is_empty() {
            let n = self.dataset.len();
            Efficacy {
                value: 1.0,
                per_item: vec![1.0; n],
                residuals: self.dataset.items().to_vec(),
            }
        } else {
            efficacy(pattern, self.dataset, self.recon)?
        };
        let value = criterion_value(criterion, &eff, self.dataset, self.sens)?;
        Ok(Evaluation {
            value,
            efficacy: eff,
        })
    }
}

/// One line of a convergence trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Size of the evaluated pattern.
    pub size: usize,
    pub k: usize,
    /// Criterion value of the evaluated pattern.
    pub f: f64,
    pub accepted: bool,
    pub recon_calls_cum: u64,
    pub wall_ms: u64,
}

pub const TRACE_HEADER: &str = "iter,size,K,F,accepted,recon_calls_cum,wall_ms";

pub fn write_trace<W: Write>(rows: &[TraceRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.iter,
            r.size,
            r.k,
            r.f,
            u8::from(r.accepted),
            r.recon_calls_cum,
            r.wall_ms
        )?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(r: R) -> Result<Vec<TraceRow>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != TRACE_HEADER {
        return Err(Error::UnrecognizedFormat("trace header".into()));
    }
    let bad = |line: &str| Error::Malformed(format!("trace row `{line}`"));
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(&line));
        }
        let accepted = match f[4] {
            "1" => true,
            "0" => false,
            _ => return Err(bad(&line)),
        };
        rows.push(TraceRow {
            iter: f[0].parse().map_err(|_| bad(&line))?,
            size: f[1].parse().map_err(|_| bad(&line))?,
            k: f[2].parse().map_err(|_| bad(&line))?,
            f: f[3].parse().map_err(|_| bad(&line))?,
            accepted,
            recon_calls_cum: f[5].parse().map_err(|_| bad(&line))?,
            wall_ms: f[6].parse().map_err(|_| bad(&line))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trip() {
        let rows = vec![
            TraceRow {
                iter: 0,
                size: 4,
                k: 2,
                f: 0.125,
                accepted: true,
                recon_calls_cum: 1,
                wall_ms: 0,
            },
            TraceRow {
                iter: 1,
                size: 4,
                k: 2,
                f: 0.1 + 0.2,
                accepted: false,
                recon_calls_cum: 2,
                wall_ms: 0,
            },
        ];
        let mut buf = Vec::new();
        write_trace(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(
            text.starts_with("iter,size,K,F,accepted,recon_calls_cum,wall_ms\n0,4,2,0.125,1,1,0\n")
        );
        assert_eq!(read_trace(&buf[..]).unwrap(), rows);
        assert!(read_trace(&b"bogus\n"[..]).is_err());
    }
}
