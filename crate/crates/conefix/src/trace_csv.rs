//! Trace export in the shared CSV schema.
//!
//! Every file starts with `#` comment lines recording the tool version, the
//! command line and the seed, followed by the header
//! `n,step_linf,err_l2,err_linf,ratio_l2,d_thompson,lower_bound`.
//! Unknown values are written as empty fields.

use std::io::{self, Read, Write};

use conefix_core::solver::IterationTrace;
use serde::{Deserialize, Serialize};

use crate::FormatError;

/// Provenance written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunHeader {
    pub version: String,
    pub command_line: String,
    pub seed: Option<u64>,
}

impl RunHeader {
    pub fn new(command_line: impl Into<String>, seed: Option<u64>) -> Self {
        RunHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: command_line.into(),
            seed,
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# conefix {}", self.version)?;
        writeln!(w, "# command: {}", self.command_line)?;
        match self.seed {
            Some(s) => writeln!(w, "# seed: {s}"),
            None => writeln!(w, "# seed: none"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub step_linf: f64,
    pub err_l2: Option<f64>,
    pub err_linf: Option<f64>,
    pub ratio_l2: Option<f64>,
    pub d_thompson: Option<f64>,
    pub lower_bound: Option<f64>,
}

/// One row per recorded step. `lower_bound[i]` belongs to `records[i]`.
pub fn trace_rows(trace: &IterationTrace, lower_bound: Option<&[f64]>) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| TraceRow {
            n: r.n,
            step_linf: r.step.linf,
            err_l2: r.error.map(|e| e.l2),
            err_linf: r.error.map(|e| e.linf),
            ratio_l2: r.ratio.map(|q| q.l2),
            d_thompson: r.d_thompson,
            lower_bound: lower_bound.and_then(|lb| lb.get(i).copied()),
        })
        .collect()
}

pub fn write_trace<W: Write>(
    mut w: W,
    header: &RunHeader,
    trace: &IterationTrace,
    lower_bound: Option<&[f64]>,
) -> Result<(), FormatError> {
    header.write_to(&mut w)?;
    let mut out = csv::Writer::from_writer(w);
    for row in trace_rows(trace, lower_bound) {
        out.serialize(row)?;
    }
    if trace.records.is_empty() {
        out.write_record(["n", "step_linf", "err_l2", "err_linf", "ratio_l2", "d_thompson", "lower_bound"])?;
    }
    out.flush()?;
    Ok(())
}

/// Two-column `n,ratio_l2` file for the rate plots.
pub fn write_ratio<W: Write>(mut w: W, header: &RunHeader, trace: &IterationTrace) -> Result<(), FormatError> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        ratio_l2: Option<f64>,
    }
    header.write_to(&mut w)?;
    let mut out = csv::Writer::from_writer(w);
    for r in &trace.records {
        out.serialize(Row {
            n: r.n,
            ratio_l2: r.ratio.map(|q| q.l2),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a trace file, skipping comment lines.
pub fn read_trace<R: Read>(r: R) -> Result<Vec<TraceRow>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rdr.deserialize().map(|row| row.map_err(FormatError::from)).collect()
}
