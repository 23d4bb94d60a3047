//! Per-iteration trace files.
//!
//! Header `iter,psnr_db,condition_ratio,epsilon,restarts`, one row per
//! iteration, six decimals, LF line endings. Absent values are empty cells.

use std::io::{Read, Write};
use std::path::Path;

use idbp_core::solvers::IterationTrace;

use crate::error::{CliError, Result};

pub const TRACE_HEADER: [&str; 5] = ["iter", "psnr_db", "condition_ratio", "epsilon", "restarts"];

/// One parsed trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub psnr_db: Option<f64>,
    pub condition_ratio: Option<f64>,
    pub epsilon: Option<f64>,
    pub restarts: usize,
}

impl TraceRow {
    /// The row as it reads back after formatting.
    pub fn from_record(r: &idbp_core::solvers::TraceRecord) -> Self {
        let round = |v: Option<f64>| v.map(|v| fixed(v).parse::<f64>().expect("formatted number parses"));
        Self {
            iter: r.iteration,
            psnr_db: round(r.psnr_db),
            condition_ratio: round(r.condition_ratio),
            epsilon: round(r.epsilon),
            restarts: r.restarts,
        }
    }
}

pub(crate) fn fixed(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

pub fn write_trace_csv(trace: &IterationTrace, out: impl Write) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in trace.records() {
        w.write_record([
            r.iteration.to_string(),
            cell(r.psnr_db),
            cell(r.condition_ratio),
            cell(r.epsilon),
            r.restarts.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_trace_csv(trace: &IterationTrace, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_trace_csv(trace, std::io::BufWriter::new(file)).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn parse_cell(s: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| format!("not a number: {s:?}"))
    }
}

pub fn parse_trace_csv(input: impl Read) -> std::result::Result<Vec<TraceRow>, String> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| format!("bad integer {:?}", &rec[i]));
        rows.push(TraceRow {
            iter: int(0)?,
            psnr_db: parse_cell(&rec[1])?,
            condition_ratio: parse_cell(&rec[2])?,
            epsilon: parse_cell(&rec[3])?,
            restarts: int(4)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use idbp_core::solvers::TraceRecord;

    fn trace() -> IterationTrace {
        let rec = |iteration, restarts, ratio| TraceRecord {
            iteration,
            psnr_db: Some(25.123_456_789),
            condition_ratio: ratio,
            epsilon: Some(1e-3 + 1e-4 * restarts as f64),
            restarts,
            step_norm: 0.0,
        };
        IterationTrace::from_records(vec![rec(1, 0, Some(2.5)), rec(2, 0, Some(1.2)), rec(1, 1, None), rec(2, 1, Some(f64::INFINITY))])
    }

    #[test]
    fn exact_bytes() {
        let mut buf = Vec::new();
        write_trace_csv(&trace(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "iter,psnr_db,condition_ratio,epsilon,restarts\n\
             1,25.123457,2.500000,0.001000,0\n\
             2,25.123457,1.200000,0.001000,0\n\
             1,25.123457,,0.001100,1\n\
             2,25.123457,inf,0.001100,1\n"
        );
    }

    #[test]
    fn round_trip() {
        let t = trace();
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf).unwrap();
        let rows = parse_trace_csv(buf.as_slice()).unwrap();
        let expect: Vec<TraceRow> = t.records().iter().map(TraceRow::from_record).collect();
        assert_eq!(rows, expect);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(parse_trace_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
