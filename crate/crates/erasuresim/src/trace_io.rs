//! JSON-lines trace files.
//!
//! The first line is the [`TraceHeader`]; every following line is one
//! [`StepRecord`], in timestep order. Blank lines are ignored.

use std::io::{BufRead, Write};

use erasuresim_core::sim::{StepRecord, TraceHeader};
use erasuresim_core::RunTrace;

#[derive(Debug, thiserror::Error)]
pub enum TraceIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("trace has no header line")]
    Empty,
    #[error("line {line}: {source}")]
    Schema { line: usize, source: serde_json::Error },
}

pub fn write_trace(mut w: impl Write, trace: &RunTrace) -> Result<(), TraceIoError> {
    let line = |e| TraceIoError::Schema { line: 0, source: e };
    serde_json::to_writer(&mut w, &trace.header).map_err(line)?;
    w.write_all(b"\n")?;
    for r in &trace.records {
        serde_json::to_writer(&mut w, r).map_err(line)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(r: impl BufRead) -> Result<RunTrace, TraceIoError> {
    let mut header: Option<TraceHeader> = None;
    let mut records = Vec::new();
    for (i, text) in r.lines().enumerate() {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let schema = |source| TraceIoError::Schema { line: i + 1, source };
        if header.is_none() {
            header = Some(serde_json::from_str(&text).map_err(schema)?);
        } else {
            records.push(serde_json::from_str::<StepRecord>(&text).map_err(schema)?);
        }
    }
    let header = header.ok_or(TraceIoError::Empty)?;
    Ok(RunTrace { header, records })
}
