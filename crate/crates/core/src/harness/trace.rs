//! Line-delimited trace of oracle calls, one JSON object per line. Floats are
//! written with 17 significant digits so they read back bit-for-bit.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::oracle::TraceRecord;

pub fn format_record(r: &TraceRecord) -> String {
    let subregion = r
        .subregion
        .map_or_else(|| "null".to_string(), |s| s.to_string());
    format!(
        "{{\"phase\":\"{}\",\"subregion\":{},\"iteration\":{},\"x\":{:.16e},\"value\":{:.16e},\"repetition_index\":{},\"event\":\"{}\",\"timestamp_ns\":{}}}",
        r.phase.name(),
        subregion,
        r.iteration,
        r.x,
        r.value,
        r.repetition_index,
        r.event.name(),
        r.timestamp_ns
    )
}

pub fn write_trace<W: Write>(records: &[TraceRecord], mut out: W) -> Result<()> {
    for r in records {
        writeln!(out, "{}", format_record(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidInput(format!("trace line {}: {e}", n + 1)))?;
        records.push(record);
    }
    Ok(records)
}
