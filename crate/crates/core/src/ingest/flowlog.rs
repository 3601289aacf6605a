use std::io::{BufRead, Write};

use super::{FlowRecord, IngestError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowLog {
    pub flows: Vec<FlowRecord>,
    pub diagnostics: Vec<LineDiagnostic>,
}

/// Read an NDJSON flow log. Malformed lines and records that violate the
/// flow invariants are reported in [`FlowLog::diagnostics`] and skipped; only
/// an I/O failure aborts the read. Blank lines are ignored.
pub fn parse_flow_log<R: BufRead>(reader: R) -> Result<FlowLog, IngestError> {
    let mut log = FlowLog::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<FlowRecord>(trimmed)
            .map_err(|e| e.to_string())
            .and_then(|f| f.validate().map(|_| f));
        match parsed {
            Ok(flow) => log.flows.push(flow),
            Err(message) => log.diagnostics.push(LineDiagnostic { line: idx + 1, message }),
        }
    }
    Ok(log)
}

pub fn write_flow_log<W: Write>(flows: &[FlowRecord], mut writer: W) -> std::io::Result<()> {
    for flow in flows {
        serde_json::to_writer(&mut writer, flow)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
