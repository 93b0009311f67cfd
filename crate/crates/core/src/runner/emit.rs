//! Result tables and their CSV / JSON files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::SystemConfig;

pub const CSV_HEADER: &str =
    "scheme,group,user,snr_db,chi,xi,csi_error,metric,source,value,std_error,trials,seed";

/// One value of one curve at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub group: usize,
    pub user: String,
    pub snr_db: f64,
    pub chi: f64,
    pub xi: f64,
    pub csi_error: f64,
    pub metric: String,
    pub source: String,
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Unknown {
                kind: "format",
                name: s.to_string(),
            }),
        }
    }
}

/// CSV text: a `# config=<json>` line, the header, then one line per row.
pub fn to_csv_string(rows: &[ResultRow], cfg: &SystemConfig) -> Result<String> {
    let mut buf = Vec::new();
    writeln!(buf, "# config={}", serde_json::to_string(cfg)?)?;
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        if rows.is_empty() {
            w.write_record(CSV_HEADER.split(','))?;
        }
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| Error::Numerical(format!("non-UTF-8 output: {e}")))
}

/// Parses CSV text written by [`to_csv_string`], skipping comment lines.
pub fn from_csv_str(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header '{header}'")));
    }
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

/// The embedded config of a CSV written by [`to_csv_string`].
pub fn config_from_csv_str(text: &str) -> Result<SystemConfig> {
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("# config="))
        .ok_or_else(|| Error::Config("no '# config=' line".into()))?;
    Ok(serde_json::from_str(line)?)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

/// Writes the table; JSON output gets its config in a `.config.json`
/// sidecar next to it.
pub fn emit_results(
    rows: &[ResultRow],
    cfg: &SystemConfig,
    format: Format,
    path: &Path,
) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config(
            "refusing to write an empty result table".into(),
        ));
    }
    match format {
        Format::Csv => std::fs::write(path, to_csv_string(rows, cfg)?)?,
        Format::Json => {
            let mut text = serde_json::to_string_pretty(rows)?;
            text.push('\n');
            std::fs::write(path, text)?;
            let mut side = serde_json::to_string_pretty(cfg)?;
            side.push('\n');
            std::fs::write(sidecar_path(path), side)?;
        }
    }
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
