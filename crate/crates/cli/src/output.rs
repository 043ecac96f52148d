use crate::args::Format;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

/// Provenance attached to every artifact. No timestamps, so reruns are byte-identical.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub rng: &'static str,
}

impl Metadata {
    pub fn new(config: &Value, seed: u64) -> Self {
        let canonical = serde_json::to_vec(config).expect("config serialises");
        let digest = Sha256::digest(&canonical);
        Metadata {
            tool: "ruelle",
            version: env!("CARGO_PKG_VERSION"),
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
            rng: ruelle_core::montecarlo::RNG_NAME,
        }
    }

    fn comment(&self) -> String {
        format!(
            "# tool={} version={} config_hash={} seed={} rng={}",
            self.tool, self.version, self.config_hash, self.seed, self.rng
        )
    }
}

/// A CSV table with a fixed column order.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip spelling of a float; non-finite values are spelled out.
pub fn num(x: f64) -> String {
    match serde_json::Number::from_f64(x) {
        Some(n) => n.to_string(),
        None if x.is_nan() => "nan".into(),
        None if x > 0.0 => "inf".into(),
        None => "-inf".into(),
    }
}

/// Result of one subcommand.
pub struct Report {
    pub result: Value,
    pub table: Option<Table>,
    pub passed: bool,
}

pub fn render(meta: &Metadata, report: &Report, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "metadata": meta, "result": report.result });
            let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| e.to_string())?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or("this command has no CSV form; use --format json")?;
            let mut out = meta.comment().into_bytes();
            out.push(b'\n');
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.header).map_err(|e| e.to_string())?;
            for row in &table.rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
    }
}

pub fn write_artifact(bytes: &[u8], out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    }
}

/// Appends one JSON line to the results log.
pub fn append_log(
    path: &Path,
    meta: &Metadata,
    command: &str,
    report: &Report,
) -> std::io::Result<()> {
    let line = serde_json::json!({
        "metadata": meta,
        "command": command,
        "passed": report.passed,
        "result": report.result,
    });
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    writeln!(f, "{line}")
}
