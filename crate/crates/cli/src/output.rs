use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::Format;
use crate::Failure;

/// A rectangular table with string cells, written as CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, T>(&mut self, row: I)
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

/// What one subcommand produced.
pub struct Artifact {
    pub result: Value,
    pub table: Table,
    /// Table for `--plot-data`; the main table when absent.
    pub plot: Option<Table>,
}

pub struct Provenance {
    pub subcommand: &'static str,
    pub seed: u64,
    pub config: Value,
    pub wall_time_s: f64,
}

impl Provenance {
    /// SHA-256 of the canonical config JSON and the seed.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_string(&self.config).expect("config is plain JSON"));
        h.update(self.seed.to_le_bytes());
        h.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Serialize)]
struct Header<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    seed: u64,
    config_hash: String,
    // Last on purpose: the only field that varies between identical runs.
    wall_time_s: f64,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    provenance: Header<'a>,
    config: &'a Value,
    result: &'a Value,
}

pub fn write_artifact(
    format: Format,
    prov: &Provenance,
    artifact: &Artifact,
    path: Option<&Path>,
) -> Result<(), Failure> {
    let mut out: Box<dyn Write> = match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    let header = Header {
        tool: "siegel",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: prov.subcommand,
        seed: prov.seed,
        config_hash: prov.config_hash(),
        wall_time_s: prov.wall_time_s,
    };
    match format {
        Format::Json => {
            let doc = JsonDocument {
                provenance: header,
                config: &prov.config,
                result: &artifact.result,
            };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "# tool: {} {}", header.tool, header.version)?;
            writeln!(out, "# subcommand: {}", header.subcommand)?;
            writeln!(out, "# seed: {}", header.seed)?;
            writeln!(out, "# config_hash: {}", header.config_hash)?;
            writeln!(out, "# wall_time_s: {}", header.wall_time_s)?;
            artifact.table.write_csv(&mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Plain CSV for external plotting: one header row, then the data.
pub fn emit_plot_data(table: &Table, path: &Path) -> Result<(), Failure> {
    if table.rows.is_empty() {
        return Err(Failure::Precondition("refusing to write an empty plot table".into()));
    }
    let mut f = io::BufWriter::new(File::create(path)?);
    table.write_csv(&mut f)?;
    f.flush()?;
    Ok(())
}
