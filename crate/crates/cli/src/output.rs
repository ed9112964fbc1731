//! Output plumbing shared by every subcommand: provenance header comments
//! and CSV table writing.
//!
//! Every file this tool writes starts with `#` comment lines recording the
//! tool version, a hash of the effective configuration, and the master seed,
//! so any result file can be traced back to the exact invocation that
//! produced it. No timestamps: outputs must be byte-identical across runs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use outlier_resilience::Result;
use sha2::{Digest, Sha256};

/// Describes an invocation precisely enough to reproduce it.
pub struct Provenance {
    /// Canonical dotted-key rendering of the effective configuration.
    pub config: String,
    pub master_seed: u64,
}

impl Provenance {
    pub fn new(config: String, master_seed: u64) -> Self {
        Provenance {
            config,
            master_seed,
        }
    }

    /// Hex SHA-256 of the canonical configuration text.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.config.as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    /// Writes the standard provenance comment block.
    pub fn write_header<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# tool: resil {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# config_hash: {}", self.config_hash())?;
        writeln!(w, "# master_seed: {}", self.master_seed)?;
        for line in self.config.lines() {
            writeln!(w, "# config: {line}")?;
        }
        Ok(())
    }
}

/// An in-memory CSV table: fixed header, rows of equal width. Optional
/// cells render as empty fields.
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Writes the provenance header, then the table body through the CSV
    /// writer (which handles quoting for fields containing commas).
    pub fn write_to<W: Write>(&self, mut w: W, provenance: &Provenance) -> Result<()> {
        provenance.write_header(&mut w)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.columns)?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path, provenance: &Provenance) -> Result<()> {
        let file = File::create(path)?;
        self.write_to(BufWriter::new(file), provenance)
    }
}

/// Formats an optional value, rendering `None` as the empty field.
pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
