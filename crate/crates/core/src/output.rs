//! Table writers. CSV output starts with a `#`-prefixed JSON line holding
//! the run metadata; JSON output wraps the same metadata and rows in one
//! object.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentSpec;
use crate::error::{Error, Result};
use crate::stochastics::GENERATOR;
use crate::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::config("format", format!("expected `csv` or `json`, got `{s}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub seed: u64,
    pub generator: String,
    pub code_version: String,
    /// Effective experiment spec as TOML, every default written out.
    pub config: String,
}

impl Metadata {
    pub fn new(command: &str, spec: &ExperimentSpec) -> Result<Self> {
        Ok(Metadata {
            command: command.to_string(),
            seed: spec.seed,
            generator: GENERATOR.to_string(),
            code_version: format!("qrep {VERSION}"),
            config: spec.effective().to_toml()?,
        })
    }

    pub fn spec(&self) -> Result<ExperimentSpec> {
        crate::config::parse_config(&self.config, "metadata")
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_table<W: Write, R: Serialize>(mut w: W, meta: &Metadata, rows: &[R], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "# {}", serde_json::to_string(meta).map_err(json_err)?)?;
            let mut csv = csv::Writer::from_writer(&mut w);
            for row in rows {
                csv.serialize(row).map_err(csv_err)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, R> {
                metadata: &'a Metadata,
                rows: &'a [R],
            }
            serde_json::to_writer_pretty(&mut w, &Doc { metadata: meta, rows }).map_err(json_err)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV table written by [`write_table`].
pub fn read_csv<R: BufRead, T: for<'de> Deserialize<'de>>(mut r: R) -> Result<(Metadata, Vec<T>)> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let header = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::config("<csv>", "missing `#` metadata line"))?;
    let meta: Metadata = serde_json::from_str(header.trim_end()).map_err(json_err)?;
    let rows = csv::Reader::from_reader(r).deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(csv_err)?;
    Ok((meta, rows))
}
