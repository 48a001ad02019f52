//! Long-format result tables and their CSV/JSON serialization.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One observation. `x` and `y` are named per experiment; `n_obs` counts the
/// observations averaged into `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub replicate: Option<usize>,
    pub method: String,
    pub key: String,
    pub x_name: String,
    pub x: f64,
    pub y_name: String,
    pub y: f64,
    pub n_obs: u64,
    pub wall_clock: f64,
    pub seed: u64,
    pub config_hash: String,
}

pub const COLUMNS: [&str; 12] = [
    "experiment",
    "replicate",
    "method",
    "key",
    "x_name",
    "x",
    "y_name",
    "y",
    "n_obs",
    "wall_clock",
    "seed",
    "config_hash",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
    }

    /// Rows with the given method and `y_name`.
    pub fn select<'a>(&'a self, method: &'a str, y_name: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.method == method && r.y_name == y_name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// From a file extension; CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Writes the table; a CSV always carries the header, even when empty.
pub fn emit(table: &ResultTable, format: Format, path: impl AsRef<Path>) -> Result<(), TableError> {
    let path = path.as_ref();
    let io = |source| TableError::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_to(table, format, BufWriter::new(file), path)
}

pub fn write_to<W: Write>(table: &ResultTable, format: Format, mut out: W, path: &Path) -> Result<(), TableError> {
    let csv_err = |source| TableError::Csv {
        path: path.to_owned(),
        source,
    };
    match format {
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            writer.write_record(COLUMNS).map_err(csv_err)?;
            for row in &table.rows {
                writer.serialize(row).map_err(csv_err)?;
            }
            writer.flush().map_err(|source| TableError::Io {
                path: path.to_owned(),
                source,
            })
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, table).map_err(|source| TableError::Json {
                path: path.to_owned(),
                source,
            })?;
            out.write_all(b"\n")
                .and_then(|_| out.flush())
                .map_err(|source| TableError::Io {
                    path: path.to_owned(),
                    source,
                })
        }
    }
}

pub fn read_table(format: Format, path: impl AsRef<Path>) -> Result<ResultTable, TableError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| TableError::Io {
        path: path.to_owned(),
        source,
    })?;
    match format {
        Format::Csv => {
            let mut reader = csv::Reader::from_reader(BufReader::new(file));
            let rows = reader
                .deserialize()
                .collect::<Result<Vec<ResultRow>, _>>()
                .map_err(|source| TableError::Csv {
                    path: path.to_owned(),
                    source,
                })?;
            Ok(ResultTable { rows })
        }
        Format::Json => serde_json::from_reader(BufReader::new(file)).map_err(|source| TableError::Json {
            path: path.to_owned(),
            source,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize) -> ResultRow {
        ResultRow {
            experiment: "full-timing".into(),
            replicate: if i == 0 { None } else { Some(i) },
            method: "pseudo_mallows".into(),
            key: "a,\"quoted\" key".into(),
            x_name: "samples".into(),
            x: 10.0 * i as f64,
            y_name: "footrule_error".into(),
            y: 0.1 + i as f64 / 3.0,
            n_obs: 7,
            wall_clock: 1.25e-3,
            seed: u64::MAX - i as u64,
            config_hash: "abc".into(),
        }
    }

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let table = ResultTable {
            rows: (0..4).map(row).collect(),
        };
        for format in [Format::Csv, Format::Json] {
            let path = dir.path().join(format!("t.{format:?}"));
            emit(&table, format, &path).unwrap();
            assert_eq!(read_table(format, &path).unwrap(), table);
        }
    }

    #[test]
    fn empty_table_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        emit(&ResultTable::default(), Format::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim_end(), COLUMNS.join(","));
        assert!(read_table(Format::Csv, &path).unwrap().is_empty());
    }

    #[test]
    fn json_is_an_array_of_objects() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        emit(&ResultTable { rows: vec![row(1)] }, Format::Json, &path).unwrap();
        let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let rows = value.as_array().unwrap();
        assert_eq!(rows.len(), 1);
        let keys: Vec<&str> = rows[0].as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected = COLUMNS.to_vec();
        expected.sort_unstable();
        let mut keys_sorted = keys.clone();
        keys_sorted.sort_unstable();
        assert_eq!(keys_sorted, expected);
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = emit(&ResultTable::default(), Format::Csv, "/nonexistent/dir/out.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }
}
