//! CSV readers and writers for rankings, clicks and samples.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pmallows::{ClickDataset, ClickVector, Ranking, RankingDataset};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}, line {line}: {source}")]
    Invalid {
        path: PathBuf,
        line: u64,
        #[source]
        source: pmallows::Error,
    },
    #[error("{path}: {message}")]
    Shape { path: PathBuf, message: String },
}

/// Integer rows of a CSV file with an optional non-numeric header row.
struct Table {
    labels: Option<Vec<String>>,
    rows: Vec<(u64, Vec<i64>)>,
}

fn read_table(path: &Path) -> Result<Table, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut labels = None;
    let mut rows = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DataError::Parse {
            path: path.to_owned(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<i64>, _> = record.iter().map(str::parse::<i64>).collect();
        match parsed {
            Ok(values) => {
                match width {
                    None => width = Some(values.len()),
                    Some(w) if w != values.len() => {
                        return Err(DataError::Parse {
                            path: path.to_owned(),
                            line,
                            message: format!("expected {w} columns, found {}", values.len()),
                        })
                    }
                    _ => {}
                }
                rows.push((line, values));
            }
            Err(_) if rows.is_empty() && labels.is_none() => {
                let header: Vec<String> = record.iter().map(str::to_owned).collect();
                width = Some(header.len());
                labels = Some(header);
            }
            Err(e) => {
                let bad = record.iter().find(|f| f.parse::<i64>().is_err()).unwrap_or("");
                return Err(DataError::Parse {
                    path: path.to_owned(),
                    line,
                    message: format!("'{bad}' is not an integer ({e})"),
                });
            }
        }
    }
    Ok(Table { labels, rows })
}

fn width_of(path: &Path, table: &Table) -> Result<usize, DataError> {
    table
        .labels
        .as_ref()
        .map(Vec::len)
        .or_else(|| table.rows.first().map(|r| r.1.len()))
        .filter(|&w| w > 0)
        .ok_or_else(|| DataError::Shape {
            path: path.to_owned(),
            message: "no data rows".into(),
        })
}

/// One user per row; each row must be a permutation of `1..=n`.
pub fn load_rankings(path: impl AsRef<Path>) -> Result<RankingDataset, DataError> {
    let path = path.as_ref();
    let table = read_table(path)?;
    let n = width_of(path, &table)?;
    let rankings = table
        .rows
        .iter()
        .map(|(line, values)| {
            let ranks = values
                .iter()
                .map(|&v| usize::try_from(v))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| DataError::Parse {
                    path: path.to_owned(),
                    line: *line,
                    message: "negative rank".into(),
                })?;
            Ranking::new(ranks).map_err(|source| DataError::Invalid {
                path: path.to_owned(),
                line: *line,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let shape = |source| DataError::Shape {
        path: path.to_owned(),
        message: format!("{source}"),
    };
    let data = RankingDataset::new(n, rankings).map_err(shape)?;
    match table.labels {
        Some(labels) => data.with_labels(labels).map_err(shape),
        None => Ok(data),
    }
}

/// One user per row of 0/1 entries.
pub fn load_clicks(path: impl AsRef<Path>) -> Result<ClickDataset, DataError> {
    let path = path.as_ref();
    let table = read_table(path)?;
    let n = width_of(path, &table)?;
    let users = table
        .rows
        .iter()
        .map(|(line, values)| {
            let bytes: Vec<u8> = values
                .iter()
                .map(|&v| u8::try_from(v).unwrap_or(u8::MAX))
                .collect();
            ClickVector::from_01(&bytes).map_err(|source| DataError::Invalid {
                path: path.to_owned(),
                line: *line,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let shape = |source| DataError::Shape {
        path: path.to_owned(),
        message: format!("{source}"),
    };
    let data = ClickDataset::new(n, users).map_err(shape)?;
    match table.labels {
        Some(labels) => data.with_labels(labels).map_err(shape),
        None => Ok(data),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, DataError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| DataError::Io {
            path: path.to_owned(),
            source,
        })
}

fn write_rows<'a>(
    path: &Path,
    labels: Option<&[String]>,
    rows: impl Iterator<Item = Vec<String>> + 'a,
) -> Result<(), DataError> {
    let io = |source: std::io::Error| DataError::Io {
        path: path.to_owned(),
        source,
    };
    let mut writer = csv::Writer::from_writer(create(path)?);
    if let Some(labels) = labels {
        writer.write_record(labels).map_err(|e| io(e.into()))?;
    }
    for row in rows {
        writer.write_record(&row).map_err(|e| io(e.into()))?;
    }
    writer.into_inner().map_err(|e| io(e.into_error()))?.flush().map_err(io)
}

pub fn write_rankings(
    path: impl AsRef<Path>,
    rankings: &[Ranking],
    labels: Option<&[String]>,
) -> Result<(), DataError> {
    write_rows(
        path.as_ref(),
        labels,
        rankings
            .iter()
            .map(|r| r.as_slice().iter().map(usize::to_string).collect()),
    )
}

pub fn write_clicks(path: impl AsRef<Path>, clicks: &ClickDataset) -> Result<(), DataError> {
    write_rows(
        path.as_ref(),
        clicks.labels(),
        clicks
            .users()
            .iter()
            .map(|u| u.bits().iter().map(|&b| u8::from(b).to_string()).collect()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_rankings_with_and_without_labels() {
        let f = file("1,3,2\n2,1,3\n");
        let d = load_rankings(f.path()).unwrap();
        assert_eq!(d.rankings()[0], Ranking::new(vec![1, 3, 2]).unwrap());
        assert_eq!(d.n_users(), 2);
        let f = file("a, b, c\n1,3,2\n");
        let d = load_rankings(f.path()).unwrap();
        assert_eq!(d.labels().unwrap(), ["a", "b", "c"]);
    }

    #[test]
    fn reports_line_numbers() {
        let f = file("1,2,3\n1,1,2\n");
        let err = load_rankings(f.path()).unwrap_err();
        assert!(matches!(err, DataError::Invalid { line: 2, .. }), "{err}");
        let f = file("1,2,3\n1,x,2\n");
        let err = load_rankings(f.path()).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 2, .. }), "{err}");
        let f = file("1,2,3\n1,2\n");
        assert!(matches!(load_rankings(f.path()).unwrap_err(), DataError::Parse { line: 2, .. }));
        let err = load_rankings("/nonexistent/rankings.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/rankings.csv"));
    }

    #[test]
    fn reads_clicks() {
        let f = file("1,0,1\n0,0,0\n");
        let d = load_clicks(f.path()).unwrap();
        assert_eq!(d.users()[0].bits(), [true, false, true]);
        assert_eq!(d.users()[0].count(), 2);
        let f = file("1,0,2\n");
        assert!(matches!(load_clicks(f.path()).unwrap_err(), DataError::Invalid { line: 1, .. }));
    }

    #[test]
    fn writes_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rankings = vec![Ranking::new(vec![2, 1, 3]).unwrap(), Ranking::identity(3)];
        let labels = vec!["x".to_string(), "y".into(), "z".into()];
        write_rankings(&path, &rankings, Some(&labels)).unwrap();
        let back = load_rankings(&path).unwrap();
        assert_eq!(back.rankings(), rankings.as_slice());
        assert_eq!(back.labels().unwrap(), labels.as_slice());

        let clicks = ClickDataset::new(3, vec![ClickVector::from_01(&[0, 1, 1]).unwrap()]).unwrap();
        let cpath = dir.path().join("c.csv");
        write_clicks(&cpath, &clicks).unwrap();
        assert_eq!(load_clicks(&cpath).unwrap(), clicks);
    }
}
