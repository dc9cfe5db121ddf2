use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Dataset, Task};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Libsvm,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Column count for libsvm files. Defaults to the largest index seen.
    pub n_features: Option<usize>,
}

/// Reads a raw (unstandardized) dataset from disk.
pub fn load_dataset(path: &Path, format: DataFormat, task: Task, options: &LoadOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    match format {
        DataFormat::Csv => parse_csv(&text, task, path),
        DataFormat::Libsvm => parse_libsvm(&text, task, options.n_features, path),
    }
}

fn parse_error(origin: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Comma-separated rows; the last column is the response.
///
/// The first row is treated as a header when one of its feature fields is
/// not a number (or, for regression, when its response is not a number).
pub fn parse_csv(text: &str, task: Task, origin: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<(usize, String)> = Vec::new();
    let mut arity: Option<usize> = None;
    let mut first = true;

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() < 2 {
            return Err(parse_error(origin, line, "need at least one feature column and a response"));
        }
        let n_feat = record.len() - 1;
        let parsed: Vec<Option<f64>> = record.iter().take(n_feat).map(|f| f.parse::<f64>().ok()).collect();
        let label = record.get(n_feat).unwrap_or_default().to_string();

        if first {
            first = false;
            let header = parsed.iter().any(Option::is_none)
                || (task == Task::Regression && label.parse::<f64>().is_err());
            if header {
                arity = Some(record.len());
                continue;
            }
        }
        match arity {
            Some(a) if a != record.len() => {
                return Err(parse_error(origin, line, format!("expected {a} fields, found {}", record.len())));
            }
            None => arity = Some(record.len()),
            _ => {}
        }
        for (j, v) in parsed.into_iter().enumerate() {
            match v {
                Some(v) => values.push(v),
                None => {
                    return Err(parse_error(
                        origin,
                        line,
                        format!("field {} is not a number: {:?}", j + 1, record.get(j).unwrap_or_default()),
                    ))
                }
            }
        }
        labels.push((line, label));
    }

    if labels.is_empty() {
        return domain(format!("{}: no data rows", origin.display()));
    }
    let d = arity.unwrap_or(1) - 1;
    let x = Array2::from_shape_vec((labels.len(), d), values).expect("row arity checked");
    let y = map_labels(&labels, task, origin)?;
    Dataset::new(x, y, task)
}

/// `<label> <index>:<value> ...` rows with 1-based ascending indices.
pub fn parse_libsvm(text: &str, task: Task, n_features: Option<usize>, origin: &Path) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels: Vec<(usize, String)> = Vec::new();
    let mut max_index = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or_default().trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().expect("non-empty line has a token").to_string();
        let mut entries = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(origin, line_no, format!("expected index:value, found {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_error(origin, line_no, format!("bad feature index {idx:?}")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| parse_error(origin, line_no, format!("bad feature value {val:?}")))?;
            if idx == 0 {
                return Err(parse_error(origin, line_no, "feature indices are 1-based"));
            }
            if idx <= prev {
                return Err(parse_error(origin, line_no, format!("index {idx} does not ascend past {prev}")));
            }
            if let Some(d) = n_features {
                if idx > d {
                    return Err(parse_error(origin, line_no, format!("index {idx} exceeds declared dimension {d}")));
                }
            }
            prev = idx;
            entries.push((idx - 1, val));
        }
        max_index = max_index.max(prev);
        rows.push(entries);
        labels.push((line_no, label));
    }

    if rows.is_empty() {
        return domain(format!("{}: no data rows", origin.display()));
    }
    let d = n_features.unwrap_or(max_index);
    if d == 0 {
        return domain(format!("{}: no feature columns", origin.display()));
    }
    let mut x = Array2::zeros((rows.len(), d));
    for (r, entries) in rows.iter().enumerate() {
        for &(c, v) in entries {
            x[[r, c]] = v;
        }
    }
    let y = map_labels(&labels, task, origin)?;
    Dataset::new(x, y, task)
}

/// Regression: parse as numbers. Classification: labels already in `{-1, +1}`
/// pass through; otherwise exactly two distinct labels are required and the
/// smaller one (numerically when both parse, else lexicographically) maps to -1.
fn map_labels(labels: &[(usize, String)], task: Task, origin: &Path) -> Result<Array1<f64>> {
    if task == Task::Regression {
        return labels
            .iter()
            .map(|(line, s)| {
                s.parse::<f64>()
                    .map_err(|_| parse_error(origin, *line, format!("response is not a number: {s:?}")))
            })
            .collect();
    }

    let numeric: Option<Vec<f64>> = labels.iter().map(|(_, s)| s.parse::<f64>().ok()).collect();
    if let Some(vals) = &numeric {
        if vals.iter().all(|&v| v == 1.0 || v == -1.0) {
            return Ok(Array1::from(vals.clone()));
        }
    }

    let distinct: BTreeSet<&str> = labels.iter().map(|(_, s)| s.as_str()).collect();
    if distinct.len() != 2 {
        return domain(format!(
            "{}: classification needs exactly two distinct labels, found {}",
            origin.display(),
            distinct.len()
        ));
    }
    let pair: Vec<&str> = distinct.into_iter().collect();
    let negative = match &numeric {
        Some(_) => {
            let (a, b): (f64, f64) = (pair[0].parse().unwrap(), pair[1].parse().unwrap());
            if a == b {
                return domain(format!("{}: labels {:?} and {:?} are numerically equal", origin.display(), pair[0], pair[1]));
            }
            if a < b {
                pair[0]
            } else {
                pair[1]
            }
        }
        None => pair[0],
    };
    Ok(labels.iter().map(|(_, s)| if s == negative { -1.0 } else { 1.0 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;
    use ndarray::array;

    fn mem() -> PathBuf {
        PathBuf::from("<memory>")
    }

    #[test]
    fn csv_classification() {
        let ds = parse_csv("1,2,+1\n3,4,-1", Task::Classification, &mem()).unwrap();
        assert_eq!(ds.x(), &array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(ds.y(), &array![1.0, -1.0]);
    }

    #[test]
    fn csv_zero_one_labels() {
        let ds = parse_csv("1,2,0\n3,4,1\n5,6,0", Task::Classification, &mem()).unwrap();
        assert_eq!(ds.y(), &array![-1.0, 1.0, -1.0]);
    }

    #[test]
    fn csv_string_labels_and_header() {
        let text = "a,b,income\n1,2,>50K\n3,4,<=50K\n";
        let ds = parse_csv(text, Task::Classification, &mem()).unwrap();
        assert_eq!(ds.n_rows(), 2);
        // "<=50K" < ">50K" lexicographically
        assert_eq!(ds.y(), &array![1.0, -1.0]);
    }

    #[test]
    fn csv_numeric_labels_order_numerically() {
        let ds = parse_csv("1,10\n2,9\n", Task::Classification, &mem()).unwrap();
        assert_eq!(ds.y(), &array![1.0, -1.0]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_csv("", Task::Regression, &mem()), Err(Error::Domain(_))));
        match parse_csv("1,2,3\n4,5\n", Task::Regression, &mem()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_csv("1,2,3\n4,x,6\n", Task::Regression, &mem()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_csv("1,a\n2,b\n3,c\n", Task::Classification, &mem()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn libsvm_sparse_to_dense() {
        let ds = parse_libsvm("-1 1:0.5 3:2.0", Task::Classification, Some(3), &mem()).unwrap();
        assert_eq!(ds.x(), &array![[0.5, 0.0, 2.0]]);
        assert_eq!(ds.y(), &array![-1.0]);
    }

    #[test]
    fn libsvm_infers_dimension() {
        let ds = parse_libsvm("1 2:1\n0.5 4:3 # comment\n\n", Task::Regression, None, &mem()).unwrap();
        assert_eq!(ds.n_cols(), 4);
        assert_eq!(ds.y(), &array![1.0, 0.5]);
    }

    #[test]
    fn libsvm_errors_carry_line() {
        for (text, want) in [
            ("1 1:1\n1 3:1 2:1", 2),
            ("1 0:1", 1),
            ("1 1:1\n\n-1 1=2", 3),
            ("1 5:1", 1),
        ] {
            match parse_libsvm(text, Task::Regression, Some(4), &mem()) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        assert!(matches!(parse_libsvm("\n# only\n", Task::Regression, None, &mem()), Err(Error::Domain(_))));
    }
}
