//! Dataset files: dense CSV (features then label) and sparse present/absent
//! lists.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use viboost_core::hypotheses::Dataset;

use crate::error::{LabError, LabResult};

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> LabError {
    LabError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    let cell = cell.trim().replace('\u{2212}', "-");
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Map raw label values onto ±1. `{0, 1}` files are remapped with 0 → −1;
/// anything else must already be ±1. Returns the offending position on failure.
fn normalize_labels(raw: &[f64]) -> Result<Vec<i8>, (usize, f64)> {
    let zero_one = raw.iter().all(|&v| v == 0.0 || v == 1.0) && raw.contains(&0.0);
    raw.iter()
        .enumerate()
        .map(|(i, &v)| match v {
            v if v == 1.0 => Ok(1),
            v if v == -1.0 && !zero_one => Ok(-1),
            v if v == 0.0 && zero_one => Ok(-1),
            v => Err((i, v)),
        })
        .collect()
}

/// Load a comma-separated file whose last column is the label.
///
/// Lines starting with `#` are ignored. With `header` the first record is
/// skipped.
pub fn load_dense_csv(path: impl AsRef<Path>, header: bool) -> LabResult<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => LabError::io(path, io),
            other => LabError::Config(format!("{}: {other:?}", path.display())),
        })?;

    let mut width = None;
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, 0, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let cols = record.len();
        if cols < 2 {
            return Err(parse_error(path, line, 1, "expected at least one feature and a label"));
        }
        match width {
            None => width = Some(cols),
            Some(w) if w != cols => {
                return Err(parse_error(path, line, cols, format!("expected {w} columns, found {cols}")))
            }
            Some(_) => {}
        }
        for (j, cell) in record.iter().enumerate() {
            let v = parse_number(cell)
                .ok_or_else(|| parse_error(path, line, j + 1, format!("not a number: {cell:?}")))?;
            if j + 1 == cols {
                raw_labels.push(v);
            } else {
                features.push(v);
            }
        }
        lines.push(line);
    }
    let Some(width) = width else {
        return Err(parse_error(path, 1, 0, "file contains no examples"));
    };
    let labels = normalize_labels(&raw_labels)
        .map_err(|(i, v)| parse_error(path, lines[i], width, format!("label {v} is not in {{-1, +1}} or {{0, 1}}")))?;
    Ok(Dataset::from_flat(width - 1, features, labels)?)
}

/// Load lines of the form `label idx idx …` with 1-based feature indices.
///
/// Listed features are +1, all others −1, and the dimension is the largest
/// index seen. Repeated indices on a line count once.
pub fn load_sparse_binary(path: impl AsRef<Path>) -> LabResult<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut raw_labels = Vec::new();
    let mut present: Vec<BTreeSet<usize>> = Vec::new();
    let mut lines = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label = parse_number(label_tok)
            .ok_or_else(|| parse_error(path, line_no, 1, format!("not a label: {label_tok:?}")))?;
        let mut set = BTreeSet::new();
        for (j, tok) in tokens.enumerate() {
            let idx: usize = tok
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| parse_error(path, line_no, j + 2, format!("not a 1-based index: {tok:?}")))?;
            set.insert(idx);
        }
        raw_labels.push(label);
        present.push(set);
        lines.push(line_no);
    }
    if raw_labels.is_empty() {
        return Err(parse_error(path, 1, 0, "file contains no examples"));
    }
    let labels = normalize_labels(&raw_labels)
        .map_err(|(i, v)| parse_error(path, lines[i], 1, format!("label {v} is not in {{-1, +1}} or {{0, 1}}")))?;
    let d = present.iter().filter_map(|s| s.last().copied()).max().unwrap_or(0);
    let mut features = vec![-1.0; labels.len() * d];
    for (i, set) in present.iter().enumerate() {
        for &idx in set {
            features[i * d + idx - 1] = 1.0;
        }
    }
    Ok(Dataset::from_flat(d, features, labels)?)
}

/// Write a dataset as dense CSV with a `x1,…,xD,label` header row.
pub fn write_dense_csv<W: Write>(data: &Dataset, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=data.d()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = data.row(i).iter().map(f64::to_string).collect();
        rec.push(data.labels()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
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
    fn dense_basic() {
        let f = file("1,2,+1\n4,5,-1\n0,0,+1\n");
        let d = load_dense_csv(f.path(), false).unwrap();
        assert_eq!((d.n(), d.d()), (3, 2));
        assert_eq!(d.labels(), &[1, -1, 1]);
        assert_eq!(d.row(1), &[4.0, 5.0]);
    }

    #[test]
    fn dense_zero_one_labels() {
        let f = file("a,b,y\n1,2,1\n4,5,0\n");
        let d = load_dense_csv(f.path(), true).unwrap();
        assert_eq!(d.labels(), &[1, -1]);
    }

    #[test]
    fn dense_errors_name_position() {
        let f = file("1,2,1\n4,x,-1\n");
        match load_dense_csv(f.path(), false) {
            Err(LabError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        let f = file("1,2,1\n4,5,2\n");
        match load_dense_csv(f.path(), false) {
            Err(LabError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        let f = file("1,2,1\n4,-1\n");
        assert!(matches!(load_dense_csv(f.path(), false), Err(LabError::Parse { line: 2, .. })));
    }

    #[test]
    fn sparse_examples() {
        let f = file("+1 3 7\n-1\n+1 2 2 2\n");
        let d = load_sparse_binary(f.path()).unwrap();
        assert_eq!((d.n(), d.d()), (3, 7));
        assert_eq!(d.row(0), &[-1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0]);
        assert_eq!(d.row(1), &[-1.0; 7]);
        assert_eq!(d.row(2), &[-1.0, 1.0, -1.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(d.labels(), &[1, -1, 1]);
    }

    #[test]
    fn sparse_errors() {
        let f = file("");
        assert!(matches!(load_sparse_binary(f.path()), Err(LabError::Parse { .. })));
        let f = file("+1 0 2\n");
        assert!(matches!(load_sparse_binary(f.path()), Err(LabError::Parse { line: 1, column: 2, .. })));
        let f = file("+1 1\nspam 2\n");
        assert!(matches!(load_sparse_binary(f.path()), Err(LabError::Parse { line: 2, column: 1, .. })));
        assert!(matches!(load_sparse_binary("/nonexistent/file"), Err(LabError::Io { .. })));
    }

    #[test]
    fn dense_roundtrip() {
        let d = Dataset::from_flat(2, vec![0.5, -1.0, 3.0, 2.25], vec![1, -1]).unwrap();
        let mut buf = Vec::new();
        write_dense_csv(&d, &mut buf).unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap());
        assert_eq!(load_dense_csv(f.path(), true).unwrap(), d);
    }
}
