//! LIBSVM text format: `label idx:val idx:val ...`, one sample per line,
//! 1-based strictly increasing feature indices. Blank lines and text after
//! `#` are ignored. Gzip input is detected by its magic bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use super::SparseDataset;
use crate::error::{Error, Result};

/// Parses a LIBSVM stream. With `expected_d` every index must be
/// `<= expected_d`; without it `d` is the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R, expected_d: Option<usize>) -> Result<SparseDataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let err = |message: String| Error::Parse { line: lineno, message };
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line");
        let label: f64 = label_tok.parse().map_err(|_| err(format!("malformed label `{label_tok}`")))?;
        let mut row = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (i, v) = tok.split_once(':').ok_or_else(|| err(format!("malformed feature `{tok}`")))?;
            let idx: usize = i.parse().map_err(|_| err(format!("malformed index in `{tok}`")))?;
            let val: f64 = v.parse().map_err(|_| err(format!("malformed value in `{tok}`")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based; found 0".into()));
            }
            if idx <= prev {
                return Err(err(format!("non-increasing feature index {idx} after {prev}")));
            }
            if let Some(d) = expected_d {
                if idx > d {
                    return Err(err(format!("feature index {idx} exceeds dimension {d}")));
                }
            }
            prev = idx;
            row.push((idx - 1, val));
        }
        max_index = max_index.max(prev);
        rows.push(row);
        labels.push(label);
    }
    SparseDataset::from_rows(expected_d.unwrap_or(max_index), rows, labels)
}

pub fn parse_libsvm_str(text: &str, expected_d: Option<usize>) -> Result<SparseDataset> {
    parse_libsvm(text.as_bytes(), expected_d)
}

/// Reads a file, transparently decompressing gzip.
pub fn load_libsvm(path: &Path, expected_d: Option<usize>) -> Result<SparseDataset> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut file = BufReader::new(File::open(path)?);
    let gz = file.fill_buf()?.starts_with(&[0x1f, 0x8b]);
    if gz {
        parse_libsvm(BufReader::new(GzDecoder::new(file)), expected_d)
    } else {
        parse_libsvm(file, expected_d)
    }
}

/// Loads a training file and its companion test file, padding both to a
/// common dimension (at least `expected_d` when given).
pub fn load_train_test(train: &Path, test: &Path, expected_d: Option<usize>) -> Result<(SparseDataset, SparseDataset)> {
    let (a, b) = std::thread::scope(|s| {
        let h = s.spawn(|| load_libsvm(test, expected_d));
        let a = load_libsvm(train, expected_d);
        (a, h.join().expect("parser thread panicked"))
    });
    let (a, b) = (a?, b?);
    let d = a.d().max(b.d());
    Ok((a.with_dimension(d)?, b.with_dimension(d)?))
}

/// Writes the dataset in LIBSVM format with 1-based indices. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_libsvm<W: Write>(ds: &SparseDataset, mut out: W) -> Result<()> {
    for i in 0..ds.n() {
        write!(out, "{}", ds.labels()[i])?;
        let (idx, val) = ds.row(i);
        for (j, v) in idx.iter().zip(val) {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_line() {
        let ds = parse_libsvm_str("1 3:0.5 7:1.2\n", None).unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.d(), 7);
        assert_eq!(ds.labels(), &[1.0]);
        assert_eq!(ds.row(0), (&[2usize, 6][..], &[0.5, 1.2][..]));
    }

    #[test]
    fn empty_feature_list() {
        let ds = parse_libsvm_str("0\n", Some(4)).unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.labels(), &[0.0]);
        assert_eq!(ds.dense_row(0), vec![0.0; 4]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_libsvm_str("1 1:1\n0 2:x\n", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_libsvm_str("1 1:1\n\n1 4:1 2:1\n", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_libsvm_str("1 0:1\n", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_libsvm_str("1 9:1\n", Some(8)).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(parse_libsvm_str("abc 1:1\n", None).is_err());
        assert!(parse_libsvm_str("1 11\n", None).is_err());
    }

    #[test]
    fn round_trip() {
        let text = "+1 1:0.25 5:-3 10:1e-7\n-1\n0 2:1\n";
        let ds = parse_libsvm_str(text, None).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&ds, &mut buf).unwrap();
        let back = parse_libsvm_str(std::str::from_utf8(&buf).unwrap(), Some(ds.d())).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn gzip_is_transparent() {
        use flate2::write::GzEncoder;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::default());
        enc.write_all(b"1 2:3\n0 1:1\n").unwrap();
        enc.finish().unwrap();
        let ds = load_libsvm(&path, None).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.d(), 2);
        assert!(matches!(load_libsvm(&dir.path().join("missing"), None), Err(Error::MissingFile(_))));
    }
}
