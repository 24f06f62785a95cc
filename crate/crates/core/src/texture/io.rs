//! Feature matrices on disk: CSV with a `sample_id,label,f0,...` header, or
//! `EEGF` v1 binary (magic `EEGF`, n `u32`, d `u32`, then per row
//! sample_id `u32`, label `u16` and d little-endian `f32`).

use std::path::Path;

use ndarray::Array2;

use super::FeatureMatrix;
use crate::binio::{read_file, write_file, Reader};
use crate::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"EEGF";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFormat {
    Csv,
    Binary,
}

impl FeatureFormat {
    /// `.eegf` selects binary, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("eegf") => FeatureFormat::Binary,
            _ => FeatureFormat::Csv,
        }
    }
}

/// Reads either format, detected from the leading magic bytes.
pub fn import_features(path: &Path) -> Result<FeatureMatrix> {
    let bytes = read_file(path)?;
    if bytes.starts_with(FEATURE_MAGIC) {
        decode_binary(&bytes, path)
    } else {
        decode_csv(&bytes, path)
    }
}

pub fn export_features(m: &FeatureMatrix, path: &Path, format: FeatureFormat) -> Result<()> {
    let bytes = match format {
        FeatureFormat::Csv => encode_csv(m, path)?,
        FeatureFormat::Binary => encode_binary(m)?,
    };
    write_file(path, &bytes)
}

fn decode_csv(bytes: &[u8], path: &Path) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let csv_err = |e: csv::Error| Error::format(path, e.to_string());
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.len() < 2 || &header[0] != "sample_id" || &header[1] != "label" {
        return Err(Error::format(path, "header must start with sample_id,label"));
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let d = names.len();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != d + 2 {
            return Err(Error::format(
                path,
                format!("row {row} has {} fields, header has {}", record.len(), d + 2),
            ));
        }
        let field_err = |what: &str, text: &str| {
            Error::format(path, format!("row {row}: cannot parse {what} {text:?}"))
        };
        ids.push(record[0].parse::<u32>().map_err(|_| field_err("sample_id", &record[0]))?);
        labels.push(record[1].parse::<u16>().map_err(|_| field_err("label", &record[1]))?);
        for (column, text) in record.iter().skip(2).enumerate() {
            let v: f64 = text.parse().map_err(|_| field_err("feature", text))?;
            if !v.is_finite() {
                return Err(Error::format(
                    path,
                    format!("row {row}, column {}: non-finite value {text}", names[column]),
                ));
            }
            values.push(v);
        }
    }
    let data = Array2::from_shape_vec((ids.len(), d), values)
        .map_err(|e| Error::format(path, e.to_string()))?;
    FeatureMatrix::new(data, ids, labels, names)
}

fn encode_csv(m: &FeatureMatrix, path: &Path) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::format(path, e.to_string());
    let mut header = vec!["sample_id".to_string(), "label".to_string()];
    header.extend(FeatureMatrix::default_names(m.n_features()));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..m.n_rows() {
        let mut rec = Vec::with_capacity(m.n_features() + 2);
        rec.push(m.sample_ids()[i].to_string());
        rec.push(m.labels()[i].to_string());
        rec.extend(m.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::format(path, e.to_string()))
}

fn encode_binary(m: &FeatureMatrix) -> Result<Vec<u8>> {
    let n = u32::try_from(m.n_rows()).map_err(|_| Error::invalid("too many rows for EEGF"))?;
    let d = u32::try_from(m.n_features()).map_err(|_| Error::invalid("too many features for EEGF"))?;
    let mut out = Vec::with_capacity(12 + m.n_rows() * (6 + 4 * m.n_features()));
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&d.to_le_bytes());
    for i in 0..m.n_rows() {
        out.extend_from_slice(&m.sample_ids()[i].to_le_bytes());
        out.extend_from_slice(&m.labels()[i].to_le_bytes());
        for &v in m.row(i) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

fn decode_binary(bytes: &[u8], path: &Path) -> Result<FeatureMatrix> {
    let mut r = Reader::new(bytes, path);
    r.expect_magic(FEATURE_MAGIC)?;
    let n = r.u32()? as usize;
    let d = r.u32()? as usize;
    let row_len = d
        .checked_mul(4)
        .and_then(|b| b.checked_add(6))
        .ok_or_else(|| Error::format(path, "dimension overflow"))?;
    if n.checked_mul(row_len) != Some(bytes.len() - 12) {
        return Err(Error::format(
            path,
            format!("header declares {n} rows of {d} features but payload is {} bytes", bytes.len() - 12),
        ));
    }
    let mut ids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * d);
    for row in 0..n {
        ids.push(r.u32()?);
        labels.push(r.u16()?);
        for column in 0..d {
            let v = f64::from(r.f32()?);
            if !v.is_finite() {
                return Err(Error::format(path, format!("row {row}, column {column}: non-finite value")));
            }
            values.push(v);
        }
    }
    r.finish()?;
    let data = Array2::from_shape_vec((n, d), values).map_err(|e| Error::format(path, e.to_string()))?;
    FeatureMatrix::new(data, ids, labels, FeatureMatrix::default_names(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(n: usize, d: usize) -> FeatureMatrix {
        let data = Array2::from_shape_fn((n, d), |(i, j)| (i as f64 - 1.5) * 0.37 + j as f64 * 1e-3);
        FeatureMatrix::new(
            data,
            (0..n as u32).map(|i| i * 3).collect(),
            (0..n as u16).map(|i| i % 2).collect(),
            FeatureMatrix::default_names(d),
        )
        .unwrap()
    }

    #[test]
    fn csv_four_by_128() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.csv");
        export_features(&sample(4, 128), &path, FeatureFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("sample_id,label,f0,f1,"));
        let m = import_features(&path).unwrap();
        assert_eq!((m.n_rows(), m.n_features()), (4, 128));
        assert_eq!(m, sample(4, 128));
    }

    #[test]
    fn csv_nan_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "sample_id,label,f0,f1\n0,0,1.0,2.0\n1,1,NaN,3\n").unwrap();
        let err = import_features(&path).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
    }

    #[test]
    fn csv_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "sample_id,label,f0,f1\n0,0,1.0,2.0\n1,1,3\n").unwrap();
        assert!(import_features(&path).is_err());
        std::fs::write(&path, "id,label,f0\n0,0,1.0\n").unwrap();
        assert!(import_features(&path).is_err());
    }

    #[test]
    fn binary_count_mismatch() {
        let m = sample(3, 2);
        let mut bytes = encode_binary(&m).unwrap();
        bytes.truncate(bytes.len() - 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.eegf");
        std::fs::write(&path, &bytes).unwrap();
        assert!(import_features(&path).is_err());
    }

    proptest! {
        #[test]
        fn binary_round_trips_within_f32(n in 0usize..8, d in 0usize..6, scale in -1e3f64..1e3) {
            let data = Array2::from_shape_fn((n, d), |(i, j)| scale * (i as f64 + 1.0) / (j as f64 + 3.0));
            let m = FeatureMatrix::new(data, (0..n as u32).collect(), vec![2; n], FeatureMatrix::default_names(d)).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.eegf");
            prop_assert_eq!(FeatureFormat::from_path(&path), FeatureFormat::Binary);
            export_features(&m, &path, FeatureFormat::Binary).unwrap();
            let back = import_features(&path).unwrap();
            prop_assert_eq!(back.sample_ids(), m.sample_ids());
            prop_assert_eq!(back.labels(), m.labels());
            for (a, b) in back.data().iter().zip(m.data().iter()) {
                prop_assert!((a - b).abs() <= b.abs() * f64::from(f32::EPSILON));
            }
        }
    }
}
