//! The `EEGT` v1 trial container.
//!
//! Layout, all little-endian: magic `EEGT`, version `u16`, n_channels `u32`,
//! n_samples `u32`, sample_rate `f32`, subject_id `u16`, stimulus_id `u32`,
//! class_label `u16`, then `n_channels * n_samples` `f32` values channel-major.

use std::path::Path;

use ndarray::Array2;

use super::Trial;
use crate::binio::{read_file, write_file, Reader};
use crate::{Error, Result};

pub const BLOB_MAGIC: &[u8; 4] = b"EEGT";
pub const BLOB_VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 4 + 4 + 4 + 2 + 4 + 2;

/// Serialises a trial. Samples are narrowed to `f32`.
pub fn encode_trial_blob(t: &Trial) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * t.data.len());
    out.extend_from_slice(BLOB_MAGIC);
    out.extend_from_slice(&BLOB_VERSION.to_le_bytes());
    out.extend_from_slice(&(t.n_channels() as u32).to_le_bytes());
    out.extend_from_slice(&(t.n_samples() as u32).to_le_bytes());
    out.extend_from_slice(&t.sample_rate.to_le_bytes());
    out.extend_from_slice(&t.subject_id.to_le_bytes());
    out.extend_from_slice(&t.stimulus_id.to_le_bytes());
    out.extend_from_slice(&t.class_label.to_le_bytes());
    // standard layout iterates channel-major
    for &v in t.data.iter() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_trial(bytes: &[u8], path: &Path) -> Result<Trial> {
    let mut r = Reader::new(bytes, path);
    r.expect_magic(BLOB_MAGIC)?;
    let version = r.u16()?;
    if version != BLOB_VERSION {
        return Err(Error::format(path, format!("unsupported EEGT version {version}")));
    }
    let n_channels = r.u32()? as usize;
    let n_samples = r.u32()? as usize;
    let sample_rate = r.f32()?;
    let subject_id = r.u16()?;
    let stimulus_id = r.u32()?;
    let class_label = r.u16()?;
    let count = n_channels
        .checked_mul(n_samples)
        .ok_or_else(|| Error::format(path, "dimension overflow"))?;
    let raw = r.take(count * 4)?;
    r.finish()?;
    let values = raw
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes(b.try_into().unwrap())))
        .collect();
    let data = Array2::from_shape_vec((n_channels, n_samples), values)
        .map_err(|e| Error::format(path, e.to_string()))?;
    Ok(Trial {
        subject_id,
        stimulus_id,
        class_label,
        sample_rate,
        data,
    })
}

pub fn read_trial(path: &Path) -> Result<Trial> {
    decode_trial(&read_file(path)?, path)
}

pub fn write_trial(t: &Trial, path: &Path) -> Result<()> {
    write_file(path, &encode_trial_blob(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_fixed() {
        let t = Trial {
            subject_id: 3,
            stimulus_id: 0x0102_0304,
            class_label: 7,
            sample_rate: 1000.0,
            data: Array2::from_shape_vec((2, 3), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.5]).unwrap(),
        };
        let b = encode_trial_blob(&t);
        assert_eq!(b.len(), HEADER_LEN + 24);
        assert_eq!(&b[..4], b"EEGT");
        assert_eq!(&b[4..6], &[1, 0]);
        assert_eq!(&b[6..10], &[2, 0, 0, 0]);
        assert_eq!(&b[10..14], &[3, 0, 0, 0]);
        assert_eq!(&b[14..18], &1000.0f32.to_le_bytes());
        assert_eq!(&b[18..20], &[3, 0]);
        assert_eq!(&b[20..24], &[4, 3, 2, 1]);
        assert_eq!(&b[24..26], &[7, 0]);
        // channel 1, sample 2 is the last value
        assert_eq!(&b[b.len() - 4..], &5.5f32.to_le_bytes());
        assert_eq!(decode_trial(&b, Path::new("mem")).unwrap(), t);
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let t = Trial {
            subject_id: 1,
            stimulus_id: 0,
            class_label: 0,
            sample_rate: 1000.0,
            data: Array2::zeros((2, 2)),
        };
        let b = encode_trial_blob(&t);
        let err = decode_trial(&b[..b.len() - 1], Path::new("short.eegt")).unwrap_err();
        assert!(err.to_string().contains("short.eegt"));
    }
}
