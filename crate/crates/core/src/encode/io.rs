//! `EEGI` v1 raw tensors and grayscale PNG output.
//!
//! `EEGI` layout, little-endian: magic `EEGI`, version `u16`, rows `u32`,
//! cols `u32`, channels `u16`, then `rows * cols * channels` bytes,
//! row-major with channels last.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::EncodedTensor;
use crate::binio::{read_file, write_file, Reader};
use crate::{Error, Result};

pub const TENSOR_MAGIC: &[u8; 4] = b"EEGI";
pub const TENSOR_VERSION: u16 = 1;

pub fn encode_tensor_bytes(img: &EncodedTensor) -> Result<Vec<u8>> {
    let channels = u16::try_from(img.channels)
        .map_err(|_| Error::invalid(format!("{} channels do not fit EEGI", img.channels)))?;
    let mut out = Vec::with_capacity(16 + img.pixels.len());
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
    out.extend_from_slice(&(img.rows as u32).to_le_bytes());
    out.extend_from_slice(&(img.cols as u32).to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&img.pixels);
    Ok(out)
}

pub fn decode_tensor(bytes: &[u8], path: &Path) -> Result<EncodedTensor> {
    let mut r = Reader::new(bytes, path);
    r.expect_magic(TENSOR_MAGIC)?;
    let version = r.u16()?;
    if version != TENSOR_VERSION {
        return Err(Error::format(path, format!("unsupported EEGI version {version}")));
    }
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let channels = usize::from(r.u16()?);
    let n = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::format(path, "dimension overflow"))?;
    let pixels = r.take(n)?.to_vec();
    r.finish()?;
    EncodedTensor::new(rows, cols, channels, pixels)
}

pub fn write_tensor(img: &EncodedTensor, path: &Path) -> Result<()> {
    write_file(path, &encode_tensor_bytes(img)?)
}

pub fn read_tensor(path: &Path) -> Result<EncodedTensor> {
    decode_tensor(&read_file(path)?, path)
}

/// Writes a single-channel tensor as an 8-bit grayscale PNG.
pub fn write_png(img: &EncodedTensor, path: &Path) -> Result<()> {
    if img.channels != 1 {
        return Err(Error::invalid(format!(
            "PNG output is grayscale only; tensor has {} channels, write each channel \
             separately with EncodedTensor::channel",
            img.channels
        )));
    }
    let width = u32::try_from(img.cols).map_err(|_| Error::invalid("image too wide"))?;
    let height = u32::try_from(img.rows).map_err(|_| Error::invalid("image too tall"))?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width, height);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let png_err = |e: png::EncodingError| Error::format(path, e.to_string());
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(&img.pixels).map_err(png_err)?;
    writer.finish().map_err(png_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn png_is_grayscale_and_sized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trial.png");
        let pixels: Vec<u8> = (0..512 * 440).map(|i| (i % 251) as u8).collect();
        let img = EncodedTensor::new(512, 440, 1, pixels.clone()).unwrap();
        write_png(&img, &path).unwrap();

        let decoder = png::Decoder::new(std::io::BufReader::new(File::open(&path).unwrap()));
        let mut reader = decoder.read_info().unwrap();
        let info = reader.info();
        assert_eq!((info.width, info.height), (440, 512));
        assert_eq!(info.color_type, png::ColorType::Grayscale);
        assert_eq!(info.bit_depth, png::BitDepth::Eight);
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        reader.next_frame(&mut buf).unwrap();
        assert_eq!(buf, pixels);
    }

    #[test]
    fn png_rejects_multichannel() {
        let dir = tempfile::tempdir().unwrap();
        let img = EncodedTensor::new(2, 2, 6, vec![0; 24]).unwrap();
        let err = write_png(&img, &dir.path().join("x.png")).unwrap_err();
        assert!(err.to_string().contains("each channel"));
    }

    #[test]
    fn bad_magic_names_file() {
        let err = decode_tensor(b"EEGT\x01\x00", Path::new("img.eegi")).unwrap_err();
        assert!(err.to_string().contains("img.eegi"));
    }

    proptest! {
        #[test]
        fn tensor_round_trip(rows in 1usize..9, cols in 1usize..9, ch in 1usize..7, seed in any::<u8>()) {
            let pixels = (0..rows * cols * ch).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)).collect();
            let img = EncodedTensor::new(rows, cols, ch, pixels).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("t.eegi");
            write_tensor(&img, &path).unwrap();
            prop_assert_eq!(read_tensor(&path).unwrap(), img);
        }
    }
}
