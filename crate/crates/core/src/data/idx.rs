// IDX containers as used by MNIST and Fashion-MNIST. Gzip-compressed files
// are detected by their header and decompressed transparently.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw greyscale images, row-major per image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.pixels_per_image();
        &self.pixels[i * n..(i + 1) * n]
    }
}

fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::Format(format!("gzip stream: {e}")))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(data: &[u8], at: usize, what: &str) -> Result<u32> {
    data.get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Truncated(format!("IDX header ends before {what}")))
}

fn check_magic(data: &[u8], expected: u32) -> Result<()> {
    let found = be_u32(data, 0, "magic")?;
    if found != expected {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

fn payload(data: &[u8], header: usize, len: usize) -> Result<&[u8]> {
    let body = &data[header..];
    if body.len() < len {
        return Err(Error::Truncated(format!(
            "IDX payload has {} bytes, header promises {len}",
            body.len()
        )));
    }
    if body.len() > len {
        return Err(Error::Dimension(format!(
            "IDX payload has {} bytes, header promises {len}",
            body.len()
        )));
    }
    Ok(body)
}

pub fn parse_idx_images(data: &[u8]) -> Result<IdxImages> {
    check_magic(data, IDX_IMAGES_MAGIC)?;
    let count = be_u32(data, 4, "image count")? as usize;
    let rows = be_u32(data, 8, "row count")? as usize;
    let cols = be_u32(data, 12, "column count")? as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!("image size {rows}x{cols}")));
    }
    let len = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::Dimension("image dimensions overflow".into()))?;
    let pixels = payload(data, 16, len)?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(data: &[u8]) -> Result<Vec<u8>> {
    check_magic(data, IDX_LABELS_MAGIC)?;
    let count = be_u32(data, 4, "label count")? as usize;
    Ok(payload(data, 8, count)?.to_vec())
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    parse_idx_images(&read_maybe_gzip(path.as_ref())?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&read_maybe_gzip(path.as_ref())?)
}

pub fn write_idx_images<W: Write>(images: &IdxImages, mut w: W) -> Result<()> {
    if images.pixels.len() != images.count * images.rows * images.cols {
        return Err(Error::Dimension(
            "pixel buffer does not match header".into(),
        ));
    }
    for v in [
        IDX_IMAGES_MAGIC,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        w.write_all(&v.to_be_bytes())?;
    }
    w.write_all(&images.pixels)?;
    Ok(())
}

pub fn write_idx_labels<W: Write>(labels: &[u8], mut w: W) -> Result<()> {
    w.write_all(&IDX_LABELS_MAGIC.to_be_bytes())?;
    w.write_all(&(labels.len() as u32).to_be_bytes())?;
    w.write_all(labels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use flate2::write::GzEncoder;
    use flate2::Compression;

    use super::*;

    fn fixture() -> IdxImages {
        IdxImages {
            count: 4,
            rows: 28,
            cols: 28,
            pixels: (0..4 * 784).map(|i| (i * 7 % 256) as u8).collect(),
        }
    }

    #[test]
    fn parses_hand_built_fixture() {
        let mut buf = Vec::new();
        write_idx_images(&fixture(), &mut buf).unwrap();
        assert_eq!(&buf[..4], &[0, 0, 8, 3]);
        let parsed = parse_idx_images(&buf).unwrap();
        assert_eq!(parsed.count, 4);
        assert_eq!(parsed.pixels_per_image(), 784);
        assert_eq!(parsed, fixture());
    }

    #[test]
    fn gzip_files_are_transparent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("images.idx3-ubyte.gz");
        let mut enc = GzEncoder::new(Vec::new(), Compression::fast());
        write_idx_images(&fixture(), &mut enc).unwrap();
        fs::write(&path, enc.finish().unwrap()).unwrap();
        assert_eq!(load_idx_images(&path).unwrap(), fixture());
    }

    #[test]
    fn distinct_errors() {
        let mut images = Vec::new();
        write_idx_images(&fixture(), &mut images).unwrap();
        let mut labels = Vec::new();
        write_idx_labels(&[1, 2, 3, 4], &mut labels).unwrap();

        assert!(matches!(
            parse_idx_images(&labels),
            Err(Error::BadMagic { .. })
        ));
        assert!(matches!(
            parse_idx_labels(&images),
            Err(Error::BadMagic { .. })
        ));
        assert!(matches!(
            parse_idx_images(&images[..images.len() - 1]),
            Err(Error::Truncated(_))
        ));
        assert!(matches!(
            parse_idx_images(&images[..10]),
            Err(Error::Truncated(_))
        ));
        let mut long = labels.clone();
        long.push(9);
        assert!(matches!(parse_idx_labels(&long), Err(Error::Dimension(_))));
        assert_eq!(parse_idx_labels(&labels).unwrap(), vec![1, 2, 3, 4]);
    }
}
