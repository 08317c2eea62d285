//! Binarized datasets: construction, image and text binarization, IDX
//! ingestion and a checksummed on-disk format.
//!
//! Only the `o` plain features are stored. Negated literals are read as
//! `¬x_k` on demand by the clause evaluators.

mod binarize;
mod idx;
pub mod synthetic;
mod text;

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub use binarize::{binarize_images, BinarizeSpec, MAX_BITS};
pub use idx::{
    load_idx_images, load_idx_labels, parse_idx_images, parse_idx_labels, write_idx_images,
    write_idx_labels, IdxImages, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
pub use text::{tokenize, vectorize_text, Vocabulary};

use crate::error::{Error, Result};

/// Where a dataset came from and how it was binarized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Images { source: String, thresholds: Vec<u8> },
    Text { source: String, vocabulary: usize },
    Synthetic { name: String },
}

impl Provenance {
    pub fn source(&self) -> &str {
        match self {
            Provenance::Images { source, .. } | Provenance::Text { source, .. } => source,
            Provenance::Synthetic { name } => name,
        }
    }

    fn check_width(&self, features: usize) -> Result<()> {
        match self {
            Provenance::Images { thresholds, .. } => {
                let bits = thresholds.len();
                if bits == 0 || !features.is_multiple_of(bits) {
                    return Err(Error::Dimension(format!(
                        "{features} features is not a multiple of {bits} bits per pixel"
                    )));
                }
            }
            Provenance::Text { vocabulary, .. } => {
                if *vocabulary != features {
                    return Err(Error::Dimension(format!(
                        "{features} features but vocabulary of {vocabulary}"
                    )));
                }
            }
            Provenance::Synthetic { .. } => {}
        }
        Ok(())
    }
}

/// Bit matrix of examples by features, with one label per example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolDataset {
    features: usize,
    classes: usize,
    words_per_row: usize,
    words: Vec<u64>,
    labels: Vec<u32>,
    provenance: Provenance,
}

impl BoolDataset {
    pub fn new(features: usize, classes: usize, provenance: Provenance) -> Result<Self> {
        if features == 0 {
            return Err(Error::Dimension(
                "dataset needs at least one feature".into(),
            ));
        }
        if classes == 0 {
            return Err(Error::Dimension("dataset needs at least one class".into()));
        }
        provenance.check_width(features)?;
        Ok(Self {
            features,
            classes,
            words_per_row: features.div_ceil(64),
            words: Vec::new(),
            labels: Vec::new(),
            provenance,
        })
    }

    pub fn from_rows<R: AsRef<[u8]>>(
        rows: &[R],
        labels: &[usize],
        features: usize,
        classes: usize,
        provenance: Provenance,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut ds = Self::new(features, classes, provenance)?;
        for (row, &label) in rows.iter().zip(labels) {
            ds.push(row.as_ref(), label)?;
        }
        Ok(ds)
    }

    /// Appends one example; any non-zero byte counts as a set bit.
    pub fn push(&mut self, row: &[u8], label: usize) -> Result<()> {
        if row.len() != self.features {
            return Err(Error::Shape {
                expected: self.features,
                actual: row.len(),
            });
        }
        if label >= self.classes {
            return Err(Error::InvalidLabel {
                label,
                classes: self.classes,
            });
        }
        let start = self.words.len();
        self.words.resize(start + self.words_per_row, 0);
        for (k, &v) in row.iter().enumerate() {
            if v != 0 {
                self.words[start + k / 64] |= 1 << (k % 64);
            }
        }
        self.labels.push(label as u32);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().map(|&l| l as usize)
    }

    pub fn bit(&self, i: usize, k: usize) -> bool {
        let w = self.words[i * self.words_per_row + k / 64];
        (w >> (k % 64)) & 1 == 1
    }

    /// Unpacks row `i` into `out` as 0/1 bytes.
    pub fn row_into(&self, i: usize, out: &mut [u8]) {
        let words = &self.words[i * self.words_per_row..(i + 1) * self.words_per_row];
        for (k, slot) in out.iter_mut().enumerate().take(self.features) {
            *slot = ((words[k / 64] >> (k % 64)) & 1) as u8;
        }
    }

    pub fn row(&self, i: usize) -> Vec<u8> {
        let mut out = vec![0; self.features];
        self.row_into(i, &mut out);
        out
    }

    /// All rows unpacked into one `len × o` byte matrix.
    pub fn to_dense(&self) -> Vec<u8> {
        let mut out = vec![0; self.len() * self.features];
        for (i, chunk) in out.chunks_mut(self.features).enumerate() {
            self.row_into(i, chunk);
        }
        out
    }
}

pub const DATASET_MAGIC: u32 = u32::from_le_bytes(*b"TMDS");
pub const DATASET_VERSION: u32 = 1;

const KIND_IMAGES: u8 = 1;
const KIND_TEXT: u8 = 2;
const KIND_SYNTHETIC: u8 = 3;

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

/// Serializes a dataset. Layout, little-endian:
///
/// ```text
/// magic "TMDS" | version u32 | examples u64 | o u32 | m u32
/// | provenance | labels u32 × examples | packed rows u64 × examples·⌈o/64⌉
/// | crc32 of all preceding bytes
/// ```
pub fn encode_dataset(ds: &BoolDataset) -> Vec<u8> {
    let mut buf = Vec::with_capacity(64 + ds.labels.len() * 4 + ds.words.len() * 8);
    buf.extend_from_slice(&DATASET_MAGIC.to_le_bytes());
    buf.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    buf.extend_from_slice(&(ds.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(ds.features as u32).to_le_bytes());
    buf.extend_from_slice(&(ds.classes as u32).to_le_bytes());
    match &ds.provenance {
        Provenance::Images { source, thresholds } => {
            buf.push(KIND_IMAGES);
            put_str(&mut buf, source);
            buf.push(thresholds.len() as u8);
            buf.extend_from_slice(thresholds);
        }
        Provenance::Text { source, vocabulary } => {
            buf.push(KIND_TEXT);
            put_str(&mut buf, source);
            buf.extend_from_slice(&(*vocabulary as u32).to_le_bytes());
        }
        Provenance::Synthetic { name } => {
            buf.push(KIND_SYNTHETIC);
            put_str(&mut buf, name);
        }
    }
    for &l in &ds.labels {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    for &w in &ds.words {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Cursor<'a> {
    data: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| Error::Truncated(format!("dataset ends inside {what}")))?;
        let out = &self.data[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let bytes = self.take(len, what)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::Format(format!("{what} is not valid UTF-8")))
    }
}

pub fn decode_dataset(data: &[u8]) -> Result<BoolDataset> {
    let mut cur = Cursor { data, at: 0 };
    let magic = cur.u32("magic")?;
    if magic != DATASET_MAGIC {
        return Err(Error::BadMagic {
            expected: DATASET_MAGIC,
            found: magic,
        });
    }
    let version = cur.u32("version")?;
    if version != DATASET_VERSION {
        return Err(Error::Version {
            expected: DATASET_VERSION,
            found: version,
        });
    }
    if data.len() < 12 {
        return Err(Error::Truncated("dataset shorter than its checksum".into()));
    }
    let (body, tail) = data.split_at(data.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    let mut cur = Cursor { data: body, at: 8 };
    let examples = usize::try_from(cur.u64("example count")?)
        .map_err(|_| Error::Dimension("example count overflows".into()))?;
    let features = cur.u32("feature count")? as usize;
    let classes = cur.u32("class count")? as usize;
    let provenance = match cur.u8("provenance kind")? {
        KIND_IMAGES => {
            let source = cur.string("source")?;
            let bits = cur.u8("bit count")? as usize;
            let thresholds = cur.take(bits, "thresholds")?.to_vec();
            BinarizeSpec::new(thresholds.clone())?;
            Provenance::Images { source, thresholds }
        }
        KIND_TEXT => {
            let source = cur.string("source")?;
            let vocabulary = cur.u32("vocabulary size")? as usize;
            Provenance::Text { source, vocabulary }
        }
        KIND_SYNTHETIC => Provenance::Synthetic {
            name: cur.string("name")?,
        },
        other => return Err(Error::Format(format!("unknown provenance kind {other}"))),
    };
    let mut ds = BoolDataset::new(features, classes, provenance)?;
    let label_bytes = cur.take(
        examples
            .checked_mul(4)
            .ok_or_else(|| Error::Dimension("label block overflows".into()))?,
        "labels",
    )?;
    ds.labels = label_bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(&bad) = ds.labels.iter().find(|&&l| l as usize >= classes) {
        return Err(Error::InvalidLabel {
            label: bad as usize,
            classes,
        });
    }
    let words = examples
        .checked_mul(ds.words_per_row)
        .and_then(|w| w.checked_mul(8))
        .ok_or_else(|| Error::Dimension("row block overflows".into()))?;
    ds.words = cur
        .take(words, "rows")?
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if cur.at != body.len() {
        return Err(Error::Format("trailing bytes after dataset rows".into()));
    }
    let spare = ds.words_per_row * 64 - features;
    if spare > 0 {
        let mask = !0u64 << (64 - spare);
        let last = ds.words_per_row - 1;
        if ds
            .words
            .chunks(ds.words_per_row)
            .any(|r| r[last] & mask != 0)
        {
            return Err(Error::Format(
                "padding bits set beyond feature width".into(),
            ));
        }
    }
    Ok(ds)
}

pub fn write_dataset<W: Write>(ds: &BoolDataset, mut w: W) -> Result<()> {
    w.write_all(&encode_dataset(ds))?;
    w.flush()?;
    Ok(())
}

pub fn read_dataset<R: Read>(mut r: R) -> Result<BoolDataset> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    decode_dataset(&data)
}

pub fn save_dataset(ds: &BoolDataset, path: impl AsRef<Path>) -> Result<()> {
    write_dataset(ds, BufWriter::new(File::create(path)?))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<BoolDataset> {
    read_dataset(BufReader::new(File::open(path)?))
}
