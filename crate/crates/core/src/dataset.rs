//! MNIST ingestion from IDX files.
//!
//! IDX layout: big-endian u32 magic, one big-endian u32 per dimension, then
//! the raw u8 payload. Images use magic 0x00000803 with dims
//! `[count, 28, 28]`; labels use 0x00000801 with dims `[count]`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{Image, MNIST_SIDE};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;
pub const NUM_CLASSES: usize = 10;

pub const TRAIN_IMAGES_FILE: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS_FILE: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES_FILE: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS_FILE: &str = "t10k-labels-idx1-ubyte";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn canonical_len(self) -> usize {
        match self {
            Split::Train => 60_000,
            Split::Test => 10_000,
        }
    }

    pub fn file_names(self) -> (&'static str, &'static str) {
        match self {
            Split::Train => (TRAIN_IMAGES_FILE, TRAIN_LABELS_FILE),
            Split::Test => (TEST_IMAGES_FILE, TEST_LABELS_FILE),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

fn read_u32(bytes: &[u8], offset: usize, what: &'static str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Truncated {
            what,
            expected: offset + 4,
            found: bytes.len(),
        })
}

fn check_payload(bytes: &[u8], header: usize, payload: usize, what: &'static str) -> Result<()> {
    let expected = header + payload;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            what,
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!(
            "{what}: {} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    Ok(())
}

/// Parses an IDX3 image file held in memory.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Image>> {
    const WHAT: &str = "IDX image file";
    let magic = read_u32(bytes, 0, WHAT)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "bad image magic 0x{magic:08x}, expected 0x{IMAGES_MAGIC:08x}"
        )));
    }
    let count = read_u32(bytes, 4, WHAT)? as usize;
    let rows = read_u32(bytes, 8, WHAT)? as usize;
    let cols = read_u32(bytes, 12, WHAT)? as usize;
    if rows != MNIST_SIDE || cols != MNIST_SIDE {
        return Err(Error::Format(format!(
            "image dimensions {rows}x{cols}, expected {MNIST_SIDE}x{MNIST_SIDE}"
        )));
    }
    let px = rows * cols;
    check_payload(bytes, 16, count * px, WHAT)?;
    bytes[16..]
        .chunks_exact(px)
        .map(|chunk| Image::from_pixels(rows, cols, chunk.to_vec()))
        .collect()
}

/// Parses an IDX1 label file held in memory.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    const WHAT: &str = "IDX label file";
    let magic = read_u32(bytes, 0, WHAT)?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format(format!(
            "bad label magic 0x{magic:08x}, expected 0x{LABELS_MAGIC:08x}"
        )));
    }
    let count = read_u32(bytes, 4, WHAT)? as usize;
    check_payload(bytes, 8, count, WHAT)?;
    let labels = bytes[8..].to_vec();
    if let Some((i, l)) = labels
        .iter()
        .enumerate()
        .find(|(_, &l)| l as usize >= NUM_CLASSES)
    {
        return Err(Error::Format(format!(
            "label {l} at index {i} is not a digit"
        )));
    }
    Ok(labels)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Vec<Image>> {
    let path = path.as_ref();
    parse_idx_images(&read_file(path)?).map_err(|e| with_path(e, path))
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    parse_idx_labels(&read_file(path)?).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    }
}

pub fn encode_idx_images(images: &[Image]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(16 + images.len() * MNIST_SIDE * MNIST_SIDE);
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(MNIST_SIDE as u32).to_be_bytes());
    out.extend_from_slice(&(MNIST_SIDE as u32).to_be_bytes());
    for img in images {
        if img.rows() != MNIST_SIDE || img.cols() != MNIST_SIDE {
            return Err(Error::InvalidArgument(format!(
                "IDX export needs 28x28 images, got {}x{}",
                img.rows(),
                img.cols()
            )));
        }
        out.extend_from_slice(img.as_slice());
    }
    Ok(out)
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Labelled images of one split. Immutable once built.
#[derive(Debug, Clone)]
pub struct Dataset {
    images: Vec<Image>,
    labels: Vec<u8>,
    split: Split,
}

impl Dataset {
    pub fn new(images: Vec<Image>, labels: Vec<u8>, split: Split) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::Format(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::Format(format!("label {l} is not a digit")));
        }
        Ok(Self {
            images,
            labels,
            split,
        })
    }

    pub fn load(images: impl AsRef<Path>, labels: impl AsRef<Path>, split: Split) -> Result<Self> {
        Self::new(load_idx_images(images)?, load_idx_labels(labels)?, split)
    }

    /// Loads one split from a directory holding the canonical MNIST files
    /// and checks the canonical item count.
    pub fn load_mnist(dir: impl AsRef<Path>, split: Split) -> Result<Self> {
        let paths = MnistPaths::new(dir.as_ref(), split);
        let ds = Self::load(&paths.images, &paths.labels, split)?;
        if ds.len() != split.canonical_len() {
            return Err(Error::Format(format!(
                "{} split in {} has {} items, expected {}",
                split,
                dir.as_ref().display(),
                ds.len(),
                split.canonical_len()
            )));
        }
        Ok(ds)
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Image, u8)> + '_ {
        self.images.iter().zip(self.labels.iter().copied())
    }

    /// Items per class.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// First `n` items, keeping their original indices (and thus noise
    /// streams) intact.
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            images: self.images[..n].to_vec(),
            labels: self.labels[..n].to_vec(),
            split: self.split,
        }
    }
}

/// Canonical file locations for one split inside an MNIST directory.
#[derive(Debug, Clone)]
pub struct MnistPaths {
    pub images: PathBuf,
    pub labels: PathBuf,
}

impl MnistPaths {
    pub fn new(dir: &Path, split: Split) -> Self {
        let (i, l) = split.file_names();
        Self {
            images: dir.join(i),
            labels: dir.join(l),
        }
    }
}
