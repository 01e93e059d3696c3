use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::PointSet;
use crate::{Error, Result, Scalar};

/// Magic number of an unsigned-byte, 3-dimensional IDX file (images).
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
/// Magic number of an unsigned-byte, 1-dimensional IDX file (labels).
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn header(path: &Path, bytes: &[u8], magic: u32, header_len: usize) -> Result<()> {
    if bytes.len() < 4 {
        return Err(Error::IdxTruncated {
            path: path.to_owned(),
            expected: header_len,
            actual: bytes.len(),
        });
    }
    let found = read_u32(bytes, 0);
    if found != magic {
        return Err(Error::IdxMagic {
            path: path.to_owned(),
            expected: magic,
            found,
        });
    }
    if bytes.len() < header_len {
        return Err(Error::IdxTruncated {
            path: path.to_owned(),
            expected: header_len,
            actual: bytes.len(),
        });
    }
    Ok(())
}

/// Reads an MNIST-style image/label pair. Each `rows × cols` image becomes one column
/// with pixel values scaled to `[0, 1]`; `limit` keeps only the first images.
pub fn read_idx<T: Scalar>(
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    limit: Option<usize>,
) -> Result<PointSet<T>> {
    let (images, labels) = (images.as_ref(), labels.as_ref());
    let img = fs::read(images)?;
    header(images, &img, IDX_IMAGES_MAGIC, 16)?;
    let count = read_u32(&img, 4) as usize;
    let rows = read_u32(&img, 8) as usize;
    let cols = read_u32(&img, 12) as usize;
    let d = rows * cols;
    let expected = 16 + count * d;
    if img.len() < expected {
        return Err(Error::IdxTruncated {
            path: images.to_owned(),
            expected,
            actual: img.len(),
        });
    }

    let lab = fs::read(labels)?;
    header(labels, &lab, IDX_LABELS_MAGIC, 8)?;
    let label_count = read_u32(&lab, 4) as usize;
    if lab.len() < 8 + label_count {
        return Err(Error::IdxTruncated {
            path: labels.to_owned(),
            expected: 8 + label_count,
            actual: lab.len(),
        });
    }
    if label_count != count {
        return Err(Error::IdxCountMismatch {
            images: count,
            labels: label_count,
        });
    }

    let n = limit.map_or(count, |l| l.min(count));
    let scale = T::lit(1.0 / 255.0);
    let coords = img[16..16 + n * d]
        .iter()
        .map(|&b| T::from_u8(b).unwrap() * scale)
        .collect::<Vec<_>>();
    let labels = lab[8..8 + n].iter().map(|&b| u32::from(b)).collect();
    PointSet::new(DMatrix::from_vec(d, n, coords))?.with_labels(labels)
}

/// Writes `count` row-major `rows × cols` byte images in IDX format.
pub fn write_idx_images(path: impl AsRef<Path>, rows: usize, cols: usize, pixels: &[u8]) -> Result<()> {
    let d = rows * cols;
    if d == 0 || pixels.len() % d != 0 {
        return Err(Error::invalid("pixel buffer is not a whole number of images"));
    }
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    for v in [pixels.len() / d, rows, cols] {
        out.extend_from_slice(&(v as u32).to_be_bytes());
    }
    out.extend_from_slice(pixels);
    fs::write(path, out)?;
    Ok(())
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(dir: &Path, n: usize) -> (std::path::PathBuf, std::path::PathBuf) {
        let pixels: Vec<u8> = (0..n * 4).map(|i| (i * 17 % 256) as u8).collect();
        let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
        let (ip, lp) = (dir.join("img"), dir.join("lab"));
        write_idx_images(&ip, 2, 2, &pixels).unwrap();
        write_idx_labels(&lp, &labels).unwrap();
        (ip, lp)
    }

    #[test]
    fn reads_scaled_pixels_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path(), 5);
        let p: PointSet<f64> = read_idx(&ip, &lp, None).unwrap();
        assert_eq!((p.len(), p.dim()), (5, 4));
        assert_eq!(p.point_slice(1)[0], 68.0 / 255.0);
        assert_eq!(p.labels().unwrap(), &[0, 1, 2, 3, 4]);
        let q: PointSet<f64> = read_idx(&ip, &lp, Some(2)).unwrap();
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn swapped_files_report_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path(), 3);
        match read_idx::<f64>(&lp, &ip, None) {
            Err(Error::IdxMagic { found, .. }) => assert_eq!(found, IDX_LABELS_MAGIC),
            other => panic!("expected magic error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_and_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path(), 3);
        let mut bytes = fs::read(&ip).unwrap();
        bytes.truncate(bytes.len() - 1);
        let short = dir.path().join("short");
        fs::write(&short, bytes).unwrap();
        assert!(matches!(read_idx::<f64>(&short, &lp, None), Err(Error::IdxTruncated { .. })));

        let lp2 = dir.path().join("lab2");
        write_idx_labels(&lp2, &[1, 2]).unwrap();
        assert!(matches!(
            read_idx::<f64>(&ip, &lp2, None),
            Err(Error::IdxCountMismatch { images: 3, labels: 2 })
        ));
    }
}
