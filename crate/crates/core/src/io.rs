//! KITTI-style `.bin` scans and `.label` files.
//!
//! A scan is a flat sequence of little-endian `f32` records `(x, y, z, intensity)`,
//! 16 bytes per point. A label file holds one little-endian `u32` per point whose
//! low 16 bits are the semantic class and high 16 bits the instance id.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

pub const POINT_RECORD_BYTES: usize = 16;
pub const LABEL_RECORD_BYTES: usize = 4;

fn read_all(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn decode_kitti_bin(bytes: &[u8], path: &Path) -> Result<PointCloud> {
    let rem = bytes.len() % POINT_RECORD_BYTES;
    if rem != 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: (bytes.len() - rem) as u64,
            message: format!(
                "length {} is not a multiple of {POINT_RECORD_BYTES} bytes; trailing record truncated",
                bytes.len()
            ),
        });
    }
    let n = bytes.len() / POINT_RECORD_BYTES;
    let mut xyz = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    for (i, rec) in bytes.chunks_exact(POINT_RECORD_BYTES).enumerate() {
        let mut v = [0f32; 4];
        for (k, word) in rec.chunks_exact(4).enumerate() {
            v[k] = f32::from_le_bytes(word.try_into().expect("4-byte chunk"));
        }
        if let Some(k) = v.iter().position(|f| !f.is_finite()) {
            return Err(Error::invalid(format!(
                "{}: non-finite value in point {i} (byte offset {})",
                path.display(),
                i * POINT_RECORD_BYTES + 4 * k
            )));
        }
        xyz.push([v[0] as f64, v[1] as f64, v[2] as f64]);
        intensity.push(v[3]);
    }
    PointCloud::new(xyz)?.with_intensity(intensity)
}

/// Reads a `.bin` scan. Intensity is always present on the result.
pub fn read_kitti_bin(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    decode_kitti_bin(&read_all(path)?, path)
}

/// Encodes coordinates as `f32`; missing intensity is written as 0.
pub fn encode_kitti_bin(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * POINT_RECORD_BYTES);
    for (i, p) in cloud.xyz().iter().enumerate() {
        let intensity = cloud.intensity().map_or(0.0, |v| v[i]);
        for f in [p[0] as f32, p[1] as f32, p[2] as f32, intensity] {
            out.extend_from_slice(&f.to_le_bytes());
        }
    }
    out
}

pub fn write_kitti_bin(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    write_atomic(path.as_ref(), &encode_kitti_bin(cloud))
}

/// Raw 32-bit label records.
pub fn decode_label_records(bytes: &[u8], path: &Path) -> Result<Vec<u32>> {
    let rem = bytes.len() % LABEL_RECORD_BYTES;
    if rem != 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: (bytes.len() - rem) as u64,
            message: format!("length {} is not a multiple of {LABEL_RECORD_BYTES} bytes", bytes.len()),
        });
    }
    Ok(bytes
        .chunks_exact(LABEL_RECORD_BYTES)
        .map(|w| u32::from_le_bytes(w.try_into().expect("4-byte chunk")))
        .collect())
}

pub fn semantic_class(record: u32) -> u32 {
    record & 0xFFFF
}

/// Reads a `.label` file and returns the semantic class of every point.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<u32>> {
    let path = path.as_ref();
    Ok(read_label_records(path)?.into_iter().map(semantic_class).collect())
}

/// Reads a `.label` file as raw 32-bit records (instance id in the upper half).
pub fn read_label_records(path: impl AsRef<Path>) -> Result<Vec<u32>> {
    let path = path.as_ref();
    decode_label_records(&read_all(path)?, path)
}

/// Reads a scan and its label file, checking that the counts agree.
pub fn read_labelled_scan(bin: impl AsRef<Path>, label: impl AsRef<Path>) -> Result<PointCloud> {
    let cloud = read_kitti_bin(bin)?;
    let label = label.as_ref();
    let labels = read_labels(label)?;
    if labels.len() != cloud.len() {
        return Err(Error::invalid(format!(
            "{}: {} labels for {} points",
            label.display(),
            labels.len(),
            cloud.len()
        )));
    }
    cloud.with_labels(labels)
}

pub fn encode_labels(labels: &[u32]) -> Vec<u8> {
    labels.iter().flat_map(|l| l.to_le_bytes()).collect()
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[u32]) -> Result<()> {
    write_atomic(path.as_ref(), &encode_labels(labels))
}

/// Writes through a temporary file in the target directory and renames it into
/// place, so a failed write never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture(values: &[f32]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn two_point_fixture() {
        let bytes = fixture(&[1.0, 2.0, 3.0, 0.5, 4.0, 5.0, 6.0, 0.25]);
        assert_eq!(bytes.len(), 32);
        let c = decode_kitti_bin(&bytes, Path::new("fixture.bin")).unwrap();
        assert_eq!(c.xyz(), &[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        assert_eq!(c.intensity().unwrap(), &[0.5, 0.25]);
        assert_eq!(encode_kitti_bin(&c), bytes);
    }

    #[test]
    fn empty_file_is_empty_cloud() {
        let c = decode_kitti_bin(&[], Path::new("empty.bin")).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn misaligned_length_reports_offset() {
        let err = decode_kitti_bin(&[0u8; 17], Path::new("bad.bin")).unwrap_err();
        match err {
            Error::Format { offset, .. } => assert_eq!(offset, 16),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            decode_label_records(&[0u8; 6], Path::new("bad.label")),
            Err(Error::Format { offset: 4, .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let bytes = fixture(&[1.0, f32::NAN, 3.0, 0.5]);
        assert!(matches!(
            decode_kitti_bin(&bytes, Path::new("nan.bin")),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn label_bit_layout() {
        assert_eq!(semantic_class(0x0003_0001), 1);
        assert_eq!(semantic_class(0x0000_0028), 40);
    }

    #[test]
    fn label_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("a.bin");
        let label = dir.path().join("a.label");
        fs::write(&bin, fixture(&[1.0, 2.0, 3.0, 0.5])).unwrap();
        write_labels(&label, &[1, 2]).unwrap();
        assert!(read_labelled_scan(&bin, &label).is_err());
        write_labels(&label, &[0x0003_0001]).unwrap();
        assert_eq!(read_labelled_scan(&bin, &label).unwrap().labels().unwrap(), &[1]);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(read_kitti_bin("/nonexistent/scan.bin"), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn bin_bytes_round_trip(values in prop::collection::vec(-1e4f32..1e4, 0..64)) {
            let n = values.len() / 4 * 4;
            let bytes = fixture(&values[..n]);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("scan.bin");
            fs::write(&path, &bytes).unwrap();
            let cloud = read_kitti_bin(&path).unwrap();
            let out = dir.path().join("copy.bin");
            write_kitti_bin(&out, &cloud).unwrap();
            prop_assert_eq!(fs::read(&out).unwrap(), bytes);
        }
    }
}
