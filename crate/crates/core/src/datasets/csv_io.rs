use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::PointSet;
use crate::{Error, Result, Scalar};

const LABEL_COLUMN: &str = "label";

/// Writes one point per row under a header `x0,...,x{d-1}[,label]`.
///
/// Values use the shortest representation that parses back to the same float, so a
/// write/read cycle is bit-exact.
pub fn write_csv<T: Scalar>(points: &PointSet<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    write_csv_to(points, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Writes the CSV form of [`write_csv`] to any writer.
pub fn write_csv_to<T: Scalar, W: Write>(points: &PointSet<T>, out: &mut W) -> Result<()> {
    let d = points.dim();
    let mut header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    if points.labels().is_some() {
        header.push(LABEL_COLUMN.to_owned());
    }
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for i in 0..points.len() {
        line.clear();
        for (j, v) in points.point_slice(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        if let Some(labels) = points.labels() {
            line.push(',');
            line.push_str(&labels[i].to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads a point set written by [`write_csv`]. Lines starting with `#` are ignored.
pub fn read_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<PointSet<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)?;
    let header = reader.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyCsv);
    }
    let has_label = header.iter().last() == Some(LABEL_COLUMN);
    let d = header.len() - usize::from(has_label);
    if d == 0 {
        return Err(Error::Csv {
            line: 1,
            message: "no coordinate columns".into(),
        });
    }

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::Csv {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for cell in record.iter().take(d) {
            let v = cell.trim().parse::<T>().map_err(|_| Error::Csv {
                line,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            coords.push(v);
        }
        if has_label {
            let cell = &record[d];
            labels.push(cell.trim().parse::<u32>().map_err(|_| Error::Csv {
                line,
                message: format!("invalid label {cell:?}"),
            })?);
        }
    }
    if coords.is_empty() {
        return Err(Error::EmptyCsv);
    }
    let n = coords.len() / d;
    let points = PointSet::new(DMatrix::from_vec(d, n, coords))?;
    if has_label {
        points.with_labels(labels)
    } else {
        Ok(points)
    }
}
