//! Point sets: synthetic manifolds with known intrinsic coordinates and
//! readers/writers for external data.

mod csv_io;
mod idx;
mod synthetic;

pub use csv_io::{read_csv, write_csv, write_csv_to};
pub use idx::{read_idx, write_idx_images, write_idx_labels, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use synthetic::{
    generate_blobs, generate_fish_bowl, generate_swiss_roll, generate_swiss_roll_scaled,
    FISH_BOWL_PUNCTURE_HEIGHT, SWISS_ROLL_HEIGHT, SWISS_ROLL_T_RANGE,
};

use nalgebra::{DMatrix, DVectorView};

use crate::{Error, Result, Scalar};

/// `d × n` collection of points stored column-wise (column `i` is point `x_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T: Scalar> {
    coords: DMatrix<T>,
    labels: Option<Vec<u32>>,
    truth: Option<DMatrix<T>>,
}

impl<T: Scalar> PointSet<T> {
    pub fn new(coords: DMatrix<T>) -> Result<Self> {
        if coords.ncols() == 0 || coords.nrows() == 0 {
            return Err(Error::invalid("point set must have at least one point and one dimension"));
        }
        if let Some((i, _)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate in point {}",
                i / coords.nrows()
            )));
        }
        Ok(Self {
            coords,
            labels: None,
            truth: None,
        })
    }

    /// Builds a point set from row-major `n × d` data (one point per row).
    pub fn from_rows(n: usize, d: usize, data: &[T]) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::invalid(format!(
                "expected {} values for {n} points of dimension {d}, got {}",
                n * d,
                data.len()
            )));
        }
        // column-major d×n from row-major n×d is a plain reinterpretation
        Self::new(DMatrix::from_column_slice(d, n, data))
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_truth(mut self, truth: DMatrix<T>) -> Result<Self> {
        if truth.ncols() != self.len() {
            return Err(Error::invalid(format!(
                "truth has {} columns for {} points",
                truth.ncols(),
                self.len()
            )));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.nrows()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.ncols()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.ncols() == 0
    }

    #[inline]
    pub fn coords(&self) -> &DMatrix<T> {
        &self.coords
    }

    #[inline]
    pub fn point(&self, i: usize) -> DVectorView<'_, T> {
        self.coords.column(i)
    }

    /// Coordinates of point `i` as a contiguous slice.
    #[inline]
    pub fn point_slice(&self, i: usize) -> &[T] {
        let d = self.dim();
        &self.coords.as_slice()[i * d..(i + 1) * d]
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn truth(&self) -> Option<&DMatrix<T>> {
        self.truth.as_ref()
    }

    /// Squared Euclidean distance between points `i` and `j`.
    #[inline]
    pub fn sq_dist(&self, i: usize, j: usize) -> T {
        sq_dist(self.point_slice(i), self.point_slice(j))
    }

    /// Sub-population at the given indices, carrying labels and truth along.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        check_indices(indices, self.len())?;
        let coords = self.coords.select_columns(indices);
        let mut out = Self::new(coords)?;
        if let Some(labels) = &self.labels {
            out.labels = Some(indices.iter().map(|&i| labels[i]).collect());
        }
        if let Some(truth) = &self.truth {
            out.truth = Some(truth.select_columns(indices));
        }
        Ok(out)
    }

    pub fn cast<U: Scalar>(&self) -> PointSet<U> {
        let conv = |m: &DMatrix<T>| m.map(|v| U::lit(v.as_f64()));
        PointSet {
            coords: conv(&self.coords),
            labels: self.labels.clone(),
            truth: self.truth.as_ref().map(conv),
        }
    }
}

#[inline]
pub(crate) fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// Validates that every index is in range (duplicates allowed).
pub(crate) fn check_indices(indices: &[usize], n: usize) -> Result<()> {
    match indices.iter().find(|&&i| i >= n) {
        Some(&index) => Err(Error::IndexOutOfRange { index, len: n }),
        None => Ok(()),
    }
}

/// Validates that indices are in range and pairwise distinct.
pub(crate) fn check_distinct_indices(indices: &[usize], n: usize) -> Result<()> {
    check_indices(indices, n)?;
    let mut seen = vec![false; n];
    for &i in indices {
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// Indices in `0..n` not contained in `indices`, ascending.
pub fn complement(indices: &[usize], n: usize) -> Vec<usize> {
    let mut member = vec![false; n];
    for &i in indices {
        if i < n {
            member[i] = true;
        }
    }
    (0..n).filter(|&i| !member[i]).collect()
}
