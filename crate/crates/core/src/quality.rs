//! Embedding quality scores.

use nalgebra::DMatrix;

use crate::{Error, Result, Scalar};

/// Ranks starting at 1, tied values sharing their average rank.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average ranks.
/// Returns 0 when either input is constant.
pub fn spearman<T: Scalar>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::invalid(format!(
            "spearman needs two equal-length inputs of at least 2 values, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(0.0);
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Largest `|ρ|` over all pairs of an embedding column (`phi` is `n × l`) and a
/// ground-truth parameter (`truth` is `p × n`, one column per point).
pub fn dominant_spearman<T: Scalar>(phi: &DMatrix<T>, truth: &DMatrix<T>) -> Result<f64> {
    if phi.nrows() != truth.ncols() {
        return Err(Error::invalid(format!(
            "embedding has {} rows but truth has {} points",
            phi.nrows(),
            truth.ncols()
        )));
    }
    let mut best = 0.0f64;
    for col in phi.column_iter() {
        let c: Vec<T> = col.iter().copied().collect();
        for row in truth.row_iter() {
            let r: Vec<T> = row.iter().copied().collect();
            best = best.max(spearman(&c, &r)?.abs());
        }
    }
    Ok(best)
}
