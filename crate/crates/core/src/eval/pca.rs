use nalgebra::{DMatrix, SymmetricEigen};

use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};

/// Projects rows onto the two leading principal axes.
///
/// Each axis is signed so its largest-magnitude loading is positive. Tables
/// of dim 1 get a zero second coordinate.
pub fn pca_2d(table: &EmbeddingTable) -> Result<Vec<[f64; 2]>> {
    if table.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (n, d) = (table.len(), table.dim());
    let mut mean = vec![0.0f64; d];
    for row in table.rows() {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v as f64;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| table.row(i)[j] as f64 - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let axes: Vec<Vec<f64>> = order
        .iter()
        .take(2)
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();

    Ok((0..n)
        .map(|i| {
            let row = centered.row(i);
            let mut out = [0.0; 2];
            for (o, axis) in out.iter_mut().zip(&axes) {
                *o = row.iter().zip(axis).map(|(a, b)| a * b).sum();
            }
            out
        })
        .collect())
}
