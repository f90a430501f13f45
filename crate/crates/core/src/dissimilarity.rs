//! Dissimilarity-space embedding.
//!
//! Instead of classifying descriptors directly, every object is represented
//! by its Euclidean distances to all training objects. This fixes the
//! working dimensionality at the training-set size N no matter how long the
//! underlying descriptors are (372, 1116, …), and it is the space in which
//! the discriminant of [`crate::discriminant`] is trained.

use crate::error::{Error, Result};
use std::io::Write as _;
use std::path::Path;

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "descriptor lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Pairwise distances between all training descriptors: symmetric, zero
/// diagonal, row/column order aligned to `object_ids`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    object_ids: Vec<String>,
    n: usize,
    /// Row-major N×N entries.
    entries: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Compute the matrix from training descriptors. Each distance is
    /// computed once and mirrored, so symmetry is exact by construction.
    pub fn build(object_ids: Vec<String>, descriptors: &[Vec<f64>]) -> Result<DissimilarityMatrix> {
        let n = descriptors.len();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 training descriptors".into(),
            ));
        }
        if object_ids.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} object ids for {} descriptors",
                object_ids.len(),
                n
            )));
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(&descriptors[i], &descriptors[j])?;
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        Ok(DissimilarityMatrix {
            object_ids,
            n,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn object_ids(&self) -> &[String] {
        &self.object_ids
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Distances from training object `i` to every training object.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Diagnostic CSV export: header row of object ids, then one row per
    /// object with its id in the first column.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut header = String::from("object_id");
        for id in &self.object_ids {
            header.push(',');
            header.push_str(id);
        }
        header.push('\n');
        file.write_all(header.as_bytes())
            .map_err(|e| Error::io(path, e))?;
        for i in 0..self.n {
            let mut line = self.object_ids[i].clone();
            for j in 0..self.n {
                line.push(',');
                line.push_str(&format!("{}", self.entry(i, j)));
            }
            line.push('\n');
            file.write_all(line.as_bytes())
                .map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Embed one probe descriptor as its distance vector to every training
/// descriptor, aligned to the training object order.
pub fn embed_probe(probe: &[f64], train_descriptors: &[Vec<f64>]) -> Result<Vec<f64>> {
    train_descriptors
        .iter()
        .map(|t| euclidean(probe, t))
        .collect()
}
