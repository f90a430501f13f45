//! Minimum-square-error discriminant in dissimilarity space and the
//! eigenface (PCA) baseline.
//!
//! Training solves, for each subject, the two-class least-squares system on
//! augmented rows `(d − μ | 1)` with targets +1 (own subject) / −1 (rest),
//! taking the minimum-norm solution through the Moore–Penrose pseudo-inverse
//! — the system is near-singular by construction, which is exactly why the
//! pseudo-inverse formulation is used. Scoring converts the L discriminant
//! responses into per-subject similarity scores.

use crate::dissimilarity::DissimilarityMatrix;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Singular values below this fraction of the largest are treated as zero.
pub const SINGULAR_VALUE_CUTOFF: f64 = 1e-10;
/// Floor keeping similarity scores finite when a distance is exactly zero.
pub const SCORE_EPSILON: f64 = 1e-12;

/// Moore–Penrose pseudo-inverse via SVD: singular values at or below
/// `relative_cutoff × σ_max` contribute nothing.
pub fn pseudo_inverse(m: &DMatrix<f64>, relative_cutoff: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("SVD requested with U");
    let v_t = svd.v_t.as_ref().expect("SVD requested with Vᵀ");
    let sigma_max = svd.singular_values.max();
    let cutoff = relative_cutoff * sigma_max;
    let k = svd.singular_values.len();
    let mut sigma_inv = DMatrix::zeros(k, k);
    for i in 0..k {
        let s = svd.singular_values[i];
        if s > cutoff && s > 0.0 {
            sigma_inv[(i, i)] = 1.0 / s;
        }
    }
    v_t.transpose() * sigma_inv * u.transpose()
}

/// Augmented, column-centered training matrix `M = [D − 1μᵀ | 1]`
/// (N × (N+1)). The column means `μ` are returned with it because probes
/// must be shifted identically at scoring time.
pub fn augmented_training_matrix(matrix: &DissimilarityMatrix) -> (DMatrix<f64>, Vec<f64>) {
    let n = matrix.len();
    let mut means = vec![0.0; n];
    for j in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += matrix.entry(i, j);
        }
        means[j] = acc / n as f64;
    }
    let mut m = DMatrix::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = matrix.entry(i, j) - means[j];
        }
        m[(i, n)] = 1.0;
    }
    (m, means)
}

/// Trained one-vs-rest discriminant: one augmented weight vector per
/// subject, plus everything needed to score probes consistently (the
/// centering means) and to refuse incompatible ones (the extraction
/// fingerprint).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminantModel {
    subject_ids: Vec<String>,
    object_ids: Vec<String>,
    feature_means: Vec<f64>,
    /// L × (N+1), one row per subject.
    weights: DMatrix<f64>,
    fingerprint: String,
}

/// Train the discriminant on a dissimilarity matrix. `labels[i]` names the
/// subject of training object `i`; subjects are ordered by first
/// appearance. `fingerprint` identifies the descriptor-extraction
/// configuration and is stored so scoring can verify compatibility.
pub fn train_pfld(
    matrix: &DissimilarityMatrix,
    labels: &[String],
    fingerprint: &str,
) -> Result<DiscriminantModel> {
    let n = matrix.len();
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} training objects",
            labels.len(),
            n
        )));
    }
    let mut subject_ids: Vec<String> = Vec::new();
    for label in labels {
        if label.is_empty() {
            return Err(Error::InvalidArgument("empty subject label".into()));
        }
        if !subject_ids.contains(label) {
            subject_ids.push(label.clone());
        }
    }
    let l = subject_ids.len();
    if l < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 distinct subjects".into(),
        ));
    }

    let (m, means) = augmented_training_matrix(matrix);
    let mut targets = DMatrix::from_element(n, l, -1.0);
    for (i, label) in labels.iter().enumerate() {
        let s = subject_ids.iter().position(|id| id == label).unwrap();
        targets[(i, s)] = 1.0;
    }
    let pinv = pseudo_inverse(&m, SINGULAR_VALUE_CUTOFF);
    let weights = (pinv * targets).transpose(); // L × (N+1)

    Ok(DiscriminantModel {
        subject_ids,
        object_ids: matrix.object_ids().to_vec(),
        feature_means: means,
        weights,
        fingerprint: fingerprint.to_string(),
    })
}

/// Convert L discriminant responses to similarity scores: for each subject
/// s, the inverse distance from the response vector to s's target pattern
/// (+1 at s, −1 elsewhere). Always finite and strictly positive.
pub fn scores_from_responses(responses: &[f64]) -> Vec<f64> {
    let l = responses.len();
    (0..l)
        .map(|s| {
            let dist_sq: f64 = responses
                .iter()
                .enumerate()
                .map(|(t, &g)| {
                    let target = if t == s { 1.0 } else { -1.0 };
                    (g - target) * (g - target)
                })
                .sum();
            1.0 / (SCORE_EPSILON + dist_sq.sqrt())
        })
        .collect()
}

impl DiscriminantModel {
    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn object_ids(&self) -> &[String] {
        &self.object_ids
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Fail unless the probe pipeline's fingerprint matches the one the
    /// model was trained with.
    pub fn check_fingerprint(&self, current: &str) -> Result<()> {
        if self.fingerprint != current {
            return Err(Error::FingerprintMismatch {
                model: self.fingerprint.clone(),
                current: current.to_string(),
            });
        }
        Ok(())
    }

    /// Discriminant values `g_s` for a probe given as its dissimilarity
    /// vector to the training objects.
    pub fn responses(&self, embedded: &[f64]) -> Result<Vec<f64>> {
        let n = self.object_ids.len();
        if embedded.len() != n {
            return Err(Error::InvalidArgument(format!(
                "probe embedding has {} entries, training set has {}",
                embedded.len(),
                n
            )));
        }
        let mut augmented = DVector::zeros(n + 1);
        for i in 0..n {
            augmented[i] = embedded[i] - self.feature_means[i];
        }
        augmented[n] = 1.0;
        let g = &self.weights * augmented;
        Ok(g.iter().cloned().collect())
    }

    /// Per-subject similarity scores for an embedded probe, aligned to
    /// [`DiscriminantModel::subject_ids`].
    pub fn score_probe(&self, embedded: &[f64]) -> Result<Vec<f64>> {
        Ok(scores_from_responses(&self.responses(embedded)?))
    }

    /// Serialize to the versioned binary container (magic `FBFACEM1`,
    /// little-endian payload).
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut inner = || -> std::io::Result<()> {
            w.write_all(MODEL_MAGIC)?;
            write_str(&mut w, &self.fingerprint)?;
            write_u32(&mut w, self.subject_ids.len() as u32)?;
            write_u32(&mut w, self.object_ids.len() as u32)?;
            for id in &self.subject_ids {
                write_str(&mut w, id)?;
            }
            for id in &self.object_ids {
                write_str(&mut w, id)?;
            }
            for &v in &self.feature_means {
                w.write_all(&v.to_le_bytes())?;
            }
            for i in 0..self.weights.nrows() {
                for j in 0..self.weights.ncols() {
                    w.write_all(&self.weights[(i, j)].to_le_bytes())?;
                }
            }
            w.flush()
        };
        inner().map_err(|e| Error::io(path, e))
    }

    /// Load a container written by [`DiscriminantModel::save`].
    pub fn load(path: &Path) -> Result<DiscriminantModel> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::ModelFormat(
                "not a discriminant model container (bad magic)".into(),
            ));
        }
        let fingerprint = read_str(&mut r)?;
        let l = read_u32(&mut r)? as usize;
        let n = read_u32(&mut r)? as usize;
        if l == 0 || n == 0 || l > MAX_IDS || n > MAX_IDS {
            return Err(Error::ModelFormat(format!(
                "implausible model dimensions {l} × {n}"
            )));
        }
        let subject_ids = (0..l).map(|_| read_str(&mut r)).collect::<Result<_>>()?;
        let object_ids = (0..n).map(|_| read_str(&mut r)).collect::<Result<_>>()?;
        let feature_means = (0..n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let mut weights = DMatrix::zeros(l, n + 1);
        for i in 0..l {
            for j in 0..=n {
                weights[(i, j)] = read_f64(&mut r)?;
            }
        }
        Ok(DiscriminantModel {
            subject_ids,
            object_ids,
            feature_means,
            weights,
            fingerprint,
        })
    }
}

pub(crate) const MODEL_MAGIC: &[u8; 8] = b"FBFACEM1";
pub(crate) const PCA_MAGIC: &[u8; 8] = b"FBFACEP1";
const MAX_IDS: usize = 1 << 24;
const MAX_STR: usize = 1 << 20;

fn write_u32<W: Write>(w: &mut W, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::ModelFormat("container truncated".into())
        } else {
            Error::ModelFormat(format!("container unreadable: {e}"))
        }
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    if len > MAX_STR {
        return Err(Error::ModelFormat(format!("implausible string length {len}")));
    }
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::ModelFormat("non-UTF-8 string".into()))
}

/// Eigenface model built by the snapshot method: eigendecomposition of the
/// sample × sample inner-product matrix, components mapped back to image
/// space and normalized. Components are ordered by descending eigenvalue;
/// the first `drop_leading` are stored but never used for projection
/// (leading components mostly carry illumination).
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    components: Vec<Vec<f64>>,
    drop_leading: usize,
}

/// Train the baseline on flattened normalized faces. A `sample_size`-image
/// subset is drawn without replacement using the seed (all images, in
/// order, when `sample_size` equals the collection size).
pub fn train_pca(
    images: &[Vec<f64>],
    sample_size: usize,
    drop_leading: usize,
    seed: u64,
) -> Result<PcaModel> {
    if sample_size < 2 {
        return Err(Error::InvalidArgument(
            "PCA needs a sample of at least 2 images".into(),
        ));
    }
    if sample_size > images.len() {
        return Err(Error::InvalidArgument(format!(
            "sample size {} exceeds the {} available images",
            sample_size,
            images.len()
        )));
    }
    let dim = images[0].len();
    if dim == 0 || images.iter().any(|im| im.len() != dim) {
        return Err(Error::InvalidArgument(
            "images must share one nonzero length".into(),
        ));
    }

    let mut indices: Vec<usize> = if sample_size == images.len() {
        (0..images.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, images.len(), sample_size).into_vec()
    };
    indices.sort_unstable();

    let inv_n = 1.0 / sample_size as f64;
    let mut mean = vec![0.0; dim];
    for &idx in &indices {
        for (m, &v) in mean.iter_mut().zip(&images[idx]) {
            *m += v * inv_n;
        }
    }
    let centered: Vec<Vec<f64>> = indices
        .iter()
        .map(|&idx| {
            images[idx]
                .iter()
                .zip(&mean)
                .map(|(&v, &m)| v - m)
                .collect()
        })
        .collect();

    // Snapshot method: the n×n Gram matrix shares its nonzero spectrum with
    // the p×p covariance, and its eigenvectors give the image-space
    // components as weighted sums of the centered sample.
    let n = sample_size;
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(&a, &b)| a * b).sum();
            gram[(i, j)] = dot;
            gram[(j, i)] = dot;
        }
    }
    let eigen = nalgebra::SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap()
    });
    let lambda_max = eigen.eigenvalues[order[0]].max(0.0);
    let cutoff = SINGULAR_VALUE_CUTOFF * lambda_max;

    let mut eigenvalues = Vec::new();
    let mut components: Vec<Vec<f64>> = Vec::new();
    for &k in &order {
        let lambda = eigen.eigenvalues[k];
        if lambda <= cutoff {
            break; // centered data has rank ≤ n−1; drop the null directions
        }
        let mut comp = vec![0.0; dim];
        for i in 0..n {
            let w = eigen.eigenvectors[(i, k)];
            if w == 0.0 {
                continue;
            }
            for (c, &v) in comp.iter_mut().zip(&centered[i]) {
                *c += w * v;
            }
        }
        let norm = comp.iter().map(|&v| v * v).sum::<f64>().sqrt();
        for c in &mut comp {
            *c /= norm;
        }
        eigenvalues.push(lambda);
        components.push(comp);
    }

    if components.len() <= drop_leading {
        return Err(Error::InvalidArgument(format!(
            "only {} principal components available, cannot drop {}",
            components.len(),
            drop_leading
        )));
    }
    Ok(PcaModel {
        mean,
        eigenvalues,
        components,
        drop_leading,
    })
}

impl PcaModel {
    pub fn mean_face(&self) -> &[f64] {
        &self.mean
    }

    /// All computed components, descending eigenvalue order (the first
    /// `drop_leading` of these are excluded from projection).
    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn drop_leading(&self) -> usize {
        self.drop_leading
    }

    /// Components actually used for projection.
    pub fn retained_components(&self) -> &[Vec<f64>] {
        &self.components[self.drop_leading..]
    }

    pub fn projection_dim(&self) -> usize {
        self.components.len() - self.drop_leading
    }

    /// Coordinates of an image in the retained-component subspace.
    pub fn project(&self, image: &[f64]) -> Result<Vec<f64>> {
        if image.len() != self.mean.len() {
            return Err(Error::InvalidArgument(format!(
                "image length {} does not match model dimension {}",
                image.len(),
                self.mean.len()
            )));
        }
        let centered: Vec<f64> = image.iter().zip(&self.mean).map(|(&v, &m)| v - m).collect();
        Ok(self
            .retained_components()
            .iter()
            .map(|comp| comp.iter().zip(&centered).map(|(&c, &v)| c * v).sum())
            .collect())
    }

    /// Serialize to the versioned binary container (magic `FBFACEP1`).
    pub fn save(&self, path: &Path, fingerprint: &str) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut inner = || -> std::io::Result<()> {
            w.write_all(PCA_MAGIC)?;
            write_str(&mut w, fingerprint)?;
            write_u32(&mut w, self.mean.len() as u32)?;
            write_u32(&mut w, self.components.len() as u32)?;
            write_u32(&mut w, self.drop_leading as u32)?;
            for &v in &self.mean {
                w.write_all(&v.to_le_bytes())?;
            }
            for &v in &self.eigenvalues {
                w.write_all(&v.to_le_bytes())?;
            }
            for comp in &self.components {
                for &v in comp {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            w.flush()
        };
        inner().map_err(|e| Error::io(path, e))
    }

    /// Load a container written by [`PcaModel::save`]; returns the model
    /// and its stored fingerprint.
    pub fn load(path: &Path) -> Result<(PcaModel, String)> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != PCA_MAGIC {
            return Err(Error::ModelFormat(
                "not a PCA model container (bad magic)".into(),
            ));
        }
        let fingerprint = read_str(&mut r)?;
        let dim = read_u32(&mut r)? as usize;
        let count = read_u32(&mut r)? as usize;
        let drop_leading = read_u32(&mut r)? as usize;
        if dim == 0 || dim > MAX_IDS || count == 0 || count > MAX_IDS || drop_leading >= count {
            return Err(Error::ModelFormat("implausible PCA dimensions".into()));
        }
        let mean = (0..dim).map(|_| read_f64(&mut r)).collect::<Result<_>>()?;
        let eigenvalues = (0..count).map(|_| read_f64(&mut r)).collect::<Result<_>>()?;
        let components = (0..count)
            .map(|_| (0..dim).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok((
            PcaModel {
                mean,
                eigenvalues,
                components,
                drop_leading,
            },
            fingerprint,
        ))
    }
}

/// Similarity of a projected probe to each projected gallery image:
/// inverse coefficient-space distance with the standard ε floor.
pub fn inverse_distance_scores(probe_coords: &[f64], gallery_coords: &[Vec<f64>]) -> Vec<f64> {
    gallery_coords
        .iter()
        .map(|g| {
            let dist_sq: f64 = probe_coords
                .iter()
                .zip(g)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            1.0 / (SCORE_EPSILON + dist_sq.sqrt())
        })
        .collect()
}

/// One-call baseline scoring: project gallery and probe, return per-gallery
/// similarity scores.
pub fn pca_match_scores(
    model: &PcaModel,
    gallery: &[Vec<f64>],
    probe: &[f64],
) -> Result<Vec<f64>> {
    let gallery_coords = gallery
        .iter()
        .map(|g| model.project(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(inverse_distance_scores(&model.project(probe)?, &gallery_coords))
}
