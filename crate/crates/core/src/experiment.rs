//! End-to-end verification experiments: load a dataset, prepare faces,
//! extract descriptors, train the configured classifier on the gallery,
//! score every (probe, claimed subject) pair, and reduce to an ROC.
//!
//! The work is split into composable stages — [`train_stage`],
//! [`verify_stage`], [`extract_features`] — with [`run_experiment`] as the
//! one-call composition. The experiment layer also owns the run conditions
//! that perturb inputs: occlusion applies to probe faces only, while
//! synthetic eye-localization error applies to gallery and probes alike (a
//! live system mislocates eyes on every image it sees, enrollment included).

use crate::dataset::{DatasetEntry, DatasetManifest, Partition};
use crate::discriminant::{
    train_pca, train_pfld, DiscriminantModel, PcaModel, SCORE_EPSILON,
};
use crate::dissimilarity::{embed_probe, DissimilarityMatrix};
use crate::error::{Error, Result};
use crate::face::{
    extract_descriptor, occlude, perturb_eyes, register, DescriptorMode, DescriptorVariant,
    FaceBases, NormalizedFace, OcclusionVariant, FRAME_HEIGHT, FRAME_WIDTH, GLOBAL_RADIUS,
    LOCAL_RADIUS,
};
use crate::synth::derive_seed;
use crate::verification::{build_roc, RocCurve, VerificationRun};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::path::Path;

/// Synthetic eye-localization error: displacement magnitudes drawn from a
/// Gamma fit to (mean, sd), one independent stream per image derived from
/// the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeNoise {
    pub mean_px: f64,
    pub sd_px: f64,
    pub seed: u64,
}

/// Which classifier the experiment trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classifier {
    /// Pseudo-Fisher discriminant in dissimilarity space.
    Pfld,
    /// Eigenface nearest-projection baseline (ignores descriptor settings).
    PcaBaseline,
}

impl Classifier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classifier::Pfld => "pfld",
            Classifier::PcaBaseline => "pca_baseline",
        }
    }
}

/// Full experiment configuration. Defaults reproduce the standard
/// pipeline: global descriptors, raw coefficients, discriminant classifier,
/// order ≤ 30 / 6 roots / 3° step, no occlusion, no eye noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: DescriptorMode,
    pub variant: DescriptorVariant,
    pub classifier: Classifier,
    pub max_order: u32,
    pub max_root: usize,
    pub angular_step_deg: u32,
    pub occlusion: Option<OcclusionVariant>,
    pub eye_noise: Option<EyeNoise>,
    /// PCA draws at most this many gallery images for the snapshot.
    pub pca_sample_cap: usize,
    pub pca_drop_leading: usize,
    pub pca_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: DescriptorMode::Global,
            variant: DescriptorVariant::Raw,
            classifier: Classifier::Pfld,
            max_order: 30,
            max_root: 6,
            angular_step_deg: 3,
            occlusion: None,
            eye_noise: None,
            pca_sample_cap: 700,
            pca_drop_leading: 3,
            pca_seed: 7,
        }
    }
}

impl ExperimentConfig {
    /// Canonical description of everything that determines descriptor
    /// compatibility between a trained model and a probe pipeline. Run
    /// conditions (occlusion, eye noise) are deliberately excluded: they
    /// change the images, not the descriptor space.
    pub fn fingerprint_text(&self) -> String {
        match self.classifier {
            Classifier::Pfld => format!(
                "classifier=pfld;mode={};variant={};max_order={};max_root={};angular_step_deg={};global_radius={};local_radius={};frame={}x{}",
                self.mode.as_str(),
                self.variant.as_str(),
                self.max_order,
                self.max_root,
                self.angular_step_deg,
                GLOBAL_RADIUS,
                LOCAL_RADIUS,
                FRAME_WIDTH,
                FRAME_HEIGHT,
            ),
            Classifier::PcaBaseline => format!(
                "classifier=pca_baseline;fbt=ignored;sample_cap={};drop_leading={};pca_seed={};frame={}x{}",
                self.pca_sample_cap,
                self.pca_drop_leading,
                self.pca_seed,
                FRAME_WIDTH,
                FRAME_HEIGHT,
            ),
        }
    }

    /// Hex digest of [`ExperimentConfig::fingerprint_text`].
    pub fn fingerprint(&self) -> String {
        sha256_hex(self.fingerprint_text().as_bytes())
    }
}

/// A trained classifier in one loadable unit; the container on disk starts
/// with a magic that says which kind it holds.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Pfld(DiscriminantModel),
    PcaBaseline { model: PcaModel, fingerprint: String },
}

impl TrainedModel {
    pub fn classifier(&self) -> Classifier {
        match self {
            TrainedModel::Pfld(_) => Classifier::Pfld,
            TrainedModel::PcaBaseline { .. } => Classifier::PcaBaseline,
        }
    }

    /// Fingerprint of the configuration the model was trained under.
    pub fn fingerprint(&self) -> &str {
        match self {
            TrainedModel::Pfld(m) => m.fingerprint(),
            TrainedModel::PcaBaseline { fingerprint, .. } => fingerprint,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            TrainedModel::Pfld(m) => m.save(path),
            TrainedModel::PcaBaseline { model, fingerprint } => model.save(path, fingerprint),
        }
    }

    /// Load either container kind, dispatching on its magic.
    pub fn load(path: &Path) -> Result<TrainedModel> {
        let mut magic = [0u8; 8];
        {
            use std::io::Read as _;
            let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            file.read_exact(&mut magic).map_err(|_| {
                Error::ModelFormat("file too short to hold a model container".into())
            })?;
        }
        if &magic == crate::discriminant::MODEL_MAGIC {
            Ok(TrainedModel::Pfld(DiscriminantModel::load(path)?))
        } else if &magic == crate::discriminant::PCA_MAGIC {
            let (model, fingerprint) = PcaModel::load(path)?;
            Ok(TrainedModel::PcaBaseline { model, fingerprint })
        } else {
            Err(Error::ModelFormat(
                "unrecognized model container magic".into(),
            ))
        }
    }
}

/// What [`verify_stage`] hands back: the scored run plus the feature
/// vectors it computed along the way (Fourier-Bessel descriptors for the
/// discriminant, subspace coordinates for the PCA baseline).
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationArtifacts {
    pub run: VerificationRun,
    pub gallery_ids: Vec<String>,
    pub gallery_features: Vec<Vec<f64>>,
    /// Rows align with `run.probe_ids()`.
    pub probe_features: Vec<Vec<f64>>,
    /// Probes left out, with reasons — exclusions are reported, never silent.
    pub excluded_probes: Vec<(String, String)>,
}

/// Everything a finished experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub run: VerificationRun,
    pub roc: RocCurve,
    pub model: TrainedModel,
    pub fingerprint: String,
    pub gallery_ids: Vec<String>,
    pub gallery_features: Vec<Vec<f64>>,
    pub probe_features: Vec<Vec<f64>>,
    pub excluded_probes: Vec<(String, String)>,
    pub gallery_size: usize,
    pub probe_count: usize,
}

/// Similarity → distance-like score fed to the ≤-threshold confirm rule.
pub fn to_distance_score(similarity: f64) -> f64 {
    1.0 / (SCORE_EPSILON + similarity)
}

/// Register one dataset entry, applying eye noise first when configured.
fn prepare_face(entry: &DatasetEntry, eye_noise: Option<&EyeNoise>) -> Result<NormalizedFace> {
    let eyes = match eye_noise {
        Some(noise) => {
            let seed = derive_seed(noise.seed, &["eye-noise", &entry.image_id]);
            perturb_eyes(&entry.eyes, noise.mean_px, noise.sd_px, seed)?
        }
        None => entry.eyes,
    };
    let image = entry.load_image()?;
    register(&image, &eyes)
}

/// Gallery entries plus the distinct subjects in first-appearance order.
fn gallery_set<'a>(
    manifest: &'a DatasetManifest,
) -> Result<(Vec<&'a DatasetEntry>, Vec<String>)> {
    let gallery = manifest.partition(Partition::Gallery);
    if gallery.is_empty() {
        return Err(Error::Dataset("manifest has no gallery entries".into()));
    }
    let mut subjects: Vec<String> = Vec::new();
    for entry in &gallery {
        if !subjects.contains(&entry.subject_id) {
            subjects.push(entry.subject_id.clone());
        }
    }
    Ok((gallery, subjects))
}

/// Probes whose subject exists in the gallery, plus the excluded rest.
fn usable_probes<'a>(
    manifest: &'a DatasetManifest,
    subjects: &[String],
) -> Result<(Vec<&'a DatasetEntry>, Vec<(String, String)>)> {
    let mut excluded = Vec::new();
    let probes: Vec<&DatasetEntry> = manifest
        .probes()
        .into_iter()
        .filter(|p| {
            if subjects.contains(&p.subject_id) {
                true
            } else {
                excluded.push((
                    p.image_id.clone(),
                    format!("subject {} absent from gallery", p.subject_id),
                ));
                false
            }
        })
        .collect();
    if probes.is_empty() {
        return Err(Error::InvalidArgument(
            "no probes with gallery subjects".into(),
        ));
    }
    Ok((probes, excluded))
}

/// Train the configured classifier on the manifest's gallery partition.
pub fn train_stage(
    manifest: &DatasetManifest,
    config: &ExperimentConfig,
) -> Result<TrainedModel> {
    let (gallery, _) = gallery_set(manifest)?;
    let eye_noise = config.eye_noise.as_ref();
    let faces: Vec<NormalizedFace> = gallery
        .par_iter()
        .map(|e| prepare_face(e, eye_noise))
        .collect::<Result<_>>()?;
    let fingerprint = config.fingerprint();

    match config.classifier {
        Classifier::Pfld => {
            let bases =
                FaceBases::new(config.max_order, config.max_root, config.angular_step_deg)?;
            let descriptors: Vec<Vec<f64>> = faces
                .par_iter()
                .map(|f| extract_descriptor(f, config.mode, config.variant, &bases))
                .collect::<Result<_>>()?;
            let ids: Vec<String> = gallery.iter().map(|e| e.image_id.clone()).collect();
            let labels: Vec<String> = gallery.iter().map(|e| e.subject_id.clone()).collect();
            let matrix = DissimilarityMatrix::build(ids, &descriptors)?;
            Ok(TrainedModel::Pfld(train_pfld(
                &matrix,
                &labels,
                &fingerprint,
            )?))
        }
        Classifier::PcaBaseline => {
            let vectors: Vec<Vec<f64>> = faces
                .iter()
                .map(|f| f.image().pixels().to_vec())
                .collect();
            let sample = config.pca_sample_cap.min(vectors.len());
            let model = train_pca(&vectors, sample, config.pca_drop_leading, config.pca_seed)?;
            Ok(TrainedModel::PcaBaseline { model, fingerprint })
        }
    }
}

/// Score every usable probe against every gallery subject with an already
/// trained model. The manifest's gallery must be the one the model was
/// trained on; descriptor-affecting settings are guarded by fingerprint.
pub fn verify_stage(
    manifest: &DatasetManifest,
    config: &ExperimentConfig,
    model: &TrainedModel,
) -> Result<VerificationArtifacts> {
    let current = config.fingerprint();
    if model.fingerprint() != current {
        return Err(Error::FingerprintMismatch {
            model: model.fingerprint().to_string(),
            current,
        });
    }
    let (gallery, subjects) = gallery_set(manifest)?;
    let (probes, excluded_probes) = usable_probes(manifest, &subjects)?;

    let eye_noise = config.eye_noise.as_ref();
    let gallery_faces: Vec<NormalizedFace> = gallery
        .par_iter()
        .map(|e| prepare_face(e, eye_noise))
        .collect::<Result<_>>()?;
    let probe_faces: Vec<NormalizedFace> = probes
        .par_iter()
        .map(|e| {
            let face = prepare_face(e, eye_noise)?;
            Ok(match config.occlusion {
                Some(variant) => occlude(&face, variant),
                None => face,
            })
        })
        .collect::<Result<_>>()?;
    let gallery_ids: Vec<String> = gallery.iter().map(|e| e.image_id.clone()).collect();

    // Per-probe feature vectors and per-subject similarity scores.
    let (gallery_features, probe_features, similarity_rows) = match model {
        TrainedModel::Pfld(model) => {
            let bases =
                FaceBases::new(config.max_order, config.max_root, config.angular_step_deg)?;
            let gallery_descs: Vec<Vec<f64>> = gallery_faces
                .par_iter()
                .map(|f| extract_descriptor(f, config.mode, config.variant, &bases))
                .collect::<Result<_>>()?;
            if model.object_ids() != gallery_ids.as_slice() {
                return Err(Error::Dataset(
                    "gallery does not match the model's training objects".into(),
                ));
            }
            if model.subject_ids() != subjects.as_slice() {
                return Err(Error::Dataset(
                    "gallery subjects do not match the model's subjects".into(),
                ));
            }
            let descs: Vec<Vec<f64>> = probe_faces
                .par_iter()
                .map(|f| extract_descriptor(f, config.mode, config.variant, &bases))
                .collect::<Result<_>>()?;
            let rows: Vec<Vec<f64>> = descs
                .par_iter()
                .map(|desc| {
                    let embedded = embed_probe(desc, &gallery_descs)?;
                    model.score_probe(&embedded)
                })
                .collect::<Result<_>>()?;
            (gallery_descs, descs, rows)
        }
        TrainedModel::PcaBaseline { model, .. } => {
            let gallery_coords: Vec<Vec<f64>> = gallery_faces
                .iter()
                .map(|f| model.project(f.image().pixels()))
                .collect::<Result<_>>()?;
            let subject_of: Vec<usize> = gallery
                .iter()
                .map(|e| subjects.iter().position(|s| s == &e.subject_id).unwrap())
                .collect();
            let coords: Vec<Vec<f64>> = probe_faces
                .par_iter()
                .map(|f| model.project(f.image().pixels()))
                .collect::<Result<_>>()?;
            let rows: Vec<Vec<f64>> = coords
                .iter()
                .map(|c| {
                    let per_image =
                        crate::discriminant::inverse_distance_scores(c, &gallery_coords);
                    // A subject's score is its best gallery image's score.
                    let mut per_subject = vec![0.0_f64; subjects.len()];
                    for (score, &s) in per_image.iter().zip(&subject_of) {
                        per_subject[s] = per_subject[s].max(*score);
                    }
                    per_subject
                })
                .collect();
            (gallery_coords, coords, rows)
        }
    };

    let mut run = VerificationRun::new(subjects);
    for (entry, sims) in probes.iter().zip(similarity_rows) {
        let distances: Vec<f64> = sims.iter().map(|&s| to_distance_score(s)).collect();
        run.push_probe(&entry.image_id, &entry.subject_id, distances)?;
    }
    Ok(VerificationArtifacts {
        run,
        gallery_ids,
        gallery_features,
        probe_features,
        excluded_probes,
    })
}

/// Fourier-Bessel descriptors for every manifest entry under the run
/// conditions: eye noise everywhere, occlusion on probe partitions only.
pub fn extract_features(
    manifest: &DatasetManifest,
    config: &ExperimentConfig,
) -> Result<Vec<(String, Vec<f64>)>> {
    let bases = FaceBases::new(config.max_order, config.max_root, config.angular_step_deg)?;
    let eye_noise = config.eye_noise.as_ref();
    manifest
        .entries()
        .par_iter()
        .map(|entry| {
            let mut face = prepare_face(entry, eye_noise)?;
            if entry.partition != Partition::Gallery {
                if let Some(variant) = config.occlusion {
                    face = occlude(&face, variant);
                }
            }
            let desc = extract_descriptor(&face, config.mode, config.variant, &bases)?;
            Ok((entry.image_id.clone(), desc))
        })
        .collect()
}

/// Run the full verification experiment described by the config:
/// train on the gallery, score the probes, reduce to an ROC.
pub fn run_experiment(
    manifest: &DatasetManifest,
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome> {
    let model = train_stage(manifest, config)?;
    let artifacts = verify_stage(manifest, config, &model)?;
    let roc = build_roc(&artifacts.run)?;
    Ok(ExperimentOutcome {
        fingerprint: model.fingerprint().to_string(),
        gallery_size: artifacts.gallery_ids.len(),
        probe_count: artifacts.run.probe_count(),
        model,
        gallery_ids: artifacts.gallery_ids,
        gallery_features: artifacts.gallery_features,
        probe_features: artifacts.probe_features,
        excluded_probes: artifacts.excluded_probes,
        run: artifacts.run,
        roc,
    })
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Hex SHA-256 over the contents of several files in order — used to pin a
/// dataset's exact inputs in run manifests.
pub fn hash_files<P: AsRef<Path>>(paths: &[P]) -> Result<String> {
    let mut hasher = Sha256::new();
    for path in paths {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}
