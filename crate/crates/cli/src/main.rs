//! `fbface` — batch command-line harness for the Fourier-Bessel face
//! verification pipeline: synthetic data generation, dataset validation,
//! descriptor extraction, training, verification, and ROC plotting, plus a
//! `run` command composing the full experiment with a reproducibility
//! manifest.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fbface_core::dataset::{ingest, DatasetManifest, Partition, EYES_SIDECAR};
use fbface_core::experiment::{
    extract_features, hash_files, run_experiment, train_stage, verify_stage, Classifier,
    ExperimentConfig, ExperimentOutcome, EyeNoise, TrainedModel,
};
use fbface_core::face::{DescriptorMode, DescriptorVariant, OcclusionVariant};
use fbface_core::plot::write_roc_svg;
use fbface_core::synth::{write_dataset, SynthConfig};
use fbface_core::verification::{build_roc, RocCurve};
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Fallback output directory when `--out` is not given.
const OUT_DIR_ENV: &str = "FBFACE_OUT_DIR";

const FEATURES_FILE: &str = "descriptors.csv";
const MODEL_FILE: &str = "model.bin";
const ROC_FILE: &str = "roc.csv";
const SVG_FILE: &str = "roc.svg";
const RUN_MANIFEST_FILE: &str = "run-manifest.txt";

#[derive(Parser)]
#[command(
    name = "fbface",
    version,
    about = "Face verification with Fourier-Bessel descriptors in dissimilarity space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic face dataset with exact eye annotations.
    Synth {
        #[arg(long, default_value_t = 20)]
        subjects: usize,
        #[arg(long, default_value_t = 5)]
        images_per_subject: usize,
        /// Pixel noise standard deviation; also scales pose/lighting/
        /// expression variability (0 = every image of a subject identical).
        #[arg(long, default_value_t = 5.1)]
        noise_sd: f64,
        #[arg(long, default_value_t = 20050901)]
        seed: u64,
        /// Output directory (default: $FBFACE_OUT_DIR, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a dataset manifest and report what ingestion found.
    IngestCheck {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Write descriptors for every dataset entry to descriptors.csv.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (default: $FBFACE_OUT_DIR, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model on the gallery partition and save it to model.bin.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (default: $FBFACE_OUT_DIR, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score probes with a saved model and write roc.csv.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
        /// Model container written by `train` (or `run`).
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (default: $FBFACE_OUT_DIR, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render an ROC CSV as an SVG plot (roc.svg).
    RocPlot {
        #[arg(long)]
        roc: PathBuf,
        #[arg(long, default_value = "verification ROC")]
        title: String,
        /// Output directory (default: $FBFACE_OUT_DIR, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full experiment: train, verify, and write descriptors, model,
    /// ROC CSV + SVG, and a reproducibility run manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (default: $FBFACE_OUT_DIR, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    /// One whole-face disk.
    Global,
    /// Three eye-region disks.
    Local,
}

#[derive(Copy, Clone, ValueEnum)]
enum VariantArg {
    /// Raw cosine/sine coefficients (372 per disk at defaults).
    #[value(name = "raw_372", alias = "raw")]
    Raw372,
    /// Rotation-insensitive per-term magnitudes (186 per disk at defaults).
    #[value(name = "magnitude_186", alias = "magnitude")]
    Magnitude186,
}

#[derive(Copy, Clone, ValueEnum)]
enum ClassifierArg {
    /// Pseudo-Fisher discriminant in dissimilarity space.
    Pfld,
    /// Eigenface nearest-projection baseline.
    #[value(name = "pca_baseline")]
    PcaBaseline,
}

#[derive(Copy, Clone, ValueEnum)]
enum OcclusionArg {
    /// Keep the eye strip and the mouth region visible.
    #[value(name = "eye_mouth")]
    EyeMouth,
    /// Keep the mouth region and the nose column visible.
    #[value(name = "mouth_nose")]
    MouthNose,
}

/// Experiment settings; flag names mirror the config fields one-to-one.
#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long, value_enum, default_value = "global")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "raw_372")]
    descriptor_variant: VariantArg,
    #[arg(long, value_enum, default_value = "pfld")]
    classifier: ClassifierArg,
    #[arg(long, default_value_t = 30)]
    max_order: u32,
    #[arg(long, default_value_t = 6)]
    max_root: usize,
    #[arg(long, default_value_t = 3)]
    angular_step_deg: u32,
    /// Occlude probe faces before scoring.
    #[arg(long, value_enum)]
    occlusion: Option<OcclusionArg>,
    /// Mean synthetic eye-localization error in pixels (needs --eye-noise-sd).
    #[arg(long)]
    eye_noise_mean: Option<f64>,
    /// Standard deviation of the eye error in pixels (needs --eye-noise-mean).
    #[arg(long)]
    eye_noise_sd: Option<f64>,
    #[arg(long, default_value_t = 1)]
    eye_noise_seed: u64,
    #[arg(long, default_value_t = 700)]
    pca_sample_cap: usize,
    #[arg(long, default_value_t = 3)]
    pca_drop_leading: usize,
    #[arg(long, default_value_t = 7)]
    pca_seed: u64,
}

impl ConfigArgs {
    fn to_config(&self) -> Result<ExperimentConfig> {
        let eye_noise = match (self.eye_noise_mean, self.eye_noise_sd) {
            (None, None) => None,
            (Some(mean_px), Some(sd_px)) => Some(EyeNoise {
                mean_px,
                sd_px,
                seed: self.eye_noise_seed,
            }),
            _ => bail!("--eye-noise-mean and --eye-noise-sd must be given together"),
        };
        Ok(ExperimentConfig {
            mode: match self.mode {
                ModeArg::Global => DescriptorMode::Global,
                ModeArg::Local => DescriptorMode::Local,
            },
            variant: match self.descriptor_variant {
                VariantArg::Raw372 => DescriptorVariant::Raw,
                VariantArg::Magnitude186 => DescriptorVariant::Magnitude,
            },
            classifier: match self.classifier {
                ClassifierArg::Pfld => Classifier::Pfld,
                ClassifierArg::PcaBaseline => Classifier::PcaBaseline,
            },
            max_order: self.max_order,
            max_root: self.max_root,
            angular_step_deg: self.angular_step_deg,
            occlusion: self.occlusion.map(|o| match o {
                OcclusionArg::EyeMouth => OcclusionVariant::EyeMouth,
                OcclusionArg::MouthNose => OcclusionVariant::MouthNose,
            }),
            eye_noise,
            pca_sample_cap: self.pca_sample_cap,
            pca_drop_leading: self.pca_drop_leading,
            pca_seed: self.pca_seed,
        })
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            subjects,
            images_per_subject,
            noise_sd,
            seed,
            out,
        } => cmd_synth(subjects, images_per_subject, noise_sd, seed, out),
        Command::IngestCheck { manifest } => cmd_ingest_check(&manifest),
        Command::Extract {
            manifest,
            config,
            out,
        } => cmd_extract(&manifest, &config, out),
        Command::Train {
            manifest,
            config,
            out,
        } => cmd_train(&manifest, &config, out),
        Command::Verify {
            manifest,
            model,
            config,
            out,
        } => cmd_verify(&manifest, &model, &config, out),
        Command::RocPlot { roc, title, out } => cmd_roc_plot(&roc, &title, out),
        Command::Run {
            manifest,
            config,
            out,
        } => cmd_run(&manifest, &config, out),
    }
}

fn resolve_out_dir(flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let manifest = ingest(path)?;
    for line in manifest.fill_report() {
        println!("note: {line}");
    }
    Ok(manifest)
}

fn cmd_synth(
    subjects: usize,
    images_per_subject: usize,
    noise_sd: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let dir = resolve_out_dir(out)?;
    let config = SynthConfig {
        subjects,
        images_per_subject,
        noise_sd,
        seed,
    };
    let manifest_path = write_dataset(&config, &dir)?;
    println!(
        "wrote {} images for {subjects} subjects under {}",
        subjects * images_per_subject,
        dir.display()
    );
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

fn cmd_ingest_check(manifest_path: &Path) -> Result<()> {
    let manifest = load_manifest(manifest_path)?;
    let entries = manifest.entries();
    let mut subjects: Vec<&str> = entries.iter().map(|e| e.subject_id.as_str()).collect();
    subjects.sort_unstable();
    subjects.dedup();
    println!(
        "{} entries, {} subjects, root {}",
        entries.len(),
        subjects.len(),
        manifest.root().display()
    );
    for partition in [
        Partition::Gallery,
        Partition::ProbeFb,
        Partition::ProbeDup1,
        Partition::ProbeDup2,
        Partition::ProbeFc,
        Partition::Custom,
    ] {
        let count = manifest.partition(partition).len();
        if count > 0 {
            println!("  {}: {count}", partition.as_str());
        }
    }
    println!("ok");
    Ok(())
}

/// Write feature vectors as CSV: comment lines carry the configuration,
/// then one row per image with its id, subject, partition, and values.
fn write_features_csv(
    path: &Path,
    manifest: &DatasetManifest,
    config: &ExperimentConfig,
    features: &[(String, Vec<f64>)],
) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "# fbface-features v1")?;
    writeln!(file, "# fingerprint={}", config.fingerprint())?;
    writeln!(file, "# config={}", config.fingerprint_text())?;
    let width = features.first().map_or(0, |(_, v)| v.len());
    let mut writer = csv::Writer::from_writer(file);
    let mut header = vec![
        "image_id".to_string(),
        "subject_id".to_string(),
        "partition".to_string(),
    ];
    header.extend((0..width).map(|i| format!("f{i}")));
    writer.write_record(&header)?;
    for (image_id, values) in features {
        let entry = manifest
            .get(image_id)
            .with_context(|| format!("feature row {image_id} missing from the manifest"))?;
        let mut record = vec![
            entry.image_id.clone(),
            entry.subject_id.clone(),
            entry.partition.as_str().to_string(),
        ];
        record.extend(values.iter().map(|v| v.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

fn cmd_extract(manifest_path: &Path, args: &ConfigArgs, out: Option<PathBuf>) -> Result<()> {
    let dir = resolve_out_dir(out)?;
    let manifest = load_manifest(manifest_path)?;
    let config = args.to_config()?;
    let features = extract_features(&manifest, &config)?;
    let path = dir.join(FEATURES_FILE);
    write_features_csv(&path, &manifest, &config, &features)?;
    println!(
        "wrote {} descriptor rows ({} values each) to {}",
        features.len(),
        features.first().map_or(0, |(_, v)| v.len()),
        path.display()
    );
    Ok(())
}

fn cmd_train(manifest_path: &Path, args: &ConfigArgs, out: Option<PathBuf>) -> Result<()> {
    let dir = resolve_out_dir(out)?;
    let manifest = load_manifest(manifest_path)?;
    let config = args.to_config()?;
    let model = train_stage(&manifest, &config)?;
    let path = dir.join(MODEL_FILE);
    model.save(&path)?;
    println!(
        "trained {} model, fingerprint {}",
        model.classifier().as_str(),
        model.fingerprint()
    );
    println!("model: {}", path.display());
    Ok(())
}

fn cmd_verify(
    manifest_path: &Path,
    model_path: &Path,
    args: &ConfigArgs,
    out: Option<PathBuf>,
) -> Result<()> {
    let dir = resolve_out_dir(out)?;
    let manifest = load_manifest(manifest_path)?;
    let config = args.to_config()?;
    let model = TrainedModel::load(model_path)?;
    let artifacts = verify_stage(&manifest, &config, &model)?;
    for (id, reason) in &artifacts.excluded_probes {
        println!("excluded probe {id}: {reason}");
    }
    let roc = build_roc(&artifacts.run)?;
    let path = dir.join(ROC_FILE);
    roc.write_csv(&path)?;
    println!(
        "scored {} probes against {} subjects; P_V at P_F <= 0.10: {:.4}",
        artifacts.run.probe_count(),
        artifacts.run.subject_ids().len(),
        roc.pv_at_pf(0.10)
    );
    println!("roc: {}", path.display());
    Ok(())
}

fn cmd_roc_plot(roc_path: &Path, title: &str, out: Option<PathBuf>) -> Result<()> {
    let dir = resolve_out_dir(out)?;
    let roc = RocCurve::read_csv(roc_path)?;
    let path = dir.join(SVG_FILE);
    write_roc_svg(&roc, title, &path)?;
    println!("plot: {}", path.display());
    Ok(())
}

fn cmd_run(manifest_path: &Path, args: &ConfigArgs, out: Option<PathBuf>) -> Result<()> {
    let dir = resolve_out_dir(out)?;
    let run_manifest_path = dir.join(RUN_MANIFEST_FILE);
    match run_pipeline(manifest_path, args, &dir) {
        Ok(report) => {
            std::fs::write(&run_manifest_path, report)
                .with_context(|| format!("writing {}", run_manifest_path.display()))?;
            println!("run manifest: {}", run_manifest_path.display());
            Ok(())
        }
        Err(e) => {
            // Mark whatever was already written as not trustworthy.
            let report = format!(
                "# fbface-run v1\nstatus: failed\nerror: {e:#}\n\
                 note: files in this directory are partial artifacts of a failed run\n"
            );
            let _ = std::fs::write(&run_manifest_path, report);
            Err(e)
        }
    }
}

fn run_pipeline(manifest_path: &Path, args: &ConfigArgs, dir: &Path) -> Result<String> {
    let manifest = load_manifest(manifest_path)?;
    let config = args.to_config()?;
    let outcome = run_experiment(&manifest, &config)?;
    for (id, reason) in &outcome.excluded_probes {
        println!("excluded probe {id}: {reason}");
    }

    // Feature rows: gallery first, probes after, both in manifest order.
    let mut features: Vec<(String, Vec<f64>)> = Vec::new();
    for (id, values) in outcome.gallery_ids.iter().zip(&outcome.gallery_features) {
        features.push((id.clone(), values.clone()));
    }
    for (id, values) in outcome.run.probe_ids().iter().zip(&outcome.probe_features) {
        features.push((id.clone(), values.clone()));
    }
    write_features_csv(&dir.join(FEATURES_FILE), &manifest, &config, &features)?;
    outcome.model.save(&dir.join(MODEL_FILE))?;
    outcome.roc.write_csv(&dir.join(ROC_FILE))?;
    let title = format!(
        "{} / {} / {}",
        config.classifier.as_str(),
        config.mode.as_str(),
        config.variant.as_str()
    );
    write_roc_svg(&outcome.roc, &title, &dir.join(SVG_FILE))?;
    println!(
        "scored {} probes against {} subjects; P_V at P_F <= 0.10: {:.4}",
        outcome.probe_count,
        outcome.run.subject_ids().len(),
        outcome.roc.pv_at_pf(0.10)
    );

    run_report(manifest_path, &manifest, &config, &outcome)
}

/// Compose the reproducibility record: configuration fingerprint, seeds,
/// and a hash over every input file the run read.
fn run_report(
    manifest_path: &Path,
    manifest: &DatasetManifest,
    config: &ExperimentConfig,
    outcome: &ExperimentOutcome,
) -> Result<String> {
    let mut inputs: Vec<PathBuf> = vec![manifest_path.to_path_buf()];
    let sidecar = manifest.root().join(EYES_SIDECAR);
    if sidecar.exists() {
        inputs.push(sidecar);
    }
    inputs.extend(manifest.entries().iter().map(|e| e.image_path.clone()));
    let input_hash = hash_files(&inputs)?;

    let mut report = String::new();
    report.push_str("# fbface-run v1\n");
    report.push_str("status: ok\n");
    report.push_str(&format!(
        "dataset_manifest: {}\n",
        manifest_path.display()
    ));
    report.push_str(&format!("input_hash: {input_hash}\n"));
    report.push_str(&format!("config_fingerprint: {}\n", outcome.fingerprint));
    report.push_str(&format!("classifier: {}\n", config.classifier.as_str()));
    match config.classifier {
        Classifier::Pfld => {
            report.push_str(&format!("mode: {}\n", config.mode.as_str()));
            report.push_str(&format!(
                "descriptor_variant: {}\n",
                config.variant.as_str()
            ));
            report.push_str(&format!(
                "fbt: max_order={};max_root={};angular_step_deg={}\n",
                config.max_order, config.max_root, config.angular_step_deg
            ));
            report.push_str("pca: unused\n");
        }
        Classifier::PcaBaseline => {
            report.push_str("fbt: ignored\n");
            report.push_str(&format!(
                "pca: sample_cap={};drop_leading={};seed={}\n",
                config.pca_sample_cap, config.pca_drop_leading, config.pca_seed
            ));
        }
    }
    match config.occlusion {
        Some(v) => report.push_str(&format!("occlusion: {}\n", v.as_str())),
        None => report.push_str("occlusion: none\n"),
    }
    match &config.eye_noise {
        Some(n) => report.push_str(&format!(
            "eye_noise: mean_px={};sd_px={};seed={}\n",
            n.mean_px, n.sd_px, n.seed
        )),
        None => report.push_str("eye_noise: none\n"),
    }
    report.push_str(&format!("gallery_size: {}\n", outcome.gallery_size));
    report.push_str(&format!("probe_count: {}\n", outcome.probe_count));
    report.push_str(&format!(
        "excluded_probe_count: {}\n",
        outcome.excluded_probes.len()
    ));
    for (id, reason) in &outcome.excluded_probes {
        report.push_str(&format!("excluded: {id} ({reason})\n"));
    }
    for line in manifest.fill_report() {
        report.push_str(&format!("filled_eyes: {line}\n"));
    }
    report.push_str(&format!(
        "pv_at_pf_0.10: {}\n",
        outcome.roc.pv_at_pf(0.10)
    ));
    report.push_str(&format!(
        "artifacts: {FEATURES_FILE}, {MODEL_FILE}, {ROC_FILE}, {SVG_FILE}\n"
    ));
    Ok(report)
}
