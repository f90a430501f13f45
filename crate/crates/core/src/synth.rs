//! Synthetic face-like dataset generator.
//!
//! Each subject is a fixed arrangement of smooth Gaussian blobs in a
//! canonical frame (origin at the eye midpoint, x rightward, y downward,
//! unit interocular distance): a shared base face plus subject-specific
//! identity blobs — coarse shading over the cheeks/jaw/forehead and small
//! high-contrast marks around the eyes. Every image of a subject renders
//! those same blobs under per-image nuisance: geometry jitter (scale,
//! rotation, placement), an illumination gradient, lower-face expression
//! blobs, and pixel noise.
//!
//! All nuisance amplitudes scale linearly with `noise_sd`, so `noise_sd = 0`
//! renders every image of a subject bit-identically, and one knob moves the
//! dataset difficulty smoothly. Generation is deterministic: every subject
//! and image draws from its own stream derived by hashing the dataset seed,
//! so images may be rendered concurrently in any order.

use crate::error::{Error, Result};
use crate::face::EyeCoordinates;
use crate::raster::RasterImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Rendered image width in pixels.
pub const IMAGE_WIDTH: usize = 192;
/// Rendered image height in pixels.
pub const IMAGE_HEIGHT: usize = 224;
/// Nominal interocular distance in pixels.
const NOMINAL_IOD: f64 = 44.0;
/// Background/base intensity before blobs and noise.
const BASE_INTENSITY: f64 = 110.0;

/// Generation parameters. `noise_sd` is the per-pixel Gaussian noise
/// standard deviation in intensity units (0–255 scale); the same value,
/// divided by 255, scales every other nuisance amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub subjects: usize,
    pub images_per_subject: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

/// One generated image with its exact eye landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthImage {
    pub image_id: String,
    pub subject_id: String,
    pub image: RasterImage,
    pub eyes: EyeCoordinates,
}

/// An isotropic Gaussian bump in the canonical face frame.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Blob {
    x: f64,
    y: f64,
    sigma: f64,
    amp: f64,
}

/// Derive an independent 64-bit stream seed from a base seed and a list of
/// scope strings, by hashing. Used for per-subject and per-image streams
/// here and for per-image eye-noise streams in the experiment harness.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for part in parts {
        hasher.update([0xff]); // separator so ("ab","c") ≠ ("a","bc")
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// The base face every subject shares: oval, forehead, eye sockets, brows,
/// cheeks, nose, chin.
fn base_blobs() -> Vec<Blob> {
    let b = |x, y, sigma, amp| Blob { x, y, sigma, amp };
    vec![
        b(0.0, 0.55, 1.35, 45.0),   // head oval
        b(0.0, -0.55, 0.60, 30.0),  // forehead
        b(-0.5, 0.0, 0.17, -75.0),  // eye sockets
        b(0.5, 0.0, 0.17, -75.0),
        b(-0.5, -0.22, 0.15, -35.0), // brows
        b(0.5, -0.22, 0.15, -35.0),
        b(-0.575, 0.55, 0.28, 25.0), // cheeks
        b(0.575, 0.55, 0.28, 25.0),
        b(0.0, 0.35, 0.13, 40.0),   // nose ridge
        b(0.0, 0.62, 0.11, -25.0),  // nose tip
        b(0.0, 1.35, 0.32, 18.0),   // chin
    ]
}

/// Lower-face expression blobs (mouth, lip, smile folds, jaw shading),
/// jittered per image. They sit below the eye band on purpose: expression
/// is nuisance for the upper-face regions and signal only for whole-face
/// analysis.
fn expression_blobs() -> [Blob; 5] {
    [
        Blob { x: 0.0, y: 0.98, sigma: 0.20, amp: -65.0 },
        Blob { x: 0.0, y: 1.12, sigma: 0.16, amp: 30.0 },
        Blob { x: -0.45, y: 0.88, sigma: 0.20, amp: -30.0 },
        Blob { x: 0.45, y: 0.88, sigma: 0.20, amp: -30.0 },
        Blob { x: 0.0, y: 1.30, sigma: 0.28, amp: -25.0 },
    ]
}

/// Draw the subject's identity blobs. The draw order is part of the
/// dataset definition — reordering changes every generated face.
fn subject_identity_blobs(rng: &mut ChaCha8Rng) -> Vec<Blob> {
    let mut blobs = Vec::with_capacity(20);
    let signed = |rng: &mut ChaCha8Rng, magnitude: f64| {
        if rng.gen_range(0..2u32) == 0 {
            magnitude
        } else {
            -magnitude
        }
    };

    // Fine marks around each eye: three regular plus one smaller. These
    // carry most of the identity visible to the local regions.
    for sx in [-0.5, 0.5] {
        for mark in 0..4 {
            let x = sx + rng.gen_range(-0.18..0.18);
            let y = rng.gen_range(-0.15..0.15);
            let sigma = if mark < 3 {
                rng.gen_range(0.035..0.055)
            } else {
                rng.gen_range(0.03..0.045)
            };
            let magnitude = rng.gen_range(45.0..85.0);
            let amp = signed(rng, magnitude);
            blobs.push(Blob { x, y, sigma, amp });
        }
    }
    // Marks between the eyes / nose bridge.
    for _ in 0..3 {
        let x = rng.gen_range(-0.15..0.15);
        let y = -0.08 + rng.gen_range(-0.12..0.12);
        let sigma = rng.gen_range(0.035..0.055);
        let magnitude = rng.gen_range(35.0..70.0);
        let amp = signed(rng, magnitude);
        blobs.push(Blob { x, y, sigma, amp });
    }
    // Coarse shading: cheeks, nose length, jaw, forehead, lower face,
    // temples. Deliberately placed outside the three local disks so this
    // identity channel is visible only to whole-face analysis.
    for sx in [-0.70, 0.70] {
        let amp = rng.gen_range(-22.0..22.0);
        blobs.push(Blob { x: sx, y: 0.72, sigma: 0.28, amp });
    }
    {
        let y = 0.78 + rng.gen_range(-0.05..0.05);
        let sigma = rng.gen_range(0.12..0.2);
        let magnitude = rng.gen_range(15.0..30.0);
        let amp = signed(rng, magnitude);
        blobs.push(Blob { x: 0.0, y, sigma, amp });
    }
    for sx in [-0.8, 0.8] {
        let amp = rng.gen_range(-18.0..18.0);
        blobs.push(Blob { x: sx, y: 1.0, sigma: 0.3, amp });
    }
    {
        let amp = rng.gen_range(-30.0..30.0);
        blobs.push(Blob { x: 0.0, y: -0.85, sigma: 0.50, amp });
    }
    {
        let amp = rng.gen_range(-26.0..26.0);
        blobs.push(Blob { x: 0.0, y: 0.90, sigma: 1.00, amp });
    }
    for sx in [-0.62, 0.62] {
        let amp = rng.gen_range(-22.0..22.0);
        blobs.push(Blob { x: sx, y: -0.72, sigma: 0.35, amp });
    }
    blobs
}

/// Render one image of a subject. `identity` is the subject's blob set
/// (base + identity); the image stream drives geometry, illumination,
/// expression, and pixel noise, all scaled by `u = noise_sd / 255`.
fn render_image(
    identity: &[Blob],
    image_seed: u64,
    noise_sd: f64,
) -> (RasterImage, EyeCoordinates) {
    let mut rng = ChaCha8Rng::seed_from_u64(image_seed);
    let u = noise_sd / 255.0;
    let uni = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);

    let iod = NOMINAL_IOD * (1.0 + 2.5 * u * uni(&mut rng));
    let angle = (300.0 * u * uni(&mut rng)).to_radians();
    let mid_x = IMAGE_WIDTH as f64 / 2.0 + 300.0 * u * uni(&mut rng);
    let mid_y = 96.0 + 300.0 * u * uni(&mut rng);
    let grad_x = 350.0 * u * uni(&mut rng);
    let grad_y = 350.0 * u * uni(&mut rng);

    let mut blobs: Vec<Blob> = identity.to_vec();
    for base in expression_blobs() {
        let dx = uni(&mut rng);
        let dy = uni(&mut rng);
        let fa = uni(&mut rng);
        blobs.push(Blob {
            x: base.x + 9.0 * u * dx,
            y: base.y + 5.0 * u * dy,
            sigma: base.sigma,
            amp: base.amp * (1.0 + 45.0 * u * fa),
        });
    }

    let (sin_a, cos_a) = angle.sin_cos();
    let mut img = RasterImage::new(IMAGE_WIDTH, IMAGE_HEIGHT);
    let noise = if noise_sd > 0.0 {
        Some(Normal::new(0.0, noise_sd).expect("valid noise sd"))
    } else {
        None
    };
    for py in 0..IMAGE_HEIGHT {
        for px in 0..IMAGE_WIDTH {
            // Image pixel → canonical frame (inverse of the eye transform).
            let dx = (px as f64 - mid_x) / iod;
            let dy = (py as f64 - mid_y) / iod;
            let cx = dx * cos_a + dy * sin_a;
            let cy = -dx * sin_a + dy * cos_a;
            let mut v = BASE_INTENSITY + grad_x * cx + grad_y * cy;
            for blob in &blobs {
                let rx = cx - blob.x;
                let ry = cy - blob.y;
                v += blob.amp * (-(rx * rx + ry * ry) / (2.0 * blob.sigma * blob.sigma)).exp();
            }
            if let Some(n) = &noise {
                v += n.sample(&mut rng);
            }
            img.set(px, py, v.clamp(0.0, 255.0).round());
        }
    }

    // Exact landmarks: canonical (∓0.5, 0) through the same transform. The
    // subject's right eye (canonical −0.5) lands on the image-left side.
    let eye = |x: f64| (mid_x + iod * x * cos_a, mid_y + iod * x * sin_a);
    let eyes = EyeCoordinates::new(eye(0.5), eye(-0.5));
    (img, eyes)
}

/// Generate the full dataset in memory, ordered by subject then image
/// index. Deterministic in the config; images render in parallel.
pub fn generate(config: &SynthConfig) -> Result<Vec<SynthImage>> {
    if config.subjects < 2 {
        return Err(Error::InvalidArgument("need at least 2 subjects".into()));
    }
    if config.images_per_subject < 1 {
        return Err(Error::InvalidArgument(
            "need at least 1 image per subject".into(),
        ));
    }
    if !(config.noise_sd.is_finite() && config.noise_sd >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise sd must be non-negative, got {}",
            config.noise_sd
        )));
    }

    let identities: Vec<Vec<Blob>> = (0..config.subjects)
        .map(|s| {
            let seed = derive_seed(config.seed, &["subject", &s.to_string()]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut blobs = base_blobs();
            blobs.extend(subject_identity_blobs(&mut rng));
            blobs
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..config.subjects)
        .flat_map(|s| (0..config.images_per_subject).map(move |k| (s, k)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(s, k)| {
            let subject_id = format!("s{s:02}");
            let image_id = format!("{subject_id}_i{k}");
            let image_seed =
                derive_seed(config.seed, &["image", &s.to_string(), &k.to_string()]);
            let (image, eyes) = render_image(&identities[s], image_seed, config.noise_sd);
            SynthImage {
                image_id,
                subject_id,
                image,
                eyes,
            }
        })
        .collect())
}

/// Generate and write a dataset directory: one PGM per image, an
/// `eyes.csv` sidecar, and a versioned `manifest.csv` assigning the first
/// image of each subject to the gallery and the rest to the FB probe set.
/// Returns the manifest path.
pub fn write_dataset(config: &SynthConfig, dir: &Path) -> Result<PathBuf> {
    let images = generate(config)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    for item in &images {
        let path = dir.join(format!("{}.pgm", item.image_id));
        item.image.write_pgm(&path)?;
    }

    let eyes_path = dir.join("eyes.csv");
    {
        let mut f = std::fs::File::create(&eyes_path).map_err(|e| Error::io(&eyes_path, e))?;
        let mut text = String::from("image_id,left_x,left_y,right_x,right_y\n");
        for item in &images {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                item.image_id,
                item.eyes.left.0,
                item.eyes.left.1,
                item.eyes.right.0,
                item.eyes.right.1
            ));
        }
        f.write_all(text.as_bytes())
            .map_err(|e| Error::io(&eyes_path, e))?;
    }

    let manifest_path = dir.join("manifest.csv");
    {
        let mut f =
            std::fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let mut text = String::from("# fbface-manifest v1\n");
        text.push_str("image_id,subject_id,image_path,partition\n");
        for item in &images {
            let partition = if item.image_id.ends_with("_i0") {
                "gallery"
            } else {
                "probe_fb"
            };
            text.push_str(&format!(
                "{},{},{}.pgm,{}\n",
                item.image_id, item.subject_id, item.image_id, partition
            ));
        }
        f.write_all(text.as_bytes())
            .map_err(|e| Error::io(&manifest_path, e))?;
    }
    Ok(manifest_path)
}
