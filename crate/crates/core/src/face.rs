//! Face registration, photometric normalization, region geometry,
//! occlusion, and eye-coordinate perturbation.
//!
//! Every face is brought into a fixed 130×150 frame by the similarity
//! transform that maps its annotated eye centers onto two fixed target
//! pixels, masked by an ellipse that removes hair and background, histogram
//! equalized over the retained pixels, and rescaled to zero mean and unit
//! standard deviation. Descriptors are then read from fixed disks in this
//! frame: one whole-face disk, or three smaller disks over the eye band.

use crate::error::{Error, Result};
use crate::fbt::{fbt_forward, FbtBasis, FbtConfig};
use crate::raster::RasterImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

/// Width of the registered face frame in pixels.
pub const FRAME_WIDTH: usize = 130;
/// Height of the registered face frame in pixels.
pub const FRAME_HEIGHT: usize = 150;
/// Registration target for the subject's right eye (appears image-left).
pub const RIGHT_EYE_TARGET: (f64, f64) = (43.0, 60.0);
/// Registration target for the subject's left eye (appears image-right).
pub const LEFT_EYE_TARGET: (f64, f64) = (87.0, 60.0);
/// Eye pairs closer than this are considered degenerate annotations.
pub const MIN_EYE_DISTANCE: f64 = 8.0;

/// Elliptical retained-region mask: center and semi-axes in frame pixels.
const MASK_CENTER: (f64, f64) = (65.0, 80.0);
const MASK_SEMI_AXES: (f64, f64) = (58.0, 70.0);

/// Whole-face analysis disk.
pub const GLOBAL_CENTER: (f64, f64) = (65.0, 75.0);
pub const GLOBAL_RADIUS: f64 = 65.0;
/// The three local analysis disks share one radius.
pub const LOCAL_RADIUS: f64 = 28.0;

/// Annotated eye centers in source-image pixels. "Left"/"right" are the
/// subject's own left and right, so the right eye sits on the image-left
/// side of a frontal photograph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeCoordinates {
    pub left: (f64, f64),
    pub right: (f64, f64),
}

impl EyeCoordinates {
    pub fn new(left: (f64, f64), right: (f64, f64)) -> EyeCoordinates {
        EyeCoordinates { left, right }
    }

    fn validate(&self) -> Result<()> {
        let coords = [self.left.0, self.left.1, self.right.0, self.right.1];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Registration("eye coordinates must be finite".into()));
        }
        let dist = ((self.left.0 - self.right.0).powi(2)
            + (self.left.1 - self.right.1).powi(2))
        .sqrt();
        if dist < MIN_EYE_DISTANCE {
            return Err(Error::Registration(format!(
                "eye distance {dist:.2} px is below the {MIN_EYE_DISTANCE} px minimum"
            )));
        }
        Ok(())
    }
}

/// A registered, masked, equalized face in the fixed frame. Unmasked pixels
/// have zero mean and unit standard deviation; masked pixels hold 0, which
/// after standardization is also the mean gray.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFace {
    image: RasterImage,
    mask: Vec<bool>,
    eye_targets: [(f64, f64); 2],
}

impl NormalizedFace {
    pub fn image(&self) -> &RasterImage {
        &self.image
    }

    /// Row-major retained-pixel flags, same layout as the image.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_retained(&self, x: usize, y: usize) -> bool {
        self.mask[y * FRAME_WIDTH + x]
    }

    pub fn retained_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// The fixed registration pixels: right eye target, then left.
    pub fn eye_targets(&self) -> [(f64, f64); 2] {
        self.eye_targets
    }
}

/// Which descriptor layout to extract from a normalized face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorMode {
    /// One whole-face disk: 372 values at default transform settings.
    Global,
    /// Right-eye, between-eyes, and left-eye disks concatenated in that
    /// order: 1116 values at defaults.
    Local,
}

impl DescriptorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DescriptorMode::Global => "global",
            DescriptorMode::Local => "local",
        }
    }
}

/// How coefficient pairs are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorVariant {
    /// Cosine and sine coefficients side by side (372 per disk at defaults).
    Raw,
    /// Per-frequency magnitudes √(A²+B²) (186 per disk at defaults).
    Magnitude,
}

impl DescriptorVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            DescriptorVariant::Raw => "raw",
            DescriptorVariant::Magnitude => "magnitude",
        }
    }
}

/// Named analysis regions of the normalized frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionName {
    RightEye,
    BetweenEyes,
    LeftEye,
    Whole,
}

/// A disk to analyze: name, center in frame pixels, and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub name: RegionName,
    pub center: (f64, f64),
    pub radius: f64,
}

/// The three local disks in extraction order. Each sits on the eye line:
/// one per eye target and one at their midpoint.
pub fn local_regions() -> [RegionSpec; 3] {
    [
        RegionSpec {
            name: RegionName::RightEye,
            center: RIGHT_EYE_TARGET,
            radius: LOCAL_RADIUS,
        },
        RegionSpec {
            name: RegionName::BetweenEyes,
            center: (
                (RIGHT_EYE_TARGET.0 + LEFT_EYE_TARGET.0) / 2.0,
                (RIGHT_EYE_TARGET.1 + LEFT_EYE_TARGET.1) / 2.0,
            ),
            radius: LOCAL_RADIUS,
        },
        RegionSpec {
            name: RegionName::LeftEye,
            center: LEFT_EYE_TARGET,
            radius: LOCAL_RADIUS,
        },
    ]
}

/// The whole-face disk used by global extraction.
pub fn whole_face_region() -> RegionSpec {
    RegionSpec {
        name: RegionName::Whole,
        center: GLOBAL_CENTER,
        radius: GLOBAL_RADIUS,
    }
}

/// Precomputed transform bases for the two disk radii in use. Building the
/// Bessel tables costs more than one image, so callers construct this once
/// and share it across a dataset.
#[derive(Debug, Clone)]
pub struct FaceBases {
    global: FbtBasis,
    local: FbtBasis,
}

impl FaceBases {
    pub fn new(max_order: u32, max_root: usize, angular_step_deg: u32) -> Result<FaceBases> {
        let mut global_cfg = FbtConfig::with_radius(GLOBAL_RADIUS);
        global_cfg.max_order = max_order;
        global_cfg.max_root = max_root;
        global_cfg.angular_step_deg = angular_step_deg;
        let mut local_cfg = global_cfg.clone();
        local_cfg.region_radius = LOCAL_RADIUS;
        Ok(FaceBases {
            global: FbtBasis::new(global_cfg)?,
            local: FbtBasis::new(local_cfg)?,
        })
    }

    /// Paper-default settings: order ≤ 30, six roots, 3° angular step.
    pub fn standard() -> Result<FaceBases> {
        FaceBases::new(30, 6, 3)
    }

    pub fn global(&self) -> &FbtBasis {
        &self.global
    }

    pub fn local(&self) -> &FbtBasis {
        &self.local
    }

    /// Length of the descriptor produced by the given mode and variant.
    pub fn descriptor_len(&self, mode: DescriptorMode, variant: DescriptorVariant) -> usize {
        let per_disk = match variant {
            DescriptorVariant::Raw => self.global.config().coefficient_len(),
            DescriptorVariant::Magnitude => self.global.config().coefficient_len() / 2,
        };
        match mode {
            DescriptorMode::Global => per_disk,
            DescriptorMode::Local => 3 * per_disk,
        }
    }
}

/// Similarity-warp the source into the fixed frame so the annotated eyes
/// land exactly on the eye targets. Samples outside the source read as 0.
///
/// The transform is derived in complex form: with eyes and targets as
/// complex numbers, `src(p) = a·p + b` where `a = (eL−eR)/(tL−tR)` and
/// `b = eR − a·tR`. That is the unique translation + rotation + uniform
/// scale taking both targets to both eyes.
pub fn warp_to_frame(image: &RasterImage, eyes: &EyeCoordinates) -> Result<RasterImage> {
    eyes.validate()?;
    let (dx, dy) = (
        eyes.left.0 - eyes.right.0,
        eyes.left.1 - eyes.right.1,
    );
    let (tx, ty) = (
        LEFT_EYE_TARGET.0 - RIGHT_EYE_TARGET.0,
        LEFT_EYE_TARGET.1 - RIGHT_EYE_TARGET.1,
    );
    let denom = tx * tx + ty * ty;
    let a_re = (dx * tx + dy * ty) / denom;
    let a_im = (dy * tx - dx * ty) / denom;
    let b_re = eyes.right.0 - (a_re * RIGHT_EYE_TARGET.0 - a_im * RIGHT_EYE_TARGET.1);
    let b_im = eyes.right.1 - (a_re * RIGHT_EYE_TARGET.1 + a_im * RIGHT_EYE_TARGET.0);

    let mut out = RasterImage::new(FRAME_WIDTH, FRAME_HEIGHT);
    for y in 0..FRAME_HEIGHT {
        for x in 0..FRAME_WIDTH {
            let (px, py) = (x as f64, y as f64);
            let sx = a_re * px - a_im * py + b_re;
            let sy = a_re * py + a_im * px + b_im;
            out.set(x, y, image.bilinear(sx, sy));
        }
    }
    Ok(out)
}

/// Row-major elliptical mask of the fixed frame: `true` marks face pixels.
fn ellipse_mask() -> Vec<bool> {
    let mut mask = vec![false; FRAME_WIDTH * FRAME_HEIGHT];
    for y in 0..FRAME_HEIGHT {
        for x in 0..FRAME_WIDTH {
            let u = (x as f64 - MASK_CENTER.0) / MASK_SEMI_AXES.0;
            let v = (y as f64 - MASK_CENTER.1) / MASK_SEMI_AXES.1;
            mask[y * FRAME_WIDTH + x] = u * u + v * v <= 1.0;
        }
    }
    mask
}

/// Histogram-equalize a value set (256 bins over its own range), then
/// rescale to zero mean and unit standard deviation. The mapping is
/// non-decreasing in the input value.
fn equalized_zscore(values: &[f64]) -> Result<Vec<f64>> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        return Err(Error::Registration(
            "face region has no intensity variation".into(),
        ));
    }
    let bins: Vec<usize> = values
        .iter()
        .map(|&v| (((v - lo) / (hi - lo) * 255.0) as usize).min(255))
        .collect();
    let mut hist = [0usize; 256];
    for &b in &bins {
        hist[b] += 1;
    }
    let mut cdf = [0.0f64; 256];
    let mut acc = 0usize;
    for (slot, &count) in cdf.iter_mut().zip(&hist) {
        acc += count;
        *slot = acc as f64 / values.len() as f64;
    }
    let eq: Vec<f64> = bins.iter().map(|&b| cdf[b]).collect();
    let mean = eq.iter().sum::<f64>() / eq.len() as f64;
    let var = eq.iter().map(|&e| (e - mean) * (e - mean)).sum::<f64>() / eq.len() as f64;
    let std = var.sqrt();
    if std < 1e-12 {
        return Err(Error::Registration(
            "equalized face region is constant".into(),
        ));
    }
    Ok(eq.iter().map(|&e| (e - mean) / std).collect())
}

/// Full registration: warp into the frame, apply the elliptical mask,
/// histogram-equalize the retained pixels, and standardize them.
pub fn register(image: &RasterImage, eyes: &EyeCoordinates) -> Result<NormalizedFace> {
    let warped = warp_to_frame(image, eyes)?;
    let mask = ellipse_mask();
    let retained: Vec<f64> = warped
        .pixels()
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .collect();
    let normalized = equalized_zscore(&retained)?;
    let mut out = RasterImage::new(FRAME_WIDTH, FRAME_HEIGHT);
    let mut cursor = 0;
    for idx in 0..FRAME_WIDTH * FRAME_HEIGHT {
        if mask[idx] {
            out.set(idx % FRAME_WIDTH, idx / FRAME_WIDTH, normalized[cursor]);
            cursor += 1;
        }
    }
    Ok(NormalizedFace {
        image: out,
        mask,
        eye_targets: [RIGHT_EYE_TARGET, LEFT_EYE_TARGET],
    })
}

/// Occlusion patterns, each a union of axis-aligned rectangles in the
/// normalized frame covering more than half of the elliptical face area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OcclusionVariant {
    /// Right-eye patch plus the mouth/chin band.
    EyeMouth,
    /// Mouth/chin band plus a nose-bridge box.
    MouthNose,
}

impl OcclusionVariant {
    /// Rectangles as `(x0, x1, y0, y1)`, half-open on the upper bounds.
    ///
    /// The eye patch stops at x = 59 and y = 88 so that the left-eye disk
    /// (center x = 87, radius 28) and its bilinear support stay untouched;
    /// the mouth band starts at y = 89 for the same reason.
    pub fn rectangles(&self) -> &'static [(usize, usize, usize, usize)] {
        match self {
            OcclusionVariant::EyeMouth => &[(10, 59, 30, 88), (0, 130, 89, 150)],
            OcclusionVariant::MouthNose => &[(0, 130, 89, 150), (40, 90, 48, 89)],
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            OcclusionVariant::EyeMouth => "eye_mouth",
            OcclusionVariant::MouthNose => "mouth_nose",
        }
    }

    /// Fraction of the elliptical face area covered by this variant's
    /// rectangles. A pure geometry statement, independent of any one face.
    pub fn covered_face_fraction(&self) -> f64 {
        let ellipse = ellipse_mask();
        let face: usize = ellipse.iter().filter(|&&m| m).count();
        let mut covered = 0usize;
        for (idx, &inside) in ellipse.iter().enumerate() {
            if !inside {
                continue;
            }
            let (x, y) = (idx % FRAME_WIDTH, idx / FRAME_WIDTH);
            if self
                .rectangles()
                .iter()
                .any(|&(x0, x1, y0, y1)| x >= x0 && x < x1 && y >= y0 && y < y1)
            {
                covered += 1;
            }
        }
        covered as f64 / face as f64
    }
}

/// Zero out the variant's rectangles and mark them masked. The occluded
/// value 0 equals the post-normalization mean gray, and the geometry is
/// asserted to cover more than half the face area on every call.
pub fn occlude(face: &NormalizedFace, variant: OcclusionVariant) -> NormalizedFace {
    let fraction = variant.covered_face_fraction();
    assert!(
        fraction > 0.5,
        "occlusion {} covers only {:.1}% of the face",
        variant.as_str(),
        100.0 * fraction
    );
    let mut out = face.clone();
    for &(x0, x1, y0, y1) in variant.rectangles() {
        for y in y0..y1.min(FRAME_HEIGHT) {
            for x in x0..x1.min(FRAME_WIDTH) {
                out.image.set(x, y, 0.0);
                out.mask[y * FRAME_WIDTH + x] = false;
            }
        }
    }
    out
}

/// Displace both eyes by random vectors whose magnitudes follow a Gamma
/// distribution moment-matched to `(mean_px, sd_px)`, with directions
/// uniform on the circle. `mean_px = 0` leaves the coordinates unchanged;
/// `sd_px = 0` uses the constant magnitude `mean_px`. Deterministic in the
/// seed; the left eye consumes the first two draws.
pub fn perturb_eyes(
    eyes: &EyeCoordinates,
    mean_px: f64,
    sd_px: f64,
    seed: u64,
) -> Result<EyeCoordinates> {
    if mean_px < 0.0 || sd_px < 0.0 || !mean_px.is_finite() || !sd_px.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "error model must be non-negative, got mean {mean_px}, sd {sd_px}"
        )));
    }
    if mean_px == 0.0 {
        return Ok(*eyes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = if sd_px > 0.0 {
        // Moment fit: shape k = (m/s)², scale θ = s²/m.
        let shape = (mean_px / sd_px) * (mean_px / sd_px);
        let scale = sd_px * sd_px / mean_px;
        Some(Gamma::new(shape, scale).map_err(|e| {
            Error::InvalidArgument(format!("gamma moment fit failed: {e}"))
        })?)
    } else {
        None
    };
    let displace = |eye: (f64, f64), rng: &mut ChaCha8Rng| {
        let angle = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let magnitude = match &gamma {
            Some(g) => g.sample(rng),
            None => mean_px,
        };
        (
            eye.0 + magnitude * angle.cos(),
            eye.1 + magnitude * angle.sin(),
        )
    };
    Ok(EyeCoordinates {
        left: displace(eyes.left, &mut rng),
        right: displace(eyes.right, &mut rng),
    })
}

/// Extract the descriptor for one region disk.
fn region_descriptor(
    face: &NormalizedFace,
    region: &RegionSpec,
    basis: &FbtBasis,
    variant: DescriptorVariant,
) -> Result<Vec<f64>> {
    let desc = fbt_forward(face.image(), region.center.0, region.center.1, basis)?;
    Ok(match variant {
        DescriptorVariant::Raw => desc.flatten(),
        DescriptorVariant::Magnitude => desc.magnitudes(),
    })
}

/// Extract the configured descriptor from a normalized face: the whole-face
/// disk in global mode, or the right-eye / between-eyes / left-eye disks
/// concatenated in that fixed order in local mode.
pub fn extract_descriptor(
    face: &NormalizedFace,
    mode: DescriptorMode,
    variant: DescriptorVariant,
    bases: &FaceBases,
) -> Result<Vec<f64>> {
    match mode {
        DescriptorMode::Global => {
            region_descriptor(face, &whole_face_region(), bases.global(), variant)
        }
        DescriptorMode::Local => {
            let mut out = Vec::with_capacity(bases.descriptor_len(mode, variant));
            for region in &local_regions() {
                out.extend(region_descriptor(face, region, bases.local(), variant)?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A deterministic non-constant source image with eyes placeable
    /// anywhere: smooth gradients plus a few localized bumps.
    fn textured_image(w: usize, h: usize) -> RasterImage {
        let mut img = RasterImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let (fx, fy) = (x as f64, y as f64);
                let mut v = 100.0 + 0.3 * fx + 0.2 * fy;
                v += 40.0 * ((fx / 17.0).sin() * (fy / 13.0).cos());
                img.set(x, y, v);
            }
        }
        img
    }

    fn eyes_at_targets() -> EyeCoordinates {
        EyeCoordinates::new(LEFT_EYE_TARGET, RIGHT_EYE_TARGET)
    }

    #[test]
    fn identity_registration_copies_the_source_window() {
        let img = textured_image(200, 200);
        let warped = warp_to_frame(&img, &eyes_at_targets()).unwrap();
        assert_eq!(warped.width(), FRAME_WIDTH);
        assert_eq!(warped.height(), FRAME_HEIGHT);
        for y in 0..FRAME_HEIGHT {
            for x in 0..FRAME_WIDTH {
                assert!((warped.get(x, y) - img.get(x, y)).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn registered_face_has_zero_mean_unit_std_and_zero_masked_pixels() {
        let img = textured_image(256, 384);
        let eyes = EyeCoordinates::new((150.0, 130.0), (100.0, 128.0));
        let face = register(&img, &eyes).unwrap();
        assert_eq!(face.image().width(), FRAME_WIDTH);
        assert_eq!(face.image().height(), FRAME_HEIGHT);
        let retained: Vec<f64> = face
            .image()
            .pixels()
            .iter()
            .zip(face.mask())
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .collect();
        let mean = retained.iter().sum::<f64>() / retained.len() as f64;
        let var = retained.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>()
            / retained.len() as f64;
        assert!(mean.abs() <= 1e-6, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() <= 1e-6, "std {}", var.sqrt());
        for (idx, &m) in face.mask().iter().enumerate() {
            if !m {
                assert_eq!(face.image().pixels()[idx], 0.0);
            }
        }
    }

    #[test]
    fn degenerate_eyes_are_rejected() {
        let img = textured_image(100, 100);
        let eyes = EyeCoordinates::new((50.0, 50.0), (45.0, 50.0));
        assert!(register(&img, &eyes).is_err());
    }

    #[test]
    fn equalization_map_is_monotone() {
        let values: Vec<f64> = (0..500).map(|i| ((i * 7919) % 251) as f64).collect();
        let out = equalized_zscore(&values).unwrap();
        let mut pairs: Vec<(f64, f64)> = values.iter().cloned().zip(out).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pairs.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn constant_region_is_rejected() {
        assert!(equalized_zscore(&[5.0; 100]).is_err());
    }

    #[test]
    fn occlusion_covers_more_than_half_the_face() {
        for variant in [OcclusionVariant::EyeMouth, OcclusionVariant::MouthNose] {
            let f = variant.covered_face_fraction();
            assert!(f > 0.5, "{} covers {f}", variant.as_str());
        }
    }

    #[test]
    fn occlusion_is_idempotent_and_updates_the_mask() {
        let img = textured_image(256, 384);
        let eyes = EyeCoordinates::new((150.0, 130.0), (100.0, 128.0));
        let face = register(&img, &eyes).unwrap();
        let once = occlude(&face, OcclusionVariant::EyeMouth);
        let twice = occlude(&once, OcclusionVariant::EyeMouth);
        assert_eq!(once, twice);
        // Inside a rectangle: zeroed and masked out.
        assert_eq!(once.image().get(30, 100), 0.0);
        assert!(!once.is_retained(30, 100));
        assert!(once.retained_count() < face.retained_count());
    }

    #[test]
    fn occluding_an_all_zero_face_leaves_the_image_unchanged() {
        let face = NormalizedFace {
            image: RasterImage::new(FRAME_WIDTH, FRAME_HEIGHT),
            mask: ellipse_mask(),
            eye_targets: [RIGHT_EYE_TARGET, LEFT_EYE_TARGET],
        };
        let out = occlude(&face, OcclusionVariant::MouthNose);
        assert_eq!(out.image().pixels(), face.image().pixels());
    }

    #[test]
    fn perturbation_is_deterministic_and_zero_mean_is_identity() {
        let eyes = EyeCoordinates::new((87.0, 60.0), (43.0, 60.0));
        let a = perturb_eyes(&eyes, 3.6, 5.1, 99).unwrap();
        let b = perturb_eyes(&eyes, 3.6, 5.1, 99).unwrap();
        assert_eq!(a, b);
        let c = perturb_eyes(&eyes, 3.6, 5.1, 100).unwrap();
        assert_ne!(a, c);
        assert_eq!(perturb_eyes(&eyes, 0.0, 0.0, 7).unwrap(), eyes);
    }

    #[test]
    fn zero_sd_perturbation_moves_each_eye_by_the_exact_mean() {
        let eyes = EyeCoordinates::new((87.0, 60.0), (43.0, 60.0));
        let moved = perturb_eyes(&eyes, 2.5, 0.0, 3).unwrap();
        for (before, after) in [(eyes.left, moved.left), (eyes.right, moved.right)] {
            let d = ((after.0 - before.0).powi(2) + (after.1 - before.1).powi(2)).sqrt();
            assert!((d - 2.5).abs() <= 1e-9, "displacement {d}");
        }
    }

    #[test]
    fn descriptor_lengths_match_the_mode_and_variant() {
        let bases = FaceBases::standard().unwrap();
        assert_eq!(
            bases.descriptor_len(DescriptorMode::Global, DescriptorVariant::Raw),
            372
        );
        assert_eq!(
            bases.descriptor_len(DescriptorMode::Local, DescriptorVariant::Raw),
            1116
        );
        assert_eq!(
            bases.descriptor_len(DescriptorMode::Global, DescriptorVariant::Magnitude),
            186
        );
        let img = textured_image(256, 384);
        let eyes = EyeCoordinates::new((150.0, 130.0), (100.0, 128.0));
        let face = register(&img, &eyes).unwrap();
        let global =
            extract_descriptor(&face, DescriptorMode::Global, DescriptorVariant::Raw, &bases)
                .unwrap();
        assert_eq!(global.len(), 372);
        let local =
            extract_descriptor(&face, DescriptorMode::Local, DescriptorVariant::Raw, &bases)
                .unwrap();
        assert_eq!(local.len(), 1116);
    }

    #[test]
    fn zero_face_gives_zero_descriptor_in_both_modes() {
        let face = NormalizedFace {
            image: RasterImage::new(FRAME_WIDTH, FRAME_HEIGHT),
            mask: ellipse_mask(),
            eye_targets: [RIGHT_EYE_TARGET, LEFT_EYE_TARGET],
        };
        let bases = FaceBases::standard().unwrap();
        for mode in [DescriptorMode::Global, DescriptorMode::Local] {
            let d = extract_descriptor(&face, mode, DescriptorVariant::Raw, &bases).unwrap();
            assert!(d.iter().all(|&v| v == 0.0));
        }
    }
}
