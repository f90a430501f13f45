//! Discrete Fourier-Bessel transform of a raster disk.
//!
//! A region of radius `R` around a chosen center is resampled onto a regular
//! polar grid (bilinear interpolation, zero at the rim), then projected onto
//! the orthogonal basis `J_n(α_{n,i}·r/R)·{cos nθ, sin nθ}`. The coefficient
//! pair `(A_{n,i}, B_{n,i})` indexes angular frequency `n` and radial
//! frequency `i`. The synthesis direction ([`fbt_inverse`]) exists for
//! validation: forward/inverse round trips bound the quadrature error.

use crate::bessel::{bessel_j, RootTable};
use crate::error::{Error, Result};
use crate::raster::RasterImage;

/// Transform parameters. Defaults give 31 orders × 6 roots × {A, B} = 372
/// coefficients on a 120-column angular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FbtConfig {
    pub max_order: u32,
    pub max_root: usize,
    pub angular_step_deg: u32,
    /// Radial sample count; `None` selects one sample per pixel of radius
    /// (`ceil(R)`), matching source resolution.
    pub radial_samples: Option<usize>,
    /// Disk radius in pixels.
    pub region_radius: f64,
}

impl FbtConfig {
    pub fn with_radius(region_radius: f64) -> FbtConfig {
        FbtConfig {
            max_order: 30,
            max_root: 6,
            angular_step_deg: 3,
            radial_samples: None,
            region_radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_root == 0 {
            return Err(Error::InvalidArgument("max_root must be ≥ 1".into()));
        }
        if self.angular_step_deg == 0 || 360 % self.angular_step_deg != 0 {
            return Err(Error::InvalidArgument(format!(
                "angular step {}° must divide 360",
                self.angular_step_deg
            )));
        }
        if !(self.region_radius.is_finite() && self.region_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "region radius must be positive, got {}",
                self.region_radius
            )));
        }
        if self.radial_sample_count() < 8 {
            return Err(Error::InvalidArgument(
                "need at least 8 radial samples".into(),
            ));
        }
        Ok(())
    }

    pub fn radial_sample_count(&self) -> usize {
        self.radial_samples
            .unwrap_or_else(|| self.region_radius.ceil() as usize)
    }

    pub fn angular_sample_count(&self) -> usize {
        (360 / self.angular_step_deg) as usize
    }

    /// Length of the flattened raw-coefficient vector (A block plus B block).
    pub fn coefficient_len(&self) -> usize {
        2 * (self.max_order as usize + 1) * self.max_root
    }

    /// Canonical one-line rendering, used in descriptor-file headers and as
    /// fingerprint input. Field order is fixed; do not reorder.
    pub fn canonical_text(&self) -> String {
        format!(
            "max_order={};max_root={};angular_step_deg={};radial_samples={};region_radius={}",
            self.max_order,
            self.max_root,
            self.angular_step_deg,
            match self.radial_samples {
                Some(n) => n.to_string(),
                None => "auto".into(),
            },
            self.region_radius,
        )
    }
}

/// Precomputed tables for one configuration: roots, radial profiles,
/// normalization constants, and the angular cos/sin matrices. Immutable
/// after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct FbtBasis {
    config: FbtConfig,
    radii: Vec<f64>,
    delta_r: f64,
    delta_theta: f64,
    /// `J_n(α_{n,i}·r_j/R)`, indexed `[n][i][j]` flattened.
    profiles: Vec<f64>,
    /// `1/(πR²J₁²(α_{0,i}))` for n = 0, `2/(πR²J²_{n+1}(α_{n,i}))` otherwise.
    norms: Vec<f64>,
    /// `cos(nθ_k)` indexed `[n][k]` flattened; same layout for sin.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl FbtBasis {
    pub fn new(config: FbtConfig) -> Result<FbtBasis> {
        config.validate()?;
        let roots = RootTable::build(config.max_order, config.max_root)?;
        let nr = config.radial_sample_count();
        let nth = config.angular_sample_count();
        let r_max = config.region_radius;
        let delta_r = r_max / nr as f64;
        // Rim-inclusive grid: the last sample sits exactly at r = R, where
        // the boundary condition forces the value (and every profile) to 0,
        // so the Riemann sum behaves like a trapezoid rule there.
        let radii: Vec<f64> = (0..nr).map(|j| (j + 1) as f64 * delta_r).collect();
        let delta_theta = 2.0 * std::f64::consts::PI / nth as f64;

        let orders = config.max_order as usize + 1;
        let mut profiles = Vec::with_capacity(orders * config.max_root * nr);
        let mut norms = Vec::with_capacity(orders * config.max_root);
        for n in 0..=config.max_order {
            for i in 0..config.max_root {
                let alpha = roots.root(n, i);
                for &r in &radii {
                    profiles.push(bessel_j(n, alpha * r / r_max)?);
                }
                let edge = bessel_j(if n == 0 { 1 } else { n + 1 }, alpha)?;
                let factor = if n == 0 { 1.0 } else { 2.0 };
                norms.push(factor / (std::f64::consts::PI * r_max * r_max * edge * edge));
            }
        }

        let mut cos_table = Vec::with_capacity(orders * nth);
        let mut sin_table = Vec::with_capacity(orders * nth);
        for n in 0..orders {
            for k in 0..nth {
                let angle = n as f64 * k as f64 * delta_theta;
                cos_table.push(angle.cos());
                sin_table.push(angle.sin());
            }
        }

        Ok(FbtBasis {
            config,
            radii,
            delta_r,
            delta_theta,
            profiles,
            norms,
            cos_table,
            sin_table,
        })
    }

    pub fn config(&self) -> &FbtConfig {
        &self.config
    }

    #[inline]
    fn profile(&self, n: u32, i: usize) -> &[f64] {
        let nr = self.radii.len();
        let idx = (n as usize * self.config.max_root + i) * nr;
        &self.profiles[idx..idx + nr]
    }

    #[inline]
    fn norm(&self, n: u32, i: usize) -> f64 {
        self.norms[n as usize * self.config.max_root + i]
    }
}

/// Values on the regular polar grid, radial-major: `values[j * angular + k]`
/// holds the sample at radius index `j`, angle index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub radial: usize,
    pub angular: usize,
    pub values: Vec<f64>,
}

/// Coefficient matrices `A` and `B`, each `(max_order+1) × max_root`
/// row-major by order. `B`'s order-0 row is zero by construction (there is
/// no sine component at angular frequency 0).
#[derive(Debug, Clone, PartialEq)]
pub struct FbtDescriptor {
    max_order: u32,
    max_root: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl FbtDescriptor {
    pub fn zeros(max_order: u32, max_root: usize) -> FbtDescriptor {
        let len = (max_order as usize + 1) * max_root;
        FbtDescriptor {
            max_order,
            max_root,
            a: vec![0.0; len],
            b: vec![0.0; len],
        }
    }

    pub fn from_parts(max_order: u32, max_root: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let len = (max_order as usize + 1) * max_root;
        if a.len() != len || b.len() != len {
            return Err(Error::InvalidArgument(format!(
                "coefficient blocks must each hold {len} values"
            )));
        }
        if b[..max_root].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidArgument(
                "order-0 sine coefficients must be zero".into(),
            ));
        }
        Ok(FbtDescriptor {
            max_order,
            max_root,
            a,
            b,
        })
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn max_root(&self) -> usize {
        self.max_root
    }

    #[inline]
    pub fn a(&self, n: u32, i: usize) -> f64 {
        self.a[n as usize * self.max_root + i]
    }

    #[inline]
    pub fn b(&self, n: u32, i: usize) -> f64 {
        self.b[n as usize * self.max_root + i]
    }

    /// Deterministic vector form: the whole A block (order-major, then root
    /// index), followed by the B block in the same order. Defaults flatten
    /// to 2·31·6 = 372 values.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.a.len());
        out.extend_from_slice(&self.a);
        out.extend_from_slice(&self.b);
        out
    }

    /// Per-(n, i) magnitudes `√(A² + B²)`, half the length of [`flatten`].
    pub fn magnitudes(&self) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(&a, &b)| (a * a + b * b).sqrt())
            .collect()
    }
}

fn check_center(image: &RasterImage, cx: f64, cy: f64, radius: f64) -> Result<()> {
    let (w, h) = (image.width() as f64, image.height() as f64);
    let inside = cx >= 0.0 && cx <= w && cy >= 0.0 && cy <= h;
    let margin = cx.min(cy).min(w - cx).min(h - cy);
    if !inside || radius > margin + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "disk of radius {radius} at ({cx}, {cy}) does not fit inside a {}x{} image",
            image.width(),
            image.height()
        )));
    }
    Ok(())
}

/// Resample the disk of the basis' radius centered at `(cx, cy)` onto the
/// polar grid. Samples on the rim `r = R` are forced to zero (the basis
/// boundary condition), and positions outside the raster read as zero.
pub fn to_polar(image: &RasterImage, cx: f64, cy: f64, basis: &FbtBasis) -> Result<PolarGrid> {
    check_center(image, cx, cy, basis.config.region_radius)?;
    let nr = basis.radii.len();
    let nth = basis.config.angular_sample_count();
    let mut values = vec![0.0; nr * nth];
    for (j, &r) in basis.radii.iter().enumerate() {
        if j == nr - 1 {
            break; // rim row stays zero
        }
        for k in 0..nth {
            let theta = k as f64 * basis.delta_theta;
            let x = cx + r * theta.cos();
            let y = cy + r * theta.sin();
            values[j * nth + k] = image.bilinear(x, y);
        }
    }
    Ok(PolarGrid {
        radial: nr,
        angular: nth,
        values,
    })
}

/// Analysis: project the disk at `(cx, cy)` onto the basis by discrete
/// quadrature (Riemann sum with area weight `r·Δr·Δθ` and the orthogonality
/// normalizations baked into the basis).
pub fn fbt_forward(
    image: &RasterImage,
    cx: f64,
    cy: f64,
    basis: &FbtBasis,
) -> Result<FbtDescriptor> {
    let grid = to_polar(image, cx, cy, basis)?;
    Ok(forward_from_grid(&grid, basis))
}

/// Analysis from an already-sampled polar grid (the raster-independent half
/// of [`fbt_forward`]; also lets round-trip tests stay on the grid).
pub fn forward_from_grid(grid: &PolarGrid, basis: &FbtBasis) -> FbtDescriptor {
    let nr = basis.radii.len();
    let nth = basis.config.angular_sample_count();
    assert!(
        grid.radial == nr && grid.angular == nth,
        "polar grid does not match basis geometry"
    );
    let orders = basis.config.max_order as usize + 1;

    // Angular reduction first: C[j][n] = Σ_k v·cos(nθ_k)·Δθ and likewise S.
    let mut cos_acc = vec![0.0; nr * orders];
    let mut sin_acc = vec![0.0; nr * orders];
    for j in 0..nr {
        let row = &grid.values[j * nth..(j + 1) * nth];
        for n in 0..orders {
            let ct = &basis.cos_table[n * nth..(n + 1) * nth];
            let st = &basis.sin_table[n * nth..(n + 1) * nth];
            let mut c = 0.0;
            let mut s = 0.0;
            for k in 0..nth {
                c += row[k] * ct[k];
                s += row[k] * st[k];
            }
            cos_acc[j * orders + n] = c * basis.delta_theta;
            sin_acc[j * orders + n] = s * basis.delta_theta;
        }
    }

    let mut desc = FbtDescriptor::zeros(basis.config.max_order, basis.config.max_root);
    for n in 0..=basis.config.max_order {
        for i in 0..basis.config.max_root {
            let profile = basis.profile(n, i);
            let norm = basis.norm(n, i);
            let mut a = 0.0;
            let mut b = 0.0;
            for j in 0..nr {
                let weight = profile[j] * basis.radii[j] * basis.delta_r;
                a += weight * cos_acc[j * orders + n as usize];
                if n > 0 {
                    b += weight * sin_acc[j * orders + n as usize];
                }
            }
            let idx = n as usize * basis.config.max_root + i;
            desc.a[idx] = norm * a;
            desc.b[idx] = norm * b; // stays 0 for n = 0
        }
    }
    desc
}

/// Synthesis: evaluate the truncated double series on the polar grid.
pub fn fbt_inverse(descriptor: &FbtDescriptor, basis: &FbtBasis) -> PolarGrid {
    assert!(
        descriptor.max_order == basis.config.max_order
            && descriptor.max_root == basis.config.max_root,
        "descriptor does not match basis geometry"
    );
    let nr = basis.radii.len();
    let nth = basis.config.angular_sample_count();
    let orders = basis.config.max_order as usize + 1;

    // Radial contraction first: PA[n][j] = Σ_i A_{n,i}·J_n(α_{n,i}·r_j/R).
    let mut pa = vec![0.0; orders * nr];
    let mut pb = vec![0.0; orders * nr];
    for n in 0..=basis.config.max_order {
        for i in 0..basis.config.max_root {
            let a = descriptor.a(n, i);
            let b = descriptor.b(n, i);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let profile = basis.profile(n, i);
            for j in 0..nr {
                pa[n as usize * nr + j] += a * profile[j];
                pb[n as usize * nr + j] += b * profile[j];
            }
        }
    }

    let mut values = vec![0.0; nr * nth];
    for j in 0..nr {
        for k in 0..nth {
            let mut v = 0.0;
            for n in 0..orders {
                v += pa[n * nr + j] * basis.cos_table[n * nth + k]
                    + pb[n * nr + j] * basis.sin_table[n * nth + k];
            }
            values[j * nth + k] = v;
        }
    }
    PolarGrid {
        radial: nr,
        angular: nth,
        values,
    }
}
