//! Face verification via Fourier-Bessel descriptors in dissimilarity space.
//!
//! The pipeline, end to end: register a face image from its eye coordinates
//! into a fixed 130×150 frame ([`face`]), describe it with Fourier-Bessel
//! coefficients over one whole-face disk or three eye-region disks ([`fbt`],
//! on top of [`bessel`]), embed descriptors as vectors of Euclidean distances
//! to the training set ([`dissimilarity`]), classify with a pseudo-inverse
//! minimum-square-error discriminant or a PCA baseline ([`discriminant`]),
//! and evaluate with a gallery/probe verification protocol and ROC curves
//! ([`verification`]). [`synth`] generates deterministic face-like test
//! data, [`dataset`] loads manifests, and [`experiment`] orchestrates full
//! runs with reproducibility manifests.

pub mod bessel;
pub mod dataset;
pub mod discriminant;
pub mod dissimilarity;
pub mod error;
pub mod experiment;
pub mod face;
pub mod fbt;
pub mod plot;
pub mod raster;
pub mod synth;
pub mod verification;

pub use error::{Error, Result};
