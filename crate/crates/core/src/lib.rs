//! Differentially private image pixelization.
//!
//! Three pixelizers share one noise model: every `b × b` grid mean (or
//! `b/n × b/n` subgrid mean in complex regions) receives Laplace noise of
//! scale `255·m / (side²·ε)`, keyed by its grid coordinates so results never
//! depend on thread scheduling.
//!
//! - [`pixelize_reference`]: sequential grid loop, the oracle.
//! - [`pixelize_parallel`]: padded, data-parallel uniform pixelization.
//! - [`pixelize_adaptive`]: coarse grids in simple regions, subgrids in
//!   complex ones, driven by a [`RegionMask`].
//!
//! Outputs can be stored as compact `.dppx` records ([`record`]) holding only
//! the quantized noisy means, and redrawn bit-exactly with
//! [`record::reconstruct`].

pub mod adaptive;
pub mod error;
pub mod image;
pub mod metrics;
pub mod noise;
pub mod pgm;
pub mod record;
pub mod uniform;

pub use adaptive::{classify_regions, pixelize_adaptive, reassemble, AdaptiveMeans, RegionClassification};
pub use error::{Error, Result};
pub use image::{grid_dims, grid_mean, mask_grid_mean, mirror_pad, GrayImage, GridGeometry, RegionMask};
pub use metrics::{mse, ssim, MetricReport};
pub use noise::{
    laplace_at, noise_scale, sensitivity, subgrid_sensitivity, NoNoise, Noise, NoiseKey, NoiseScale, NoiseSeed,
    NoiseSource, PrivacyParams,
};
pub use record::{decode, encode, reconstruct, PixelRecord};
pub use uniform::{broadcast_means, pixelize_parallel, pixelize_reference, quantize, GridMeans};
