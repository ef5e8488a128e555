//! Sensitivity calibration and keyed Laplace noise.
//!
//! Every noise value is a pure function of a 64-bit seed and the grid
//! coordinates it perturbs. Sequential and parallel pixelizers therefore draw
//! identical noise for the same grid no matter how the work is scheduled.

use crate::error::{Error, Result};

/// Privacy and tiling parameters `(ε, m, b, n)`.
///
/// Complex-region subgrids reuse `m` and `ε` unchanged; only the tile side
/// shrinks to `b / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyParams {
    epsilon: f64,
    max_changed: u32,
    side: usize,
    subgrid_factor: usize,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, max_changed: u32, side: usize, subgrid_factor: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive and finite, got {epsilon}")));
        }
        if max_changed == 0 {
            return Err(Error::invalid("m (maximum changed pixels) must be at least 1"));
        }
        if side == 0 {
            return Err(Error::invalid("grid side must be at least 1"));
        }
        if subgrid_factor == 0 || subgrid_factor > side || !side.is_multiple_of(subgrid_factor) {
            return Err(Error::invalid(format!(
                "subgrid factor {subgrid_factor} must divide grid side {side}"
            )));
        }
        Ok(Self {
            epsilon,
            max_changed,
            side,
            subgrid_factor,
        })
    }

    /// Parameters for the uniform pixelizers (`n = 1`).
    pub fn uniform(epsilon: f64, max_changed: u32, side: usize) -> Result<Self> {
        Self::new(epsilon, max_changed, side, 1)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_changed(&self) -> u32 {
        self.max_changed
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn subgrid_factor(&self) -> usize {
        self.subgrid_factor
    }

    /// Subgrid side `b / n`.
    pub fn sub_side(&self) -> usize {
        self.side / self.subgrid_factor
    }

    pub fn grid_scale(&self) -> NoiseScale {
        let delta = sensitivity(self.side, self.max_changed);
        NoiseScale {
            delta,
            sigma: delta / self.epsilon,
        }
    }

    pub fn subgrid_scale(&self) -> NoiseScale {
        let delta = subgrid_sensitivity(self);
        NoiseScale {
            delta,
            sigma: delta / self.epsilon,
        }
    }
}

/// Sensitivity and the Laplace scale calibrated from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseScale {
    pub delta: f64,
    pub sigma: f64,
}

/// Maximum change of one grid mean when at most `m` pixels of a `b × b`
/// grid change: `255·m / b²`.
pub fn sensitivity(side: usize, max_changed: u32) -> f64 {
    255.0 * max_changed as f64 / (side * side) as f64
}

/// Sensitivity of a complex-region subgrid mean, `255·m / (b/n)²`.
pub fn subgrid_sensitivity(params: &PrivacyParams) -> f64 {
    sensitivity(params.sub_side(), params.max_changed)
}

pub fn noise_scale(delta: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("sensitivity must be positive and finite, got {delta}")));
    }
    Ok(delta / epsilon)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NoiseSeed(pub u64);

/// Grid `(row, col)` plus subgrid `(sub_row, sub_col)`; whole grids use
/// subgrid `(0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NoiseKey {
    pub row: u32,
    pub col: u32,
    pub sub_row: u32,
    pub sub_col: u32,
}

impl NoiseKey {
    pub fn grid(row: usize, col: usize) -> Self {
        Self::subgrid(row, col, 0, 0)
    }

    pub fn subgrid(row: usize, col: usize, sub_row: usize, sub_col: usize) -> Self {
        Self {
            row: row as u32,
            col: col as u32,
            sub_row: sub_row as u32,
            sub_col: sub_col as u32,
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 pseudorandom bits for `(seed, key)`.
#[inline]
pub fn keyed_bits(seed: NoiseSeed, key: NoiseKey) -> u64 {
    let mut h = splitmix64(seed.0 ^ 0x6470_7078_6e6f_6973);
    for word in [key.row, key.col, key.sub_row, key.sub_col] {
        h = splitmix64(h ^ word as u64);
    }
    h
}

const HALF_OPEN_LIMIT: f64 = 0.5 - 1.0 / (1u64 << 53) as f64;

/// Uniform draw in `(-0.5, 0.5)` for `(seed, key)`.
#[inline]
pub fn keyed_uniform(seed: NoiseSeed, key: NoiseKey) -> f64 {
    let unit = (keyed_bits(seed, key) >> 11) as f64 / (1u64 << 53) as f64;
    (unit - 0.5).clamp(-HALF_OPEN_LIMIT, HALF_OPEN_LIMIT)
}

/// Inverse CDF of Laplace(0, σ) at `0.5 + u`.
#[inline]
pub fn laplace_from_uniform(u: f64, sigma: f64) -> f64 {
    sigma * (-u.signum() * (-2.0 * u.abs()).ln_1p())
}

/// Laplace(0, σ) noise keyed by `(seed, key)`.
pub fn laplace_at(seed: NoiseSeed, key: NoiseKey, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("noise scale must be positive and finite, got {sigma}")));
    }
    Ok(laplace_from_uniform(keyed_uniform(seed, key), sigma))
}

/// Where pixelizers get their per-grid noise.
pub trait NoiseSource: Sync {
    fn noise(&self, key: NoiseKey, sigma: f64) -> f64;
}

impl NoiseSource for NoiseSeed {
    #[inline]
    fn noise(&self, key: NoiseKey, sigma: f64) -> f64 {
        laplace_from_uniform(keyed_uniform(*self, key), sigma)
    }
}

/// Exact means with no noise. Not private; for tests and diagnostics only.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoNoise;

impl NoiseSource for NoNoise {
    fn noise(&self, _key: NoiseKey, _sigma: f64) -> f64 {
        0.0
    }
}

/// Either keyed Laplace noise or none at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Noise {
    Keyed(NoiseSeed),
    Disabled,
}

impl NoiseSource for Noise {
    #[inline]
    fn noise(&self, key: NoiseKey, sigma: f64) -> f64 {
        match self {
            Noise::Keyed(seed) => seed.noise(key, sigma),
            Noise::Disabled => 0.0,
        }
    }
}
