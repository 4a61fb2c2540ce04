//! Reproducible Gaussian pixel noise.
//!
//! The generator is pinned (SplitMix64 feeding a Box-Muller transform) so a
//! noisy dataset can be regenerated bit-for-bit from `(seed, image index)` in
//! any language.

use crate::error::{Error, Result};
use crate::image::Image;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Default noise standard deviation in pixel-intensity units (variance 10^4).
pub const DEFAULT_SIGMA: f64 = 100.0;

/// One SplitMix64 step: returns `(output, next_state)`.
#[inline]
pub fn splitmix64_next(state: u64) -> (u64, u64) {
    let next = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = next;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31), next)
}

/// Top 53 bits as a double in [0, 1), with 0 replaced by 2^-53 so the
/// logarithm in Box-Muller stays finite.
#[inline]
fn uniform_open(bits: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let k = bits >> 11;
    if k == 0 {
        SCALE
    } else {
        k as f64 * SCALE
    }
}

/// Standard-normal generator. Box-Muller yields pairs; both halves are
/// handed out in order (cosine branch first).
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    state: u64,
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare: None,
        }
    }

    /// Independent stream for one image of a dataset.
    pub fn for_image(seed: u64, index: u64) -> Self {
        Self::new(seed ^ index.wrapping_mul(GOLDEN_GAMMA))
    }

    fn next_u64(&mut self) -> u64 {
        let (v, s) = splitmix64_next(self.state);
        self.state = s;
        v
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = uniform_open(self.next_u64());
        let u2 = uniform_open(self.next_u64());
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Functional form: one standard-normal draw and the advanced generator.
pub fn gaussian_sample(mut rng: Gaussian) -> (f64, Gaussian) {
    let z = rng.sample();
    (z, rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub sigma: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma: DEFAULT_SIGMA,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        let cfg = Self { sigma, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Adds `sigma * z` to every pixel in row-major order, rounds half away from
/// zero and clamps to `0..=255`. `index` selects the per-image stream.
pub fn add_noise(image: &Image, cfg: &NoiseConfig, index: u64) -> Image {
    if cfg.sigma == 0.0 {
        return image.clone();
    }
    let mut rng = Gaussian::for_image(cfg.seed, index);
    image.map(|p| {
        let v = (f64::from(p) + cfg.sigma * rng.sample()).round();
        v.clamp(0.0, 255.0) as u8
    })
}
