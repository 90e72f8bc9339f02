//! Lambertian LOS received-power model and noisy observation generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{incidence, LedTransmitter, Receiver, Scene, Vec3};

/// Received power of a single LED at the receiver in watts (equivalently
/// amperes with unit responsivity).
///
/// Both rectangle gates are inclusive at their boundaries: the value is
/// nonzero when theta <= FOV and phi <= pi/2, and exactly 0 otherwise.
pub fn received_power(led: &LedTransmitter, rx: &Receiver) -> Result<f64> {
    let v = incidence(rx.location, led.location);
    let r2 = v.norm_squared();
    if r2 == 0.0 {
        return Err(Error::coincident(rx.location));
    }
    let r = r2.sqrt();
    let cos_phi = v.dot(&led.orientation) / r;
    let cos_theta = -v.dot(&rx.orientation) / r;
    if cos_phi < 0.0 || cos_theta < rx.fov.cos() {
        return Ok(0.0);
    }
    let n = led.mode;
    // Vector form: P = -((n+1) A_R / 2pi) * (v.n_mk)^n (v.n_R) / ||v||^(n+3)
    let num = v.dot(&led.orientation).powf(n) * v.dot(&rx.orientation);
    let p = -(n + 1.0) * rx.area / (2.0 * std::f64::consts::PI) * num / r.powf(n + 3.0);
    Ok(p * led.tx_power)
}

/// The noiseless model vector p(theta): received power of every LED when the
/// receiver sits at `candidate`, keeping the scene's receiver orientation,
/// FOV, and area. Entries are ordered m fastest, then k (flat index k*M + m).
pub fn rss_vector(scene: &Scene, candidate: Vec3) -> Result<Vec<f64>> {
    let rx = Receiver {
        location: candidate,
        ..scene.receiver.clone()
    };
    scene
        .flat_leds()
        .map(|led| received_power(led, &rx))
        .collect()
}

/// A noisy RSS observation vector with its index mapping and provenance.
#[derive(Debug, Clone)]
pub struct Observation {
    /// Flat observation vector of length K*M, index = k*M + m.
    pub s: Vec<f64>,
    /// LEDs per VAP (M).
    pub leds_per_vap: usize,
    /// Number of VAPs (K).
    pub num_vaps: usize,
    /// Per-entry noise variance in A^2.
    pub noise_variance: f64,
    pub seed: u64,
}

impl Observation {
    pub fn new(
        s: Vec<f64>,
        leds_per_vap: usize,
        num_vaps: usize,
        noise_variance: f64,
        seed: u64,
    ) -> Result<Self> {
        if s.len() != leds_per_vap * num_vaps {
            return Err(Error::DimensionMismatch {
                expected: leds_per_vap * num_vaps,
                got: s.len(),
            });
        }
        if noise_variance < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise variance must be >= 0, got {noise_variance}"
            )));
        }
        Ok(Observation {
            s,
            leds_per_vap,
            num_vaps,
            noise_variance,
            seed,
        })
    }

    /// Flat index of LED m of VAP k.
    pub fn flat_index(&self, m: usize, k: usize) -> usize {
        k * self.leds_per_vap + m
    }

    /// Inverse of [`flat_index`](Self::flat_index): returns (m, k).
    pub fn led_indices(&self, flat: usize) -> (usize, usize) {
        (flat % self.leds_per_vap, flat / self.leds_per_vap)
    }

    /// Observed value for LED m of VAP k.
    pub fn value(&self, m: usize, k: usize) -> f64 {
        self.s[self.flat_index(m, k)]
    }
}

/// Draws a noisy observation s = p(theta) + n at the scene's true receiver
/// location, n ~ N(0, sigma^2 I). Deterministic given the seed; negative
/// entries are kept.
pub fn observe(scene: &Scene, noise_variance: f64, seed: u64) -> Result<Observation> {
    if noise_variance < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise variance must be >= 0, got {noise_variance}"
        )));
    }
    let mut s = rss_vector(scene, scene.receiver.location)?;
    if noise_variance > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_variance.sqrt()).expect("valid std dev");
        for entry in &mut s {
            *entry += normal.sample(&mut rng);
        }
    }
    let leds_per_vap = scene.vaps[0].len();
    Observation::new(s, leds_per_vap, scene.num_vaps(), noise_variance, seed)
}
