//! Maximum-likelihood RSS localization: NLS objective, analytical Jacobian,
//! damped Gauss-Newton iteration, and random-report-and-cluster (RRC)
//! multi-start initialization.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{rss_vector, Observation};
use crate::error::{Error, Result};
use crate::geometry::{incidence, Scene, Vec3};
use crate::linalg::pinv_solve;

/// Damped Gauss-Newton solver parameters.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    /// Step size eta in (0, 1].
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop when the step norm falls below this, in meters.
    pub step_tol: f64,
    /// Stop when the squared-residual change falls below this.
    pub residual_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_size: 0.2,
            max_iters: 200,
            step_tol: 1e-6,
            residual_tol: 1e-15,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step size must be in (0, 1], got {}",
                self.step_size
            )));
        }
        if !(self.step_tol > 0.0 && self.residual_tol > 0.0) {
            return Err(Error::InvalidConfig("solver tolerances must be > 0".into()));
        }
        Ok(())
    }
}

/// RRC multi-start parameters: draw `samples` uniform points in the room,
/// keep the best `keep`, cluster them into `clusters` centroids.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct RrcConfig {
    pub samples: usize,
    pub keep: usize,
    pub clusters: usize,
    pub kmeans_iters: usize,
    pub seed: u64,
}

impl Default for RrcConfig {
    fn default() -> Self {
        RrcConfig {
            samples: 500,
            keep: 100,
            clusters: 4,
            kmeans_iters: 25,
            seed: 0,
        }
    }
}

impl RrcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.keep == 0 || self.keep > self.samples {
            return Err(Error::InvalidConfig(format!(
                "need 0 < keep <= samples, got keep={} samples={}",
                self.keep, self.samples
            )));
        }
        if self.clusters > self.keep {
            return Err(Error::InvalidConfig(format!(
                "need clusters <= keep, got clusters={} keep={}",
                self.clusters, self.keep
            )));
        }
        Ok(())
    }
}

/// Outcome of one localization solve.
#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub estimate: Vec3,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the solved operator had rank < 3 at any point.
    pub degenerate: bool,
    pub init_point: Vec3,
    /// Which start produced this result, e.g. "weighted-aoa" or "rrc-centroid-2".
    pub init_label: String,
}

/// Squared residual ||s - p(theta)||^2 of a candidate location.
pub fn nls_objective(candidate: Vec3, obs: &Observation, scene: &Scene) -> Result<f64> {
    let model = rss_vector(scene, candidate)?;
    if model.len() != obs.s.len() {
        return Err(Error::DimensionMismatch {
            expected: model.len(),
            got: obs.s.len(),
        });
    }
    Ok(obs
        .s
        .iter()
        .zip(&model)
        .map(|(s, p)| (s - p) * (s - p))
        .sum())
}

/// Derivative of f(x; a,b,k,l,m,n) = (ax+k)^n (bx+l) / (x^2+m)^((n+3)/2)
/// with respect to x, in the closed polynomial form used by the analytical
/// Jacobian rows.
pub fn aux_derivative_g(x: f64, a: f64, b: f64, k: f64, l: f64, m: f64, n: f64) -> Result<f64> {
    let q = x * x + m;
    if q <= 0.0 {
        return Err(Error::Singularity);
    }
    let c0 = k * b * m + l * a * m * n;
    let c1 = b * m * n * a + b * m * a - l * k * (n + 3.0);
    let c2 = -(k * b * (n + 2.0) + 3.0 * l * a);
    let c3 = -2.0 * a * b;
    let poly = ((c3 * x + c2) * x + c1) * x + c0;
    Ok((a * x + k).powf(n - 1.0) * poly / q.powf((n + 5.0) / 2.0))
}

/// Analytical Jacobian of the model vector p(theta) with respect to the
/// receiver location: one (K*M) x 3 matrix, row order matching the flat
/// observation index. Rows of gated-off LEDs are zero.
pub fn jacobian(candidate: Vec3, scene: &Scene) -> Result<DMatrix<f64>> {
    let count = scene.led_count();
    let mut h = DMatrix::zeros(count, 3);
    let rx = &scene.receiver;
    for (row, led) in scene.flat_leds().enumerate() {
        let v = incidence(candidate, led.location);
        let r2 = v.norm_squared();
        if r2 == 0.0 {
            return Err(Error::coincident(candidate));
        }
        let r = r2.sqrt();
        let cos_phi = v.dot(&led.orientation) / r;
        let cos_theta = -v.dot(&rx.orientation) / r;
        if cos_phi < 0.0 || cos_theta < rx.fov.cos() {
            continue; // gated off: rect factors are 0 in this region
        }
        let n = led.mode;
        let scale = -(n + 1.0) * rx.area / (2.0 * std::f64::consts::PI) * led.tx_power;
        let nl = led.orientation.as_vec();
        let nr = rx.orientation.as_vec();
        // Each axis keeps its own incidence component as the variable and
        // folds the other two into the constants of the auxiliary function.
        for axis in 0..3 {
            let (i, j) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let g = aux_derivative_g(
                v[axis],
                nl[axis],
                nr[axis],
                v[i] * nl[i] + v[j] * nl[j],
                v[i] * nr[i] + v[j] * nr[j],
                v[i] * v[i] + v[j] * v[j],
                n,
            )?;
            h[(row, axis)] = scale * g;
        }
    }
    Ok(h)
}

/// Damped Gauss-Newton iteration on the NLS objective, starting from `init`.
///
/// The update is theta <- theta + eta H^+ (s - p(theta)), the
/// residual-decreasing direction. A step that increases the residual has its
/// eta halved up to 10 times before being rejected.
pub fn gauss_newton(
    obs: &Observation,
    scene: &Scene,
    init: Vec3,
    cfg: &SolverConfig,
) -> Result<EstimationResult> {
    cfg.validate()?;
    let s = DVector::from_column_slice(&obs.s);
    if s.len() != scene.led_count() {
        return Err(Error::DimensionMismatch {
            expected: scene.led_count(),
            got: s.len(),
        });
    }
    let residual_at = |theta: Vec3| -> Result<DVector<f64>> {
        let p = rss_vector(scene, theta)?;
        Ok(&s - DVector::from_column_slice(&p))
    };

    let mut theta = init;
    let mut residual = residual_at(theta)?;
    let mut res_norm2 = residual.norm_squared();
    let mut converged = false;
    let mut degenerate = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iters {
        iterations += 1;
        let h = jacobian(theta, scene)?;
        let (direction, rank) = pinv_solve(&h, &residual);
        if rank < 3 {
            degenerate = true;
        }
        if rank == 0 {
            break; // no observable direction left
        }

        let mut eta = cfg.step_size;
        let mut accepted = None;
        for _ in 0..=10 {
            let candidate = theta + direction * eta;
            match residual_at(candidate) {
                Ok(new_residual) => {
                    let new_norm2 = new_residual.norm_squared();
                    if new_norm2 <= res_norm2 {
                        accepted = Some((candidate, new_residual, new_norm2));
                        break;
                    }
                }
                Err(_) => {} // candidate landed on an LED; shrink the step
            }
            eta *= 0.5;
        }
        let Some((candidate, new_residual, new_norm2)) = accepted else {
            break;
        };
        let step_norm = (candidate - theta).norm();
        let change = res_norm2 - new_norm2;
        theta = candidate;
        residual = new_residual;
        res_norm2 = new_norm2;
        if step_norm < cfg.step_tol || change < cfg.residual_tol {
            converged = true;
            break;
        }
    }

    Ok(EstimationResult {
        estimate: theta,
        residual_norm: res_norm2.sqrt(),
        iterations,
        converged,
        degenerate,
        init_point: init,
        init_label: "direct".to_string(),
    })
}

/// Lloyd's k-means over 3D points. Deterministic given the seed; empty
/// clusters are re-seeded at the point currently farthest from its centroid.
pub fn kmeans(points: &[Vec3], clusters: usize, iters: usize, seed: u64) -> Result<Vec<Vec3>> {
    if clusters == 0 || clusters > points.len() {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= clusters <= points, got {} clusters for {} points",
            clusters,
            points.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec3> = points
        .choose_multiple(&mut rng, clusters)
        .cloned()
        .collect();

    let assign = |centroids: &[Vec3]| -> Vec<usize> {
        points
            .iter()
            .map(|p| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, c) in centroids.iter().enumerate() {
                    let d = (p - c).norm_squared();
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                best
            })
            .collect()
    };
    let wcss = |centroids: &[Vec3], assignment: &[usize]| -> f64 {
        points
            .iter()
            .zip(assignment)
            .map(|(p, &c)| (p - centroids[c]).norm_squared())
            .sum()
    };

    let mut assignment = assign(&centroids);
    let mut prev_wcss = wcss(&centroids, &assignment);
    for _ in 0..iters {
        // Update step: each centroid becomes the mean of its cluster.
        let mut sums = vec![Vec3::zeros(); clusters];
        let mut counts = vec![0usize; clusters];
        for (p, &c) in points.iter().zip(&assignment) {
            sums[c] += p;
            counts[c] += 1;
        }
        for c in 0..clusters {
            if counts[c] > 0 {
                centroids[c] = sums[c] / counts[c] as f64;
            }
        }
        // Re-seed empty clusters at the worst-fit point.
        for c in 0..clusters {
            if counts[c] == 0 {
                let (worst, _) = points
                    .iter()
                    .zip(&assignment)
                    .map(|(p, &a)| (p, (p - centroids[a]).norm_squared()))
                    .fold((points[0], 0.0), |acc, (p, d)| {
                        if d > acc.1 {
                            (*p, d)
                        } else {
                            acc
                        }
                    });
                centroids[c] = worst;
            }
        }
        let new_assignment = assign(&centroids);
        let new_wcss = wcss(&centroids, &new_assignment);
        debug_assert!(new_wcss <= prev_wcss + 1e-12 * (1.0 + prev_wcss));
        let stable = new_assignment == assignment;
        assignment = new_assignment;
        prev_wcss = new_wcss;
        if stable {
            break;
        }
    }
    Ok(centroids)
}

/// Random report and cluster: samples the room uniformly, keeps the points
/// with the smallest NLS objective, and returns their k-means centroids as
/// solver starting points.
pub fn rrc_init(obs: &Observation, scene: &Scene, cfg: &RrcConfig) -> Result<Vec<Vec3>> {
    cfg.validate()?;
    if cfg.clusters == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let [depth, width, height] = scene.room;
    let mut scored: Vec<(f64, Vec3)> = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let p = Vec3::new(
            rng.gen_range(0.0..depth),
            rng.gen_range(0.0..width),
            rng.gen_range(0.0..height),
        );
        let score = nls_objective(p, obs, scene)?;
        scored.push((score, p));
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let kept: Vec<Vec3> = scored.iter().take(cfg.keep).map(|(_, p)| *p).collect();
    kmeans(&kept, cfg.clusters, cfg.kmeans_iters, cfg.seed.wrapping_add(1))
}

/// Full RSS localization: Gauss-Newton from the AOA seed (when given) and
/// from every RRC centroid, returning the start with the smallest final
/// NLS objective. Ties break on the lexicographically lowest label.
pub fn rss_localize(
    obs: &Observation,
    scene: &Scene,
    solver_cfg: &SolverConfig,
    rrc_cfg: &RrcConfig,
    aoa_seed: Option<Vec3>,
) -> Result<EstimationResult> {
    let mut starts: Vec<(String, Vec3)> = Vec::new();
    if let Some(seed) = aoa_seed {
        starts.push(("weighted-aoa".to_string(), seed));
    }
    for (i, centroid) in rrc_init(obs, scene, rrc_cfg)?.into_iter().enumerate() {
        starts.push((format!("rrc-centroid-{i}"), centroid));
    }
    if starts.is_empty() {
        return Err(Error::NoInitialPoints);
    }

    let mut best: Option<(f64, EstimationResult)> = None;
    for (label, init) in starts {
        let mut result = match gauss_newton(obs, scene, init, solver_cfg) {
            Ok(r) => r,
            Err(_) => continue, // a start on top of an LED is simply skipped
        };
        result.init_label = label;
        let objective = nls_objective(result.estimate, obs, scene)?;
        let replace = match &best {
            None => true,
            Some((best_obj, best_result)) => {
                objective < *best_obj
                    || (objective == *best_obj && result.init_label < best_result.init_label)
            }
        };
        if replace {
            best = Some((objective, result));
        }
    }
    best.map(|(_, r)| r).ok_or(Error::NoInitialPoints)
}
