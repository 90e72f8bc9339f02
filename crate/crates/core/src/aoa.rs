//! AOA localization: least squares over LED direction lines, the
//! RSS-weighted variant, and the iso-RSS contour utilities behind the
//! weighting argument.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::channel::Observation;
use crate::error::{Error, Result};
use crate::geometry::{Scene, UnitVec3, Vec3};
use crate::linalg::pinv_solve;
use crate::rss::EstimationResult;

/// Projection onto the plane orthogonal to `n`: A = I - n n^T.
/// Symmetric, idempotent, rank 2, with A n = 0.
pub fn projection_matrix(n: &UnitVec3) -> Matrix3<f64> {
    Matrix3::identity() - n.as_vec() * n.as_vec().transpose()
}

/// The line extended from an LED along its orientation, with its
/// projector and the projected origin b = A r.
#[derive(Debug, Clone)]
pub struct DirectionLine {
    pub origin: Vec3,
    pub direction: UnitVec3,
    pub projector: Matrix3<f64>,
    pub intersection: Vec3,
}

impl DirectionLine {
    pub fn new(origin: Vec3, direction: UnitVec3) -> Self {
        let projector = projection_matrix(&direction);
        let intersection = projector * origin;
        DirectionLine {
            origin,
            direction,
            projector,
            intersection,
        }
    }
}

/// One weighted direction line per usable VAP.
#[derive(Debug, Clone)]
pub struct AoaProblem {
    pub lines: Vec<(DirectionLine, f64)>,
}

impl AoaProblem {
    pub fn new(lines: Vec<(DirectionLine, f64)>) -> Self {
        AoaProblem { lines }
    }

    /// Builds the problem from a noisy observation: selects one LED per VAP
    /// by observed RSS and weights each line with that observed value.
    pub fn from_observation(obs: &Observation, scene: &Scene) -> Result<Self> {
        let selection = select_leds(obs, scene)?;
        let lines = selection
            .iter()
            .map(|&(k, m)| {
                let led = &scene.vaps[k][m];
                (
                    DirectionLine::new(led.location, led.orientation),
                    obs.value(m, k),
                )
            })
            .collect();
        Ok(AoaProblem { lines })
    }
}

/// For each VAP, picks the LED with the largest observed RSS (ties broken
/// by lowest LED index). VAPs whose best observation is <= 0 are dropped.
/// Returns (vap_index, led_index) pairs.
pub fn select_leds(obs: &Observation, scene: &Scene) -> Result<Vec<(usize, usize)>> {
    if obs.s.len() != scene.led_count() {
        return Err(Error::DimensionMismatch {
            expected: scene.led_count(),
            got: obs.s.len(),
        });
    }
    let mut selected = Vec::new();
    for (k, vap) in scene.vaps.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for m in 0..vap.len() {
            let value = obs.value(m, k);
            if best.map_or(true, |(_, b)| value > b) {
                best = Some((m, value));
            }
        }
        if let Some((m, value)) = best {
            if value > 0.0 {
                selected.push((k, m));
            }
        }
    }
    if selected.is_empty() {
        return Err(Error::NoAnchors);
    }
    Ok(selected)
}

/// Least-squares intersection of the direction lines.
///
/// Unweighted: stacks every projector into a 3G x 3 system and returns the
/// Moore-Penrose solution. Weighted: solves the 3 x 3 system
/// `(sum beta A) theta = sum beta b`. Rank deficiency yields the
/// minimum-norm solution with the `degenerate` flag set.
pub fn aoa_solve(problem: &AoaProblem, weighted: bool) -> Result<EstimationResult> {
    let g = problem.lines.len();
    if g < 2 {
        return Err(Error::InsufficientAnchors(g));
    }
    if problem.lines.iter().any(|(_, w)| *w < 0.0) {
        return Err(Error::InvalidConfig("AOA weights must be >= 0".into()));
    }
    if weighted && problem.lines.iter().filter(|(_, w)| *w > 0.0).count() < 2 {
        return Err(Error::InsufficientAnchors(
            problem.lines.iter().filter(|(_, w)| *w > 0.0).count(),
        ));
    }

    let (estimate, rank, residual_norm) = if weighted {
        let mut a_w = Matrix3::zeros();
        let mut b_w = Vec3::zeros();
        for (line, beta) in &problem.lines {
            a_w += line.projector * *beta;
            b_w += line.intersection * *beta;
        }
        let a_dyn = DMatrix::from_iterator(3, 3, a_w.iter().cloned());
        let b_dyn = DVector::from_iterator(3, b_w.iter().cloned());
        let (x, rank) = pinv_solve(&a_dyn, &b_dyn);
        let residual = (a_w * x - b_w).norm();
        (x, rank, residual)
    } else {
        let mut a = DMatrix::zeros(3 * g, 3);
        let mut b = DVector::zeros(3 * g);
        for (i, (line, _)) in problem.lines.iter().enumerate() {
            for r in 0..3 {
                for c in 0..3 {
                    a[(3 * i + r, c)] = line.projector[(r, c)];
                }
                b[3 * i + r] = line.intersection[r];
            }
        }
        let (x, rank) = pinv_solve(&a, &b);
        let residual = (&a * x - &b).norm();
        (x, rank, residual)
    };

    Ok(EstimationResult {
        estimate,
        residual_norm,
        iterations: 0,
        converged: true,
        degenerate: rank < 3,
        init_point: estimate,
        init_label: if weighted { "weighted-aoa" } else { "aoa" }.to_string(),
    })
}

/// Constants of the iso-RSS contour of a single LED at the origin pointing
/// +z, observed at power `power` by a receiver facing it.
#[derive(Debug, Clone, Copy)]
pub struct ContourParams {
    /// Lambertian mode n.
    pub mode: f64,
    /// Receiver area A_R in m^2.
    pub area: f64,
    /// Observed power P0 in watts.
    pub power: f64,
}

impl ContourParams {
    /// The z-free contour constant (n+1) A_R / (2 pi P0). The printed
    /// contour constant carries an extra factor z that cancels against the
    /// height exponent; this is the form the radius formula actually uses.
    pub fn coefficient(&self) -> f64 {
        (self.mode + 1.0) * self.area / (2.0 * std::f64::consts::PI * self.power)
    }

    /// B = (2n+6)/(2n+2); > 1 for all n >= 1.
    pub fn shape_factor(&self) -> f64 {
        (2.0 * self.mode + 6.0) / (2.0 * self.mode + 2.0)
    }

    /// Height at which the contour touches the LED axis (its z-support
    /// upper end).
    pub fn axis_crossing(&self) -> f64 {
        self.coefficient().sqrt()
    }
}

/// Radius of the iso-RSS contour at height z:
/// `r^2 = c^(2/(n+3)) z^((2n+2)/(n+3)) - z^2` with c the z-free constant.
pub fn contour_radius(z: f64, p: &ContourParams) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::NoContour(z));
    }
    let n = p.mode;
    let c = p.coefficient();
    let r2 = c.powf(2.0 / (n + 3.0)) * z.powf((2.0 * n + 2.0) / (n + 3.0)) - z * z;
    if r2 < 0.0 {
        return Err(Error::NoContour(z));
    }
    Ok(r2.sqrt())
}

/// Maximum contour radius and the height attaining it, found by
/// golden-section search over the contour's z-support.
pub fn max_contour_radius(p: &ContourParams) -> Result<(f64, f64)> {
    let z_hi = p.axis_crossing();
    if !(z_hi > 0.0) || !z_hi.is_finite() {
        return Err(Error::NoContour(z_hi));
    }
    let f = |z: f64| contour_radius(z, p).unwrap_or(0.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = z_hi * 1e-9;
    let mut hi = z_hi;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let z_at_max = 0.5 * (lo + hi);
    Ok((f(z_at_max), z_at_max))
}
