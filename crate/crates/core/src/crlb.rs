//! Fisher information and the Cramér-Rao lower bound for the RSS
//! estimator, plus coverage statistics over 3D room grids.

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Receiver, Scene, UnitVec3, Vec3};
use crate::rss::jacobian;

/// Relative eigenvalue threshold separating FOV blackouts from
/// conditioning noise.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FimResult {
    /// J = (1/sigma^2) H^T H, symmetric positive semidefinite.
    pub matrix: Matrix3<f64>,
    pub condition: f64,
    pub singular: bool,
}

/// Fisher information matrix at a candidate receiver location.
pub fn fim(candidate: Vec3, scene: &Scene, noise_variance: f64) -> Result<FimResult> {
    if !(noise_variance > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise variance must be > 0, got {noise_variance}"
        )));
    }
    let h = jacobian(candidate, scene)?;
    let jtj = h.transpose() * &h;
    let mut matrix = Matrix3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            matrix[(r, c)] = jtj[(r, c)] / noise_variance;
        }
    }
    let eigen = matrix.symmetric_eigen();
    let max_ev = eigen.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min_ev = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let singular = max_ev <= 0.0 || min_ev < SINGULAR_TOL * max_ev;
    let condition = if singular { f64::INFINITY } else { max_ev / min_ev };
    Ok(FimResult {
        matrix,
        condition,
        singular,
    })
}

/// The position CRLB: sqrt(tr(J^{-1})), or +inf when J is singular
/// (e.g. FOV blackout near the ceiling).
pub fn crlb_rmse(candidate: Vec3, scene: &Scene, noise_variance: f64) -> Result<f64> {
    let info = fim(candidate, scene, noise_variance)?;
    if info.singular {
        return Ok(f64::INFINITY);
    }
    match info.matrix.try_inverse() {
        Some(inv) => Ok(inv.trace().sqrt()),
        None => Ok(f64::INFINITY),
    }
}

/// CRLB evaluated on a regular grid plus threshold-exceedance statistics.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub spacing: f64,
    /// (grid point, CRLB) pairs; the CRLB may be +inf.
    pub points: Vec<(Vec3, f64)>,
    /// (threshold, fraction of grid points with CRLB <= threshold), in the
    /// order the thresholds were supplied.
    pub probabilities: Vec<(f64, f64)>,
}

/// Evaluates the CRLB on a regular 3D grid strictly inside the room, with
/// the receiver orientation fixed to +z. Infinite CRLB counts as exceeding
/// every finite threshold.
pub fn coverage_map(
    scene: &Scene,
    spacing: f64,
    thresholds: &[f64],
    noise_variance: f64,
) -> Result<CoverageReport> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "grid spacing must be > 0, got {spacing}"
        )));
    }
    let grid_scene = Scene {
        receiver: Receiver {
            orientation: UnitVec3::new(Vec3::new(0.0, 0.0, 1.0)).expect("unit"),
            ..scene.receiver.clone()
        },
        ..scene.clone()
    };
    let axis_points = |extent: f64| -> Vec<f64> {
        let mut v = Vec::new();
        let mut i = 1;
        loop {
            let x = i as f64 * spacing;
            if x >= extent - 1e-12 {
                break;
            }
            v.push(x);
            i += 1;
        }
        v
    };
    let xs = axis_points(scene.room[0]);
    let ys = axis_points(scene.room[1]);
    let zs = axis_points(scene.room[2]);
    let mut grid = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                grid.push(Vec3::new(x, y, z));
            }
        }
    }

    let points: Vec<(Vec3, f64)> = grid
        .par_iter()
        .map(|&p| {
            let value = crlb_rmse(p, &grid_scene, noise_variance).unwrap_or(f64::INFINITY);
            (p, value)
        })
        .collect();

    let total = points.len().max(1) as f64;
    let probabilities = thresholds
        .iter()
        .map(|&t| {
            let hits = points.iter().filter(|(_, v)| *v <= t).count();
            (t, hits as f64 / total)
        })
        .collect();

    Ok(CoverageReport {
        spacing,
        points,
        probabilities,
    })
}
