//! Monte Carlo experiment runners behind the CLI subcommands.
//!
//! Each trial derives its own seed from (master seed, position index,
//! trial index), so results are bit-identical regardless of how rayon
//! schedules the work.

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Serialize;
use vlp_core::{
    aoa_solve, build_room_scene, coverage_map, crlb_rmse, gauss_newton, mix_seed, nls_objective,
    observe, rss_localize, rss_vector, AoaProblem, CoverageReport, Observation, RrcConfig, Scene,
    Vec3,
};

use crate::config::{ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone, Serialize)]
pub struct PathRow {
    pub sweep_value: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub rmse_aoa: f64,
    pub rmse_weighted_aoa: f64,
    pub rmse_rss_aoa: f64,
    pub rmse_rss_rrc: f64,
    pub crlb: f64,
    /// Fraction of trials where the AOA-seeded RSS solve was degenerate,
    /// unconverged, or failed outright.
    pub rss_aoa_flagged_frac: f64,
    /// Same for the RRC-started solve.
    pub rss_rrc_flagged_frac: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub clusters: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageRow {
    pub angle_deg: f64,
    pub threshold: f64,
    pub probability: f64,
}

struct TrialOutcome {
    aoa_sq: Option<f64>,
    weighted_sq: Option<f64>,
    rss_aoa_sq: Option<f64>,
    rss_rrc_sq: Option<f64>,
    rss_aoa_flagged: bool,
    rss_rrc_flagged: bool,
}

fn rmse(values: &[Option<f64>]) -> f64 {
    let hits: Vec<f64> = values.iter().filter_map(|v| *v).collect();
    if hits.is_empty() {
        f64::NAN
    } else {
        (hits.iter().sum::<f64>() / hits.len() as f64).sqrt()
    }
}

/// Validity gate for an RSS fix: the predicted observation at the estimate
/// must carry more energy than the noise floor (average per-LED SNR of ~9),
/// otherwise the solver merely fitted noise — e.g. in a field-of-view
/// blackout, where the model energy cannot exceed the noise energy at all.
fn below_noise_floor(estimate: Vec3, scene: &Scene, noise_variance: f64) -> bool {
    match rss_vector(scene, estimate) {
        Ok(model) => {
            let energy: f64 = model.iter().map(|p| p * p).sum();
            energy <= 9.0 * model.len() as f64 * noise_variance
        }
        Err(_) => true,
    }
}

fn run_trial(
    scene: &Scene,
    cfg: &ExperimentConfig,
    seed: u64,
) -> anyhow::Result<TrialOutcome> {
    let truth = scene.receiver.location;
    let obs = observe(scene, cfg.experiment.noise_variance, seed)
        .map_err(anyhow::Error::from)?;

    let problem = AoaProblem::from_observation(&obs, scene).ok();
    let aoa = problem
        .as_ref()
        .and_then(|p| aoa_solve(p, false).ok());
    let weighted = problem
        .as_ref()
        .and_then(|p| aoa_solve(p, true).ok());

    let rss_aoa = weighted
        .as_ref()
        .and_then(|w| gauss_newton(&obs, scene, w.estimate, &cfg.solver).ok());
    let rrc = RrcConfig {
        seed: mix_seed(seed, 0x5252_43, 0),
        ..cfg.rrc
    };
    let rss_rrc = rss_localize(
        &obs,
        scene,
        &cfg.solver,
        &rrc,
        weighted.as_ref().map(|w| w.estimate),
    )
    .ok();

    let sq = |estimate: Vec3| (estimate - truth).norm_squared();
    Ok(TrialOutcome {
        aoa_sq: aoa.as_ref().map(|r| sq(r.estimate)),
        weighted_sq: weighted.as_ref().map(|r| sq(r.estimate)),
        rss_aoa_sq: rss_aoa.as_ref().map(|r| sq(r.estimate)),
        rss_rrc_sq: rss_rrc.as_ref().map(|r| sq(r.estimate)),
        rss_aoa_flagged: rss_aoa.as_ref().map_or(true, |r| {
            r.degenerate
                || !r.converged
                || below_noise_floor(r.estimate, scene, cfg.experiment.noise_variance)
        }),
        rss_rrc_flagged: rss_rrc.as_ref().map_or(true, |r| {
            r.degenerate
                || !r.converged
                || below_noise_floor(r.estimate, scene, cfg.experiment.noise_variance)
        }),
    })
}

/// Path 1 (x = y = 2, sweep z) or Path 2 (y = 1, z = 1.5, sweep x) RMSE
/// sweep with `trials` seeded realizations per position.
pub fn run_path_experiment(cfg: &ExperimentConfig) -> anyhow::Result<Vec<PathRow>> {
    let kind = cfg.experiment.kind;
    if !matches!(kind, ExperimentKind::Path1 | ExperimentKind::Path2) {
        bail!("run_path_experiment requires kind path1 or path2");
    }
    let sweep = cfg
        .experiment
        .sweep
        .context("path experiments need an [experiment.sweep] section")?;
    let base = build_room_scene(&cfg.scenario)?;
    let room = base.room;

    let positions: Vec<Vec3> = sweep
        .values()
        .into_iter()
        .map(|v| match kind {
            ExperimentKind::Path1 => Vec3::new(2.0, 2.0, v),
            _ => Vec3::new(v, 1.0, 1.5),
        })
        .collect();
    for p in &positions {
        if p.x < 0.0 || p.x > room[0] || p.y < 0.0 || p.y > room[1] || p.z < 0.0 || p.z > room[2] {
            bail!("sweep position {:?} leaves the room {:?}", p, room);
        }
    }

    let trials = cfg.experiment.trials;
    let master = cfg.experiment.seed;
    positions
        .par_iter()
        .enumerate()
        .map(|(pos_idx, &position)| {
            let scene = base.with_receiver_at(position);
            let outcomes: Vec<TrialOutcome> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    run_trial(&scene, cfg, mix_seed(master, pos_idx as u64, trial as u64))
                })
                .collect::<anyhow::Result<_>>()?;

            let flag_frac = |f: &dyn Fn(&TrialOutcome) -> bool| {
                outcomes.iter().filter(|o| f(o)).count() as f64 / trials as f64
            };
            let crlb = if cfg.experiment.noise_variance > 0.0 {
                crlb_rmse(position, &scene, cfg.experiment.noise_variance)?
            } else {
                f64::NAN
            };
            Ok(PathRow {
                sweep_value: match kind {
                    ExperimentKind::Path1 => position.z,
                    _ => position.x,
                },
                x: position.x,
                y: position.y,
                z: position.z,
                rmse_aoa: rmse(&outcomes.iter().map(|o| o.aoa_sq).collect::<Vec<_>>()),
                rmse_weighted_aoa: rmse(&outcomes.iter().map(|o| o.weighted_sq).collect::<Vec<_>>()),
                rmse_rss_aoa: rmse(&outcomes.iter().map(|o| o.rss_aoa_sq).collect::<Vec<_>>()),
                rmse_rss_rrc: rmse(&outcomes.iter().map(|o| o.rss_rrc_sq).collect::<Vec<_>>()),
                crlb,
                rss_aoa_flagged_frac: flag_frac(&|o| o.rss_aoa_flagged),
                rss_rrc_flagged_frac: flag_frac(&|o| o.rss_rrc_flagged),
            })
        })
        .collect()
}

/// Convergence probability of the multi-start solve versus cluster count,
/// for a noiseless receiver at the room origin. Randomness comes only from
/// the RRC sampling seeds.
pub fn run_convergence_experiment(cfg: &ExperimentConfig) -> anyhow::Result<Vec<ConvergenceRow>> {
    if cfg.experiment.kind != ExperimentKind::Convergence {
        bail!("run_convergence_experiment requires kind convergence");
    }
    let truth = Vec3::new(0.0, 0.0, 0.0);
    let scene = build_room_scene(&cfg.scenario)?.with_receiver_at(truth);
    let obs = observe(&scene, 0.0, 0)?;
    let weighted = AoaProblem::from_observation(&obs, &scene)
        .and_then(|p| aoa_solve(&p, true))
        .ok();

    let trials = cfg.experiment.trials;
    let master = cfg.experiment.seed;
    cfg.experiment
        .cluster_counts
        .iter()
        .map(|&clusters| {
            let successes = (0..trials)
                .into_par_iter()
                .filter(|&trial| {
                    let rrc = RrcConfig {
                        clusters,
                        seed: mix_seed(master, clusters as u64, trial as u64),
                        ..cfg.rrc
                    };
                    rss_localize(
                        &obs,
                        &scene,
                        &cfg.solver,
                        &rrc,
                        weighted.as_ref().map(|w| w.estimate),
                    )
                    .map(|r| (r.estimate - truth).norm() < 1e-2)
                    .unwrap_or(false)
                })
                .count();
            Ok(ConvergenceRow {
                clusters,
                probability: successes as f64 / trials as f64,
            })
        })
        .collect()
}

/// CRLB coverage versus a swept VAP angle (theta_ceiling or theta_polar).
pub fn run_coverage_sweep(cfg: &ExperimentConfig) -> anyhow::Result<Vec<CoverageRow>> {
    let kind = cfg.experiment.kind;
    if !matches!(
        kind,
        ExperimentKind::CoverageCeiling | ExperimentKind::CoveragePolar
    ) {
        bail!("run_coverage_sweep requires kind coverage-ceiling or coverage-polar");
    }
    let sweep = cfg
        .experiment
        .sweep
        .context("coverage sweeps need an [experiment.sweep] section")?;

    let angles = sweep.values();
    let reports: Vec<(f64, CoverageReport)> = angles
        .par_iter()
        .map(|&angle| {
            let mut scenario = cfg.scenario.clone();
            match kind {
                ExperimentKind::CoverageCeiling => scenario.theta_ceiling_deg = angle,
                _ => scenario.theta_polar_deg = angle,
            }
            let scene = build_room_scene(&scenario)?;
            let report = coverage_map(
                &scene,
                cfg.experiment.grid_spacing,
                &cfg.experiment.thresholds,
                cfg.experiment.noise_variance,
            )?;
            Ok((angle, report))
        })
        .collect::<anyhow::Result<_>>()?;

    let mut rows = Vec::new();
    for (angle, report) in reports {
        for (threshold, probability) in report.probabilities {
            rows.push(CoverageRow {
                angle_deg: angle,
                threshold,
                probability,
            });
        }
    }
    Ok(rows)
}

/// CRLB over the full room grid for a fixed scenario.
pub fn run_crlb_grid(cfg: &ExperimentConfig) -> anyhow::Result<CoverageReport> {
    if cfg.experiment.kind != ExperimentKind::CrlbGrid {
        bail!("run_crlb_grid requires kind crlb-grid");
    }
    let scene = build_room_scene(&cfg.scenario)?;
    Ok(coverage_map(
        &scene,
        cfg.experiment.grid_spacing,
        &cfg.experiment.thresholds,
        cfg.experiment.noise_variance,
    )?)
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateOutput {
    pub estimate: [f64; 3],
    pub residual_norm: f64,
    pub converged: bool,
    pub degenerate: bool,
    pub init_label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizeOutput {
    pub aoa: EstimateOutput,
    pub weighted_aoa: EstimateOutput,
    pub rss: EstimateOutput,
    pub crlb_at_estimate: f64,
}

fn to_output(r: &vlp_core::EstimationResult) -> EstimateOutput {
    EstimateOutput {
        estimate: [r.estimate.x, r.estimate.y, r.estimate.z],
        residual_norm: r.residual_norm,
        converged: r.converged,
        degenerate: r.degenerate,
        init_label: r.init_label.clone(),
    }
}

/// The single-shot pipeline: anchor selection, both AOA solves, then the
/// multi-start RSS solve seeded by the weighted AOA estimate.
pub fn localize_once(cfg: &ExperimentConfig, s: Vec<f64>) -> anyhow::Result<LocalizeOutput> {
    let scene = build_room_scene(&cfg.scenario)?;
    if s.len() != scene.led_count() {
        bail!(
            "observation length {} does not match scene LED count {}",
            s.len(),
            scene.led_count()
        );
    }
    let obs = Observation::new(
        s,
        cfg.scenario.leds_per_vap,
        scene.num_vaps(),
        cfg.experiment.noise_variance,
        cfg.experiment.seed,
    )?;
    let problem = AoaProblem::from_observation(&obs, &scene)?;
    let aoa = aoa_solve(&problem, false)?;
    let weighted = aoa_solve(&problem, true)?;
    let rrc = RrcConfig {
        seed: cfg.experiment.seed,
        ..cfg.rrc
    };
    let mut rss = rss_localize(&obs, &scene, &cfg.solver, &rrc, Some(weighted.estimate))?;
    rss.residual_norm = nls_objective(rss.estimate, &obs, &scene)?.sqrt();
    let crlb_at_estimate = if cfg.experiment.noise_variance > 0.0 {
        crlb_rmse(rss.estimate, &scene, cfg.experiment.noise_variance)?
    } else {
        f64::NAN
    };
    Ok(LocalizeOutput {
        aoa: to_output(&aoa),
        weighted_aoa: to_output(&weighted),
        rss: to_output(&rss),
        crlb_at_estimate,
    })
}
