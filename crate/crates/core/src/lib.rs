//! 3D receiver localization for visible-light-communication systems.
//!
//! The library models a room full of multi-LED visible light access points
//! (VAPs) and estimates the receiver location three ways:
//!
//! * AOA least squares over the pointing lines of the strongest LEDs,
//! * an RSS-weighted AOA refinement,
//! * maximum-likelihood RSS localization with an analytical Jacobian,
//!   a damped Gauss-Newton solver, and random-report-and-cluster (RRC)
//!   multi-start initialization.
//!
//! The Cramér-Rao lower bound for the RSS estimator is available as a
//! benchmark, along with room-coverage statistics over 3D grids.

pub mod aoa;
pub mod channel;
pub mod crlb;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod rss;
pub mod scenarios;

pub use nalgebra;

pub use aoa::{aoa_solve, select_leds, AoaProblem, ContourParams, DirectionLine};
pub use channel::{observe, received_power, rss_vector, Observation};
pub use crlb::{coverage_map, crlb_rmse, fim, CoverageReport, FimResult};
pub use error::{Error, Result};
pub use geometry::{
    build_room_scene, LedTransmitter, Receiver, ReceiverConfig, RoomScenarioConfig, Scene,
    UnitVec3, Vec3,
};
pub use rss::{
    gauss_newton, jacobian, kmeans, nls_objective, rrc_init, rss_localize, EstimationResult,
    RrcConfig, SolverConfig,
};

/// Stateless seed mixing for Monte Carlo trials: results are independent of
/// scheduling order because each trial derives its own stream.
pub fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut x = master
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(a)
        .wrapping_mul(0xbf58_476d_1ce4_e5b9)
        .wrapping_add(b);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
