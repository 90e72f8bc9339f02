//! Vectors, transmitter/receiver poses, and parametric room scenes.
//!
//! The coordinate frame has its origin at one floor corner with z pointing
//! up, so the ceiling sits at `z = height`. All angles inside the library
//! are radians; configuration structs carry degrees.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// A direction vector with unit 2-norm (enforced within 1e-12 at construction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Wraps a vector that is already unit length.
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !v.iter().all(|c| c.is_finite()) || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitLength(norm));
        }
        Ok(UnitVec3(v))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(UnitVec3(v / norm))
    }

    pub fn as_vec(&self) -> Vec3 {
        self.0
    }
}

impl std::ops::Deref for UnitVec3 {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

/// One Lambertian LED source belonging to a VAP.
#[derive(Debug, Clone)]
pub struct LedTransmitter {
    pub vap_index: usize,
    pub led_index: usize,
    /// Location r_mk in meters.
    pub location: Vec3,
    /// Orientation n_mk.
    pub orientation: UnitVec3,
    /// Lambertian mode number n (>= 1); larger means a narrower beam.
    pub mode: f64,
    /// Transmit power in watts, fixed to 1.0.
    pub tx_power: f64,
}

impl LedTransmitter {
    pub fn new(
        vap_index: usize,
        led_index: usize,
        location: Vec3,
        orientation: UnitVec3,
        mode: f64,
    ) -> Result<Self> {
        if !(mode >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "LED mode must be >= 1, got {mode}"
            )));
        }
        Ok(LedTransmitter {
            vap_index,
            led_index,
            location,
            orientation,
            mode,
            tx_power: 1.0,
        })
    }
}

/// The VLC receiver: a photodiode with a field of view and an active area.
#[derive(Debug, Clone)]
pub struct Receiver {
    /// Location r_R in meters.
    pub location: Vec3,
    /// Orientation n_R.
    pub orientation: UnitVec3,
    /// Field of view in radians, in (0, pi/2].
    pub fov: f64,
    /// Photodiode area A_R in m^2.
    pub area: f64,
}

impl Receiver {
    pub fn new(location: Vec3, orientation: UnitVec3, fov: f64, area: f64) -> Result<Self> {
        if !(fov > 0.0 && fov <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidConfig(format!(
                "FOV must be in (0, pi/2], got {fov} rad"
            )));
        }
        if !(area > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "receiver area must be positive, got {area}"
            )));
        }
        Ok(Receiver {
            location,
            orientation,
            fov,
            area,
        })
    }
}

/// The geometric ground truth: a rectangular room, K VAPs each holding
/// M LEDs, and one receiver.
#[derive(Debug, Clone)]
pub struct Scene {
    /// Room (depth, width, height) in meters; x in [0, depth], y in [0, width],
    /// z in [0, height].
    pub room: [f64; 3],
    pub vaps: Vec<Vec<LedTransmitter>>,
    pub receiver: Receiver,
}

impl Scene {
    pub fn new(room: [f64; 3], vaps: Vec<Vec<LedTransmitter>>, receiver: Receiver) -> Result<Self> {
        if room.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "room dimensions must be positive, got {room:?}"
            )));
        }
        if vaps.is_empty() || vaps.iter().any(|v| v.is_empty()) {
            return Err(Error::InvalidConfig(
                "need K >= 1 VAPs, each with M >= 1 LEDs".into(),
            ));
        }
        for led in vaps.iter().flatten() {
            let p = led.location;
            let inside = (0.0..=room[0]).contains(&p.x)
                && (0.0..=room[1]).contains(&p.y)
                && (0.0..=room[2]).contains(&p.z);
            if !inside {
                return Err(Error::InvalidConfig(format!(
                    "LED ({}, {}) lies outside the room",
                    led.led_index, led.vap_index
                )));
            }
        }
        Ok(Scene {
            room,
            vaps,
            receiver,
        })
    }

    pub fn num_vaps(&self) -> usize {
        self.vaps.len()
    }

    pub fn led_count(&self) -> usize {
        self.vaps.iter().map(Vec::len).sum()
    }

    /// LEDs in flat observation order: index = k*M + m (m fastest within a VAP).
    pub fn flat_leds(&self) -> impl Iterator<Item = &LedTransmitter> {
        self.vaps.iter().flatten()
    }

    /// Returns the same scene with the receiver moved to `location`.
    pub fn with_receiver_at(&self, location: Vec3) -> Scene {
        let mut scene = self.clone();
        scene.receiver.location = location;
        scene
    }

    pub fn room_center(&self) -> Vec3 {
        Vec3::new(self.room[0] / 2.0, self.room[1] / 2.0, self.room[2] / 2.0)
    }
}

/// Parameters of the corner-VAP room scenario. Angles are degrees here;
/// everything is converted to radians at build time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoomScenarioConfig {
    /// (depth, width, height) in meters.
    pub room: [f64; 3],
    /// Downward tilt of each VAP axis below the ceiling plane, in [0, 90).
    pub theta_ceiling_deg: f64,
    /// Tilt of each LED away from its VAP axis, in [0, 90).
    pub theta_polar_deg: f64,
    /// LEDs per VAP (M).
    pub leds_per_vap: usize,
    /// Lambertian mode n.
    pub mode: f64,
    pub receiver: ReceiverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReceiverConfig {
    pub fov_deg: f64,
    pub area_m2: f64,
    pub orientation: [f64; 3],
}

/// Vector from the LED to the receiver: v_mk = r_R - r_mk. Its 2-norm is
/// the link distance R_mk.
pub fn incidence(receiver: Vec3, led: Vec3) -> Vec3 {
    receiver - led
}

/// cos(phi): cosine of the angle between the LED orientation and the
/// incidence vector.
pub fn emission_cosine(v: Vec3, led_orientation: &UnitVec3) -> Result<f64> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.dot(led_orientation) / norm)
}

/// cos(theta): cosine of the angle between the receiver orientation and the
/// reversed incidence vector.
pub fn incidence_cosine(v: Vec3, receiver_orientation: &UnitVec3) -> Result<f64> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(-v.dot(receiver_orientation) / norm)
}

/// Builds the 4-corner-VAP scene: one VAP at each ceiling corner, axis
/// pointing into the room along the corner-to-center diagonal and tilted
/// `theta_ceiling` below the ceiling plane; the M LEDs of a VAP are tilted
/// `theta_polar` off the axis at equally spaced azimuths, with LED m = 0
/// in the plane containing the axis and the vertical.
///
/// The receiver is placed at the room center; use [`Scene::with_receiver_at`]
/// to move it.
pub fn build_room_scene(cfg: &RoomScenarioConfig) -> Result<Scene> {
    if !(0.0..90.0).contains(&cfg.theta_ceiling_deg) {
        return Err(Error::InvalidConfig(format!(
            "theta_ceiling must be in [0, 90) degrees, got {}",
            cfg.theta_ceiling_deg
        )));
    }
    if !(0.0..90.0).contains(&cfg.theta_polar_deg) {
        return Err(Error::InvalidConfig(format!(
            "theta_polar must be in [0, 90) degrees, got {}",
            cfg.theta_polar_deg
        )));
    }
    if cfg.leds_per_vap == 0 {
        return Err(Error::InvalidConfig("leds_per_vap must be >= 1".into()));
    }
    let [depth, width, height] = cfg.room;
    if !(depth > 0.0 && width > 0.0 && height > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "room dimensions must be positive, got {:?}",
            cfg.room
        )));
    }

    let theta_c = cfg.theta_ceiling_deg.to_radians();
    let theta_p = cfg.theta_polar_deg.to_radians();
    let corners = [
        Vec3::new(0.0, 0.0, height),
        Vec3::new(depth, 0.0, height),
        Vec3::new(depth, width, height),
        Vec3::new(0.0, width, height),
    ];
    let center_xy = Vec3::new(depth / 2.0, width / 2.0, height);

    let mut vaps = Vec::with_capacity(4);
    for (k, corner) in corners.iter().enumerate() {
        let diag = (center_xy - corner).normalize();
        // VAP axis: horizontal along the corner diagonal, tilted down by theta_c.
        let axis = Vec3::new(
            diag.x * theta_c.cos(),
            diag.y * theta_c.cos(),
            -theta_c.sin(),
        );
        // Frame around the axis; e1 lies in the downward-tilt plane.
        let down = Vec3::new(0.0, 0.0, -1.0);
        let e1 = (down - axis * down.dot(&axis)).normalize();
        let e2 = axis.cross(&e1);

        let mut leds = Vec::with_capacity(cfg.leds_per_vap);
        for m in 0..cfg.leds_per_vap {
            let az = 2.0 * std::f64::consts::PI * m as f64 / cfg.leds_per_vap as f64;
            let dir = axis * theta_p.cos() + (e1 * az.cos() + e2 * az.sin()) * theta_p.sin();
            leds.push(LedTransmitter::new(
                k,
                m,
                *corner,
                UnitVec3::normalized(dir)?,
                cfg.mode,
            )?);
        }
        vaps.push(leds);
    }

    let rx_dir = Vec3::new(
        cfg.receiver.orientation[0],
        cfg.receiver.orientation[1],
        cfg.receiver.orientation[2],
    );
    let receiver = Receiver::new(
        Vec3::new(depth / 2.0, width / 2.0, height / 2.0),
        UnitVec3::normalized(rx_dir)?,
        cfg.receiver.fov_deg.to_radians(),
        cfg.receiver.area_m2,
    )?;
    Scene::new(cfg.room, vaps, receiver)
}
