//! Ready-made scene constructors for the simulation scenarios used
//! throughout the experiments and tests.

use crate::error::Result;
use crate::geometry::{
    build_room_scene, LedTransmitter, Receiver, ReceiverConfig, RoomScenarioConfig, Scene,
    UnitVec3, Vec3,
};

/// Receiver parameters used in all room experiments: FOV 85 degrees,
/// area 1 cm^2, facing up.
pub fn default_receiver_config() -> ReceiverConfig {
    ReceiverConfig {
        fov_deg: 85.0,
        area_m2: 1e-4,
        orientation: [0.0, 0.0, 1.0],
    }
}

/// The 5 x 4 x 3 m room with 4 corner VAPs of 4 LEDs each.
pub fn paper_room_config(mode: f64, theta_ceiling_deg: f64, theta_polar_deg: f64) -> RoomScenarioConfig {
    RoomScenarioConfig {
        room: [5.0, 4.0, 3.0],
        theta_ceiling_deg,
        theta_polar_deg,
        leds_per_vap: 4,
        mode,
        receiver: default_receiver_config(),
    }
}

/// Paper room scene with the receiver at `receiver_location`.
pub fn paper_room_scene(
    mode: f64,
    theta_ceiling_deg: f64,
    theta_polar_deg: f64,
    receiver_location: Vec3,
) -> Result<Scene> {
    Ok(build_room_scene(&paper_room_config(mode, theta_ceiling_deg, theta_polar_deg))?
        .with_receiver_at(receiver_location))
}

/// The non-convexity demo scene: a 3 x 3 x 3 m room with 4 single-LED VAPs
/// at the ceiling corners, each LED pointing into the room at 45 degrees to
/// the walls, mode 30, receiver facing up with FOV 85 degrees and 1 cm^2.
pub fn fig4_scene(receiver_location: Vec3) -> Scene {
    let corners = [
        Vec3::new(0.0, 0.0, 3.0),
        Vec3::new(3.0, 0.0, 3.0),
        Vec3::new(3.0, 3.0, 3.0),
        Vec3::new(0.0, 3.0, 3.0),
    ];
    let center_xy = Vec3::new(1.5, 1.5, 3.0);
    let theta_c = 45f64.to_radians();
    let vaps = corners
        .iter()
        .map(|corner| {
            let diag = (center_xy - corner).normalize();
            let dir = Vec3::new(
                diag.x * theta_c.cos(),
                diag.y * theta_c.cos(),
                -theta_c.sin(),
            );
            vec![LedTransmitter::new(
                0,
                0,
                *corner,
                UnitVec3::normalized(dir).unwrap(),
                30.0,
            )
            .unwrap()]
        })
        .collect();
    let receiver = Receiver::new(
        receiver_location,
        UnitVec3::new(Vec3::new(0.0, 0.0, 1.0)).unwrap(),
        85f64.to_radians(),
        1e-4,
    )
    .unwrap();
    Scene::new([3.0, 3.0, 3.0], vaps, receiver).unwrap()
}
