//! Test robots shipped with the crate, embedded so examples and tests can
//! run without touching the filesystem.

use crate::model::{parse_urdf, RobotModel};

pub const QUADRUPED_MIN_URDF: &str = include_str!("../assets/quadruped_min.urdf");
pub const BIPED_MIN_URDF: &str = include_str!("../assets/biped_min.urdf");
pub const LEGWHEEL_MIN_URDF: &str = include_str!("../assets/legwheel_min.urdf");

pub fn quadruped_min() -> RobotModel {
    parse_urdf(QUADRUPED_MIN_URDF).expect("shipped quadruped parses")
}

pub fn biped_min() -> RobotModel {
    parse_urdf(BIPED_MIN_URDF).expect("shipped biped parses")
}

pub fn legwheel_min() -> RobotModel {
    parse_urdf(LEGWHEEL_MIN_URDF).expect("shipped leg-wheeled robot parses")
}

/// URDF text for one of the shipped robots by short name.
pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "quadruped_min" => Some(QUADRUPED_MIN_URDF),
        "biped_min" => Some(BIPED_MIN_URDF),
        "legwheel_min" => Some(LEGWHEEL_MIN_URDF),
        _ => None,
    }
}
