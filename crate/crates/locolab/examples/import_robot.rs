//! Parse a URDF, validate it, classify its morphology, and print the
//! extracted leg structure and default pose.
//!
//! Usage:
//!   cargo run -p locolab --example import_robot
//!   cargo run -p locolab --example import_robot -- path/to/robot.urdf

use locolab::assets;
use locolab::model::{forward_kinematics, parse_urdf, validate};
use locolab::morphology::{classify, extract_profile, task_menu};

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).expect("readable URDF file"),
        None => assets::QUADRUPED_MIN_URDF.to_string(),
    };

    let model = parse_urdf(&text).expect("URDF parses");
    println!("robot: {} ({} links, {} joints, {} DOF)", model.name, model.links.len(), model.joints.len(), model.dof());

    for diag in validate(&model) {
        println!("  {diag}");
    }

    let classification = classify(&model);
    println!("classified: {:?} ({})", classification.robot_type.map(|t| t.to_string()), classification.rationale);
    let Some(robot_type) = classification.robot_type else { return };

    let profile = extract_profile(&model, robot_type).expect("profile extracts");
    println!("tasks: {:?}", task_menu(robot_type).iter().map(|t| t.to_string()).collect::<Vec<_>>());
    println!("standing height: {:.4} m, wheel radius: {:.3} m", profile.standing_height, profile.wheel_radius);
    println!("default pose: {:?}", profile.default_pose_q0.iter().map(|q| (q * 1000.0).round() / 1000.0).collect::<Vec<_>>());

    let poses = forward_kinematics(&model, &profile.default_pose_q0).unwrap();
    for (i, leg) in profile.legs.iter().enumerate() {
        let foot = poses[leg.foot_link].translation.vector;
        let joints: Vec<&str> = leg.joints.iter().map(|&j| model.joints[j].name.as_str()).collect();
        println!(
            "leg {i}: joints {joints:?} foot '{}' at ({:.3}, {:.3}, {:.3}) hip_sign {} knee_sign {}",
            model.links[leg.foot_link].name, foot.x, foot.y, foot.z, leg.hip_sign, leg.knee_sign
        );
    }
}
