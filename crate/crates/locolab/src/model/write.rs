//! Canonical URDF writer. Emits exactly the supported subset with
//! shortest-round-trip float formatting, so `parse_urdf(to_urdf_string(m))`
//! reproduces `m` field-for-field. Used to persist mutated models for sweeps.

use std::fmt::Write;

use nalgebra::Vector3;

use super::{Pose, RobotModel, Shape};

pub fn to_urdf_string(model: &RobotModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\"?>");
    let _ = writeln!(s, "<robot name=\"{}\">", xml_escape(&model.name));

    for link in &model.links {
        let _ = writeln!(s, "  <link name=\"{}\">", xml_escape(&link.name));
        let _ = writeln!(s, "    <inertial>");
        let _ = writeln!(s, "      {}", origin_tag(&link.inertial_origin));
        let _ = writeln!(s, "      <mass value=\"{}\"/>", fmt(link.mass));
        let i = &link.inertia;
        let _ = writeln!(
            s,
            "      <inertia ixx=\"{}\" ixy=\"{}\" ixz=\"{}\" iyy=\"{}\" iyz=\"{}\" izz=\"{}\"/>",
            fmt(i[(0, 0)]),
            fmt(i[(0, 1)]),
            fmt(i[(0, 2)]),
            fmt(i[(1, 1)]),
            fmt(i[(1, 2)]),
            fmt(i[(2, 2)])
        );
        let _ = writeln!(s, "    </inertial>");
        if let Some(col) = &link.collision {
            let _ = writeln!(s, "    <collision>");
            let _ = writeln!(s, "      {}", origin_tag(&col.origin));
            let _ = writeln!(s, "      <geometry>");
            let geom = match col.shape {
                Shape::Box { size } => {
                    format!("<box size=\"{}\"/>", fmt_vec(&size))
                }
                Shape::Sphere { radius } => format!("<sphere radius=\"{}\"/>", fmt(radius)),
                Shape::Cylinder { radius, length } => {
                    format!("<cylinder radius=\"{}\" length=\"{}\"/>", fmt(radius), fmt(length))
                }
                Shape::Capsule { radius, length } => {
                    format!("<capsule radius=\"{}\" length=\"{}\"/>", fmt(radius), fmt(length))
                }
            };
            let _ = writeln!(s, "        {}", geom);
            let _ = writeln!(s, "      </geometry>");
            let _ = writeln!(s, "    </collision>");
        }
        let _ = writeln!(s, "  </link>");
    }

    for joint in &model.joints {
        let _ = writeln!(
            s,
            "  <joint name=\"{}\" type=\"{}\">",
            xml_escape(&joint.name),
            joint.kind.as_str()
        );
        let _ = writeln!(s, "    {}", origin_tag(&joint.origin));
        let _ = writeln!(s, "    <parent link=\"{}\"/>", xml_escape(&model.links[joint.parent].name));
        let _ = writeln!(s, "    <child link=\"{}\"/>", xml_escape(&model.links[joint.child].name));
        // Axis is emitted for fixed joints too: lock_joints keeps the value
        // and the reparse must see identical fields.
        let _ = writeln!(s, "    <axis xyz=\"{}\"/>", fmt_vec(&joint.axis));
        if joint.limits.is_some() || joint.effort_limit.is_some() || joint.velocity_limit.is_some() {
            let mut attrs = String::new();
            if let Some((lo, hi)) = joint.limits {
                let _ = write!(attrs, " lower=\"{}\" upper=\"{}\"", fmt(lo), fmt(hi));
            }
            if let Some(e) = joint.effort_limit {
                let _ = write!(attrs, " effort=\"{}\"", fmt(e));
            }
            if let Some(v) = joint.velocity_limit {
                let _ = write!(attrs, " velocity=\"{}\"", fmt(v));
            }
            let _ = writeln!(s, "    <limit{}/>", attrs);
        }
        if joint.damping != 0.0 {
            let _ = writeln!(s, "    <dynamics damping=\"{}\"/>", fmt(joint.damping));
        }
        let _ = writeln!(s, "  </joint>");
    }

    let _ = writeln!(s, "</robot>");
    s
}

fn origin_tag(pose: &Pose) -> String {
    format!("<origin xyz=\"{}\" rpy=\"{}\"/>", fmt_vec(&pose.xyz), fmt_vec(&pose.rpy))
}

/// Rust's `Display` for f64 is the shortest string that parses back to the
/// same bits, which is exactly what the round-trip property needs.
fn fmt(v: f64) -> String {
    format!("{}", v)
}

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!("{} {} {}", fmt(v.x), fmt(v.y), fmt(v.z))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
