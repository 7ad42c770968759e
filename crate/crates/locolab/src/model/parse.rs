//! URDF reader for the supported subset:
//! robot / link / inertial / collision(box, sphere, cylinder, capsule) /
//! joint(revolute, continuous, prismatic, fixed) / axis / origin / limit /
//! dynamics. Visual and material tags are ignored; mesh collision geometry
//! is rejected.

use nalgebra::{Matrix3, Vector3};
use roxmltree::{Document, Node};

use super::{Collision, Joint, JointKind, Link, ModelError, Pose, RobotModel, Shape};

pub fn parse_urdf(text: &str) -> Result<RobotModel, ModelError> {
    let doc = Document::parse(text).map_err(|e| ModelError::XmlMalformed(e.to_string()))?;
    let robot = doc.root_element();
    if robot.tag_name().name() != "robot" {
        return Err(ModelError::XmlMalformed(format!(
            "expected <robot> root element, found <{}>",
            robot.tag_name().name()
        )));
    }
    let name = robot.attribute("name").unwrap_or("robot").to_string();

    let mut links = Vec::new();
    for node in robot.children().filter(|n| n.has_tag_name("link")) {
        links.push(parse_link(node)?);
    }

    let mut joints = Vec::new();
    for node in robot.children().filter(|n| n.has_tag_name("joint")) {
        joints.push(parse_joint(node, &links)?);
    }

    RobotModel::assemble(name, links, joints)
}

fn parse_link(node: Node) -> Result<Link, ModelError> {
    let name = node.attribute("name").unwrap_or("").to_string();
    let mut mass = 0.0;
    let mut inertia = Matrix3::zeros();
    let mut inertial_origin = Pose::identity();

    if let Some(inertial) = child(node, "inertial") {
        if let Some(origin) = child(inertial, "origin") {
            inertial_origin = parse_origin(origin)?;
        }
        if let Some(m) = child(inertial, "mass") {
            mass = attr_f64(m, "value", 0.0)?;
        }
        if let Some(i) = child(inertial, "inertia") {
            let ixx = attr_f64(i, "ixx", 0.0)?;
            let iyy = attr_f64(i, "iyy", 0.0)?;
            let izz = attr_f64(i, "izz", 0.0)?;
            let ixy = attr_f64(i, "ixy", 0.0)?;
            let ixz = attr_f64(i, "ixz", 0.0)?;
            let iyz = attr_f64(i, "iyz", 0.0)?;
            inertia = Matrix3::new(ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz);
        }
    }
    if mass < 0.0 {
        return Err(ModelError::BadInertia(name, format!("negative mass {mass}")));
    }
    check_inertia(&name, mass, &inertia)?;

    let mut collision = None;
    if let Some(col) = child(node, "collision") {
        let origin = match child(col, "origin") {
            Some(o) => parse_origin(o)?,
            None => Pose::identity(),
        };
        let geom = child(col, "geometry")
            .ok_or_else(|| ModelError::XmlMalformed(format!("link '{name}': collision without geometry")))?;
        let shape = parse_shape(&name, geom)?;
        collision = Some(Collision { shape, origin });
    }

    Ok(Link { name, mass, inertia, inertial_origin, collision })
}

/// Inertia must be symmetric (guaranteed by construction from 6 scalars),
/// positive semi-definite, and satisfy the principal-moment triangle
/// inequalities when the link carries mass.
fn check_inertia(name: &str, mass: f64, inertia: &Matrix3<f64>) -> Result<(), ModelError> {
    if !inertia.iter().all(|v| v.is_finite()) {
        return Err(ModelError::BadInertia(name.to_string(), "non-finite entries".into()));
    }
    let eig = inertia.symmetric_eigenvalues();
    let scale = eig.iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
    let tol = 1e-9 * scale.max(1.0);
    if eig.iter().any(|&v| v < -tol) {
        return Err(ModelError::BadInertia(
            name.to_string(),
            format!("negative principal moment {:.3e}", eig.min()),
        ));
    }
    if mass > 0.0 {
        let (a, b, c) = (eig[0], eig[1], eig[2]);
        if a + b < c - tol || a + c < b - tol || b + c < a - tol {
            return Err(ModelError::BadInertia(
                name.to_string(),
                format!("principal moments ({a:.4}, {b:.4}, {c:.4}) violate the triangle inequality"),
            ));
        }
    }
    Ok(())
}

fn parse_shape(link: &str, geom: Node) -> Result<Shape, ModelError> {
    for g in geom.children().filter(|n| n.is_element()) {
        return match g.tag_name().name() {
            "box" => {
                let size = attr_vec3(g, "size", Vector3::new(1.0, 1.0, 1.0))?;
                Ok(Shape::Box { size })
            }
            "sphere" => Ok(Shape::Sphere { radius: attr_f64(g, "radius", 0.0)? }),
            "cylinder" => Ok(Shape::Cylinder {
                radius: attr_f64(g, "radius", 0.0)?,
                length: attr_f64(g, "length", 0.0)?,
            }),
            "capsule" => Ok(Shape::Capsule {
                radius: attr_f64(g, "radius", 0.0)?,
                length: attr_f64(g, "length", 0.0)?,
            }),
            "mesh" => Err(ModelError::MeshGeometry(link.to_string())),
            other => Err(ModelError::XmlMalformed(format!(
                "link '{link}': unsupported geometry <{other}>"
            ))),
        };
    }
    Err(ModelError::XmlMalformed(format!("link '{link}': empty geometry")))
}

fn parse_joint(node: Node, links: &[Link]) -> Result<Joint, ModelError> {
    let name = node.attribute("name").unwrap_or("").to_string();
    let kind = match node.attribute("type").unwrap_or("") {
        "revolute" => JointKind::Revolute,
        "continuous" => JointKind::Continuous,
        "prismatic" => JointKind::Prismatic,
        "fixed" => JointKind::Fixed,
        other => {
            return Err(ModelError::UnsupportedJointKind { joint: name, kind: other.to_string() })
        }
    };

    let link_idx = |tag: &str| -> Result<usize, ModelError> {
        let el = child(node, tag).ok_or_else(|| ModelError::XmlMalformed(format!(
            "joint '{name}': missing <{tag}>"
        )))?;
        let lname = el.attribute("link").unwrap_or("");
        links.iter().position(|l| l.name == lname).ok_or_else(|| ModelError::DanglingReference {
            joint: name.clone(),
            link: lname.to_string(),
        })
    };
    let parent = link_idx("parent")?;
    let child_link = link_idx("child")?;

    let origin = match child(node, "origin") {
        Some(o) => parse_origin(o)?,
        None => Pose::identity(),
    };

    // Default axis per URDF is (1, 0, 0). Normalize only when the file's
    // vector is off by more than the invariant tolerance, so reparsing our
    // own output never perturbs bits.
    let mut axis = match child(node, "axis") {
        Some(a) => attr_vec3(a, "xyz", Vector3::new(1.0, 0.0, 0.0))?,
        None => Vector3::new(1.0, 0.0, 0.0),
    };
    if kind != JointKind::Fixed {
        let norm = axis.norm();
        if norm < 1e-12 {
            return Err(ModelError::BadAxis(name));
        }
        if (norm - 1.0).abs() > 1e-9 {
            axis /= norm;
        }
    }

    let mut limits = None;
    let mut effort_limit = None;
    let mut velocity_limit = None;
    if let Some(lim) = child(node, "limit") {
        let lower = opt_attr_f64(lim, "lower")?;
        let upper = opt_attr_f64(lim, "upper")?;
        if let (Some(lo), Some(hi)) = (lower, upper) {
            if lo >= hi {
                return Err(ModelError::BadLimit(name));
            }
            limits = Some((lo, hi));
        }
        effort_limit = opt_attr_f64(lim, "effort")?;
        velocity_limit = opt_attr_f64(lim, "velocity")?;
    }

    let damping = match child(node, "dynamics") {
        Some(d) => attr_f64(d, "damping", 0.0)?,
        None => 0.0,
    };
    if damping < 0.0 {
        return Err(ModelError::XmlMalformed(format!("joint '{name}': negative damping")));
    }

    Ok(Joint {
        name,
        kind,
        parent,
        child: child_link,
        origin,
        axis,
        limits,
        effort_limit,
        velocity_limit,
        damping,
    })
}

fn child<'a>(node: Node<'a, 'a>, tag: &str) -> Option<Node<'a, 'a>> {
    node.children().find(|n| n.has_tag_name(tag))
}

fn parse_origin(node: Node) -> Result<Pose, ModelError> {
    Ok(Pose {
        xyz: attr_vec3(node, "xyz", Vector3::zeros())?,
        rpy: attr_vec3(node, "rpy", Vector3::zeros())?,
    })
}

fn attr_f64(node: Node, attr: &str, default: f64) -> Result<f64, ModelError> {
    match node.attribute(attr) {
        None => Ok(default),
        Some(s) => parse_number(node, attr, s),
    }
}

fn opt_attr_f64(node: Node, attr: &str) -> Result<Option<f64>, ModelError> {
    match node.attribute(attr) {
        None => Ok(None),
        Some(s) => parse_number(node, attr, s).map(Some),
    }
}

fn parse_number(node: Node, attr: &str, s: &str) -> Result<f64, ModelError> {
    let v: f64 = s.trim().parse().map_err(|_| {
        ModelError::XmlMalformed(format!("<{} {}=\"{}\">: not a number", node.tag_name().name(), attr, s))
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ModelError::XmlMalformed(format!(
            "<{} {}=\"{}\">: non-finite value",
            node.tag_name().name(),
            attr,
            s
        )))
    }
}

fn attr_vec3(node: Node, attr: &str, default: Vector3<f64>) -> Result<Vector3<f64>, ModelError> {
    let Some(s) = node.attribute(attr) else { return Ok(default) };
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(ModelError::XmlMalformed(format!(
            "<{} {}=\"{}\">: expected 3 numbers",
            node.tag_name().name(),
            attr,
            s
        )));
    }
    let mut out = Vector3::zeros();
    for (i, p) in parts.iter().enumerate() {
        out[i] = parse_number(node, attr, p)?;
    }
    Ok(out)
}
