//! Penalty contacts between point-sampled collision shapes and parametric
//! terrain, with a smooth Coulomb friction approximation.

use nalgebra::{Point3, Vector3};

use super::spatial::{vec6, Vec6};
use super::{Contact, LinkKinematics, SimContext, Terrain};
use crate::model::{Collision, Shape};

const RING_POINTS: usize = 16;

/// Terrain height and surface normal under (x, y). Stairs rise along +x and
/// contact is resolved against the tread planes only.
pub fn terrain_height(terrain: &Terrain, x: f64, _y: f64) -> (f64, Vector3<f64>) {
    match terrain {
        Terrain::Flat { .. } => (0.0, Vector3::z()),
        Terrain::Stairs { step_rise, step_run, num_steps, .. } => {
            let idx = (x / step_run).floor();
            let h = (idx * step_rise).clamp(0.0, *num_steps as f64 * step_rise);
            (h, Vector3::z())
        }
    }
}

/// Contact sample points for a collision shape, in the link frame.
/// Boxes contribute their 8 corners; spheres, cylinders and capsules
/// contribute both pole caps plus an equator ring.
pub fn sample_points(collision: &Collision) -> Vec<Vector3<f64>> {
    let mut local: Vec<Vector3<f64>> = Vec::new();
    match collision.shape {
        Shape::Box { size } => {
            let h = size / 2.0;
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    for sz in [-1.0, 1.0] {
                        local.push(Vector3::new(sx * h.x, sy * h.y, sz * h.z));
                    }
                }
            }
        }
        Shape::Sphere { radius } => {
            local.push(Vector3::new(0.0, 0.0, radius));
            local.push(Vector3::new(0.0, 0.0, -radius));
            ring(&mut local, radius, 0.0);
        }
        Shape::Cylinder { radius, length } => {
            local.push(Vector3::new(0.0, 0.0, length / 2.0));
            local.push(Vector3::new(0.0, 0.0, -length / 2.0));
            ring(&mut local, radius, 0.0);
        }
        Shape::Capsule { radius, length } => {
            local.push(Vector3::new(0.0, 0.0, length / 2.0 + radius));
            local.push(Vector3::new(0.0, 0.0, -length / 2.0 - radius));
            ring(&mut local, radius, 0.0);
        }
    }
    let iso = collision.origin.isometry();
    local.into_iter().map(|p| (iso * Point3::from(p)).coords).collect()
}

fn ring(out: &mut Vec<Vector3<f64>>, radius: f64, z: f64) {
    for k in 0..RING_POINTS {
        let a = 2.0 * std::f64::consts::PI * k as f64 / RING_POINTS as f64;
        out.push(Vector3::new(radius * a.cos(), radius * a.sin(), z));
    }
}

/// Velocity-dependent contact gains are clamped per link so the damping
/// impulse over one substep cannot reverse the approach velocity (explicit
/// integration goes unstable past c*dt/m ~ 1; light feet hit that long
/// before the configured coefficient does).
const DAMPING_STABILITY_FRACTION: f64 = 0.4;

/// Penalty forces for every sample point below the terrain. Returns the
/// contact records plus one world-frame wrench per link about its origin.
pub fn contact_forces(ctx: &SimContext, state: &super::SimState) -> (Vec<Contact>, Vec<Vec6>) {
    contact_forces_with(ctx, &ctx.kinematics(state))
}

pub(crate) fn contact_forces_with(ctx: &SimContext, kin: &LinkKinematics) -> (Vec<Contact>, Vec<Vec6>) {
    let mut contacts = Vec::new();
    let mut wrenches = vec![Vec6::zeros(); ctx.model.links.len()];
    let k_n = ctx.params.contact_stiffness;
    let c_n = ctx.params.contact_damping;
    let dt = ctx.params.dt_physics;
    let mu = ctx.friction;

    for (li, pts) in ctx.samples.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let c_eff = c_n.min(DAMPING_STABILITY_FRACTION * ctx.bodies[li].mass / dt);
        let pose = &kin.pose[li];
        let origin = pose.translation.vector;
        for p in pts {
            let wp = (pose * Point3::from(*p)).coords;
            let (h, normal) = terrain_height(&ctx.terrain, wp.x, wp.y);
            let pen = h - wp.z;
            if pen <= 0.0 {
                continue;
            }
            let v_pt = kin.vel[li] + kin.omega[li].cross(&(wp - origin));
            let vn = v_pt.z;
            let f_n = (k_n * pen + c_eff * (-vn).max(0.0)).max(0.0);
            let vt = Vector3::new(v_pt.x, v_pt.y, 0.0);
            let vt_norm = vt.norm();
            let f_t = if vt_norm > 1e-12 {
                -(mu * f_n).min(c_eff * vt_norm) * (vt / vt_norm)
            } else {
                Vector3::zeros()
            };
            let force = Vector3::new(f_t.x, f_t.y, f_n);
            wrenches[li] += vec6((wp - origin).cross(&force), force);
            contacts.push(Contact { link: li, point: wp, normal, force });
        }
    }
    (contacts, wrenches)
}
