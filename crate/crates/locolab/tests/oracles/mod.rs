//! Independent reference implementations used to check the main code paths.
//! Everything here works from `RobotModel` alone, in world-origin spatial
//! coordinates, so it shares no machinery with the body-coordinate
//! articulated-body implementation it validates.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Matrix6, Translation3, UnitQuaternion, Vector3, Vector6};

use locolab::model::{Joint, JointKind, Link, RobotModel};

// ---------------------------------------------------------------------------
// Transform-chain forward kinematics (homogeneous 4x4 composition).
// ---------------------------------------------------------------------------

fn rot_matrix(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    // Rodrigues formula, written out.
    let (x, y, z) = (axis.x, axis.y, axis.z);
    let c = angle.cos();
    let s = angle.sin();
    let t = 1.0 - c;
    Matrix3::new(
        t * x * x + c,
        t * x * y - s * z,
        t * x * z + s * y,
        t * x * y + s * z,
        t * y * y + c,
        t * y * z - s * x,
        t * x * z - s * y,
        t * y * z + s * x,
        t * z * z + c,
    )
}

pub fn rpy_matrix(rpy: &Vector3<f64>) -> Matrix3<f64> {
    rot_matrix(&Vector3::z(), rpy.z) * rot_matrix(&Vector3::y(), rpy.y) * rot_matrix(&Vector3::x(), rpy.x)
}

fn homogeneous(rot: Matrix3<f64>, trans: Vector3<f64>) -> DMatrix<f64> {
    let mut h = DMatrix::identity(4, 4);
    for r in 0..3 {
        for c in 0..3 {
            h[(r, c)] = rot[(r, c)];
        }
        h[(r, 3)] = trans[r];
    }
    h
}

/// World pose of every link by explicit 4x4 homogeneous transform chains.
pub fn fk_oracle(model: &RobotModel, q: &[f64]) -> Vec<DMatrix<f64>> {
    let mut dof_of_joint = vec![usize::MAX; model.joints.len()];
    for (d, ji) in model.actuated_joints().into_iter().enumerate() {
        dof_of_joint[ji] = d;
    }
    let mut poses = vec![DMatrix::identity(4, 4); model.links.len()];
    // Repeat until every link is placed (order-free, unlike the impl).
    let mut placed = vec![false; model.links.len()];
    placed[model.root_link] = true;
    let mut remaining = model.joints.len();
    while remaining > 0 {
        let mut progressed = false;
        for (ji, joint) in model.joints.iter().enumerate() {
            if placed[joint.child] || !placed[joint.parent] {
                continue;
            }
            let origin = homogeneous(rpy_matrix(&joint.origin.rpy), joint.origin.xyz);
            let motion = match joint.kind {
                JointKind::Fixed => DMatrix::identity(4, 4),
                JointKind::Revolute | JointKind::Continuous => {
                    homogeneous(rot_matrix(&joint.axis, q[dof_of_joint[ji]]), Vector3::zeros())
                }
                JointKind::Prismatic => {
                    homogeneous(Matrix3::identity(), joint.axis * q[dof_of_joint[ji]])
                }
            };
            poses[joint.child] = &poses[joint.parent] * origin * motion;
            placed[joint.child] = true;
            progressed = true;
            remaining -= 1;
        }
        assert!(progressed, "malformed tree");
    }
    poses
}

pub fn pose_translation(h: &DMatrix<f64>) -> Vector3<f64> {
    Vector3::new(h[(0, 3)], h[(1, 3)], h[(2, 3)])
}

pub fn pose_rotation(h: &DMatrix<f64>) -> Matrix3<f64> {
    let mut r = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            r[(i, j)] = h[(i, j)];
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Mass-matrix dynamics oracle: CRBA for M, RNEA-style bias at qdd = 0, then
// a dense solve. World-origin spatial coordinates throughout.
// ---------------------------------------------------------------------------

pub struct OracleInput<'a> {
    pub model: &'a RobotModel,
    pub base_pos: Vector3<f64>,
    pub base_quat: UnitQuaternion<f64>,
    /// World-frame base angular velocity and base-origin linear velocity.
    pub base_ang_vel: Vector3<f64>,
    pub base_lin_vel: Vector3<f64>,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub tau: Vec<f64>,
    /// Per-link wrench about the link origin in world frame [torque; force].
    pub external: Vec<Vector6<f64>>,
    pub gravity: Vector3<f64>,
}

pub struct OracleOutput {
    pub base_ang_acc: Vector3<f64>,
    /// Classical world acceleration of the base origin point.
    pub base_lin_acc: Vector3<f64>,
    pub qdd: DVector<f64>,
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Spatial inertia of one body about the world origin.
fn spatial_inertia_world(mass: f64, com_w: &Vector3<f64>, i_com_w: &Matrix3<f64>) -> Matrix6<f64> {
    let cx = skew(com_w);
    let mut out = Matrix6::zeros();
    let tl = i_com_w + mass * cx * cx.transpose();
    for r in 0..3 {
        for c in 0..3 {
            out[(r, c)] = tl[(r, c)];
            out[(r, c + 3)] = mass * cx[(r, c)];
            out[(r + 3, c)] = -mass * cx[(r, c)];
        }
        out[(r + 3, r + 3)] = mass;
    }
    out
}

fn cross_motion(a: &Vector6<f64>, b: &Vector6<f64>) -> Vector6<f64> {
    let (aw, av) = (Vector3::new(a[0], a[1], a[2]), Vector3::new(a[3], a[4], a[5]));
    let (bw, bv) = (Vector3::new(b[0], b[1], b[2]), Vector3::new(b[3], b[4], b[5]));
    let w = aw.cross(&bw);
    let v = aw.cross(&bv) + av.cross(&bw);
    Vector6::new(w.x, w.y, w.z, v.x, v.y, v.z)
}

fn cross_force(a: &Vector6<f64>, f: &Vector6<f64>) -> Vector6<f64> {
    let (aw, av) = (Vector3::new(a[0], a[1], a[2]), Vector3::new(a[3], a[4], a[5]));
    let (fn_, fv) = (Vector3::new(f[0], f[1], f[2]), Vector3::new(f[3], f[4], f[5]));
    let n = aw.cross(&fn_) + av.cross(&fv);
    let l = aw.cross(&fv);
    Vector6::new(n.x, n.y, n.z, l.x, l.y, l.z)
}

pub fn dynamics_oracle(input: &OracleInput) -> OracleOutput {
    let model = input.model;
    let n = model.dof();
    let nl = model.links.len();
    let dim = 6 + n;

    let mut dof_of_joint = vec![usize::MAX; model.joints.len()];
    for (d, ji) in model.actuated_joints().into_iter().enumerate() {
        dof_of_joint[ji] = d;
    }

    // World poses with the base placed at its actual pose.
    let local = fk_oracle(model, &input.q);
    let base = homogeneous(
        input.base_quat.to_rotation_matrix().into_inner(),
        input.base_pos,
    );
    let poses: Vec<DMatrix<f64>> = local.iter().map(|h| &base * h).collect();

    // Motion subspace columns in world-origin coordinates: the base uses the
    // identity, each joint one 6-vector through its world anchor.
    let mut subspace = vec![Vector6::zeros(); model.joints.len()];
    for (ji, joint) in model.joints.iter().enumerate() {
        if joint.kind == JointKind::Fixed {
            continue;
        }
        // Joint frame = child frame.
        let rot = pose_rotation(&poses[joint.child]);
        let anchor = pose_translation(&poses[joint.child]);
        let axis_w = rot * joint.axis;
        subspace[ji] = match joint.kind {
            JointKind::Prismatic => {
                Vector6::new(0.0, 0.0, 0.0, axis_w.x, axis_w.y, axis_w.z)
            }
            _ => {
                let lin = anchor.cross(&axis_w);
                Vector6::new(axis_w.x, axis_w.y, axis_w.z, lin.x, lin.y, lin.z)
            }
        };
    }

    // Joint chain (ancestor actuated joints) per link, and the generalized
    // velocity in world-origin coordinates.
    let v_origin = input.base_lin_vel - input.base_ang_vel.cross(&input.base_pos);
    let mut u = DVector::zeros(dim);
    for k in 0..3 {
        u[k] = input.base_ang_vel[k];
        u[3 + k] = v_origin[k];
    }
    for d in 0..n {
        u[6 + d] = input.qd[d];
    }

    let chain_of = |link: usize| -> Vec<usize> {
        let mut chain = Vec::new();
        let mut cur = link;
        while let Some(ji) = model.parent_joint_of(cur) {
            if model.joints[ji].is_actuated() {
                chain.push(ji);
            }
            cur = model.joints[ji].parent;
        }
        chain.reverse();
        chain
    };

    // Body spatial velocities and bias accelerations (udot = 0):
    // v_i = v_base + sum s_j qd_j; a_i^bias accumulates v x s qd along the
    // chain.
    let mut vel = vec![Vector6::zeros(); nl];
    let mut bias_acc = vec![Vector6::zeros(); nl];
    let base_twist = Vector6::new(
        input.base_ang_vel.x,
        input.base_ang_vel.y,
        input.base_ang_vel.z,
        v_origin.x,
        v_origin.y,
        v_origin.z,
    );
    for li in 0..nl {
        let mut v = base_twist;
        let mut a = Vector6::zeros();
        for ji in chain_of(li) {
            let d = dof_of_joint[ji];
            let s = subspace[ji];
            let sqd = s * input.qd[d];
            a += cross_motion(&(v + sqd), &sqd);
            v += sqd;
        }
        vel[li] = v;
        bias_acc[li] = a;
    }

    // World-origin spatial inertia per link.
    let inertias: Vec<Matrix6<f64>> = (0..nl)
        .map(|li| {
            let link: &Link = &model.links[li];
            let rot = pose_rotation(&poses[li]);
            let r_inertial = rpy_matrix(&link.inertial_origin.rpy);
            let i_com_w = rot * r_inertial * link.inertia * r_inertial.transpose() * rot.transpose();
            let com_w = pose_translation(&poses[li]) + rot * link.inertial_origin.xyz;
            spatial_inertia_world(link.mass, &com_w, &i_com_w)
        })
        .collect();

    // Mass matrix by composite rigid bodies: I^C over subtrees, projected
    // through the subspace columns (all in one coordinate system).
    let mut composite = inertias.clone();
    // Children before parents: walk joints in reverse topological order.
    let topo = model.topological_joints();
    for &ji in topo.iter().rev() {
        let j = &model.joints[ji];
        let child_composite = composite[j.child];
        composite[j.parent] += child_composite;
    }

    let mut m = DMatrix::zeros(dim, dim);
    // Base block: composite inertia of the whole tree.
    let total = composite[model.root_link];
    for r in 0..6 {
        for c in 0..6 {
            m[(r, c)] = total[(r, c)];
        }
    }
    for (ji, joint) in model.joints.iter().enumerate() {
        if !joint.is_actuated() {
            continue;
        }
        let i = dof_of_joint[ji];
        let f = composite[joint.child] * subspace[ji];
        // Against the base columns.
        for r in 0..6 {
            m[(6 + i, r)] = f[r];
            m[(r, 6 + i)] = f[r];
        }
        m[(6 + i, 6 + i)] = subspace[ji].dot(&f);
        // Against every ancestor actuated joint.
        let mut cur = joint.parent;
        while let Some(pj) = model.parent_joint_of(cur) {
            if model.joints[pj].is_actuated() {
                let k = dof_of_joint[pj];
                let val = f.dot(&subspace[pj]);
                m[(6 + i, 6 + k)] = val;
                m[(6 + k, 6 + i)] = val;
            }
            cur = model.joints[pj].parent;
        }
    }

    // Bias forces: f_i = I a_i^bias + v x* I v - gravity - external, then
    // projected onto the base and each ancestor joint.
    let mut bias = DVector::zeros(dim);
    for li in 0..nl {
        let link = &model.links[li];
        let rot = pose_rotation(&poses[li]);
        let com_w = pose_translation(&poses[li]) + rot * link.inertial_origin.xyz;
        let fg = link.mass * input.gravity;
        let grav =
            Vector6::new(com_w.cross(&fg).x, com_w.cross(&fg).y, com_w.cross(&fg).z, fg.x, fg.y, fg.z);
        let ext = &input.external[li];
        let p = pose_translation(&poses[li]);
        let f_ext_lin = Vector3::new(ext[3], ext[4], ext[5]);
        let n_origin = Vector3::new(ext[0], ext[1], ext[2]) + p.cross(&f_ext_lin);
        let ext_o = Vector6::new(
            n_origin.x,
            n_origin.y,
            n_origin.z,
            f_ext_lin.x,
            f_ext_lin.y,
            f_ext_lin.z,
        );
        let f = inertias[li] * bias_acc[li] + cross_force(&vel[li], &(inertias[li] * vel[li]))
            - grav
            - ext_o;
        for r in 0..6 {
            bias[r] += f[r];
        }
        for ji in chain_of(li) {
            bias[6 + dof_of_joint[ji]] += subspace[ji].dot(&f);
        }
    }

    // Joint damping and applied torques.
    let mut rhs = -bias;
    for (d, ji) in model.actuated_joints().into_iter().enumerate() {
        rhs[6 + d] += input.tau[d] - model.joints[ji].damping * input.qd[d];
    }

    let udot = m.lu().solve(&rhs).expect("oracle mass matrix solvable");

    let wd = Vector3::new(udot[0], udot[1], udot[2]);
    let ao = Vector3::new(udot[3], udot[4], udot[5]);
    let w = input.base_ang_vel;
    // Classical acceleration of the body point at the base origin.
    let base_lin_acc = ao + wd.cross(&input.base_pos) + w.cross(&input.base_lin_vel);
    OracleOutput {
        base_ang_acc: wd,
        base_lin_acc,
        qdd: DVector::from_iterator(n, (0..n).map(|d| udot[6 + d])),
    }
}

// ---------------------------------------------------------------------------
// Random chain fixtures.
// ---------------------------------------------------------------------------

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Serial floating-base chain with `dof` actuated joints, random masses in
/// [0.1, 5] kg, random axes and origins, and strictly valid inertias.
pub fn random_chain(rng: &mut ChaCha8Rng, dof: usize) -> RobotModel {
    let mut links = Vec::new();
    let mut joints = Vec::new();
    links.push(random_link(rng, "base"));
    for i in 0..dof {
        links.push(random_link(rng, &format!("link{i}")));
        let axis: Vector3<f64> = loop {
            let v = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm() > 0.2 {
                break v.normalize();
            }
        };
        let prismatic = rng.gen_bool(0.25);
        joints.push(Joint {
            name: format!("j{i}"),
            kind: if prismatic { JointKind::Prismatic } else { JointKind::Revolute },
            parent: i,
            child: i + 1,
            origin: locolab::model::Pose::new(
                Vector3::new(
                    rng.gen_range(-0.3..0.3),
                    rng.gen_range(-0.3..0.3),
                    rng.gen_range(-0.3..0.3),
                ),
                Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ),
            ),
            axis,
            limits: Some((-3.0, 3.0)),
            effort_limit: Some(50.0),
            velocity_limit: Some(30.0),
            damping: rng.gen_range(0.0..0.2),
        });
    }
    RobotModel::assemble("chain".into(), links, joints).expect("chain assembles")
}

fn random_link(rng: &mut ChaCha8Rng, name: &str) -> Link {
    let mass = rng.gen_range(0.1..5.0);
    // Principal moments from box-like half-sums: always triangle-valid.
    let x = rng.gen_range(0.001..0.05);
    let y = rng.gen_range(0.001..0.05);
    let z = rng.gen_range(0.001..0.05);
    let diag = Matrix3::from_diagonal(&Vector3::new(y + z, x + z, x + y));
    let rpy = Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let r = rpy_matrix(&rpy);
    Link {
        name: name.into(),
        mass,
        inertia: r * diag * r.transpose() * mass,
        inertial_origin: locolab::model::Pose::new(
            Vector3::new(
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
            ),
            Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ),
        ),
        collision: None,
    }
}

/// Isometry helper for tests.
pub fn iso(pos: Vector3<f64>, quat: UnitQuaternion<f64>) -> Isometry3<f64> {
    Isometry3::from_parts(Translation3::from(pos), quat)
}

// ---------------------------------------------------------------------------
// Bitwise reference CRC-32 (no table; the implementation uses a table).
// ---------------------------------------------------------------------------

pub fn crc32_bitwise(data: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &byte in data {
        crc ^= byte as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    crc ^ 0xFFFF_FFFF
}

// ---------------------------------------------------------------------------
// Brute-force nested-sum GAE.
// ---------------------------------------------------------------------------

/// Direct evaluation of the exponentially weighted advantage definition:
/// A_t = sum_{l >= 0} (gamma*lambda)^l delta_{t+l}, truncating at episode
/// boundaries.
pub fn gae_nested_sum(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let value_after = |t: usize| -> f64 {
        if t + 1 < n {
            values[t + 1]
        } else {
            bootstrap
        }
    };
    let delta = |t: usize| -> f64 {
        let not_done = if dones[t] { 0.0 } else { 1.0 };
        rewards[t] + gamma * value_after(t) * not_done - values[t]
    };
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            let mut weight = 1.0;
            for l in t..n {
                acc += weight * delta(l);
                if dones[l] {
                    break;
                }
                weight *= gamma * lambda;
            }
            acc
        })
        .collect()
}
