//! Articulated-body forward dynamics in body coordinates (Featherstone's
//! O(n) algorithm) with a 6-DOF floating base.

use nalgebra::{DVector, Matrix6, UnitQuaternion, Vector3, Vector6};

use super::spatial::{
    angular, cross_force, cross_motion, linear, spatial_inertia, vec6, Vec6, Xform,
};
use super::{LinkKinematics, PhysicsError, SimContext, SimState};
use crate::model::JointKind;

/// Classical base acceleration (world frame) plus joint accelerations.
pub struct Accelerations {
    pub base_lin: Vector3<f64>,
    pub base_ang: Vector3<f64>,
    pub qdd: DVector<f64>,
}

/// Forward dynamics under gravity, joint torques `tau`, joint damping, and
/// the given external wrenches (world frame, about each link origin, as
/// `[torque; force]`). Base pose and twist come from `state`.
pub fn forward_dynamics_aba(
    ctx: &SimContext,
    state: &SimState,
    tau: &DVector<f64>,
    external: &[Vec6],
) -> Result<Accelerations, PhysicsError> {
    if tau.len() != ctx.dof {
        return Err(PhysicsError::DimensionMismatch { expected: ctx.dof, got: tau.len() });
    }
    if state.q.len() != ctx.dof || state.qd.len() != ctx.dof {
        return Err(PhysicsError::DimensionMismatch { expected: ctx.dof, got: state.q.len() });
    }
    if !tau.iter().all(|v| v.is_finite())
        || !state.q.iter().all(|v| v.is_finite())
        || !state.qd.iter().all(|v| v.is_finite())
    {
        return Err(PhysicsError::NonFiniteInput("forward dynamics inputs"));
    }
    let kin = ctx.kinematics(state);
    Ok(aba(ctx, state, &kin, tau, external))
}

pub(crate) fn aba(
    ctx: &SimContext,
    state: &SimState,
    kin: &LinkKinematics,
    tau: &DVector<f64>,
    external: &[Vec6],
) -> Accelerations {
    let nl = ctx.model.links.len();
    let root = ctx.model.root_link;
    let nj = ctx.joints_topo.len();

    // Per-link quantities in each body's own coordinates.
    let mut v = vec![Vec6::zeros(); nl];
    let mut c_bias = vec![Vec6::zeros(); nl];
    let mut ia = vec![Matrix6::zeros(); nl];
    let mut pa = vec![Vec6::zeros(); nl];
    let mut x_up = vec![
        Xform { e: nalgebra::Matrix3::identity(), r: Vector3::zeros() };
        nl
    ];
    let mut s_axis = vec![Vec6::zeros(); nl];

    let body_wrench = |li: usize| -> Vec6 {
        // Gravity acts at the center of mass; external wrenches arrive in
        // world coordinates about the link origin.
        let rot = kin.pose[li].rotation;
        let g_body = rot.inverse() * (ctx.gravity * ctx.bodies[li].mass);
        let grav = vec6(ctx.bodies[li].com.cross(&g_body), g_body);
        let ext = &external[li];
        let n_b = rot.inverse() * angular(ext);
        let f_b = rot.inverse() * linear(ext);
        grav + vec6(n_b, f_b)
    };

    // Base twist in base coordinates.
    let rb = state.base_quat.inverse();
    v[root] = vec6(rb * state.base_ang_vel, rb * state.base_lin_vel);
    ia[root] = ctx.bodies[root].spatial_inertia;
    pa[root] = cross_force(&v[root], &(ia[root] * v[root])) - body_wrench(root);

    // Pass 1: velocities and bias terms, root outward.
    for js in &ctx.joints_topo {
        let i = js.child;
        let (motion_rot, motion_pos, s, qd_i): (UnitQuaternion<f64>, Vector3<f64>, Vec6, f64) =
            match js.kind {
                JointKind::Fixed => {
                    (UnitQuaternion::identity(), Vector3::zeros(), Vec6::zeros(), 0.0)
                }
                JointKind::Revolute | JointKind::Continuous => {
                    let d = js.dof.unwrap();
                    let rot = UnitQuaternion::from_axis_angle(
                        &nalgebra::Unit::new_unchecked(js.axis),
                        state.q[d],
                    );
                    (rot, Vector3::zeros(), vec6(js.axis, Vector3::zeros()), state.qd[d])
                }
                JointKind::Prismatic => {
                    let d = js.dof.unwrap();
                    (
                        UnitQuaternion::identity(),
                        js.axis * state.q[d],
                        vec6(Vector3::zeros(), js.axis),
                        state.qd[d],
                    )
                }
            };
        // Child pose in parent coordinates: origin * joint motion.
        let rot_pc = js.origin.rotation * motion_rot;
        let pos_pc = js.origin.translation.vector + js.origin.rotation * motion_pos;
        let x = Xform::from_pose(&rot_pc, &pos_pc);
        let vj = s * qd_i;
        v[i] = x.motion(&v[js.parent]) + vj;
        c_bias[i] = cross_motion(&v[i], &vj);
        ia[i] = ctx.bodies[i].spatial_inertia;
        pa[i] = cross_force(&v[i], &(ia[i] * v[i])) - body_wrench(i);
        x_up[i] = x;
        s_axis[i] = s;
    }

    // Pass 2: articulated inertias, leaves inward.
    let mut u_vec = vec![Vec6::zeros(); nl];
    let mut d_inv = vec![0.0; nl];
    let mut u_scal = vec![0.0; nl];
    for k in (0..nj).rev() {
        let js = &ctx.joints_topo[k];
        let i = js.child;
        match js.dof {
            Some(d) => {
                let s = s_axis[i];
                let u = ia[i] * s;
                let dd = s.dot(&u);
                let tau_eff = tau[d] - ctx.dofs[d].damping * state.qd[d];
                let uu = tau_eff - s.dot(&pa[i]);
                let ia_art = ia[i] - u * (u / dd).transpose();
                let pa_art = pa[i] + ia_art * c_bias[i] + u * (uu / dd);
                let x = &x_up[i];
                let xm = x.to_matrix();
                ia[js.parent] += xm.transpose() * ia_art * xm;
                pa[js.parent] += x.inv_force(&pa_art);
                u_vec[i] = u;
                d_inv[i] = 1.0 / dd;
                u_scal[i] = uu;
            }
            None => {
                let x = &x_up[i];
                let xm = x.to_matrix();
                let ia_art = ia[i];
                let pa_art = pa[i] + ia_art * c_bias[i];
                ia[js.parent] += xm.transpose() * ia_art * xm;
                pa[js.parent] += x.inv_force(&pa_art);
            }
        }
    }

    // Base acceleration (spatial, base coordinates).
    let a_base: Vec6 = if ctx.fixed_base {
        Vec6::zeros()
    } else {
        let rhs: Vector6<f64> = -pa[root];
        // A singular or non-finite articulated inertia surfaces as NaN so
        // the stepper's fault freeze can catch it.
        ia[root].lu().solve(&rhs).unwrap_or_else(|| Vector6::from_element(f64::NAN))
    };

    // Pass 3: joint accelerations, root outward.
    let mut a = vec![Vec6::zeros(); nl];
    a[root] = a_base;
    let mut qdd = DVector::zeros(ctx.dof);
    for js in &ctx.joints_topo {
        let i = js.child;
        let a_parent = x_up[i].motion(&a[js.parent]) + c_bias[i];
        match js.dof {
            Some(d) => {
                let qdd_i = d_inv[i] * (u_scal[i] - u_vec[i].dot(&a_parent));
                qdd[d] = qdd_i;
                a[i] = a_parent + s_axis[i] * qdd_i;
            }
            None => a[i] = a_parent,
        }
    }

    // Convert the base spatial acceleration to a classical world-frame one.
    let r = state.base_quat;
    let w_b = angular(&v[root]);
    let v_b = linear(&v[root]);
    Accelerations {
        base_ang: r * angular(&a_base),
        base_lin: r * (linear(&a_base) + w_b.cross(&v_b)),
        qdd,
    }
}

/// Spatial inertia of link `li` about its own origin in link coordinates.
pub(crate) fn body_spatial_inertia(
    mass: f64,
    com: &Vector3<f64>,
    i_com: &nalgebra::Matrix3<f64>,
) -> Matrix6<f64> {
    spatial_inertia(mass, com, i_com)
}
