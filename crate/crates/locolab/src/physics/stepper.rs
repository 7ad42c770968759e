//! Instance construction, PD actuation, and the fixed-step semi-implicit
//! Euler control step.

use nalgebra::{DVector, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::contact::{contact_forces_with, sample_points};
use super::dynamics::{aba, body_spatial_inertia};
use super::{
    Actuation, ActuationMode, BodyParams, DofInfo, JointSim, PhysicsError, SimContext, SimParams,
    SimState, Terrain,
};
use crate::model::{validate, RobotModel, Severity};

/// Ground clearance of the lowest collision point at spawn.
pub const SPAWN_CLEARANCE: f64 = 0.01;

/// Builds an immutable simulation context plus the initial state, with the
/// robot posed at `q0` and the base dropped so the lowest collision point
/// sits `SPAWN_CLEARANCE` above the terrain. Randomization (when enabled)
/// draws once here from `seed`.
pub fn build_sim(
    model: &RobotModel,
    q0: &[f64],
    terrain: Terrain,
    params: SimParams,
    actuation: Actuation,
    seed: u64,
    fixed_base: bool,
) -> Result<(SimContext, SimState), PhysicsError> {
    params.validate()?;
    let diags = validate(model);
    if let Some(err) = diags.iter().find(|d| d.severity == Severity::Error) {
        return Err(PhysicsError::ModelInvalid(err.to_string()));
    }
    let dof = model.dof();
    if dof == 0 {
        return Err(PhysicsError::ZeroDof);
    }
    if q0.len() != dof {
        return Err(PhysicsError::DimensionMismatch { expected: dof, got: q0.len() });
    }
    if actuation.kp.len() != dof || actuation.kd.len() != dof || actuation.modes.len() != dof {
        return Err(PhysicsError::DimensionMismatch { expected: dof, got: actuation.kp.len() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mass_multiplier = 1.0;
    let mut friction = terrain.friction_override().unwrap_or(params.friction_mu);
    if let Some(r) = &params.randomization {
        mass_multiplier = rng.gen_range(1.0 - r.mass_pct..=1.0 + r.mass_pct);
        friction = rng.gen_range(r.friction_range.0..=r.friction_range.1);
    }

    let bodies: Vec<BodyParams> = model
        .links
        .iter()
        .map(|link| {
            let rot = link.inertial_origin.rotation().to_rotation_matrix();
            let i_com = rot.matrix() * link.inertia * rot.matrix().transpose() * mass_multiplier;
            let mass = link.mass * mass_multiplier;
            let com = link.inertial_origin.xyz;
            BodyParams { mass, com, spatial_inertia: body_spatial_inertia(mass, &com, &i_com) }
        })
        .collect();

    let mut dof_of_joint = vec![None; model.joints.len()];
    for (d, ji) in model.actuated_joints().into_iter().enumerate() {
        dof_of_joint[ji] = Some(d);
    }
    let joints_topo: Vec<JointSim> = model
        .topological_joints()
        .into_iter()
        .map(|ji| {
            let j = &model.joints[ji];
            JointSim {
                parent: j.parent,
                child: j.child,
                origin: j.origin.isometry(),
                kind: j.kind,
                axis: j.axis,
                dof: dof_of_joint[ji],
            }
        })
        .collect();

    let dofs: Vec<DofInfo> = model
        .actuated_joints()
        .into_iter()
        .map(|ji| {
            let j = &model.joints[ji];
            DofInfo {
                joint_idx: ji,
                limits: j.effective_limits(),
                effort_limit: j.effective_effort_limit(),
                velocity_limit: j.effective_velocity_limit(),
                damping: j.damping,
            }
        })
        .collect();

    let samples: Vec<Vec<Vector3<f64>>> = model
        .links
        .iter()
        .map(|l| l.collision.as_ref().map(sample_points).unwrap_or_default())
        .collect();

    let ctx = SimContext {
        model: model.clone(),
        params,
        terrain,
        dof,
        dofs,
        actuation,
        friction,
        mass_multiplier,
        gravity: Vector3::new(params.gravity[0], params.gravity[1], params.gravity[2]),
        fixed_base,
        joints_topo,
        bodies,
        samples,
    };

    let mut state = SimState {
        base_pos: Vector3::zeros(),
        base_quat: UnitQuaternion::identity(),
        base_lin_vel: Vector3::zeros(),
        base_ang_vel: Vector3::zeros(),
        q: DVector::from_column_slice(q0),
        qd: DVector::zeros(dof),
        time: 0.0,
        contacts: Vec::new(),
        last_applied_torques: DVector::zeros(dof),
        base_lin_acc: Vector3::zeros(),
        fault: false,
    };
    if !fixed_base {
        // Clearance is affine in base z for vertical-normal terrain.
        let kin = ctx.kinematics(&state);
        let clearance = ctx.min_clearance(&kin);
        state.base_pos.z = SPAWN_CLEARANCE - clearance;
    }

    Ok((ctx, state))
}

/// PD servo law. Position channels: tau = kp*(target - q) - kd*qd.
/// Velocity channels (wheels): tau = kd*(target - qd). Every channel is
/// clamped to its effort limit.
pub fn pd_torques(
    q: &DVector<f64>,
    qd: &DVector<f64>,
    target: &DVector<f64>,
    kp: &[f64],
    kd: &[f64],
    effort_limits: &[f64],
    modes: &[ActuationMode],
) -> Result<DVector<f64>, PhysicsError> {
    let n = q.len();
    if qd.len() != n
        || target.len() != n
        || kp.len() != n
        || kd.len() != n
        || effort_limits.len() != n
        || modes.len() != n
    {
        return Err(PhysicsError::DimensionMismatch { expected: n, got: target.len() });
    }
    let mut tau = DVector::zeros(n);
    for i in 0..n {
        let raw = match modes[i] {
            ActuationMode::Position => kp[i] * (target[i] - q[i]) - kd[i] * qd[i],
            ActuationMode::Velocity => kd[i] * (target[i] - qd[i]),
        };
        tau[i] = raw.clamp(-effort_limits[i], effort_limits[i]);
    }
    Ok(tau)
}

/// Advances one control period: `substeps_per_control` semi-implicit Euler
/// substeps holding `q_target` fixed. A non-finite result freezes the state
/// at the last finite substep and raises the `fault` flag instead of
/// propagating an error, so one exploding instance cannot poison a batch.
pub fn step(ctx: &SimContext, state: &SimState, q_target: &DVector<f64>) -> SimState {
    assert_eq!(q_target.len(), ctx.dof, "q_target dimension mismatch");
    let mut cur = state.clone();
    if cur.fault {
        return cur;
    }
    let dt = ctx.params.dt_physics;
    let effort: Vec<f64> = ctx.dofs.iter().map(|d| d.effort_limit).collect();

    for _ in 0..ctx.params.substeps_per_control {
        let kin = ctx.kinematics(&cur);
        let (contacts, wrenches) = contact_forces_with(ctx, &kin);
        let tau = pd_torques(
            &cur.q,
            &cur.qd,
            q_target,
            &ctx.actuation.kp,
            &ctx.actuation.kd,
            &effort,
            &ctx.actuation.modes,
        )
        .expect("actuation dimensions checked at build");

        let acc = aba(ctx, &cur, &kin, &tau, &wrenches);

        let mut next = cur.clone();
        if !ctx.fixed_base {
            next.base_lin_vel += acc.base_lin * dt;
            next.base_ang_vel += acc.base_ang * dt;
            next.base_pos += next.base_lin_vel * dt;
            let dq = UnitQuaternion::from_scaled_axis(next.base_ang_vel * dt);
            let raw = (dq * next.base_quat).into_inner().normalize();
            next.base_quat = UnitQuaternion::new_unchecked(raw);
        }
        for d in 0..ctx.dof {
            next.qd[d] = cur.qd[d] + acc.qdd[d] * dt;
            next.q[d] = cur.q[d] + next.qd[d] * dt;
            // Inelastic joint stops.
            if let Some((lo, hi)) = ctx.dofs[d].limits {
                if next.q[d] < lo {
                    next.q[d] = lo;
                    next.qd[d] = next.qd[d].max(0.0);
                } else if next.q[d] > hi {
                    next.q[d] = hi;
                    next.qd[d] = next.qd[d].min(0.0);
                }
            }
        }
        next.time = cur.time + dt;
        next.contacts = contacts;
        next.last_applied_torques = tau;
        next.base_lin_acc = acc.base_lin;

        if !state_is_finite(&next) {
            cur.fault = true;
            return cur;
        }
        cur = next;
    }
    cur
}

/// Diverged states count as faults well before they reach infinity;
/// values this large already mean the instance is garbage and would
/// poison observation statistics.
const BLOWUP_LIMIT: f64 = 1e9;

fn state_is_finite(s: &SimState) -> bool {
    let ok = |v: f64| v.is_finite() && v.abs() < BLOWUP_LIMIT;
    s.base_pos.iter().all(|v| ok(*v))
        && s.base_quat.coords.iter().all(|v| v.is_finite())
        && s.base_lin_vel.iter().all(|v| ok(*v))
        && s.base_ang_vel.iter().all(|v| ok(*v))
        && s.q.iter().all(|v| ok(*v))
        && s.qd.iter().all(|v| ok(*v))
}
