//! Environment runners and the CPU-parallel rollout. Each worker owns a
//! disjoint set of environments with private RNG streams; the assembled
//! buffer is laid out env-index-major, so results are bitwise identical for
//! any worker count.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::net::{policy_forward, sample_action, PolicyParams};
use super::obs::raw_obs;
use super::{streams, LearnerError};
use crate::gait::{advance_clock, compose_action, ff_signal, Command, GaitClock, JumpStage};
use crate::model::RobotModel;
use crate::morphology::{actuation_for, MorphologyProfile, Task, TrainConfig};
use crate::physics::{
    build_sim, step, terrain_height, ActuationMode, DofInfo, SimContext, SimParams, SimState,
    Terrain,
};
use crate::reward::{compute_reward, RewardInputs, RewardWeights};

/// Falling below this fraction of the standing height ends the episode.
pub const FALL_HEIGHT_FRACTION: f64 = 0.4;
/// Tilting past this angle (rad) ends the episode.
pub const FALL_TILT: f64 = std::f64::consts::FRAC_PI_3;

/// A steppable robot: the local simulator or a remote bridge. `reset`
/// failures abort training; `step` failures end the current episode.
pub trait RobotBackend: Send {
    fn reset(&mut self, seed: u64) -> Result<SimState, String>;
    fn step(&mut self, q_target: &DVector<f64>) -> Result<SimState, String>;
}

pub type BackendFactory<'a> = &'a (dyn Fn(usize) -> Box<dyn RobotBackend> + Sync);

/// In-process physics instance; rebuilt on every reset so build-time
/// randomization redraws per episode.
pub struct LocalBackend {
    model: RobotModel,
    q0: Vec<f64>,
    terrain: Terrain,
    sim: SimParams,
    actuation: crate::physics::Actuation,
    ctx: Option<SimContext>,
    state: Option<SimState>,
}

impl LocalBackend {
    pub fn new(
        model: RobotModel,
        profile: &MorphologyProfile,
        config: &TrainConfig,
        sim: SimParams,
        terrain: Terrain,
    ) -> Self {
        LocalBackend {
            model,
            q0: profile.default_pose_q0.clone(),
            terrain,
            sim,
            actuation: actuation_for(profile, config),
            ctx: None,
            state: None,
        }
    }
}

impl RobotBackend for LocalBackend {
    fn reset(&mut self, seed: u64) -> Result<SimState, String> {
        let (ctx, state) = build_sim(
            &self.model,
            &self.q0,
            self.terrain,
            self.sim,
            self.actuation.clone(),
            seed,
            false,
        )
        .map_err(|e| e.to_string())?;
        self.ctx = Some(ctx);
        self.state = Some(state.clone());
        Ok(state)
    }

    fn step(&mut self, q_target: &DVector<f64>) -> Result<SimState, String> {
        let ctx = self.ctx.as_ref().ok_or("step before reset")?;
        let state = self.state.as_ref().ok_or("step before reset")?;
        let next = step(ctx, state, q_target);
        self.state = Some(next.clone());
        Ok(next)
    }
}

/// Immutable per-run description shared by every environment.
pub struct EnvSetup {
    pub model: RobotModel,
    pub profile: MorphologyProfile,
    pub config: TrainConfig,
    pub sim: SimParams,
    pub terrain: Terrain,
    pub dofs: Vec<DofInfo>,
    pub modes: Vec<ActuationMode>,
    pub limits: Vec<Option<(f64, f64)>>,
    pub episode_ticks: usize,
    pub seed: u64,
}

impl EnvSetup {
    pub fn new(
        model: RobotModel,
        profile: MorphologyProfile,
        config: TrainConfig,
        sim: SimParams,
        terrain: Terrain,
        seed: u64,
    ) -> Self {
        let actuation = actuation_for(&profile, &config);
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
        let limits = dofs.iter().map(|d| d.limits).collect();
        let episode_ticks =
            (config.episode_length_s / sim.control_dt()).round().max(1.0) as usize;
        EnvSetup {
            model,
            profile,
            config,
            sim,
            terrain,
            dofs,
            modes: actuation.modes,
            limits,
            episode_ticks,
            seed,
        }
    }

    pub fn dof(&self) -> usize {
        self.dofs.len()
    }

    fn sample_command(&self, rng: &mut ChaCha8Rng) -> Command {
        let r = &self.config.command_ranges;
        let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
            if hi > lo {
                rng.gen_range(lo..=hi)
            } else {
                lo
            }
        };
        Command {
            vx: draw(rng, r.vx),
            vy: draw(rng, r.vy),
            yaw_rate: draw(rng, r.yaw_rate),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStat {
    pub env: usize,
    /// Tick index within the rollout at which the episode ended.
    pub end_t: usize,
    pub ep_return: f64,
    pub len: usize,
    pub fell: bool,
}

/// Transitions recorded by one environment, later assembled env-major.
pub struct EnvTrace {
    pub raw_obs: Vec<f64>,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub logp: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub term_sums: [f64; 9],
    pub bootstrap: f64,
    pub episodes: Vec<EpisodeStat>,
}

/// One environment's rollout state machine.
pub struct EnvRunner<'a> {
    setup: &'a EnvSetup,
    backend: Box<dyn RobotBackend>,
    rng: ChaCha8Rng,
    env_idx: usize,
    pub state: SimState,
    pub clock: GaitClock,
    pub command: Command,
    prev_out: DVector<f64>,
    ep_return: f64,
    ep_ticks: usize,
}

impl<'a> EnvRunner<'a> {
    pub fn new(
        setup: &'a EnvSetup,
        backend: Box<dyn RobotBackend>,
        iter: u64,
        env_idx: usize,
    ) -> Result<Self, LearnerError> {
        let rng = streams::env_stream(setup.seed, iter, env_idx);
        Self::with_rng(setup, backend, rng, env_idx)
    }

    /// Runner over an explicit RNG stream (evaluation uses its own).
    pub fn with_rng(
        setup: &'a EnvSetup,
        mut backend: Box<dyn RobotBackend>,
        mut rng: ChaCha8Rng,
        env_idx: usize,
    ) -> Result<Self, LearnerError> {
        let state = backend.reset(rng.gen()).map_err(LearnerError::Backend)?;
        let command = setup.sample_command(&mut rng);
        let clock = Self::fresh_clock(setup, &mut rng);
        let dof = setup.dof();
        Ok(EnvRunner {
            setup,
            backend,
            rng,
            env_idx,
            state,
            clock,
            command,
            prev_out: DVector::zeros(dof),
            ep_return: 0.0,
            ep_ticks: 0,
        })
    }

    /// Fixed command override (evaluation).
    pub fn set_command(&mut self, command: Command) {
        self.command = command;
    }

    fn fresh_clock(setup: &EnvSetup, rng: &mut ChaCha8Rng) -> GaitClock {
        let f = setup.config.feedforward.frequency_hz;
        if setup.config.task.is_periodic() {
            GaitClock::with_phase(f, rng.gen::<f64>())
        } else {
            GaitClock::new(f)
        }
    }

    fn reset_episode(&mut self) -> Result<(), LearnerError> {
        let seed = self.rng.gen();
        self.state = self.backend.reset(seed).map_err(LearnerError::Backend)?;
        self.command = self.setup.sample_command(&mut self.rng);
        self.clock = Self::fresh_clock(self.setup, &mut self.rng);
        self.prev_out.fill(0.0);
        self.ep_return = 0.0;
        self.ep_ticks = 0;
        Ok(())
    }

    fn is_fallen(&self, state: &SimState) -> bool {
        let (ground, _) = terrain_height(&self.setup.terrain, state.base_pos.x, state.base_pos.y);
        let height = state.base_pos.z - ground;
        state.fault
            || height < FALL_HEIGHT_FRACTION * self.setup.profile.standing_height
            || state.tilt_angle() > FALL_TILT
    }

    /// Advances one control tick. Returns the transition pieces so callers
    /// can record or discard them.
    pub fn tick(
        &mut self,
        params: &PolicyParams,
        weights: &RewardWeights,
        deterministic: bool,
    ) -> Result<Tick, LearnerError> {
        let setup = self.setup;
        let raw = raw_obs(
            &self.state,
            &self.clock,
            self.command,
            self.prev_out.as_slice(),
            &setup.profile.default_pose_q0,
        );
        let obs = params.obs_norm.normalize(&raw);
        let (mean, value) = policy_forward(params, &obs);
        let (action, logp) = if deterministic {
            let lp = super::net::log_prob(&mean, &mean, &params.log_std);
            (mean, lp)
        } else {
            sample_action(&mean, &params.log_std, &mut self.rng)
        };

        let ff = ff_signal(&setup.profile, &setup.config, &self.clock, self.command, &setup.limits);
        let q_target =
            compose_action(&ff, action.as_slice(), &setup.config.action_scale, &setup.dofs, &setup.modes)
                .map_err(|e| LearnerError::Backend(e.to_string()))?;

        let in_flight = self.clock.jump_stage == JumpStage::Flight
            && setup.config.task == Task::Jump;

        let (next_state, step_fault) = match self.backend.step(&q_target) {
            Ok(s) => (s, false),
            Err(_) => (self.state.clone(), true),
        };

        let breakdown = compute_reward(
            &RewardInputs {
                state: &next_state,
                prev_action: self.prev_out.as_slice(),
                action: action.as_slice(),
                command: self.command,
                contact_schedule: &ff.contact_schedule,
                foot_links: &setup.profile.foot_links,
                in_flight,
                standing_height: setup.profile.standing_height,
                terrain: &setup.terrain,
                track_vy: setup.config.lin_vel_tracks_vy,
            },
            weights,
        )
        .map_err(|e| LearnerError::Backend(e.to_string()))?;
        let reward = if step_fault { 0.0 } else { breakdown.total };

        let fell = self.is_fallen(&next_state) || step_fault;
        let timeout = self.ep_ticks + 1 >= setup.episode_ticks;
        let done = fell || timeout;

        let grounded = setup.profile.foot_links.iter().any(|&fl| next_state.link_in_contact(fl));
        self.clock = advance_clock(&self.clock, setup.sim.control_dt(), grounded);
        self.prev_out = action.clone();
        self.state = next_state;
        self.ep_return += reward;
        self.ep_ticks += 1;

        Ok(Tick {
            raw_obs: raw,
            obs,
            action,
            logp,
            value,
            reward,
            terms: breakdown.terms(),
            done,
            fell,
        })
    }

    /// Value of the current observation under `params` (GAE bootstrap).
    pub fn bootstrap_value(&self, params: &PolicyParams) -> f64 {
        let raw = raw_obs(
            &self.state,
            &self.clock,
            self.command,
            self.prev_out.as_slice(),
            &self.setup.profile.default_pose_q0,
        );
        let obs = params.obs_norm.normalize(&raw);
        policy_forward(params, &obs).1
    }

    fn run_steps(
        &mut self,
        params: &PolicyParams,
        weights: &RewardWeights,
        steps: usize,
    ) -> Result<EnvTrace, LearnerError> {
        let dof = self.setup.dof();
        let od = super::obs::obs_dim(dof);
        let mut trace = EnvTrace {
            raw_obs: Vec::with_capacity(steps * od),
            obs: Vec::with_capacity(steps * od),
            actions: Vec::with_capacity(steps * dof),
            logp: Vec::with_capacity(steps),
            rewards: Vec::with_capacity(steps),
            values: Vec::with_capacity(steps),
            dones: Vec::with_capacity(steps),
            term_sums: [0.0; 9],
            bootstrap: 0.0,
            episodes: Vec::new(),
        };
        for t in 0..steps {
            let tick = self.tick(params, weights, false)?;
            trace.raw_obs.extend(tick.raw_obs.iter());
            trace.obs.extend(tick.obs.iter());
            trace.actions.extend(tick.action.iter());
            trace.logp.push(tick.logp);
            trace.rewards.push(tick.reward);
            trace.values.push(tick.value);
            trace.dones.push(tick.done);
            for (s, v) in trace.term_sums.iter_mut().zip(tick.terms) {
                *s += v;
            }
            if tick.done {
                trace.episodes.push(EpisodeStat {
                    env: self.env_idx,
                    end_t: t,
                    ep_return: self.ep_return,
                    len: self.ep_ticks,
                    fell: tick.fell,
                });
                self.reset_episode()?;
            }
        }
        trace.bootstrap = self.bootstrap_value(params);
        Ok(trace)
    }
}

pub struct Tick {
    pub raw_obs: DVector<f64>,
    pub obs: DVector<f64>,
    pub action: DVector<f64>,
    pub logp: f64,
    pub value: f64,
    pub reward: f64,
    pub terms: [f64; 9],
    pub done: bool,
    pub fell: bool,
}

/// Collected trajectories in env-index-major layout.
pub struct RolloutBuffer {
    pub num_envs: usize,
    pub steps: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub raw_obs: Vec<f64>,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub logp: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub bootstrap: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    pub term_sums: [f64; 9],
    pub episodes: Vec<EpisodeStat>,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.num_envs * self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fill advantages and returns env by env.
    pub fn run_gae(&mut self, gamma: f64, lambda: f64) -> Result<(), LearnerError> {
        let t = self.steps;
        self.advantages = vec![0.0; self.len()];
        self.returns = vec![0.0; self.len()];
        for e in 0..self.num_envs {
            let lo = e * t;
            let hi = lo + t;
            let (adv, ret) = super::gae::gae(
                &self.rewards[lo..hi],
                &self.values[lo..hi],
                &self.dones[lo..hi],
                self.bootstrap[e],
                gamma,
                lambda,
            )?;
            self.advantages[lo..hi].copy_from_slice(&adv);
            self.returns[lo..hi].copy_from_slice(&ret);
        }
        Ok(())
    }
}

/// Runs `steps` control ticks on `num_envs` environments split across
/// `workers` threads (contiguous chunks). Every environment derives its RNG
/// from (seed, iter, env index), so the result does not depend on the
/// thread layout.
#[allow(clippy::too_many_arguments)]
pub fn rollout(
    setup: &EnvSetup,
    params: &PolicyParams,
    weights: &RewardWeights,
    iter: u64,
    num_envs: usize,
    steps: usize,
    workers: usize,
    make_backend: BackendFactory,
) -> Result<RolloutBuffer, LearnerError> {
    let workers = workers.clamp(1, num_envs.max(1));
    let mut traces: Vec<Option<Result<EnvTrace, LearnerError>>> =
        (0..num_envs).map(|_| None).collect();

    let chunk = num_envs.div_ceil(workers);
    std::thread::scope(|scope| {
        let mut rest: &mut [Option<Result<EnvTrace, LearnerError>>] = &mut traces;
        let mut start = 0;
        while start < num_envs {
            let take = chunk.min(num_envs - start);
            let (head, tail) = rest.split_at_mut(take);
            rest = tail;
            let first_env = start;
            scope.spawn(move || {
                for (k, slot) in head.iter_mut().enumerate() {
                    let env_idx = first_env + k;
                    let run = EnvRunner::new(setup, make_backend(env_idx), iter, env_idx)
                        .and_then(|mut r| r.run_steps(params, weights, steps));
                    *slot = Some(run);
                }
            });
            start += take;
        }
    });

    let dof = setup.dof();
    let od = super::obs::obs_dim(dof);
    let mut buf = RolloutBuffer {
        num_envs,
        steps,
        obs_dim: od,
        act_dim: dof,
        raw_obs: Vec::with_capacity(num_envs * steps * od),
        obs: Vec::with_capacity(num_envs * steps * od),
        actions: Vec::with_capacity(num_envs * steps * dof),
        logp: Vec::with_capacity(num_envs * steps),
        rewards: Vec::with_capacity(num_envs * steps),
        values: Vec::with_capacity(num_envs * steps),
        dones: Vec::with_capacity(num_envs * steps),
        bootstrap: Vec::with_capacity(num_envs),
        advantages: Vec::new(),
        returns: Vec::new(),
        term_sums: [0.0; 9],
        episodes: Vec::new(),
    };
    for trace in traces.into_iter() {
        let t = trace.expect("worker filled every slot")?;
        buf.raw_obs.extend(t.raw_obs);
        buf.obs.extend(t.obs);
        buf.actions.extend(t.actions);
        buf.logp.extend(t.logp);
        buf.rewards.extend(t.rewards);
        buf.values.extend(t.values);
        buf.dones.extend(t.dones);
        buf.bootstrap.push(t.bootstrap);
        for (s, v) in buf.term_sums.iter_mut().zip(t.term_sums) {
            *s += v;
        }
        buf.episodes.extend(t.episodes);
    }
    Ok(buf)
}

pub fn local_backend_factory(setup: &EnvSetup) -> impl Fn(usize) -> Box<dyn RobotBackend> + Sync + '_ {
    move |_env| {
        Box::new(LocalBackend::new(
            setup.model.clone(),
            &setup.profile,
            &setup.config,
            setup.sim,
            setup.terrain,
        ))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub ticks: usize,
    pub mean_velocity: f64,
    pub mean_return: f64,
    pub fall_count: usize,
    pub fall_rate: f64,
    pub mean_ep_len: f64,
}

use serde::Serialize;

/// Deterministic (mean-action) evaluation under a fixed command. Episode
/// seeds come from a dedicated stream, so results never depend on training
/// history beyond the checkpoint contents.
pub fn evaluate(
    setup: &EnvSetup,
    params: &PolicyParams,
    weights: &RewardWeights,
    command: Command,
    episodes: usize,
    max_ticks: Option<usize>,
    make_backend: BackendFactory,
    mut on_tick: Option<&mut dyn FnMut(usize, &SimState)>,
) -> Result<EvalSummary, LearnerError> {
    let mut vel_sum = 0.0;
    let mut ret_sum = 0.0;
    let mut len_sum = 0usize;
    let mut falls = 0usize;
    let mut ticks_total = 0usize;
    let mut episodes_run = 0usize;

    for ep in 0..episodes {
        if max_ticks.is_some_and(|cap| ticks_total >= cap) {
            break;
        }
        episodes_run += 1;
        let rng = streams::eval_stream(setup.seed, ep as u64);
        let mut runner = EnvRunner::with_rng(setup, make_backend(0), rng, 0)?;
        runner.set_command(command);
        let mut done = false;
        let mut t = 0;
        while !done && t < setup.episode_ticks {
            if max_ticks.is_some_and(|cap| ticks_total >= cap) {
                break;
            }
            let tick = runner.tick(params, weights, true)?;
            vel_sum += runner.state.base_lin_vel.x;
            ret_sum += tick.reward;
            if let Some(cb) = on_tick.as_deref_mut() {
                cb(ticks_total, &runner.state);
            }
            ticks_total += 1;
            t += 1;
            if tick.done {
                done = true;
                if tick.fell {
                    falls += 1;
                }
            }
        }
        len_sum += t;
    }
    let episodes = episodes_run;

    Ok(EvalSummary {
        episodes,
        ticks: ticks_total,
        mean_velocity: if ticks_total > 0 { vel_sum / ticks_total as f64 } else { 0.0 },
        mean_return: if episodes > 0 { ret_sum / episodes as f64 } else { 0.0 },
        fall_count: falls,
        fall_rate: if episodes > 0 { falls as f64 / episodes as f64 } else { 0.0 },
        mean_ep_len: if episodes > 0 { len_sum as f64 / episodes as f64 } else { 0.0 },
    })
}
