//! Library implementations behind the CLI verbs. Each returns structured
//! results; the thin binary maps them onto exit codes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::artifacts::{write_atomic, write_json_atomic};
use super::config::{
    load_robot, prepare_run, read_config_file, variant_seed, ConfigFile, FlagOverrides,
    PreparedRun, ResolvedConfig, SweepAxis, SweepSpec,
};
use super::HarnessError;
use crate::gait::Command;
use crate::learner::{
    evaluate, load_checkpoint, local_backend_factory, train, EnvSetup, EvalSummary,
    TrainOutcome, TrainSession,
};
use crate::model::{is_clean_of_errors, lock_joints, parse_urdf, scale_links, to_urdf_string, validate};
use crate::morphology::{classify, extract_profile, task_menu, RobotType, Task};
use crate::physics::Terrain;
use crate::reward::current_weights;
use crate::sim2real::{
    align_states, load_session_channels, serve_policy, spawn_mock, AlignmentReport,
    MockRobotConfig, PolicySession, ServeOptions, ServeReport,
};

/// `import`: print diagnostics, the classification suggestion, DOF count,
/// and the leg chains. Exit 0 only when validation finds no errors.
pub fn cmd_import(
    out: &mut dyn Write,
    path: &str,
    requested: Option<RobotType>,
) -> Result<i32, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{path}: {e}")))?;
    let model = match parse_urdf(&text) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(out, "ERROR PARSE {e}");
            return Ok(1);
        }
    };
    let diags = validate(&model);
    for d in &diags {
        let _ = writeln!(out, "{d}");
    }
    let has_errors = !is_clean_of_errors(&diags);

    let classification = classify(&model);
    match classification.robot_type {
        Some(t) => {
            let _ = writeln!(out, "suggested type: {t} ({})", classification.rationale);
        }
        None => {
            let _ = writeln!(out, "suggested type: unclassified ({})", classification.rationale);
        }
    }
    let _ = writeln!(out, "links: {}  joints: {}  actuated DOF: {}", model.links.len(), model.joints.len(), model.dof());

    let chosen = requested.or(classification.robot_type);
    if let Some(t) = chosen {
        match extract_profile(&model, t) {
            Ok(profile) => {
                let _ = writeln!(out, "tasks: {:?}", task_menu(t).iter().map(|x| x.to_string()).collect::<Vec<_>>());
                for (i, leg) in profile.legs.iter().enumerate() {
                    let names: Vec<&str> =
                        leg.joints.iter().map(|&j| model.joints[j].name.as_str()).collect();
                    let _ = writeln!(
                        out,
                        "leg {i}: foot={} joints={names:?}",
                        model.links[leg.foot_link].name
                    );
                }
                let _ = writeln!(out, "standing height: {:.4} m", profile.standing_height);
            }
            Err(e) => {
                let _ = writeln!(out, "profile: {e}");
            }
        }
    }
    Ok(if has_errors { 1 } else { 0 })
}

pub struct TrainArgs {
    pub config_path: Option<PathBuf>,
    pub flags: FlagOverrides,
    pub resume_from: Option<PathBuf>,
}

/// `train`: resolve the config, snapshot it, and run the trainer.
pub fn cmd_train(args: &TrainArgs) -> Result<(PreparedRun, TrainOutcome), HarnessError> {
    let file = match &args.config_path {
        Some(p) => Some(read_config_file(p)?),
        None => None,
    };
    let prepared = prepare_run(file, &args.flags)?;
    std::fs::create_dir_all(&prepared.out_dir)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", prepared.out_dir.display())))?;
    write_json_atomic(&prepared.out_dir.join("config.json"), &prepared.resolved)?;

    let setup = EnvSetup::new(
        prepared.model.clone(),
        prepared.profile.clone(),
        prepared.resolved.train.clone(),
        prepared.resolved.sim,
        prepared.resolved.terrain,
        prepared.resolved.seed,
    );
    let session = TrainSession {
        setup,
        total_env_steps: prepared.resolved.total_env_steps,
        out_dir: prepared.out_dir.clone(),
        checkpoint_every: prepared.resolved.checkpoint_every,
        resume_from: args.resume_from.clone(),
    };
    let factory = local_backend_factory(&session.setup);
    let outcome = train(&session, &factory).map_err(|e| HarnessError::Train(e.to_string()))?;
    Ok((prepared, outcome))
}

pub struct PlayArgs {
    pub checkpoint: PathBuf,
    pub config_path: Option<PathBuf>,
    pub episodes: usize,
    pub max_ticks: Option<usize>,
    pub command: Command,
    pub record: Option<PathBuf>,
    /// Zero the residual scale: pure feedforward baseline.
    pub ff_only: bool,
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: usize,
    time: f64,
    base_pos: [f64; 3],
    base_quat: [f64; 4],
    q: Vec<f64>,
    contacts: Vec<usize>,
}

/// `play`: deterministic rollout of a checkpoint, optional trajectory JSONL.
pub fn cmd_play(args: &PlayArgs) -> Result<EvalSummary, HarnessError> {
    let (resolved, mut session) = load_policy_session(&args.checkpoint, args.config_path.as_deref())?;
    if args.ff_only {
        session.setup.config.action_scale = vec![0.0; session.setup.dof()];
    }
    let weights = {
        let ckpt = load_checkpoint(&args.checkpoint).map_err(|e| HarnessError::Train(e.to_string()))?;
        current_weights(
            &ckpt.curriculum,
            &resolved.train.reward_weights_init,
            &resolved.train.reward_weights_final,
        )
    };

    let mut rows: Vec<String> = Vec::new();
    let mut recorder = |t: usize, state: &crate::physics::SimState| {
        let row = TrajectoryRow {
            t,
            time: state.time,
            base_pos: [state.base_pos.x, state.base_pos.y, state.base_pos.z],
            base_quat: [
                state.base_quat.w,
                state.base_quat.i,
                state.base_quat.j,
                state.base_quat.k,
            ],
            q: state.q.iter().copied().collect(),
            contacts: state.contacts.iter().map(|c| c.link).collect(),
        };
        rows.push(serde_json::to_string(&row).expect("trajectory row serializes"));
    };

    let factory = local_backend_factory(&session.setup);
    let summary = evaluate(
        &session.setup,
        &session.params,
        &weights,
        args.command,
        args.episodes,
        args.max_ticks,
        &factory,
        if args.record.is_some() { Some(&mut recorder) } else { None },
    )
    .map_err(|e| HarnessError::Train(e.to_string()))?;

    if let Some(path) = &args.record {
        let mut text = rows.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        write_atomic(path, text.as_bytes())?;
    }
    Ok(summary)
}

/// Loads a checkpoint together with its resolved config (defaults to
/// `config.json` beside the checkpoint) and rebuilds the run setup.
pub fn load_policy_session(
    checkpoint: &Path,
    config_path: Option<&Path>,
) -> Result<(ResolvedConfig, PolicySession), HarnessError> {
    let config_path = match config_path {
        Some(p) => p.to_path_buf(),
        None => checkpoint
            .parent()
            .map(|d| d.join("config.json"))
            .ok_or_else(|| HarnessError::Config("checkpoint has no parent directory".into()))?,
    };
    let resolved = match read_config_file(&config_path)? {
        ConfigFile::Resolved(rc) => *rc,
        ConfigFile::Run(_) => {
            return Err(HarnessError::Config(format!(
                "{} is a run config; expected a resolved snapshot",
                config_path.display()
            )))
        }
    };
    let (model, profile) = load_robot(&resolved.robot_path, Some(resolved.robot_type))?;
    let state = load_checkpoint(checkpoint).map_err(|e| HarnessError::Train(e.to_string()))?;
    let setup = EnvSetup::new(
        model,
        profile,
        resolved.train.clone(),
        resolved.sim,
        resolved.terrain,
        resolved.seed,
    );
    Ok((resolved, PolicySession { setup, params: state.params }))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub variant_id: usize,
    pub param: String,
    pub value: String,
    pub mean_velocity: Option<f64>,
    pub mean_return: Option<f64>,
    pub fall_rate: Option<f64>,
    pub status: String,
}

pub struct SweepOutcome {
    pub csv_path: PathBuf,
    pub rows: Vec<SweepRow>,
}

/// `sweep`: train and evaluate every structural variant sequentially with
/// derived seeds, collecting one CSV row each. Variant failures land in the
/// status column; the sweep continues.
pub fn cmd_sweep(
    out: &mut dyn Write,
    spec: &SweepSpec,
    out_dir: &Path,
) -> Result<SweepOutcome, HarnessError> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::Io(e.to_string()))?;
    let base_text = std::fs::read_to_string(&spec.base.robot_path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", spec.base.robot_path)))?;
    let base_model = parse_urdf(&base_text).map_err(|e| HarnessError::Robot(e.to_string()))?;
    let robot_type = match spec.base.robot_type {
        Some(t) => t,
        None => classify(&base_model)
            .robot_type
            .ok_or_else(|| HarnessError::Config("cannot classify base robot; set robot_type".into()))?,
    };

    let variants: Vec<(String, String)> = match &spec.axis {
        SweepAxis::LinkScale { pattern, factors } => factors
            .iter()
            .map(|f| (pattern.clone(), format!("{f}")))
            .collect(),
        SweepAxis::LockJoints { pattern } => {
            vec![(pattern.clone(), "free".into()), (pattern.clone(), "locked".into())]
        }
    };

    let mut rows = Vec::new();
    for (i, (param, value)) in variants.iter().enumerate() {
        let _ = writeln!(out, "variant {i}: {param}={value}");
        match run_variant(spec, &base_model, robot_type, i, param, value, out_dir) {
            Ok((summary, _)) => rows.push(SweepRow {
                variant_id: i,
                param: param.clone(),
                value: value.clone(),
                mean_velocity: Some(summary.mean_velocity),
                mean_return: Some(summary.mean_return),
                fall_rate: Some(summary.fall_rate),
                status: "ok".into(),
            }),
            Err(e) => rows.push(SweepRow {
                variant_id: i,
                param: param.clone(),
                value: value.clone(),
                mean_velocity: None,
                mean_return: None,
                fall_rate: None,
                status: format!("error: {e}").replace(',', ";"),
            }),
        }
    }

    let mut csv = String::from("variant_id,param,value,mean_velocity,mean_return,fall_rate,status\n");
    for r in &rows {
        let fmt = |v: &Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.variant_id,
            r.param,
            r.value,
            fmt(&r.mean_velocity),
            fmt(&r.mean_return),
            fmt(&r.fall_rate),
            r.status
        ));
    }
    let csv_path = out_dir.join("sweep_report.csv");
    write_atomic(&csv_path, csv.as_bytes())?;
    Ok(SweepOutcome { csv_path, rows })
}

fn run_variant(
    spec: &SweepSpec,
    base_model: &crate::model::RobotModel,
    robot_type: RobotType,
    index: usize,
    _param: &str,
    value: &str,
    out_dir: &Path,
) -> Result<(EvalSummary, TrainOutcome), HarnessError> {
    let model = match &spec.axis {
        SweepAxis::LinkScale { pattern, factors } => {
            scale_links(base_model, pattern, factors[index])
                .map_err(|e| HarnessError::Robot(e.to_string()))?
        }
        SweepAxis::LockJoints { pattern } => {
            if value == "locked" {
                lock_joints(base_model, pattern).map_err(|e| HarnessError::Robot(e.to_string()))?
            } else {
                base_model.clone()
            }
        }
    };
    let vdir = out_dir.join(format!("variant_{index}"));
    std::fs::create_dir_all(&vdir).map_err(|e| HarnessError::Io(e.to_string()))?;
    let urdf_path = vdir.join("robot.urdf");
    write_atomic(&urdf_path, to_urdf_string(&model).as_bytes())?;

    let mut run = spec.base.clone();
    run.robot_path = urdf_path.to_string_lossy().into_owned();
    run.robot_type = Some(robot_type);
    run.seed = variant_seed(spec.base.seed, index);
    run.total_env_steps = spec.steps_per_variant;
    run.out_dir = Some(vdir.clone());

    let args = TrainArgs {
        config_path: None,
        flags: FlagOverrides::default(),
        resume_from: None,
    };
    let prepared = prepare_run(Some(ConfigFile::Run(Box::new(run))), &args.flags)?;
    write_json_atomic(&prepared.out_dir.join("config.json"), &prepared.resolved)?;
    let setup = EnvSetup::new(
        prepared.model.clone(),
        prepared.profile.clone(),
        prepared.resolved.train.clone(),
        prepared.resolved.sim,
        prepared.resolved.terrain,
        prepared.resolved.seed,
    );
    let session = TrainSession {
        setup,
        total_env_steps: prepared.resolved.total_env_steps,
        out_dir: prepared.out_dir.clone(),
        checkpoint_every: prepared.resolved.checkpoint_every,
        resume_from: None,
    };
    let factory = local_backend_factory(&session.setup);
    let outcome = train(&session, &factory).map_err(|e| HarnessError::Train(e.to_string()))?;

    let summary = evaluate_final(&session, &prepared, &outcome, spec)?;
    Ok((summary, outcome))
}

pub fn evaluate_final(
    session: &TrainSession,
    prepared: &PreparedRun,
    outcome: &TrainOutcome,
    spec: &SweepSpec,
) -> Result<EvalSummary, HarnessError> {
    let state = load_checkpoint(&outcome.final_checkpoint)
        .map_err(|e| HarnessError::Train(e.to_string()))?;
    let weights = current_weights(
        &state.curriculum,
        &prepared.resolved.train.reward_weights_init,
        &prepared.resolved.train.reward_weights_final,
    );
    let command = spec.eval_command.unwrap_or(Command { vx: 0.5, vy: 0.0, yaw_rate: 0.0 });
    let episodes = spec.eval_episodes.unwrap_or(20);
    let factory = local_backend_factory(&session.setup);
    evaluate(
        &session.setup,
        &state.params,
        &weights,
        command,
        episodes,
        None,
        &factory,
        None,
    )
    .map_err(|e| HarnessError::Train(e.to_string()))
}

pub struct ServeArgs {
    pub checkpoint: PathBuf,
    pub config_path: Option<PathBuf>,
    pub endpoint: String,
    pub rate_hz: f64,
    pub duration_s: f64,
    pub command: Command,
    pub log_path: Option<PathBuf>,
}

pub fn cmd_serve(args: &ServeArgs) -> Result<ServeReport, HarnessError> {
    let (_, session) = load_policy_session(&args.checkpoint, args.config_path.as_deref())?;
    let opts = ServeOptions {
        rate_hz: args.rate_hz,
        duration_s: args.duration_s,
        command: args.command,
        ..Default::default()
    };
    serve_policy(&session, &args.endpoint, &opts, args.log_path.as_deref())
        .map_err(|e| HarnessError::Sim2Real(e.to_string()))
}

pub struct MockArgs {
    pub robot_path: String,
    pub robot_type: Option<RobotType>,
    pub task: Option<Task>,
    pub listen: String,
    pub rate_hz: f64,
    pub seed: u64,
    pub duration_s: Option<f64>,
}

/// `mock`: run the loopback robot until the duration elapses (or forever).
pub fn cmd_mock(out: &mut dyn Write, args: &MockArgs) -> Result<(), HarnessError> {
    let (model, profile) = load_robot(&args.robot_path, args.robot_type)?;
    let task = args.task.unwrap_or_else(|| task_menu(profile.robot_type)[0]);
    let config = crate::morphology::auto_configure(&model, &profile, task)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let sim = super::config::tuned_sim_params(&model);
    let mock = spawn_mock(
        MockRobotConfig {
            model,
            profile,
            config,
            terrain: Terrain::default(),
            sim,
            seed: args.seed,
        },
        &args.listen,
        args.rate_hz,
    )
    .map_err(|e| HarnessError::Sim2Real(e.to_string()))?;
    let _ = writeln!(out, "mock robot listening on {}", mock.addr());
    match args.duration_s {
        Some(d) => std::thread::sleep(std::time::Duration::from_secs_f64(d)),
        None => loop {
            std::thread::sleep(std::time::Duration::from_secs(3600));
        },
    }
    mock.stop();
    Ok(())
}

/// `align`: lag-corrected channel comparison of two session logs.
pub fn cmd_align(
    out: &mut dyn Write,
    sim_log: &Path,
    real_log: &Path,
    kind: &str,
) -> Result<AlignmentReport, HarnessError> {
    let sim = load_session_channels(sim_log, kind)
        .map_err(|e| HarnessError::Sim2Real(e.to_string()))?;
    let real = load_session_channels(real_log, kind)
        .map_err(|e| HarnessError::Sim2Real(e.to_string()))?;
    let report = align_states(&sim, &real).map_err(|e| HarnessError::Sim2Real(e.to_string()))?;
    for c in &report.channels {
        let _ = writeln!(out, "channel {:>3}: lag {:>3} ticks, rmse {:.6}", c.channel, c.lag, c.rmse);
    }
    let _ = writeln!(out, "mean rmse: {:.6}", report.mean_rmse);
    Ok(report)
}
