//! Run configuration: the user-facing JSON schema, override layering
//! (flags > config file > auto-configured defaults), and the fully resolved
//! snapshot that makes a run reproducible byte-for-byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::morphology::{
    auto_configure, classify, extract_profile, task_menu, Curriculum, FfParams, MorphologyProfile,
    RobotType, Task, TrainConfig,
};
use crate::model::{parse_urdf, validate, RobotModel, Severity};
use crate::physics::{SimParams, Terrain};
use crate::reward::RewardWeights;

use super::HarnessError;

/// On-disk run request. Unknown keys are rejected so hyperparameter typos
/// fail loudly instead of silently training with defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub robot_path: String,
    #[serde(default)]
    pub robot_type: Option<RobotType>,
    pub task: Task,
    /// Mandatory: no wall-clock seeding anywhere.
    pub seed: u64,
    pub total_env_steps: u64,
    #[serde(default)]
    pub terrain: Terrain,
    /// Explicit simulation parameters; omitted means per-robot tuning.
    #[serde(default)]
    pub sim: Option<SimParams>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: u64,
    #[serde(default)]
    pub overrides: TrainOverrides,
}

fn default_checkpoint_every() -> u64 {
    10
}

/// Optional override for every trainable field.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOverrides {
    pub feedforward: Option<FfParams>,
    pub action_scale: Option<Vec<f64>>,
    pub kp: Option<Vec<f64>>,
    pub kd: Option<Vec<f64>>,
    pub reward_weights_init: Option<RewardWeights>,
    pub reward_weights_final: Option<RewardWeights>,
    pub curriculum: Option<Curriculum>,
    pub command_ranges: Option<crate::morphology::CommandRanges>,
    pub lin_vel_tracks_vy: Option<bool>,
    pub ppo: PpoOverrides,
    pub episode_length_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoOverrides {
    pub gamma: Option<f64>,
    pub gae_lambda: Option<f64>,
    pub clip_eps: Option<f64>,
    pub epochs: Option<usize>,
    pub minibatches: Option<usize>,
    pub entropy_coef: Option<f64>,
    pub value_coef: Option<f64>,
    pub learning_rate: Option<f64>,
    pub num_envs: Option<usize>,
    pub steps_per_env: Option<usize>,
    pub hidden: Option<(usize, usize)>,
    pub workers: Option<usize>,
}

impl TrainOverrides {
    pub fn apply(&self, config: &mut TrainConfig) {
        if let Some(v) = &self.feedforward {
            config.feedforward = v.clone();
        }
        if let Some(v) = &self.action_scale {
            config.action_scale = v.clone();
        }
        if let Some(v) = &self.kp {
            config.kp = v.clone();
        }
        if let Some(v) = &self.kd {
            config.kd = v.clone();
        }
        if let Some(v) = &self.reward_weights_init {
            config.reward_weights_init = *v;
        }
        if let Some(v) = &self.reward_weights_final {
            config.reward_weights_final = *v;
        }
        if let Some(v) = &self.curriculum {
            config.curriculum = *v;
        }
        if let Some(v) = &self.command_ranges {
            config.command_ranges = *v;
        }
        if let Some(v) = self.lin_vel_tracks_vy {
            config.lin_vel_tracks_vy = v;
        }
        if let Some(v) = self.episode_length_s {
            config.episode_length_s = v;
        }
        let p = &self.ppo;
        let c = &mut config.ppo;
        if let Some(v) = p.gamma {
            c.gamma = v;
        }
        if let Some(v) = p.gae_lambda {
            c.gae_lambda = v;
        }
        if let Some(v) = p.clip_eps {
            c.clip_eps = v;
        }
        if let Some(v) = p.epochs {
            c.epochs = v;
        }
        if let Some(v) = p.minibatches {
            c.minibatches = v;
        }
        if let Some(v) = p.entropy_coef {
            c.entropy_coef = v;
        }
        if let Some(v) = p.value_coef {
            c.value_coef = v;
        }
        if let Some(v) = p.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = p.num_envs {
            c.num_envs = v;
        }
        if let Some(v) = p.steps_per_env {
            c.steps_per_env = v;
        }
        if let Some(v) = p.hidden {
            c.hidden = v;
        }
        if let Some(v) = p.workers {
            c.workers = v;
        }
    }
}

/// Command-line overrides; the highest precedence layer.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub robot_path: Option<String>,
    pub robot_type: Option<RobotType>,
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub total_env_steps: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub num_envs: Option<usize>,
    pub steps_per_env: Option<usize>,
    pub checkpoint_every: Option<u64>,
}

/// Fully resolved run description. Self-sufficient: re-running `train`
/// against this snapshot reproduces the original metrics byte-for-byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub robot_path: String,
    pub robot_type: RobotType,
    pub task: Task,
    pub seed: u64,
    pub total_env_steps: u64,
    pub terrain: Terrain,
    pub sim: SimParams,
    pub checkpoint_every: u64,
    pub train: TrainConfig,
}

/// Either schema accepted on disk.
pub enum ConfigFile {
    Run(Box<RunConfig>),
    Resolved(Box<ResolvedConfig>),
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    // A resolved snapshot has the complete `train` block; try it first.
    match serde_json::from_str::<ResolvedConfig>(&text) {
        Ok(rc) => Ok(ConfigFile::Resolved(Box::new(rc))),
        Err(resolved_err) => match serde_json::from_str::<RunConfig>(&text) {
            Ok(run) => Ok(ConfigFile::Run(Box::new(run))),
            Err(run_err) => Err(HarnessError::Config(format!(
                "{} parses as neither a run config ({run_err}) nor a resolved snapshot ({resolved_err})",
                path.display()
            ))),
        },
    }
}

/// Model + profile + resolved config for one run.
pub struct PreparedRun {
    pub model: RobotModel,
    pub profile: MorphologyProfile,
    pub resolved: ResolvedConfig,
    pub out_dir: PathBuf,
}

/// Loads and validates the robot, fixes the robot type (flag > file >
/// classifier suggestion), then layers the training config: auto-configured
/// defaults, file overrides, flag overrides.
pub fn prepare_run(
    file: Option<ConfigFile>,
    flags: &FlagOverrides,
) -> Result<PreparedRun, HarnessError> {
    // Resolved snapshots bypass auto-configuration entirely.
    if let Some(ConfigFile::Resolved(mut rc)) = file {
        if let Some(v) = flags.seed {
            rc.seed = v;
        }
        if let Some(v) = flags.total_env_steps {
            rc.total_env_steps = v;
        }
        if let Some(v) = flags.workers {
            rc.train.ppo.workers = v;
        }
        let out_dir = flags
            .out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("runs/{}_{}", rc.task, rc.seed)));
        let (model, profile) = load_robot(&rc.robot_path, Some(rc.robot_type))?;
        return Ok(PreparedRun { model, profile, resolved: *rc, out_dir });
    }

    let run = match file {
        Some(ConfigFile::Run(r)) => Some(*r),
        _ => None,
    };

    let robot_path = flags
        .robot_path
        .clone()
        .or_else(|| run.as_ref().map(|r| r.robot_path.clone()))
        .ok_or_else(|| HarnessError::Config("robot_path missing (--robot or config file)".into()))?;
    let task = flags
        .task
        .or(run.as_ref().map(|r| r.task))
        .ok_or_else(|| HarnessError::Config("task missing (--task or config file)".into()))?;
    let seed = flags
        .seed
        .or(run.as_ref().map(|r| r.seed))
        .ok_or_else(|| HarnessError::Config("seed missing (--seed or config file); runs never seed from the clock".into()))?;
    let total_env_steps = flags
        .total_env_steps
        .or(run.as_ref().map(|r| r.total_env_steps))
        .ok_or_else(|| HarnessError::Config("total_env_steps missing (--steps or config file)".into()))?;

    let requested_type = flags.robot_type.or(run.as_ref().and_then(|r| r.robot_type));
    let (model, profile) = load_robot(&robot_path, requested_type)?;

    if !task_menu(profile.robot_type).contains(&task) {
        return Err(HarnessError::Config(format!(
            "task '{task}' is not available for {}; task_menu: {:?}",
            profile.robot_type,
            task_menu(profile.robot_type)
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
        )));
    }

    let mut train = auto_configure(&model, &profile, task)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    if let Some(r) = &run {
        r.overrides.apply(&mut train);
    }
    if let Some(v) = flags.workers {
        train.ppo.workers = v;
    }
    if let Some(v) = flags.num_envs {
        train.ppo.num_envs = v;
    }
    if let Some(v) = flags.steps_per_env {
        train.ppo.steps_per_env = v;
    }

    let checkpoint_every = flags
        .checkpoint_every
        .or(run.as_ref().map(|r| r.checkpoint_every))
        .unwrap_or(10);
    let out_dir = flags
        .out_dir
        .clone()
        .or(run.as_ref().and_then(|r| r.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(format!("runs/{task}_{seed}")));

    let resolved = ResolvedConfig {
        robot_path: absolute_path(&robot_path),
        robot_type: profile.robot_type,
        task,
        seed,
        total_env_steps,
        terrain: run.as_ref().map(|r| r.terrain).unwrap_or_default(),
        sim: run.as_ref().and_then(|r| r.sim).unwrap_or_else(|| tuned_sim_params(&model)),
        checkpoint_every,
        train,
    };
    Ok(PreparedRun { model, profile, resolved, out_dir })
}

/// Parse, validate, and profile a robot file. Validation errors abort;
/// the robot type comes from the request or the classifier.
pub fn load_robot(
    path: &str,
    requested: Option<RobotType>,
) -> Result<(RobotModel, MorphologyProfile), HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{path}: {e}")))?;
    let model = parse_urdf(&text).map_err(|e| HarnessError::Robot(e.to_string()))?;
    let diags = validate(&model);
    if diags.iter().any(|d| d.severity == Severity::Error) {
        let msgs: Vec<String> =
            diags.iter().filter(|d| d.severity == Severity::Error).map(|d| d.to_string()).collect();
        return Err(HarnessError::Robot(msgs.join("; ")));
    }
    let robot_type = match requested {
        Some(t) => t,
        None => classify(&model).robot_type.ok_or_else(|| {
            HarnessError::Config(format!(
                "could not classify '{path}'; pass --type (rationale: {})",
                classify(&model).rationale
            ))
        })?,
    };
    let profile =
        extract_profile(&model, robot_type).map_err(|e| HarnessError::Robot(e.to_string()))?;
    Ok((model, profile))
}

pub fn absolute_path(p: &str) -> String {
    let path = Path::new(p);
    if path.is_absolute() {
        p.to_string()
    } else {
        std::env::current_dir()
            .map(|cwd| cwd.join(path).to_string_lossy().into_owned())
            .unwrap_or_else(|_| p.to_string())
    }
}

/// Morphology sweep request.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub axis: SweepAxis,
    pub steps_per_variant: u64,
    #[serde(default)]
    pub eval_episodes: Option<usize>,
    #[serde(default)]
    pub eval_command: Option<crate::gait::Command>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepAxis {
    LinkScale { pattern: String, factors: Vec<f64> },
    LockJoints { pattern: String },
}

impl SweepSpec {
    pub fn variant_count(&self) -> usize {
        match &self.axis {
            SweepAxis::LinkScale { factors, .. } => factors.len(),
            SweepAxis::LockJoints { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.variant_count() < 2 {
            return Err(HarnessError::Config("a sweep needs at least 2 variants".into()));
        }
        if self.steps_per_variant == 0 {
            return Err(HarnessError::Config("steps_per_variant must be > 0".into()));
        }
        Ok(())
    }
}

/// Deterministic per-variant seed derivation.
pub fn variant_seed(base_seed: u64, variant: usize) -> u64 {
    base_seed.wrapping_add(variant as u64 * 1_000_003)
}

/// Per-robot physics step tuning. Explicit penalty contacts need the step
/// to resolve the contact spring on the lightest colliding link; the
/// control period stays at 50 Hz throughout.
pub fn tuned_sim_params(model: &RobotModel) -> SimParams {
    let mut p = SimParams::default();
    let m_min = model
        .links
        .iter()
        .filter(|l| l.collision.is_some() && l.mass > 0.0)
        .map(|l| l.mass)
        .fold(f64::INFINITY, f64::min);
    if m_min.is_finite() {
        let dt_stable = 0.35 * (m_min / p.contact_stiffness).sqrt();
        for (dt, sub) in [(0.002, 10), (0.001, 20), (0.0005, 40), (0.00025, 80)] {
            p.dt_physics = dt;
            p.substeps_per_control = sub;
            if dt <= dt_stable {
                break;
            }
        }
    }
    p
}
