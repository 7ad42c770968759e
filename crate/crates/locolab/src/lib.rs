//! locolab trains mobile robots — bipeds, quadrupeds, and leg-wheeled
//! platforms — to perform multiple locomotion modes starting from nothing
//! but a URDF file. One command takes a robot from import through
//! auto-configuration, feedforward-plus-residual action composition,
//! adaptive reward scheduling, and CPU-parallel PPO to a deployable policy,
//! with a binary UDP bridge for running that policy against real or mock
//! hardware and comparing the resulting state streams.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`model`]: URDF parsing, validation, kinematics, and the structural
//!   mutation operators used by morphology sweeps.
//! - [`physics`]: reduced-coordinate articulated-body simulation with
//!   penalty contacts and PD actuation.
//! - [`morphology`]: robot classification, leg-chain extraction, and the
//!   auto-configuration tables that fill a complete training setup.
//! - [`gait`]: gait clocks, feedforward reference motion, and the
//!   feedforward-plus-scaled-residual action composition.
//! - [`reward`]: reward terms and the adaptive weight curriculum.
//! - [`learner`]: PPO with GAE over deterministic CPU-parallel rollouts.
//! - [`sim2real`]: the wire protocol, policy server, mock robot, state
//!   alignment, and the online-learning environment backend.
//! - [`harness`]: run configuration, artifact layout, and the operations
//!   behind the `locolab` command-line verbs.

pub mod assets;
pub mod gait;
pub mod harness;
pub mod learner;
pub mod model;
pub mod morphology;
pub mod physics;
pub mod reward;
pub mod sim2real;
