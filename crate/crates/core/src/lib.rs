//! Secure computation offloading assisted by a hybrid relay-reflecting
//! intelligent surface.
//!
//! A single-antenna user offloads part of a task to a multi-antenna edge
//! node while an eavesdropper listens. A surface of mostly passive
//! reflectors plus a few amplifying elements sits between them. This crate
//! synthesizes channel realizations, evaluates SINR, secrecy rate and
//! latency, minimizes latency by alternating optimization of the combiner,
//! the surface and the offload volume, and runs seeded Monte Carlo sweeps.

pub mod channel;
pub mod harness;
pub mod optimizer;
pub mod rates;
pub mod rng;
pub mod scenario;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub use channel::{synthesize_channels, ChannelSet};
pub use harness::{run_sweep, run_trial, write_csv, ResultTable, RunMode, SweepAxis, SweepSpec};
pub use optimizer::run_alternating;
pub use rates::{HrrisState, Solution};
pub use scenario::{ComputeParams, Mode, Scenario, ScenarioError};
