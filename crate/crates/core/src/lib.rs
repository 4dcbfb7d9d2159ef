//! Synthetic house environments, shortest-path trajectories, visibility
//! ground truth and template-generated question/answer datasets.

pub mod audit;
pub mod checks;
pub mod config;
pub mod generator;
pub mod ground_truth;
pub mod io;
pub mod oracle;
pub mod question;
pub mod rng;
pub mod scene;
pub mod synth;
pub mod trajectory;
pub mod visibility;
