//! Left-to-right Gaussian-mixture HMMs over hand trajectories, one per action.

mod bank;
mod model;
mod train;
mod trajectory;

pub use bank::{posterior_from_logliks, GestureBank, PrefixCurve};
pub use model::{Component, GaussianMixture, HmmModel, VARIANCE_FLOOR};
pub use train::{train_hmm, TrainOptions, TrainReport, DEFAULT_MIXTURES, DEFAULT_STATES};
pub use trajectory::{preprocess, Frame, Trajectory, DEFAULT_FRAME_PERIOD, DIM};
