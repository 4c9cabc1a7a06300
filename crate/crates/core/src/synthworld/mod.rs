//! Seeded synthetic world: trials with effects and descriptions, and hand trajectories.

mod config;
mod gesture;
mod trial;

pub use config::{
    Choice, DescriptionRules, EffectPhrases, EffectRow, EffectTable, GestureTemplate, TrajectoryParams, Verb, WorldConfig,
};
pub use gesture::{gesture_examples, sample_trajectory, sample_trajectory_with};
pub use trial::{sample_description, sample_trial, sample_trial_with, sample_trials, trials_dataset, word_bag, Trial};
