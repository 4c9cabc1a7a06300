//! Discrete Bayesian network: construction, smoothed parameter estimation, exact
//! inference by variable elimination, an enumeration oracle and greedy structure search.

mod factor;
mod inference;
mod network;
mod structure;

pub use inference::{joint_enumerate, Distribution, DEFAULT_ENUMERATION_CAP};
pub use network::{layered_parents, BayesNet, Cpt};
pub use structure::{family_bic, greedy_structure_fit, layered_candidates, learn_layered};
