use std::f64::consts::PI;

use super::trajectory::{Frame, Trajectory, DIM};
use crate::error::{Error, Result};
use crate::math::log_sum_exp;

/// Smallest variance any emission component may have.
pub const VARIANCE_FLOOR: f64 = 1e-6;

const SUM_TOLERANCE: f64 = 1e-12;

/// One diagonal-covariance Gaussian of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: Frame,
    pub variance: Frame,
}

impl Component {
    pub fn log_density(&self, x: &Frame) -> f64 {
        let mut acc = 0.0;
        for d in 0..DIM {
            let diff = x[d] - self.mean[d];
            acc -= 0.5 * ((2.0 * PI * self.variance[d]).ln() + diff * diff / self.variance[d]);
        }
        acc
    }
}

/// Emission density of one HMM state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
}

impl GaussianMixture {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE || components.iter().any(|c| !(c.weight >= 0.0)) {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {sum}")));
        }
        for c in &components {
            if c.mean.iter().any(|m| !m.is_finite()) {
                return Err(Error::InvalidArgument("mixture mean is not finite".into()));
            }
            if c.variance.iter().any(|v| !(*v >= VARIANCE_FLOOR && v.is_finite())) {
                return Err(Error::InvalidArgument(format!("variance below floor {VARIANCE_FLOOR}")));
            }
        }
        Ok(GaussianMixture { components })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// `ln w_m + ln N(x; μ_m, Σ_m)` for each component.
    pub fn component_log_terms(&self, x: &Frame) -> Vec<f64> {
        self.components.iter().map(|c| c.weight.ln() + c.log_density(x)).collect()
    }

    pub fn log_density(&self, x: &Frame) -> f64 {
        log_sum_exp(&self.component_log_terms(x))
    }
}

/// Left-to-right HMM for one action. Decoding always starts in the first state and
/// may end in any state.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    action_label: String,
    transitions: Vec<Vec<f64>>,
    log_transitions: Vec<Vec<f64>>,
    emissions: Vec<GaussianMixture>,
}

impl HmmModel {
    /// `transitions` are probabilities; each row may only put mass on itself and the
    /// next state, and must sum to one.
    pub fn new(action_label: impl Into<String>, transitions: Vec<Vec<f64>>, emissions: Vec<GaussianMixture>) -> Result<Self> {
        let q = emissions.len();
        if q == 0 || transitions.len() != q {
            return Err(Error::InvalidArgument(format!("{} transition rows for {q} states", transitions.len())));
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != q {
                return Err(Error::InvalidArgument(format!("transition row {i} has {} entries", row.len())));
            }
            for (j, &p) in row.iter().enumerate() {
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::InvalidArgument(format!("transition {i}->{j} is {p}")));
                }
                if p > 0.0 && j != i && j != i + 1 {
                    return Err(Error::InvalidArgument(format!("transition {i}->{j} breaks the left-to-right structure")));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidArgument(format!("transition row {i} sums to {sum}")));
            }
        }
        let log_transitions = transitions.iter().map(|r| r.iter().map(|p| p.ln()).collect()).collect();
        Ok(HmmModel { action_label: action_label.into(), transitions, log_transitions, emissions })
    }

    pub fn action_label(&self) -> &str {
        &self.action_label
    }

    pub fn states(&self) -> usize {
        self.emissions.len()
    }

    pub fn mixtures(&self) -> usize {
        self.emissions.iter().map(|e| e.components.len()).max().unwrap_or(0)
    }

    pub fn log_transitions(&self) -> &[Vec<f64>] {
        &self.log_transitions
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.transitions[i][j]
    }

    pub fn emissions(&self) -> &[GaussianMixture] {
        &self.emissions
    }

    /// Log emission densities, `T × Q`.
    pub(crate) fn log_emissions(&self, frames: &[Frame]) -> Vec<Vec<f64>> {
        frames.iter().map(|x| self.emissions.iter().map(|e| e.log_density(x)).collect()).collect()
    }

    /// Forward variables `ln α_t(j)`, `T × Q`.
    pub(crate) fn log_alphas(&self, log_b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let q = self.states();
        let mut alphas: Vec<Vec<f64>> = Vec::with_capacity(log_b.len());
        for (t, b) in log_b.iter().enumerate() {
            let row = if t == 0 {
                (0..q).map(|j| if j == 0 { b[0] } else { f64::NEG_INFINITY }).collect()
            } else {
                let prev = &alphas[t - 1];
                (0..q)
                    .map(|j| {
                        let stay = prev[j] + self.log_transitions[j][j];
                        let enter = if j > 0 { prev[j - 1] + self.log_transitions[j - 1][j] } else { f64::NEG_INFINITY };
                        log_sum_exp(&[stay, enter]) + b[j]
                    })
                    .collect()
            };
            alphas.push(row);
        }
        alphas
    }

    /// `ln L(frames | action)` for every prefix length `1..=T`.
    pub fn prefix_logliks(&self, traj: &Trajectory) -> Vec<f64> {
        let log_b = self.log_emissions(traj.frames());
        self.log_alphas(&log_b).iter().map(|a| log_sum_exp(a)).collect()
    }

    /// `ln L(traj | action)` by the forward recursion in log space.
    pub fn forward_loglik(&self, traj: &Trajectory) -> Result<f64> {
        if traj.is_empty() {
            return Err(Error::Trajectory("cannot score an empty trajectory".into()));
        }
        let log_b = self.log_emissions(traj.frames());
        Ok(log_sum_exp(self.log_alphas(&log_b).last().expect("nonempty")))
    }
}
