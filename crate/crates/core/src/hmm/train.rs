//! Baum–Welch training of left-to-right Gaussian-mixture HMMs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{Component, GaussianMixture, HmmModel, VARIANCE_FLOOR};
use super::trajectory::{Frame, Trajectory, DIM};
use crate::error::{Error, Result};
use crate::math::log_sum_exp;

/// Default number of hidden states per gesture model.
pub const DEFAULT_STATES: usize = 4;
/// Default number of mixture components per state.
pub const DEFAULT_MIXTURES: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub states: usize,
    pub mixtures: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop when the relative gain of the total log-likelihood falls below this.
    pub tolerance: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { states: DEFAULT_STATES, mixtures: DEFAULT_MIXTURES, seed: 0, max_iterations: 100, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: HmmModel,
    /// Total training log-likelihood before each re-estimation step, plus the final model's.
    pub loglik_history: Vec<f64>,
}

/// Train one action model from example trajectories.
pub fn train_hmm(label: &str, trajs: &[Trajectory], opts: &TrainOptions) -> Result<TrainReport> {
    if trajs.is_empty() {
        return Err(Error::Training(format!("no training trajectories for `{label}`")));
    }
    if opts.states == 0 || opts.mixtures == 0 {
        return Err(Error::Training("states and mixtures must be at least 1".into()));
    }
    if let Some(short) = trajs.iter().find(|t| t.len() < opts.states) {
        return Err(Error::Training(format!(
            "trajectory of {} frames is shorter than the {} states",
            short.len(),
            opts.states
        )));
    }

    let mut model = initialize(label, trajs, opts)?;
    let mut history = Vec::new();
    for iter in 0..=opts.max_iterations {
        let stats = expectation(&model, trajs);
        let ll = stats.loglik;
        if let Some(&prev) = history.last() {
            history.push(ll);
            let gain = (ll - prev) / f64::abs(prev).max(f64::MIN_POSITIVE);
            if gain < opts.tolerance {
                break;
            }
        } else {
            history.push(ll);
        }
        if iter == opts.max_iterations {
            break;
        }
        model = maximization(&model, &stats)?;
    }
    Ok(TrainReport { model, loglik_history: history })
}

/// Uniform temporal segmentation into `states` blocks, then seeded k-means per block.
fn initialize(label: &str, trajs: &[Trajectory], opts: &TrainOptions) -> Result<HmmModel> {
    let q = opts.states;
    let mut pools: Vec<Vec<Frame>> = vec![Vec::new(); q];
    let mut stay = vec![0.0f64; q];
    let mut leave = vec![0.0f64; q];
    for traj in trajs {
        let t_len = traj.len();
        for (t, f) in traj.frames().iter().enumerate() {
            let s = t * q / t_len;
            pools[s].push(*f);
            if t + 1 < t_len {
                if (t + 1) * q / t_len == s {
                    stay[s] += 1.0;
                } else {
                    leave[s] += 1.0;
                }
            }
        }
    }
    let transitions = (0..q)
        .map(|i| {
            let mut row = vec![0.0; q];
            if i + 1 == q {
                row[i] = 1.0;
            } else {
                // Add-one counts keep both moves possible for EM.
                let p = (stay[i] + 1.0) / (stay[i] + leave[i] + 2.0);
                row[i] = p;
                row[i + 1] = 1.0 - p;
            }
            row
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let emissions = pools
        .iter()
        .map(|pool| GaussianMixture::new(kmeans_mixture(pool, opts.mixtures, &mut rng)))
        .collect::<Result<Vec<_>>>()?;
    HmmModel::new(label, transitions, emissions)
}

fn sq_dist(a: &Frame, b: &Frame) -> f64 {
    (0..DIM).map(|d| (a[d] - b[d]).powi(2)).sum()
}

fn mean_var(points: &[&Frame]) -> (Frame, Frame) {
    let n = points.len() as f64;
    let mut mean = [0.0; DIM];
    for p in points {
        for d in 0..DIM {
            mean[d] += p[d] / n;
        }
    }
    let mut var = [0.0; DIM];
    for p in points {
        for d in 0..DIM {
            var[d] += (p[d] - mean[d]).powi(2) / n;
        }
    }
    (mean, var.map(|v| v.max(VARIANCE_FLOOR)))
}

fn kmeans_mixture(pool: &[Frame], m: usize, rng: &mut ChaCha8Rng) -> Vec<Component> {
    let all: Vec<&Frame> = pool.iter().collect();
    let (pool_mean, pool_var) = mean_var(&all);
    let mut centers: Vec<Frame> = (0..m).map(|_| pool[rng.random_range(0..pool.len())]).collect();
    let mut assign = vec![usize::MAX; pool.len()];
    for _ in 0..50 {
        let mut changed = false;
        for (i, p) in pool.iter().enumerate() {
            let best = (0..m)
                .min_by(|&a, &b| sq_dist(p, &centers[a]).total_cmp(&sq_dist(p, &centers[b])))
                .expect("m >= 1");
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (k, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Frame> = pool.iter().zip(&assign).filter(|(_, &a)| a == k).map(|(p, _)| p).collect();
            if !members.is_empty() {
                *center = mean_var(&members).0;
            }
        }
    }
    let components: Vec<Component> = (0..m)
        .map(|k| {
            let members: Vec<&Frame> = pool.iter().zip(&assign).filter(|(_, &a)| a == k).map(|(p, _)| p).collect();
            if members.len() >= 2 {
                let (mean, variance) = mean_var(&members);
                Component { weight: members.len() as f64, mean, variance }
            } else {
                let mean = if members.is_empty() { pool_mean } else { *members[0] };
                Component { weight: members.len().max(1) as f64, mean, variance: pool_var }
            }
        })
        .collect();
    let total: f64 = components.iter().map(|c| c.weight).sum();
    components.into_iter().map(|c| Component { weight: c.weight / total, ..c }).collect()
}

/// Sufficient statistics accumulated over all training sequences.
struct Stats {
    loglik: f64,
    /// Expected transitions i→i and i→i+1.
    stay: Vec<f64>,
    advance: Vec<f64>,
    /// Per state and component: occupancy, Σ γ x, Σ γ x².
    occ: Vec<Vec<f64>>,
    sum: Vec<Vec<Frame>>,
    sum_sq: Vec<Vec<Frame>>,
}

fn expectation(model: &HmmModel, trajs: &[Trajectory]) -> Stats {
    let q = model.states();
    let m_max = model.mixtures();
    let mut st = Stats {
        loglik: 0.0,
        stay: vec![0.0; q],
        advance: vec![0.0; q],
        occ: vec![vec![0.0; m_max]; q],
        sum: vec![vec![[0.0; DIM]; m_max]; q],
        sum_sq: vec![vec![[0.0; DIM]; m_max]; q],
    };
    let lt = model.log_transitions();
    for traj in trajs {
        let frames = traj.frames();
        let log_b = model.log_emissions(frames);
        let alpha = model.log_alphas(&log_b);
        let t_len = frames.len();
        let ll = log_sum_exp(&alpha[t_len - 1]);
        st.loglik += ll;
        if !ll.is_finite() {
            continue;
        }

        let mut beta = vec![vec![0.0f64; q]; t_len];
        for t in (0..t_len - 1).rev() {
            for i in 0..q {
                let stay = lt[i][i] + log_b[t + 1][i] + beta[t + 1][i];
                let adv = if i + 1 < q { lt[i][i + 1] + log_b[t + 1][i + 1] + beta[t + 1][i + 1] } else { f64::NEG_INFINITY };
                beta[t][i] = log_sum_exp(&[stay, adv]);
            }
        }

        for t in 0..t_len {
            for j in 0..q {
                let gamma = (alpha[t][j] + beta[t][j] - ll).exp();
                if gamma == 0.0 {
                    continue;
                }
                let terms = model.emissions()[j].component_log_terms(&frames[t]);
                for (k, term) in terms.iter().enumerate() {
                    let r = gamma * (term - log_b[t][j]).exp();
                    if r == 0.0 {
                        continue;
                    }
                    st.occ[j][k] += r;
                    for d in 0..DIM {
                        let x = frames[t][d];
                        st.sum[j][k][d] += r * x;
                        st.sum_sq[j][k][d] += r * x * x;
                    }
                }
                if t + 1 < t_len {
                    st.stay[j] += (alpha[t][j] + lt[j][j] + log_b[t + 1][j] + beta[t + 1][j] - ll).exp();
                    if j + 1 < q {
                        st.advance[j] +=
                            (alpha[t][j] + lt[j][j + 1] + log_b[t + 1][j + 1] + beta[t + 1][j + 1] - ll).exp();
                    }
                }
            }
        }
    }
    st
}

fn maximization(model: &HmmModel, st: &Stats) -> Result<HmmModel> {
    let q = model.states();
    let transitions = (0..q)
        .map(|i| {
            let mut row = vec![0.0; q];
            let total = st.stay[i] + st.advance[i];
            if i + 1 == q {
                row[i] = 1.0;
            } else if total > 0.0 {
                row[i] = st.stay[i] / total;
                row[i + 1] = 1.0 - row[i];
            } else {
                row[i] = model.transition(i, i);
                row[i + 1] = 1.0 - row[i];
            }
            row
        })
        .collect();

    let emissions = (0..q)
        .map(|j| {
            let old = model.emissions()[j].components();
            let state_occ: f64 = st.occ[j].iter().sum();
            let comps: Vec<Component> = old
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let occ = st.occ[j][k];
                    if state_occ == 0.0 {
                        return c.clone();
                    }
                    if occ <= 0.0 {
                        return Component { weight: 0.0, ..c.clone() };
                    }
                    let mean: Frame = std::array::from_fn(|d| st.sum[j][k][d] / occ);
                    let variance: Frame =
                        std::array::from_fn(|d| (st.sum_sq[j][k][d] / occ - mean[d] * mean[d]).max(VARIANCE_FLOOR));
                    Component { weight: occ / state_occ, mean, variance }
                })
                .collect();
            let wsum: f64 = comps.iter().map(|c| c.weight).sum();
            GaussianMixture::new(comps.into_iter().map(|c| Component { weight: c.weight / wsum, ..c }).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    HmmModel::new(model.action_label(), transitions, emissions)
}
