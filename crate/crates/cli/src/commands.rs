use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use affordance_words::bn::{learn_layered, BayesNet, Distribution};
use affordance_words::fusion::{
    confidence_grid, fuse_query, sweep_query, word_presence, QuerySpec, SoftActionEvidence,
};
use affordance_words::hmm::{preprocess, GestureBank, TrainOptions, Trajectory};
use affordance_words::language::{nbest, Grammar, WordProbs};
use affordance_words::schema::{Dataset, Evidence, WorldSchema, ACTION};
use affordance_words::synthworld::{gesture_examples, sample_trials, trials_dataset, WorldConfig};
use anyhow::{bail, Context, Result};

use crate::config::RunConfig;
use crate::UsageError;

const TRIALS_FILE: &str = "trials.txt";
const DESCRIPTIONS_FILE: &str = "descriptions.txt";
const TRAJ_DIR: &str = "traj";
const PROBE_DIR: &str = "probe";

// Offsets that give every stage its own random stream.
const TRAJ_SEED: u64 = 1;
const PROBE_SEED: u64 = 2;
const HMM_SEED: u64 = 3;
const DESCRIBE_SEED: u64 = 4;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn real(x: f64) -> String {
    format!("{x:.9}")
}

pub fn load_grammar(config: &RunConfig) -> Result<Grammar> {
    if config.paths.grammar.as_os_str().is_empty() {
        return Ok(Grammar::descriptions());
    }
    let path = &config.paths.grammar;
    Grammar::parse(&read_file(path)?).with_context(|| format!("in grammar {}", path.display()))
}

fn load_net(config: &RunConfig) -> Result<BayesNet> {
    let path = config.bn_model();
    BayesNet::from_text(&read_file(&path)?).with_context(|| format!("in network {}", path.display()))
}

fn load_bank(config: &RunConfig, schema: &WorldSchema) -> Result<GestureBank> {
    let path = config.hmm_model();
    let bank = GestureBank::from_text(&read_file(&path)?).with_context(|| format!("in gesture bank {}", path.display()))?;
    bank.aligned_to(schema).context("gesture bank does not match the network")
}

fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let raw = Trajectory::from_csv(&read_file(path)?).with_context(|| format!("in trajectory {}", path.display()))?;
    Ok(preprocess(&raw, &vec![[0.0; 3]; raw.len()])?)
}

/// `Var=value` pairs, already split on commas by the argument parser.
pub fn parse_evidence(schema: &WorldSchema, pairs: &[String]) -> Result<Evidence> {
    let mut obs = Evidence::new();
    for pair in pairs.iter().map(|p| p.trim()).filter(|p| !p.is_empty()) {
        let Some((name, label)) = pair.split_once('=') else {
            return Err(UsageError(format!("malformed evidence `{pair}`: expected Var=value")).into());
        };
        let (name, label) = (name.trim(), label.trim());
        let var = schema.require(name)?;
        if obs.contains(var) {
            return Err(UsageError(format!("variable `{name}` given twice in the evidence")).into());
        }
        obs = obs.with(schema, name, label)?;
    }
    Ok(obs)
}

fn parse_vars(schema: &WorldSchema, names: &[String]) -> Result<Vec<usize>> {
    names.iter().map(|n| Ok(schema.require(n.trim())?)).collect()
}

/// Soft action evidence from an explicit spec or from a recorded trajectory.
fn soft_evidence(
    config: &RunConfig,
    schema: &WorldSchema,
    soft: Option<&str>,
    trajectory: Option<&Path>,
) -> Result<Option<SoftActionEvidence>> {
    match (soft, trajectory) {
        (Some(_), Some(_)) => Err(UsageError("give either --soft or --trajectory, not both".into()).into()),
        (Some(text), None) => Ok(Some(SoftActionEvidence::parse(schema, text)?)),
        (None, Some(path)) => {
            let bank = load_bank(config, schema)?;
            Ok(Some(bank.action_posterior(&load_trajectory(path)?)?))
        }
        (None, None) => Ok(None),
    }
}

fn distribution_csv(schema: &WorldSchema, d: &Distribution) -> String {
    let mut out = String::new();
    for &v in d.vars() {
        let _ = write!(out, "{},", schema.variable(v).name());
    }
    out.push_str("p\n");
    for (i, p) in d.probs().iter().enumerate() {
        for (&val, &var) in d.assignment(i).iter().zip(d.vars()) {
            let _ = write!(out, "{},", schema.variable(var).label(val));
        }
        let _ = writeln!(out, "{}", real(*p));
    }
    out
}

pub fn simulate(config: &RunConfig) -> Result<()> {
    let schema = WorldSchema::affordance_words();
    let world = WorldConfig::default();
    world.validate(&schema, &load_grammar(config)?)?;
    let dir = config.dataset_dir();

    let trials = sample_trials(&world, config.simulate.trials, config.seed);
    let provenance = format!("synthworld seed={} trials={}", config.seed, config.simulate.trials);
    let data = trials_dataset(&trials, provenance)?;
    write_file(&dir.join(TRIALS_FILE), &data.to_text(&schema))?;
    let descriptions: String = trials.iter().map(|t| format!("{}\n", t.sentence)).collect();
    write_file(&dir.join(DESCRIPTIONS_FILE), &descriptions)?;

    let actions: Vec<&str> = schema.variable(schema.require(ACTION)?).labels().iter().map(String::as_str).collect();
    for (sub, per_action, offset) in [
        (TRAJ_DIR, config.simulate.trajectories_per_action, TRAJ_SEED),
        (PROBE_DIR, config.simulate.probes_per_action, PROBE_SEED),
    ] {
        let target = dir.join(sub);
        if target.exists() {
            fs::remove_dir_all(&target).with_context(|| format!("cannot clear {}", target.display()))?;
        }
        for (label, trajs) in gesture_examples(&world, &actions, per_action, config.seed.wrapping_add(offset))? {
            for (i, t) in trajs.iter().enumerate() {
                write_file(&target.join(format!("{label}-{i:04}.csv")), &t.to_csv())?;
            }
        }
    }
    println!(
        "wrote {} trials, {} training and {} probe trajectories per action to {}",
        trials.len(),
        config.simulate.trajectories_per_action,
        config.simulate.probes_per_action,
        dir.display()
    );
    Ok(())
}

pub fn train_bn(config: &RunConfig) -> Result<()> {
    let schema = WorldSchema::affordance_words();
    let path = config.dataset_dir().join(TRIALS_FILE);
    let data = Dataset::from_text(&schema, &read_file(&path)?).with_context(|| format!("in {}", path.display()))?;
    let net = learn_layered(&data, &schema, config.bn.max_parents, config.bn.alpha)?;
    write_file(&config.bn_model(), &net.to_text())?;
    let edges: usize = net.parent_lists().iter().map(Vec::len).sum();
    println!("learned {edges} edges from {} rows; network written to {}", data.len(), config.bn_model().display());
    Ok(())
}

pub fn train_hmm(config: &RunConfig) -> Result<()> {
    let schema = WorldSchema::affordance_words();
    let dir = config.dataset_dir().join(TRAJ_DIR);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "csv"));
    files.sort();
    let mut groups: BTreeMap<String, Vec<Trajectory>> = BTreeMap::new();
    for f in &files {
        let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let Some((label, _)) = stem.rsplit_once('-') else {
            bail!("trajectory file {} is not named <action>-<id>.csv", f.display());
        };
        groups.entry(label.to_string()).or_default().push(load_trajectory(f)?);
    }
    let examples: Vec<(String, Vec<Trajectory>)> = groups.into_iter().collect();
    let opts = TrainOptions {
        states: config.hmm.states,
        mixtures: config.hmm.mixtures,
        seed: config.seed.wrapping_add(HMM_SEED),
        max_iterations: config.hmm.max_iterations,
        tolerance: config.hmm.tolerance,
    };
    let bank = GestureBank::train(&examples, &opts)?.aligned_to(&schema)?;
    write_file(&config.hmm_model(), &bank.to_text())?;
    println!("trained {} gesture models from {} trajectories", bank.models().len(), files.len());
    Ok(())
}

pub fn infer(
    config: &RunConfig,
    evidence: &[String],
    infer: &[String],
    soft: Option<&str>,
    trajectory: Option<&Path>,
) -> Result<()> {
    let net = load_net(config)?;
    let schema = net.schema();
    let obs = parse_evidence(schema, evidence)?;
    let vars = parse_vars(schema, infer)?;
    let soft = soft_evidence(config, schema, soft, trajectory)?;
    let (dist, normalizer) = match &soft {
        Some(s) => {
            let fused = fuse_query(&net, s, &QuerySpec::new(vars, obs.clone()))?;
            (fused.distribution, Some(fused.normalizer))
        }
        None => (net.query(&vars, &obs)?, None),
    };
    let csv = distribution_csv(schema, &dist);
    write_file(&config.out_file("infer.csv"), &csv)?;

    println!("evidence: {}", obs.display(schema));
    if let Some(s) = &soft {
        let w: Vec<String> = s.weights().iter().map(|w| format!("{w:.4}")).collect();
        println!("soft action evidence: [{}]", w.join(", "));
    }
    for (label, p) in dist.labels(schema).iter().zip(dist.probs()) {
        println!("  {label:<40} {p:.6}");
    }
    if let Some(z) = normalizer {
        println!("normalizer: {z:.6}");
    }
    Ok(())
}

pub fn anticipate(config: &RunConfig, trajectory: &Path, evidence: &[String], infer: &str) -> Result<()> {
    let net = load_net(config)?;
    let schema = net.schema();
    let bank = load_bank(config, schema)?;
    let obs = parse_evidence(schema, evidence)?;
    let var = schema.require(infer)?;
    let traj = load_trajectory(trajectory)?;
    let curve = bank.prefix_curve(&traj)?;
    let spec = QuerySpec::new(vec![var], obs);
    spec.validate(schema)?;

    let labels = curve.labels();
    let effect = schema.variable(var);
    let mut out = String::from("t,fraction");
    for l in labels {
        let _ = write!(out, ",loglik:{l}");
    }
    for l in labels {
        let _ = write!(out, ",{ACTION}={l}");
    }
    out.push_str(",argmax");
    for l in effect.labels() {
        let _ = write!(out, ",{}={l}", effect.name());
    }
    out.push('\n');

    let total = curve.len();
    for t in 1..=total {
        let post = curve.posterior(t)?;
        let fused = fuse_query(&net, &post, &spec)?;
        let _ = write!(out, "{t},{}", real(t as f64 / total as f64));
        for l in curve.normalized(t)? {
            let _ = write!(out, ",{}", real(l));
        }
        for w in post.weights() {
            let _ = write!(out, ",{}", real(*w));
        }
        let _ = write!(out, ",{}", labels[curve.argmax(t)?]);
        for p in fused.distribution.probs() {
            let _ = write!(out, ",{}", real(*p));
        }
        out.push('\n');
    }
    write_file(&config.out_file("anticipate.csv"), &out)?;
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let t = ((frac * total as f64).ceil() as usize).clamp(1, total);
        println!("{:>4.0}% of frames: {}", frac * 100.0, labels[curve.argmax(t)?]);
    }
    Ok(())
}

pub fn describe(config: &RunConfig, evidence: &[String], soft: Option<&str>, trajectory: Option<&Path>) -> Result<()> {
    let net = load_net(config)?;
    let schema = net.schema();
    let obs = parse_evidence(schema, evidence)?;
    let soft = soft_evidence(config, schema, soft, trajectory)?;
    let grammar = load_grammar(config)?;

    let network = word_presence(&net, &obs, None)?;
    let combined = match &soft {
        Some(s) => word_presence(&net, &obs, Some(s))?,
        None => network.clone(),
    };
    let probs: WordProbs = combined.iter().cloned().collect();
    let list = nbest(
        &grammar,
        &probs,
        config.describe.candidates,
        config.describe.keep,
        config.seed.wrapping_add(DESCRIBE_SEED),
    )?;

    let mut words = String::from("word,p_network,p_combined,delta\n");
    for ((w, pn), (_, pc)) in network.iter().zip(&combined) {
        let _ = writeln!(words, "{w},{},{},{}", real(*pn), real(*pc), real(pc - pn));
    }
    write_file(&config.out_file("words.csv"), &words)?;
    write_file(&config.out_file("nbest.csv"), &list.to_csv())?;

    println!("evidence: {}", obs.display(schema));
    for (i, (s, score)) in list.entries.iter().enumerate() {
        println!("{:>3}. {score:>9.5}  {s}", i + 1);
    }
    Ok(())
}

pub fn sweep(config: &RunConfig, evidence: &[String], target: &str, infer: Option<&str>) -> Result<()> {
    let net = load_net(config)?;
    let schema = net.schema();
    let obs = parse_evidence(schema, evidence)?;
    let action_var = schema.require(ACTION)?;
    let actions = schema.variable(action_var);
    let target_idx = actions
        .value_index(target)
        .ok_or_else(|| affordance_words::Error::UnknownValue { variable: ACTION.into(), value: target.into() })?;
    let var = match infer {
        Some(name) => schema.require(name)?,
        None => action_var,
    };
    let grid = confidence_grid(actions.arity(), config.sweep.grid);
    let points = sweep_query(&net, &QuerySpec::new(vec![var], obs), target_idx, &grid)?;

    let v = schema.variable(var);
    let mut out = String::from("p");
    for l in v.labels() {
        let _ = write!(out, ",{}={l}", v.name());
    }
    out.push_str(",argmax,normalizer\n");
    for pt in &points {
        let probs = pt.result.distribution.probs();
        let best = (0..probs.len()).fold(0, |b, i| if probs[i] > probs[b] { i } else { b });
        let _ = write!(out, "{}", real(pt.confidence));
        for p in probs {
            let _ = write!(out, ",{}", real(*p));
        }
        let _ = writeln!(out, ",{},{}", v.label(best), real(pt.result.normalizer));
    }
    write_file(&config.out_file("sweep.csv"), &out)?;

    let mut previous: Option<usize> = None;
    for pt in &points {
        let probs = pt.result.distribution.probs();
        let best = (0..probs.len()).fold(0, |b, i| if probs[i] > probs[b] { i } else { b });
        if previous.is_some_and(|p| p != best) {
            println!("argmax changes to {} at p = {:.4}", v.label(best), pt.confidence);
        }
        previous = Some(best);
    }
    println!("{} grid points written to {}", points.len(), config.out_file("sweep.csv").display());
    Ok(())
}
