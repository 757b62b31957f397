//! Ordered-vs-shuffled classification: balanced training sets built from
//! ego-networks, a small feedforward network trained with minibatch Adam,
//! ego-grouped k-fold cross-validation, and cross-domain transfer.

use crate::egonet::{EgoKind, EgoNetwork};
use crate::error::{Error, Result};
use crate::features::{featurize, featurize_ego, FeatureVector};
use crate::rng::{base_rng, stream_rng};
use crate::simplex::{NodeId, Simplex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::Path;

/// Names of the classifier input columns, in `FeatureVector::to_input` order.
pub const INPUT_COLUMNS: [&str; 6] = [
    "length",
    "intersection_density",
    "avg_alter_spread",
    "first_subset_count",
    "last_superset_count",
    "user_arrival",
];

/// One training row: the feature vector of a correctly ordered (label 1) or
/// shuffled (label 0) ego-network.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub label: bool,
    pub ego_id: NodeId,
    pub kind: EgoKind,
}

/// Optimizer and architecture settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub minibatch: usize,
    pub max_epochs: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Input columns to use (indices into `INPUT_COLUMNS`); `None` keeps all
    /// columns the ego kind provides. Single-column selections give the
    /// per-feature ablations.
    pub columns: Option<Vec<usize>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_sizes: vec![100, 24],
            learning_rate: 1e-3,
            minibatch: 200,
            max_epochs: 200,
            tolerance: 1e-4,
            seed: 0,
            columns: None,
        }
    }
}

impl TrainConfig {
    /// The small-corpus variant (hidden layers 12 and 6).
    pub fn small() -> Self {
        TrainConfig {
            hidden_sizes: vec![12, 6],
            ..Self::default()
        }
    }

    /// Logistic-regression baseline: no hidden layers, so the network
    /// reduces to a linear model under a sigmoid.
    pub fn logistic() -> Self {
        TrainConfig {
            hidden_sizes: vec![],
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Returns a copy of the ego-network in uniformly random order, re-indexed
/// with ordinals `1..=m`. The identity permutation is rejected and redrawn,
/// so the result is always a genuinely shuffled negative.
pub fn shuffle_ego(ego: &EgoNetwork, seed: u64) -> Result<EgoNetwork> {
    let mut rng = base_rng(seed);
    shuffle_ego_with(ego, &mut rng)
}

pub fn shuffle_ego_with(ego: &EgoNetwork, rng: &mut ChaCha8Rng) -> Result<EgoNetwork> {
    let m = ego.len();
    if m < 2 {
        return Err(Error::UndefinedMeasure(m));
    }
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        perm.shuffle(rng);
        if perm.iter().enumerate().any(|(i, &p)| i != p) {
            break;
        }
    }
    let mut simplices: Vec<Simplex> = perm.iter().map(|&p| ego.simplices[p].clone()).collect();
    for (i, s) in simplices.iter_mut().enumerate() {
        s.ordinal_time = (i + 1) as u32;
    }
    Ok(EgoNetwork {
        ego: ego.ego,
        kind: ego.kind,
        simplices,
        alters: ego.alters.clone(),
    })
}

/// One positive (true order) and one negative (shuffled) example per ego.
pub fn make_training_set(
    egos: &[EgoNetwork],
    kind: EgoKind,
    seed: u64,
) -> Result<Vec<LabeledExample>> {
    if egos.is_empty() {
        return Err(Error::EmptyTrainingInput);
    }
    let mut examples = Vec::with_capacity(2 * egos.len());
    for (i, ego) in egos.iter().enumerate() {
        debug_assert_eq!(ego.kind, kind);
        let positive = featurize_ego(ego)?;
        let shuffled = shuffle_ego_with(ego, &mut stream_rng(seed, i as u64))?;
        let negative = featurize(&shuffled.simplices, shuffled.ego, kind)?;
        examples.push(LabeledExample {
            features: positive,
            label: true,
            ego_id: ego.ego,
            kind,
        });
        examples.push(LabeledExample {
            features: negative,
            label: false,
            ego_id: ego.ego,
            kind,
        });
    }
    Ok(examples)
}

// ---------------------------------------------------------------------------
// Network internals: flat parameter vector, ReLU hidden layers, sigmoid
// output, binary cross-entropy.
// ---------------------------------------------------------------------------

/// Total parameter count of an architecture.
pub fn param_count(arch: &[usize]) -> usize {
    arch.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Glorot-uniform weights (`±sqrt(6 / (fan_in + fan_out))`), zero biases.
pub fn init_params(arch: &[usize], seed: u64) -> Vec<f64> {
    let mut rng = base_rng(seed);
    let mut params = Vec::with_capacity(param_count(arch));
    for w in arch.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for _ in 0..fan_in * fan_out {
            params.push(rng.gen_range(-bound..=bound));
        }
        params.extend(std::iter::repeat(0.0).take(fan_out));
    }
    params
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Probability that the input is a correctly ordered ego-network.
pub fn forward(arch: &[usize], params: &[f64], input: &[f64]) -> f64 {
    debug_assert_eq!(input.len(), arch[0]);
    let mut activation = input.to_vec();
    let mut offset = 0;
    for (l, w) in arch.windows(2).enumerate() {
        let (fan_in, fan_out) = (w[0], w[1]);
        let weights = &params[offset..offset + fan_in * fan_out];
        let biases = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        offset += fan_in * fan_out + fan_out;
        let mut next = vec![0.0; fan_out];
        for (j, out) in next.iter_mut().enumerate() {
            let row = &weights[j * fan_in..(j + 1) * fan_in];
            let z: f64 = row.iter().zip(&activation).map(|(w, a)| w * a).sum::<f64>() + biases[j];
            let last_layer = l + 2 == arch.len();
            *out = if last_layer { z } else { z.max(0.0) };
        }
        activation = next;
    }
    sigmoid(activation[0])
}

fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean binary cross-entropy over a batch.
pub fn batch_loss(arch: &[usize], params: &[f64], inputs: &[Vec<f64>], labels: &[f64]) -> f64 {
    let total: f64 = inputs
        .iter()
        .zip(labels)
        .map(|(x, &y)| bce(forward(arch, params, x), y))
        .sum();
    total / inputs.len() as f64
}

/// Mean loss and its analytic gradient with respect to every parameter.
pub fn batch_loss_and_grad(
    arch: &[usize],
    params: &[f64],
    inputs: &[Vec<f64>],
    labels: &[f64],
) -> (f64, Vec<f64>) {
    let n = inputs.len();
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let layers = arch.len() - 1;

    // per-layer parameter offsets
    let mut offsets = Vec::with_capacity(layers);
    let mut offset = 0;
    for w in arch.windows(2) {
        offsets.push(offset);
        offset += w[0] * w[1] + w[1];
    }

    for (x, &y) in inputs.iter().zip(labels) {
        // forward pass keeping pre-activations
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(layers + 1);
        activations.push(x.clone());
        for (l, w) in arch.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let base = offsets[l];
            let weights = &params[base..base + fan_in * fan_out];
            let biases = &params[base + fan_in * fan_out..base + fan_in * fan_out + fan_out];
            let prev = &activations[l];
            let mut next = vec![0.0; fan_out];
            for (j, out) in next.iter_mut().enumerate() {
                let row = &weights[j * fan_in..(j + 1) * fan_in];
                let z: f64 = row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>() + biases[j];
                let last_layer = l + 1 == layers;
                *out = if last_layer { z } else { z.max(0.0) };
            }
            activations.push(next);
        }
        let p = sigmoid(activations[layers][0]);
        loss += bce(p, y);

        // backward pass: delta through sigmoid + BCE is (p - y)
        let mut delta = vec![(p - y) / n as f64];
        for l in (0..layers).rev() {
            let (fan_in, fan_out) = (arch[l], arch[l + 1]);
            let base = offsets[l];
            let prev = &activations[l];
            for j in 0..fan_out {
                let dj = delta[j];
                let row = &mut grad[base + j * fan_in..base + (j + 1) * fan_in];
                for (g, a) in row.iter_mut().zip(prev) {
                    *g += dj * a;
                }
                grad[base + fan_in * fan_out + j] += dj;
            }
            if l == 0 {
                break;
            }
            let weights = &params[base..base + fan_in * fan_out];
            let mut prev_delta = vec![0.0; fan_in];
            for (j, &dj) in delta.iter().enumerate() {
                let row = &weights[j * fan_in..(j + 1) * fan_in];
                for (pd, &w) in prev_delta.iter_mut().zip(row) {
                    *pd += dj * w;
                }
            }
            // ReLU derivative: gate on the hidden activation
            for (pd, &a) in prev_delta.iter_mut().zip(&activations[l]) {
                if a <= 0.0 {
                    *pd = 0.0;
                }
            }
            delta = prev_delta;
        }
    }
    (loss / n as f64, grad)
}

// ---------------------------------------------------------------------------
// Trained model
// ---------------------------------------------------------------------------

const MODEL_MAGIC: &str = "hyperego-model v1";

/// A trained ordering classifier: architecture, flat parameters, and the
/// z-score normalization fitted on its training inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingModel {
    pub kind: EgoKind,
    pub arch: Vec<usize>,
    pub params: Vec<f64>,
    pub norm_mean: Vec<f64>,
    pub norm_std: Vec<f64>,
    /// Indices into `INPUT_COLUMNS` selecting the model inputs.
    pub columns: Vec<usize>,
    pub seed: u64,
}

impl OrderingModel {
    pub fn input_dim(&self) -> usize {
        self.arch[0]
    }

    fn project(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if self.columns.iter().any(|&c| c >= raw.len()) {
            return Err(Error::DimensionMismatch {
                expected: self.columns.iter().max().map_or(0, |&c| c + 1),
                got: raw.len(),
            });
        }
        Ok(self.columns.iter().map(|&c| raw[c]).collect())
    }

    pub fn normalize(&self, projected: &[f64]) -> Vec<f64> {
        projected
            .iter()
            .zip(&self.norm_mean)
            .zip(&self.norm_std)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    /// Probability in `[0, 1]` that the features describe a correctly
    /// ordered ego-network. Deterministic in its inputs.
    pub fn predict_proba(&self, features: &FeatureVector) -> Result<f64> {
        let projected = self.project(&features.to_input())?;
        Ok(forward(&self.arch, &self.params, &self.normalize(&projected)))
    }

    pub fn accuracy(&self, examples: &[LabeledExample]) -> Result<f64> {
        let mut correct = 0usize;
        for ex in examples {
            let p = self.predict_proba(&ex.features)?;
            if (p >= 0.5) == ex.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / examples.len() as f64)
    }

    /// Versioned text persistence. Floats are written in shortest
    /// round-trip form, so reloading reproduces predictions exactly.
    pub fn save(&self, path: &Path) -> Result<()> {
        use std::fmt::Write as _;
        let mut out = String::new();
        writeln!(out, "{MODEL_MAGIC}").unwrap();
        writeln!(out, "kind {}", self.kind).unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let join_f = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(out, "columns {}", join(&self.columns)).unwrap();
        writeln!(out, "arch {}", join(&self.arch)).unwrap();
        writeln!(out, "norm_mean {}", join_f(&self.norm_mean)).unwrap();
        writeln!(out, "norm_std {}", join_f(&self.norm_std)).unwrap();
        writeln!(out, "params {}", self.params.len()).unwrap();
        for p in &self.params {
            writeln!(out, "{p:?}").unwrap();
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<OrderingModel> {
        let text = std::fs::read_to_string(path)?;
        let file = path.display().to_string();
        let bad = |msg: &str| Error::ModelFormat {
            file: file.clone(),
            msg: msg.to_string(),
        };
        let mut lines = text.lines();
        if lines.next() != Some(MODEL_MAGIC) {
            return Err(bad("missing or unsupported header"));
        }
        let mut kind = None;
        let mut seed = 0u64;
        let mut columns = Vec::new();
        let mut arch = Vec::new();
        let mut norm_mean = Vec::new();
        let mut norm_std = Vec::new();
        let mut expected_params = 0usize;
        for line in lines.by_ref() {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "kind" => kind = rest.parse::<EgoKind>().ok(),
                "seed" => seed = rest.parse().map_err(|_| bad("bad seed"))?,
                "columns" => {
                    columns = parse_list(rest).map_err(|_| bad("bad columns"))?;
                }
                "arch" => arch = parse_list(rest).map_err(|_| bad("bad arch"))?,
                "norm_mean" => norm_mean = parse_list(rest).map_err(|_| bad("bad norm_mean"))?,
                "norm_std" => norm_std = parse_list(rest).map_err(|_| bad("bad norm_std"))?,
                "params" => {
                    expected_params = rest.parse().map_err(|_| bad("bad params count"))?;
                    break;
                }
                _ => return Err(bad("unknown field")),
            }
        }
        let params: Vec<f64> = lines
            .map(|l| l.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("bad parameter value"))?;
        if params.len() != expected_params || arch.is_empty() || param_count(&arch) != params.len()
        {
            return Err(bad("parameter count does not match architecture"));
        }
        if norm_mean.len() != arch[0] || norm_std.len() != arch[0] || columns.len() != arch[0] {
            return Err(bad("normalization size does not match architecture"));
        }
        Ok(OrderingModel {
            kind: kind.ok_or_else(|| bad("missing kind"))?,
            arch,
            params,
            norm_mean,
            norm_std,
            columns,
            seed,
        })
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, ()> {
    s.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| ()))
        .collect()
}

fn default_columns(kind: EgoKind, cfg: &TrainConfig) -> Vec<usize> {
    match &cfg.columns {
        Some(cols) => cols.clone(),
        None => (0..FeatureVector::input_dim(kind)).collect(),
    }
}

/// Trains the classifier with minibatch Adam, halting at `max_epochs` or
/// when the epoch-loss improvement drops below `tolerance`. Normalization
/// is fitted on the training examples only.
pub fn train(examples: &[LabeledExample], cfg: &TrainConfig) -> Result<OrderingModel> {
    if examples.len() < 2 {
        return Err(Error::EmptyTrainingInput);
    }
    let positives = examples.iter().filter(|e| e.label).count();
    if positives == 0 {
        return Err(Error::SingleClass(0));
    }
    if positives == examples.len() {
        return Err(Error::SingleClass(1));
    }

    let kind = examples[0].kind;
    let columns = default_columns(kind, cfg);
    let dim = columns.len();
    let raw: Vec<Vec<f64>> = examples.iter().map(|e| e.features.to_input()).collect();
    if let Some(short) = raw.iter().find(|r| columns.iter().any(|&c| c >= r.len())) {
        return Err(Error::DimensionMismatch {
            expected: columns.iter().max().map_or(0, |&c| c + 1),
            got: short.len(),
        });
    }
    let projected: Vec<Vec<f64>> = raw
        .iter()
        .map(|r| columns.iter().map(|&c| r[c]).collect())
        .collect();

    // z-score normalization; zero-variance features scale to 1
    let n = projected.len() as f64;
    let mut norm_mean = vec![0.0; dim];
    for row in &projected {
        for (m, x) in norm_mean.iter_mut().zip(row) {
            *m += x / n;
        }
    }
    let mut norm_std = vec![0.0; dim];
    for row in &projected {
        for ((s, x), m) in norm_std.iter_mut().zip(row).zip(&norm_mean) {
            *s += (x - m) * (x - m) / n;
        }
    }
    for s in norm_std.iter_mut() {
        *s = s.sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let inputs: Vec<Vec<f64>> = projected
        .iter()
        .map(|row| {
            row.iter()
                .zip(&norm_mean)
                .zip(&norm_std)
                .map(|((x, m), s)| (x - m) / s)
                .collect()
        })
        .collect();
    let labels: Vec<f64> = examples.iter().map(|e| f64::from(e.label as u8)).collect();

    let mut arch = Vec::with_capacity(cfg.hidden_sizes.len() + 2);
    arch.push(dim);
    arch.extend_from_slice(&cfg.hidden_sizes);
    arch.push(1);

    let mut params = init_params(&arch, cfg.seed);
    let mut rng = base_rng(cfg.seed);
    // Adam state
    let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);
    let mut m1 = vec![0.0; params.len()];
    let mut m2 = vec![0.0; params.len()];
    let mut step = 0u32;

    let mut indices: Vec<usize> = (0..inputs.len()).collect();
    let mut prev_loss = f64::INFINITY;
    for _epoch in 0..cfg.max_epochs {
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in indices.chunks(cfg.minibatch.max(1)) {
            let batch_inputs: Vec<Vec<f64>> = chunk.iter().map(|&i| inputs[i].clone()).collect();
            let batch_labels: Vec<f64> = chunk.iter().map(|&i| labels[i]).collect();
            let (loss, grad) = batch_loss_and_grad(&arch, &params, &batch_inputs, &batch_labels);
            epoch_loss += loss * chunk.len() as f64;
            step += 1;
            let bc1 = 1.0 - beta1.powi(step as i32);
            let bc2 = 1.0 - beta2.powi(step as i32);
            for i in 0..params.len() {
                m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
                m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
                params[i] -= cfg.learning_rate * (m1[i] / bc1) / ((m2[i] / bc2).sqrt() + eps);
            }
        }
        epoch_loss /= inputs.len() as f64;
        if prev_loss - epoch_loss < cfg.tolerance {
            break;
        }
        prev_loss = epoch_loss;
    }

    Ok(OrderingModel {
        kind,
        arch,
        params,
        norm_mean,
        norm_std,
        columns,
        seed: cfg.seed,
    })
}

/// Mean and population standard deviation of per-fold accuracies.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Ego-grouped k-fold cross-validation: an ego's positive and negative
/// examples always share a fold. Accuracy uses the 0.5 threshold.
pub fn cross_validate(examples: &[LabeledExample], k: usize, cfg: &TrainConfig) -> Result<CvReport> {
    if k < 2 {
        return Err(Error::BadFoldCount(k));
    }
    let mut groups: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (i, ex) in examples.iter().enumerate() {
        groups.entry(ex.ego_id).or_default().push(i);
    }
    if groups.len() < k {
        return Err(Error::TooFewEgos {
            egos: groups.len(),
            folds: k,
        });
    }
    let mut ego_ids: Vec<NodeId> = groups.keys().copied().collect();
    ego_ids.shuffle(&mut stream_rng(cfg.seed, u64::MAX));

    let mut fold_accuracies = Vec::with_capacity(k);
    for fold in 0..k {
        let mut train_set = Vec::new();
        let mut test_set = Vec::new();
        for (pos, ego_id) in ego_ids.iter().enumerate() {
            let bucket = if pos % k == fold {
                &mut test_set
            } else {
                &mut train_set
            };
            bucket.extend(groups[ego_id].iter().map(|&i| examples[i].clone()));
        }
        let model = train(&train_set, cfg)?;
        fold_accuracies.push(model.accuracy(&test_set)?);
    }
    let mean = fold_accuracies.iter().sum::<f64>() / k as f64;
    let variance = fold_accuracies
        .iter()
        .map(|a| (a - mean) * (a - mean))
        .sum::<f64>()
        / k as f64;
    Ok(CvReport {
        fold_accuracies,
        mean,
        std: variance.sqrt(),
    })
}

/// Accuracy of a trained model on another dataset's balanced example set,
/// without retraining. The feature schemas must agree.
pub fn transfer_evaluate(model: &OrderingModel, examples: &[LabeledExample]) -> Result<f64> {
    model.accuracy(examples)
}
