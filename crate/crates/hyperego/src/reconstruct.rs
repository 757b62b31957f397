//! Temporal reconstruction of ego-networks: restart hill climbing over the
//! all-pairs swap neighborhood, scored by the ordering classifier; the
//! pairwise order-accuracy metric; and the random and size-sort baselines.

use crate::classifier::OrderingModel;
use crate::egonet::EgoNetwork;
use crate::error::{Error, Result};
use crate::features::featurize;
use crate::rng::{base_rng, stream_rng};
use crate::simplex::Simplex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// How simplex pairs with equal true timestamps enter the accuracy metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    /// Tied pairs are excluded from numerator and denominator (default:
    /// their file-order ground truth is arbitrary).
    Exclude,
    /// Tied pairs count, with the ordinal (file) order as truth.
    Ordinal,
}

impl std::str::FromStr for TiePolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exclude" => Ok(TiePolicy::Exclude),
            "ordinal" => Ok(TiePolicy::Ordinal),
            other => Err(format!("unknown tie policy `{other}`")),
        }
    }
}

/// A candidate arrival order: position `i` holds the identity (index into
/// the ego's true-order simplex list) placed at ordinal `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    perm: Vec<usize>,
    /// Model probability cached by the search.
    pub score: Option<f64>,
}

impl Ordering {
    pub fn identity(m: usize) -> Ordering {
        Ordering {
            perm: (0..m).collect(),
            score: None,
        }
    }

    pub fn from_perm(perm: Vec<usize>) -> Result<Ordering> {
        let m = perm.len();
        let mut seen = vec![false; m];
        for &p in &perm {
            if p >= m || seen[p] {
                return Err(Error::NotAPermutation(m));
            }
            seen[p] = true;
        }
        Ok(Ordering { perm, score: None })
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn reversed(&self) -> Ordering {
        Ordering {
            perm: self.perm.iter().rev().copied().collect(),
            score: None,
        }
    }

    /// The simplices of `ego` in this candidate order.
    pub fn view<'a>(&self, ego: &'a EgoNetwork) -> Vec<&'a Simplex> {
        self.perm.iter().map(|&p| &ego.simplices[p]).collect()
    }
}

fn view_of<'a>(ego: &'a EgoNetwork, perm: &[usize]) -> Vec<&'a Simplex> {
    perm.iter().map(|&p| &ego.simplices[p]).collect()
}

/// Fraction of simplex pairs the predicted ordering places in the correct
/// relative time order, against the ego's true arrival order.
pub fn pairwise_order_accuracy(
    ego: &EgoNetwork,
    predicted: &Ordering,
    truth: &Ordering,
    tie_policy: TiePolicy,
) -> Result<f64> {
    let m = ego.len();
    if predicted.len() != m || truth.len() != m {
        return Err(Error::MultisetMismatch);
    }
    if m < 2 {
        return Err(Error::UndefinedMeasure(m));
    }
    let mut predicted_pos = vec![0usize; m];
    for (pos, &id) in predicted.perm.iter().enumerate() {
        predicted_pos[id] = pos;
    }
    let mut counted = 0usize;
    let mut correct = 0usize;
    for i in 0..m {
        for j in i + 1..m {
            let (early, late) = (truth.perm[i], truth.perm[j]);
            let tied = ego.simplices[early].real_time == ego.simplices[late].real_time;
            if tied && tie_policy == TiePolicy::Exclude {
                continue;
            }
            counted += 1;
            if predicted_pos[early] < predicted_pos[late] {
                correct += 1;
            }
        }
    }
    if counted == 0 {
        return Err(Error::AllPairsTied);
    }
    Ok(correct as f64 / counted as f64)
}

/// Scores a candidate permutation of an ego-network's simplices.
pub trait OrderScorer: Sync {
    fn score(&self, ego: &EgoNetwork, perm: &[usize]) -> Result<f64>;
}

impl<F> OrderScorer for F
where
    F: Fn(&EgoNetwork, &[usize]) -> f64 + Sync,
{
    fn score(&self, ego: &EgoNetwork, perm: &[usize]) -> Result<f64> {
        Ok(self(ego, perm))
    }
}

/// The trained classifier as a search objective: featurize the candidate
/// order (positions as ordinals) and take the model probability.
pub struct ModelScorer<'a> {
    pub model: &'a OrderingModel,
}

impl OrderScorer for ModelScorer<'_> {
    fn score(&self, ego: &EgoNetwork, perm: &[usize]) -> Result<f64> {
        let features = featurize(&view_of(ego, perm), ego.ego, ego.kind)?;
        self.model.predict_proba(&features)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Restart count `T`.
    pub restarts: usize,
    pub seed: u64,
    /// Safety cap on accepted steps per restart; `None` means
    /// `10 * C(m, 2)`.
    pub max_steps_per_restart: Option<usize>,
}

impl SearchConfig {
    pub fn new(restarts: usize, seed: u64) -> Self {
        assert!(restarts >= 1, "restart count must be at least 1");
        SearchConfig {
            restarts,
            seed,
            max_steps_per_restart: None,
        }
    }
}

/// Score trajectory of one restart. Scores increase strictly; `truncated`
/// marks a restart stopped by the step cap rather than local optimality.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RestartTrace {
    pub steps: usize,
    pub scores: Vec<f64>,
    pub final_perm: Vec<usize>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SearchTrace {
    pub restarts: Vec<RestartTrace>,
    /// Index of the restart whose local optimum was returned.
    pub chosen: usize,
}

/// Restart hill climbing. Each of the `T` restarts begins from a fresh
/// uniform shuffle of the input order, then repeatedly scores every
/// pairwise swap, keeps the strictly improving ones, and follows one chosen
/// uniformly at random until no swap improves. The best local optimum over
/// all restarts is returned, ties broken by the earliest restart.
pub fn hill_climb(
    ego: &EgoNetwork,
    start: &Ordering,
    scorer: &dyn OrderScorer,
    cfg: &SearchConfig,
) -> Result<(Ordering, SearchTrace)> {
    let mut rng = base_rng(cfg.seed);
    hill_climb_with(ego, start, scorer, cfg, &mut rng)
}

pub(crate) fn hill_climb_with(
    ego: &EgoNetwork,
    start: &Ordering,
    scorer: &dyn OrderScorer,
    cfg: &SearchConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Ordering, SearchTrace)> {
    let m = ego.len();
    if m < 2 {
        return Err(Error::UndefinedMeasure(m));
    }
    if start.len() != m {
        return Err(Error::MultisetMismatch);
    }
    let step_cap = cfg
        .max_steps_per_restart
        .unwrap_or(10 * m * (m - 1) / 2);

    let mut traces = Vec::with_capacity(cfg.restarts);
    let mut best: Option<(usize, f64, Vec<usize>)> = None;

    for restart in 0..cfg.restarts {
        let mut perm = start.perm.clone();
        perm.shuffle(rng);
        let mut score = scorer.score(ego, &perm)?;
        let mut scores = vec![score];
        let mut steps = 0usize;
        let mut truncated = false;

        loop {
            // enumerate all C(m,2) swap neighbors in index order
            let mut improvers: Vec<(usize, usize, f64)> = Vec::new();
            for a in 0..m {
                for b in a + 1..m {
                    perm.swap(a, b);
                    let candidate = scorer.score(ego, &perm)?;
                    perm.swap(a, b);
                    if candidate > score {
                        improvers.push((a, b, candidate));
                    }
                }
            }
            if improvers.is_empty() {
                break;
            }
            if steps >= step_cap {
                truncated = true;
                break;
            }
            let &(a, b, next) = &improvers[rng.gen_range(0..improvers.len())];
            perm.swap(a, b);
            score = next;
            scores.push(score);
            steps += 1;
        }

        let better = match &best {
            None => true,
            Some((_, best_score, _)) => score > *best_score,
        };
        if better {
            best = Some((restart, score, perm.clone()));
        }
        traces.push(RestartTrace {
            steps,
            scores,
            final_perm: perm,
            truncated,
        });
    }

    let (chosen, score, perm) = best.expect("at least one restart");
    Ok((
        Ordering {
            perm,
            score: Some(score),
        },
        SearchTrace {
            restarts: traces,
            chosen,
        },
    ))
}

/// Uniform random ordering.
pub fn baseline_random(ego: &EgoNetwork, seed: u64) -> Ordering {
    let mut rng = base_rng(seed);
    baseline_random_with(ego, &mut rng)
}

fn baseline_random_with(ego: &EgoNetwork, rng: &mut ChaCha8Rng) -> Ordering {
    let mut perm: Vec<usize> = (0..ego.len()).collect();
    perm.shuffle(rng);
    Ordering { perm, score: None }
}

/// Stable ascending sort of the presented order by simplex size; ties keep
/// their presented positions.
pub fn baseline_size_sort(ego: &EgoNetwork, presented: &Ordering) -> Ordering {
    let mut perm = presented.perm.clone();
    perm.sort_by_key(|&id| ego.simplices[id].size());
    Ordering { perm, score: None }
}

/// One-sided sign test: probability of at least `wins` successes in
/// `wins + losses` fair coin flips.
pub fn one_sided_sign_test(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    // ln-space binomial tail to stay finite at n in the hundreds
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    let ln_half = 0.5f64.ln();
    let mut p = 0.0;
    for k in wins..=n {
        let ln_term = ln_fact[n] - ln_fact[k] - ln_fact[n - k] + (n as f64) * ln_half;
        p += ln_term.exp();
    }
    p.min(1.0)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EgoResult {
    pub ego: crate::simplex::NodeId,
    pub kind: crate::egonet::EgoKind,
    pub method: &'static str,
    pub accuracy: f64,
    pub steps: usize,
    pub seconds: f64,
}

/// Per-ego accuracies of hill climbing and both baselines, with summary
/// statistics and the paired hill-vs-random sign test.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReconstructionReport {
    pub rows: Vec<EgoResult>,
    pub mean_hill: f64,
    pub std_hill: f64,
    pub mean_random: f64,
    pub std_random: f64,
    pub mean_size_sort: f64,
    pub std_size_sort: f64,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided sign test p-value for hill climbing beating the random
    /// baseline across paired egos.
    pub sign_test_p: f64,
    /// Egos dropped because the metric had no comparable pairs.
    pub skipped: usize,
    pub traces: Vec<SearchTrace>,
}

impl ReconstructionReport {
    /// Full per-ego CSV (`ego,kind,method,accuracy,steps,seconds`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ego,kind,method,accuracy,steps,seconds\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:.3}\n",
                r.ego, r.kind, r.method, r.accuracy, r.steps, r.seconds
            ));
        }
        out
    }

    /// Timing-free CSV used wherever byte-reproducibility matters.
    pub fn to_csv_deterministic(&self) -> String {
        let mut out = String::from("ego,kind,method,accuracy,steps\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.ego, r.kind, r.method, r.accuracy, r.steps
            ));
        }
        out
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    (mean, var.sqrt())
}

/// Runs the benchmark protocol over a sample of egos: each ego is presented
/// as a seeded shuffle, reconstructed by hill climbing, and compared with
/// the random and size-sort baselines under the same metric.
pub fn evaluate_reconstruction(
    egos: &[EgoNetwork],
    model: &OrderingModel,
    cfg: &SearchConfig,
    tie_policy: TiePolicy,
) -> Result<ReconstructionReport> {
    if egos.is_empty() {
        return Err(Error::EmptySample);
    }
    let scorer = ModelScorer { model };

    struct PerEgo {
        rows: Vec<EgoResult>,
        hill: f64,
        random: f64,
        size_sort: f64,
        trace: SearchTrace,
    }

    let outcomes: Vec<Result<Option<PerEgo>>> = egos
        .par_iter()
        .enumerate()
        .map(|(i, ego)| {
            let truth = Ordering::identity(ego.len());
            // independent per-ego streams keep results byte-stable under
            // any parallel schedule
            let mut presented_rng = stream_rng(cfg.seed, 3 * i as u64);
            let presented = baseline_random_with(ego, &mut presented_rng);
            let mut search_rng = stream_rng(cfg.seed, 3 * i as u64 + 1);
            let mut random_rng = stream_rng(cfg.seed, 3 * i as u64 + 2);

            let started = std::time::Instant::now();
            let (found, trace) = hill_climb_with(ego, &presented, &scorer, cfg, &mut search_rng)?;
            let hill_seconds = started.elapsed().as_secs_f64();
            let hill_acc = match pairwise_order_accuracy(ego, &found, &truth, tie_policy) {
                Ok(acc) => acc,
                Err(Error::AllPairsTied) => return Ok(None),
                Err(e) => return Err(e),
            };

            let random = baseline_random_with(ego, &mut random_rng);
            let random_acc = pairwise_order_accuracy(ego, &random, &truth, tie_policy)?;
            let sorted = baseline_size_sort(ego, &presented);
            let sort_acc = pairwise_order_accuracy(ego, &sorted, &truth, tie_policy)?;

            let steps: usize = trace.restarts.iter().map(|r| r.steps).sum();
            let rows = vec![
                EgoResult {
                    ego: ego.ego,
                    kind: ego.kind,
                    method: "hill-climb",
                    accuracy: hill_acc,
                    steps,
                    seconds: hill_seconds,
                },
                EgoResult {
                    ego: ego.ego,
                    kind: ego.kind,
                    method: "random",
                    accuracy: random_acc,
                    steps: 0,
                    seconds: 0.0,
                },
                EgoResult {
                    ego: ego.ego,
                    kind: ego.kind,
                    method: "size-sort",
                    accuracy: sort_acc,
                    steps: 0,
                    seconds: 0.0,
                },
            ];
            Ok(Some(PerEgo {
                rows,
                hill: hill_acc,
                random: random_acc,
                size_sort: sort_acc,
                trace,
            }))
        })
        .collect();

    let mut rows = Vec::new();
    let mut traces = Vec::new();
    let (mut hill, mut random, mut size_sort) = (Vec::new(), Vec::new(), Vec::new());
    let mut skipped = 0usize;
    for outcome in outcomes {
        match outcome? {
            None => skipped += 1,
            Some(per) => {
                rows.extend(per.rows);
                hill.push(per.hill);
                random.push(per.random);
                size_sort.push(per.size_sort);
                traces.push(per.trace);
            }
        }
    }
    if hill.is_empty() {
        return Err(Error::EmptySample);
    }

    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (h, r) in hill.iter().zip(&random) {
        match h.partial_cmp(r).unwrap() {
            std::cmp::Ordering::Greater => wins += 1,
            std::cmp::Ordering::Less => losses += 1,
            std::cmp::Ordering::Equal => ties += 1,
        }
    }
    let (mean_hill, std_hill) = mean_std(&hill);
    let (mean_random, std_random) = mean_std(&random);
    let (mean_size_sort, std_size_sort) = mean_std(&size_sort);
    Ok(ReconstructionReport {
        rows,
        mean_hill,
        std_hill,
        mean_random,
        std_random,
        mean_size_sort,
        std_size_sort,
        wins,
        losses,
        ties,
        sign_test_p: one_sided_sign_test(wins, losses),
        skipped,
        traces,
    })
}
