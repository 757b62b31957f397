//! Aggregation of per-ego measures into mean curves, the data behind the
//! ordered / shuffled / first-20% comparison plots.

use super::*;
use crate::rng::stream_rng;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Ordered,
    Shuffled,
    /// The leading `ceil(0.2 * m)` simplices of the true order.
    First20Percent,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Variant::Ordered => "ordered",
            Variant::Shuffled => "shuffled",
            Variant::First20Percent => "first-20-percent",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Mean adjacent intersection size, indexed by ego length.
    IntersectionSize,
    /// Intersection size over mean simplex size, indexed by ego length.
    IntersectionDensity,
    /// Mean alter-network spread, indexed by ego length.
    AlterSpread,
    /// User-node arrival ordinal, indexed by ego length.
    UserArrival,
    /// Mean novelty per ordinal position (position 1 omitted).
    Novelty,
    /// Mean simplex size per ordinal position.
    SimplexSize,
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::IntersectionSize => "intersection-size",
            Measure::IntersectionDensity => "intersection-density",
            Measure::AlterSpread => "alter-spread",
            Measure::UserArrival => "user-arrival",
            Measure::Novelty => "novelty",
            Measure::SimplexSize => "simplex-size",
        }
    }

    /// Per-position measures are indexed by ordinal instead of ego length.
    fn per_position(&self) -> bool {
        matches!(self, Measure::Novelty | Measure::SimplexSize)
    }
}

impl std::str::FromStr for Measure {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "intersection-size" => Ok(Measure::IntersectionSize),
            "intersection-density" => Ok(Measure::IntersectionDensity),
            "alter-spread" => Ok(Measure::AlterSpread),
            "user-arrival" => Ok(Measure::UserArrival),
            "novelty" => Ok(Measure::Novelty),
            "simplex-size" => Ok(Measure::SimplexSize),
            other => Err(format!("unknown measure `{other}`")),
        }
    }
}

/// One aggregated point: the mean of a measure at `x` (ego length or
/// ordinal position) over `y_count` samples.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StatCurve {
    pub measure: Measure,
    pub variant: Variant,
    pub x: u32,
    pub y_mean: f64,
    pub y_count: usize,
}

fn scalar_measure(view: &[&Simplex], ego: NodeId, measure: Measure) -> Option<f64> {
    match measure {
        Measure::IntersectionSize => avg_intersection_size(view).ok(),
        Measure::IntersectionDensity => intersection_density(view).ok(),
        Measure::AlterSpread => avg_alter_spread(view, ego).ok(),
        Measure::UserArrival => user_arrival_time(view, ego).ok().map(|t| t as f64),
        Measure::Novelty | Measure::SimplexSize => None,
    }
}

fn per_ego_points(
    ego: &EgoNetwork,
    index: usize,
    measure: Measure,
    variants: &[Variant],
    seed: u64,
) -> Vec<(Variant, u32, f64)> {
    let mut points = Vec::new();
    let m = ego.len();
    for &variant in variants {
        let view: Vec<&Simplex> = match variant {
            Variant::Ordered => ego.simplices.iter().collect(),
            Variant::Shuffled => {
                let mut view: Vec<&Simplex> = ego.simplices.iter().collect();
                view.shuffle(&mut stream_rng(seed, index as u64));
                view
            }
            Variant::First20Percent => {
                let window = (m as f64 * 0.2).ceil() as usize;
                if window < 2 || measure.per_position() {
                    continue;
                }
                ego.simplices.iter().take(window).collect()
            }
        };
        if measure.per_position() {
            match measure {
                Measure::Novelty => {
                    for (pos, novel) in novelty_profile(&view).into_iter().enumerate().skip(1) {
                        points.push((variant, (pos + 1) as u32, novel as f64));
                    }
                }
                Measure::SimplexSize => {
                    for (pos, s) in view.iter().enumerate() {
                        points.push((variant, (pos + 1) as u32, s.size() as f64));
                    }
                }
                _ => unreachable!(),
            }
        } else if let Some(value) = scalar_measure(&view, ego.ego, measure) {
            points.push((variant, m as u32, value));
        }
    }
    points
}

/// Aggregates one measure over a collection of egos. The shuffled variant
/// draws one seeded permutation per ego, so repeated calls with the same
/// seed are byte-reproducible.
pub fn aggregate_curves(
    egos: &[EgoNetwork],
    measure: Measure,
    variants: &[Variant],
    seed: u64,
) -> Vec<StatCurve> {
    let contributions: Vec<Vec<(Variant, u32, f64)>> = egos
        .par_iter()
        .enumerate()
        .map(|(i, ego)| per_ego_points(ego, i, measure, variants, seed))
        .collect();

    let mut accum: BTreeMap<(u8, u32), (f64, usize)> = BTreeMap::new();
    let variant_tag = |v: Variant| variants.iter().position(|&x| x == v).unwrap() as u8;
    for points in contributions {
        for (variant, x, value) in points {
            let cell = accum.entry((variant_tag(variant), x)).or_insert((0.0, 0));
            cell.0 += value;
            cell.1 += 1;
        }
    }
    accum
        .into_iter()
        .map(|((tag, x), (sum, count))| StatCurve {
            measure,
            variant: variants[tag as usize],
            x,
            y_mean: sum / count as f64,
            y_count: count,
        })
        .collect()
}

/// Descriptive curve: alter degree bucket (floor of log2 of the alter's
/// dataset degree) against the mean normalized arrival position of the
/// alter in its ego-networks.
pub fn degree_arrival_curve(
    dataset: &crate::simplex::SimplexDataset,
    egos: &[EgoNetwork],
) -> Vec<StatCurve> {
    let mut accum: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for ego in egos {
        let m = ego.len();
        if m == 0 {
            continue;
        }
        for &alter in &ego.alters {
            let Ok(arrival) = user_arrival_time(&ego.simplices, alter) else {
                continue;
            };
            let degree = dataset.degree(alter).max(1);
            let bucket = (usize::BITS - 1 - degree.leading_zeros()) as u32;
            let cell = accum.entry(bucket).or_insert((0.0, 0));
            cell.0 += arrival as f64 / m as f64;
            cell.1 += 1;
        }
    }
    accum
        .into_iter()
        .map(|(bucket, (sum, count))| StatCurve {
            measure: Measure::UserArrival,
            variant: Variant::Ordered,
            x: bucket,
            y_mean: sum / count as f64,
            y_count: count,
        })
        .collect()
}

/// Renders curves in the `length,variant,mean,count` CSV layout.
pub fn curves_to_csv(curves: &[StatCurve]) -> String {
    let mut out = String::from("length,variant,mean,count\n");
    for c in curves {
        out.push_str(&format!("{},{},{},{}\n", c.x, c.variant, c.y_mean, c.y_count));
    }
    out
}

pub fn curves_to_json(curves: &[StatCurve]) -> String {
    serde_json::to_string_pretty(curves).expect("curves serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::locality_egos;

    #[test]
    fn ordered_intersections_dominate_shuffled_on_locality_egos() {
        let egos = locality_egos(42, 300, 10..=20);
        let curves = aggregate_curves(
            &egos,
            Measure::IntersectionSize,
            &[Variant::Ordered, Variant::Shuffled],
            7,
        );
        let mut by_x: BTreeMap<u32, (Option<f64>, Option<f64>)> = BTreeMap::new();
        for c in &curves {
            let cell = by_x.entry(c.x).or_default();
            match c.variant {
                Variant::Ordered => cell.0 = Some(c.y_mean),
                Variant::Shuffled => cell.1 = Some(c.y_mean),
                _ => {}
            }
        }
        for (x, (ordered, shuffled)) in by_x {
            let (o, s) = (ordered.unwrap(), shuffled.unwrap());
            assert!(o > s, "length {x}: ordered {o} not above shuffled {s}");
        }
    }

    #[test]
    fn novelty_aggregation_over_identical_egos_is_the_profile() {
        let ds = crate::testutil::toy_coauth();
        let ego = crate::egonet::extract_ego(&ds, 1, EgoKind::Star).unwrap();
        let egos = vec![ego.clone(), ego.clone(), ego];
        let curves = aggregate_curves(&egos, Measure::Novelty, &[Variant::Ordered], 1);
        // profile [3,0,0,2,2] with position 1 omitted
        let means: Vec<(u32, f64)> = curves.iter().map(|c| (c.x, c.y_mean)).collect();
        assert_eq!(means, vec![(2, 0.0), (3, 0.0), (4, 2.0), (5, 2.0)]);
        assert!(curves.iter().all(|c| c.y_count == 3));
    }

    #[test]
    fn star_user_arrival_curve_is_constant_one() {
        let egos = locality_egos(11, 40, 10..=14);
        let curves = aggregate_curves(&egos, Measure::UserArrival, &[Variant::Ordered], 3);
        assert!(!curves.is_empty());
        assert!(curves.iter().all(|c| c.y_mean == 1.0));
    }

    #[test]
    fn csv_is_deterministic_under_seed() {
        let egos = locality_egos(5, 50, 10..=15);
        let run = || {
            curves_to_csv(&aggregate_curves(
                &egos,
                Measure::AlterSpread,
                &[Variant::Ordered, Variant::Shuffled],
                99,
            ))
        };
        assert_eq!(run(), run());
        assert!(run().starts_with("length,variant,mean,count\n"));
    }
}
