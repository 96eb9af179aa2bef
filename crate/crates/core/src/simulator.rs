//! Monte Carlo and exact evaluation of an interaction policy.
//!
//! Random numbers come from ChaCha8 seeded with `seed`. Replication `r`
//! reads stream `r`, and the uniform for vertex `v` sits at a fixed offset
//! `v` in that stream, so every draw is a function of
//! `(seed, replication, vertex)` alone. Two policies simulated with the same
//! seed therefore share random numbers.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::follow::{sigmoid, LogisticCoefficients, ProductModel};
use crate::graph::{Policy, SocialGraph, VertexId};
use crate::scalar::Scalar;

pub const EXACT_MAX_POLICY: usize = 20;

/// Probability that vertex `v` follows given `overlap` followed friends.
pub trait FollowResponse<T>: Sync {
    fn prob(&self, v: usize, overlap: usize) -> T;
}

#[derive(Clone, Debug)]
pub struct LogisticResponse<T = f64> {
    score: Vec<T>,
    beta: T,
}

impl<T: Scalar> LogisticResponse<T> {
    pub fn new(graph: &SocialGraph, coeffs: &LogisticCoefficients<T>) -> Result<Self> {
        coeffs.validate()?;
        let score = (0..graph.len())
            .map(|v| {
                let m = graph.meta(v);
                coeffs.feature_score(m.friend_count, m.follower_count)
            })
            .collect();
        Ok(LogisticResponse {
            score,
            beta: coeffs.beta_overlap,
        })
    }
}

impl<T: Scalar> FollowResponse<T> for LogisticResponse<T> {
    fn prob(&self, v: usize, overlap: usize) -> T {
        sigmoid(self.score[v] + self.beta * T::from_count(overlap))
    }
}

/// `min(1, g_v (1 + beta * overlap))`.
impl<T: Scalar> FollowResponse<T> for ProductModel<T> {
    fn prob(&self, v: usize, overlap: usize) -> T {
        (self.susceptibility[v] * (T::one() + self.beta * T::from_count(overlap))).min(T::one())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_id: Option<String>,
    /// Policy length.
    pub interactions: usize,
    pub replications: usize,
    pub expected_target_follows: f64,
    pub standard_error: f64,
    pub per_target_frequency: BTreeMap<VertexId, f64>,
    pub seed: u64,
}

fn check_policy(graph: &SocialGraph, policy: &Policy) -> Result<()> {
    let mut seen = vec![false; graph.len()];
    for &v in policy.sequence() {
        if v >= graph.len() {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::DuplicateInPolicy(graph.id(v).to_string()));
        }
    }
    Ok(())
}

fn uniform(rng: &mut ChaCha8Rng, v: usize) -> f64 {
    // Each u64 occupies two 32-bit words.
    rng.set_word_pos(2 * v as u128);
    rng.random::<f64>()
}

#[derive(Clone)]
struct Tally {
    sum: u64,
    sum_sq: u64,
    hits: Vec<u64>,
}

impl Tally {
    fn new(k: usize) -> Self {
        Tally {
            sum: 0,
            sum_sq: 0,
            hits: vec![0; k],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        for (a, b) in self.hits.iter_mut().zip(other.hits) {
            *a += b;
        }
        self
    }
}

/// Simulates `policy` under any response model.
pub fn simulate_with<T: Scalar, R: FollowResponse<T>>(
    graph: &SocialGraph,
    policy: &Policy,
    response: &R,
    replications: usize,
    seed: u64,
) -> Result<SimulationReport> {
    check_policy(graph, policy)?;
    if replications == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    let targets = graph.targets();
    let mut target_slot = vec![usize::MAX; graph.len()];
    for (k, &t) in targets.iter().enumerate() {
        target_slot[t] = k;
    }
    let seq = policy.sequence();
    let base = ChaCha8Rng::seed_from_u64(seed);

    let tally = (0..replications as u64)
        .into_par_iter()
        .fold(
            || (Tally::new(targets.len()), vec![false; graph.len()]),
            |(mut tally, mut followed), r| {
                let mut rng = base.clone();
                rng.set_stream(r);
                let mut count = 0u64;
                for &v in seq {
                    let overlap = graph.overlap_of(v, &followed);
                    let p = response.prob(v, overlap).as_f64();
                    if uniform(&mut rng, v) < p {
                        followed[v] = true;
                        if target_slot[v] != usize::MAX {
                            tally.hits[target_slot[v]] += 1;
                            count += 1;
                        }
                    }
                }
                for &v in seq {
                    followed[v] = false;
                }
                tally.sum += count;
                tally.sum_sq += count * count;
                (tally, followed)
            },
        )
        .map(|(t, _)| t)
        .reduce(|| Tally::new(targets.len()), Tally::merge);

    let n = replications as f64;
    let mean = tally.sum as f64 / n;
    let standard_error = if replications > 1 {
        let var = (tally.sum_sq as f64 - n * mean * mean).max(0.0) / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let per_target_frequency = targets
        .iter()
        .zip(&tally.hits)
        .map(|(&t, &h)| (graph.id(t).clone(), h as f64 / n))
        .collect();
    Ok(SimulationReport {
        policy_id: None,
        interactions: policy.len(),
        replications,
        expected_target_follows: mean,
        standard_error,
        per_target_frequency,
        seed,
    })
}

/// Simulates `policy` under the logistic model.
pub fn simulate_policy<T: Scalar>(
    graph: &SocialGraph,
    policy: &Policy,
    coeffs: &LogisticCoefficients<T>,
    replications: usize,
    seed: u64,
) -> Result<SimulationReport> {
    let response = LogisticResponse::new(graph, coeffs)?;
    simulate_with(graph, policy, &response, replications, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactValue<T = f64> {
    pub expected_target_follows: T,
    /// Follow probability of each policy vertex, in policy order.
    pub probabilities: Vec<T>,
}

/// Expectation over all `2^|policy|` outcome vectors.
pub fn exact_policy_value<T: Scalar, R: FollowResponse<T>>(
    graph: &SocialGraph,
    policy: &Policy,
    response: &R,
) -> Result<ExactValue<T>> {
    check_policy(graph, policy)?;
    if policy.len() > EXACT_MAX_POLICY {
        return Err(Error::GuardExceeded {
            what: "exact evaluation policy length",
            limit: EXACT_MAX_POLICY,
            actual: policy.len(),
        });
    }
    let mut state = Exact {
        graph,
        seq: policy.sequence(),
        response,
        followed: vec![false; graph.len()],
        marginal: vec![T::zero(); policy.len()],
        expected: T::zero(),
    };
    state.walk(0, T::one(), 0);
    Ok(ExactValue {
        expected_target_follows: state.expected,
        probabilities: state.marginal,
    })
}

struct Exact<'a, T, R> {
    graph: &'a SocialGraph,
    seq: &'a [usize],
    response: &'a R,
    followed: Vec<bool>,
    marginal: Vec<T>,
    expected: T,
}

impl<T: Scalar, R: FollowResponse<T>> Exact<'_, T, R> {
    fn walk(&mut self, i: usize, weight: T, targets: usize) {
        if weight == T::zero() {
            return;
        }
        if i == self.seq.len() {
            self.expected += weight * T::from_count(targets);
            return;
        }
        let v = self.seq[i];
        let p = self.response.prob(v, self.graph.overlap_of(v, &self.followed));
        self.marginal[i] += weight * p;
        self.followed[v] = true;
        let hit = usize::from(self.graph.is_target(v));
        self.walk(i + 1, weight * p, targets + hit);
        self.followed[v] = false;
        self.walk(i + 1, weight * (T::one() - p), targets);
    }
}

fn mix_seed(seed: u64, k: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Simulates each named policy. With `common_random_numbers` every policy
/// uses `seed`; otherwise policy `k` uses a seed mixed from `seed` and `k`.
pub fn compare_policies<T: Scalar>(
    graph: &SocialGraph,
    policies: &[(String, Policy)],
    coeffs: &LogisticCoefficients<T>,
    replications: usize,
    seed: u64,
    common_random_numbers: bool,
) -> Result<Vec<SimulationReport>> {
    let response = LogisticResponse::new(graph, coeffs)?;
    policies
        .iter()
        .enumerate()
        .map(|(k, (name, policy))| {
            let s = if common_random_numbers { seed } else { mix_seed(seed, k) };
            let mut report = simulate_with(graph, policy, &response, replications, s)?;
            report.policy_id = Some(name.clone());
            Ok(report)
        })
        .collect()
}

/// CSV with columns `policy,interactions,replications,mean,standard_error,seed`, plus
/// `freq_<id>` per target when `per_target` is set.
pub fn write_reports_csv<W: Write>(
    reports: &[SimulationReport],
    writer: W,
    per_target: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let target_ids: Vec<VertexId> = reports
        .first()
        .map(|r| r.per_target_frequency.keys().cloned().collect())
        .unwrap_or_default();
    let mut header = vec![
        "policy".to_string(),
        "interactions".into(),
        "replications".into(),
        "mean".into(),
        "standard_error".into(),
        "seed".into(),
    ];
    if per_target {
        header.extend(target_ids.iter().map(|t| format!("freq_{t}")));
    }
    w.write_record(&header).map_err(csv_io)?;
    for r in reports {
        let mut row = vec![
            r.policy_id.clone().unwrap_or_default(),
            r.interactions.to_string(),
            r.replications.to_string(),
            r.expected_target_follows.to_string(),
            r.standard_error.to_string(),
            r.seed.to_string(),
        ];
        if per_target {
            row.extend(
                target_ids
                    .iter()
                    .map(|t| r.per_target_frequency.get(t).copied().unwrap_or(0.0).to_string()),
            );
        }
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexMeta;

    fn meta(target: bool) -> VertexMeta {
        VertexMeta {
            friend_count: 0,
            follower_count: 0,
            is_target: target,
        }
    }

    fn chain() -> SocialGraph {
        let mut b = SocialGraph::builder();
        b.vertex("u", meta(false)).unwrap();
        b.vertex("v", meta(true)).unwrap();
        b.edge("u", "v").unwrap();
        b.build().unwrap()
    }

    #[test]
    fn empty_policy() {
        let g = chain();
        let r = simulate_policy(&g, &Policy::empty(), &LogisticCoefficients::<f64>::default(), 100, 1).unwrap();
        assert_eq!(r.expected_target_follows, 0.0);
        assert_eq!(r.standard_error, 0.0);
    }

    #[test]
    fn isolated_target() {
        let mut b = SocialGraph::builder();
        b.vertex("t", meta(true)).unwrap();
        let g = b.build().unwrap();
        let p = Policy::from_ids(&g, ["t"]).unwrap();
        let r = simulate_policy(&g, &p, &LogisticCoefficients::<f64>::default(), 10_000, 5).unwrap();
        let exact = 1.0 / (1.0 + 2.49f64.exp());
        assert!((r.expected_target_follows - exact).abs() < 3.0 * r.standard_error);
        assert_eq!(r.per_target_frequency[&VertexId::from("t")], r.expected_target_follows);
    }

    #[test]
    fn chain_conditioning() {
        let g = chain();
        let p = Policy::from_ids(&g, ["u", "v"]).unwrap();
        let r = simulate_policy(&g, &p, &LogisticCoefficients::<f64>::default(), 10_000, 9).unwrap();
        let z = -2.49f64;
        let pu = sigmoid(z);
        let expect = pu * sigmoid(z + 0.28) + (1.0 - pu) * sigmoid(z);
        assert!((r.expected_target_follows - expect).abs() < 3.0 * r.standard_error);
    }

    #[test]
    fn deterministic_and_crn() {
        let g = chain();
        let p = Policy::from_ids(&g, ["u", "v"]).unwrap();
        let c = LogisticCoefficients::<f64>::default();
        let a = simulate_policy(&g, &p, &c, 2_000, 3).unwrap();
        let b = simulate_policy(&g, &p, &c, 2_000, 3).unwrap();
        assert_eq!(a, b);
        let pols = vec![("a".to_string(), p.clone()), ("b".to_string(), p.clone())];
        let crn = compare_policies(&g, &pols, &c, 2_000, 3, true).unwrap();
        assert_eq!(crn[0].expected_target_follows, crn[1].expected_target_follows);
        let ind = compare_policies(&g, &pols, &c, 2_000, 3, false).unwrap();
        assert_ne!(ind[0].seed, ind[1].seed);
    }

    #[test]
    fn exact_product_chain() {
        let g = chain();
        let m = ProductModel::<f64>::new(0.28, vec![0.5, 0.2]).unwrap();
        let fwd = exact_policy_value(&g, &Policy::from_ids(&g, ["u", "v"]).unwrap(), &m).unwrap();
        assert!((fwd.expected_target_follows - 0.228).abs() < 1e-15);
        assert!((fwd.probabilities[1] - 0.228).abs() < 1e-15);
        let back = exact_policy_value(&g, &Policy::from_ids(&g, ["v", "u"]).unwrap(), &m).unwrap();
        assert!((back.expected_target_follows - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_overlap_weight_is_order_free() {
        let g = chain();
        let c = LogisticCoefficients::<f64> {
            beta_overlap: 0.0,
            ..Default::default()
        };
        let resp = LogisticResponse::new(&g, &c).unwrap();
        let a = exact_policy_value(&g, &Policy::from_ids(&g, ["u", "v"]).unwrap(), &resp).unwrap();
        let b = exact_policy_value(&g, &Policy::from_ids(&g, ["v", "u"]).unwrap(), &resp).unwrap();
        assert!((a.expected_target_follows - b.expected_target_follows).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let g = chain();
        let p = Policy::from_ids(&g, ["u", "v"]).unwrap();
        let reports = compare_policies(
            &g,
            &[("ip".into(), p)],
            &LogisticCoefficients::<f64>::default(),
            10,
            1,
            true,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_reports_csv(&reports, &mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("policy,interactions,replications,mean,standard_error,seed,freq_v\nip,2,10,"));
    }
}
