use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SocialGraph;
use crate::scalar::Scalar;

/// Coefficients of the logistic follow model. Features are the overlap and
/// `log10(count + 1)` of the target's friend and follower counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LogisticCoefficients<T = f64> {
    pub intercept: T,
    pub beta_overlap: T,
    pub beta_log_friend: T,
    pub beta_log_follower: T,
}

impl<T: Scalar> Default for LogisticCoefficients<T> {
    fn default() -> Self {
        LogisticCoefficients {
            intercept: T::lit(-2.49),
            beta_overlap: T::lit(0.28),
            beta_log_friend: T::lit(0.45),
            beta_log_follower: T::lit(-0.63),
        }
    }
}

impl<T: Scalar> LogisticCoefficients<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.intercept,
            self.beta_overlap,
            self.beta_log_friend,
            self.beta_log_follower,
        ];
        if all.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(format!("logistic coefficients {self:?}")))
        }
    }

    /// Linear score of the vertex features, without the overlap term.
    pub fn feature_score(&self, friend_count: u64, follower_count: u64) -> T {
        let lf = T::lit((friend_count as f64 + 1.0).log10());
        let lo = T::lit((follower_count as f64 + 1.0).log10());
        self.intercept + self.beta_log_friend * lf + self.beta_log_follower * lo
    }
}

/// Zero-overlap follow probability of the product-form model,
/// `exp(intercept + b_friend log10(d_in + 1) + b_follower log10(d_out + 1))`,
/// kept strictly inside (0, 1).
pub fn susceptibility<T: Scalar>(
    friend_count: u64,
    follower_count: u64,
    coeffs: &LogisticCoefficients<T>,
) -> Result<T> {
    let g = coeffs.feature_score(friend_count, follower_count).exp();
    if !g.is_finite() {
        return Err(Error::NonFinite(format!(
            "susceptibility for counts ({friend_count}, {follower_count})"
        )));
    }
    let ceiling = T::one() - T::epsilon();
    Ok(g.max(T::min_positive_value()).min(ceiling))
}

/// Numerically stable logistic function.
pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Follow probability under the full logistic model.
pub fn logistic_follow_prob<T: Scalar>(
    overlap: usize,
    friend_count: u64,
    follower_count: u64,
    coeffs: &LogisticCoefficients<T>,
) -> T {
    let z = coeffs.feature_score(friend_count, follower_count)
        + coeffs.beta_overlap * T::from_count(overlap);
    sigmoid(z)
}

/// Susceptibility of every vertex of `graph`, indexed like the graph.
pub fn graph_susceptibilities<T: Scalar>(
    graph: &SocialGraph,
    coeffs: &LogisticCoefficients<T>,
) -> Result<Vec<T>> {
    (0..graph.len())
        .map(|v| {
            let m = graph.meta(v);
            susceptibility(m.friend_count, m.follower_count, coeffs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn defaults() {
        let c = LogisticCoefficients::<f64>::default();
        assert_eq!(
            (c.intercept, c.beta_overlap, c.beta_log_friend, c.beta_log_follower),
            (-2.49, 0.28, 0.45, -0.63)
        );
    }

    #[test]
    fn zero_counts_give_exp_intercept() {
        let c = LogisticCoefficients::<f64>::default();
        let g: f64 = susceptibility(0, 0, &c).unwrap();
        assert!((g - (-2.49f64).exp()).abs() < 1e-15);
        assert!((g - 0.082910).abs() < 5e-6);
    }

    #[test]
    fn published_target_susceptibilities() {
        let c = LogisticCoefficients::<f64>::default();
        let trump: f64 = susceptibility(45, 49_300_000, &c).unwrap();
        assert!(rel(trump, 0.0014) < 0.05, "{trump}");
        let emma: f64 = susceptibility(383, 28_800_000, &c).unwrap();
        assert!(rel(emma, 0.0024) < 0.10, "{emma}");
    }

    #[test]
    fn logistic_at_zero() {
        let c = LogisticCoefficients::<f64>::default();
        let p: f64 = logistic_follow_prob(0, 0, 0, &c);
        assert!((p - 1.0 / (1.0 + 2.49f64.exp())).abs() < 1e-15);
        assert!((p - 0.076562).abs() < 5e-6);
    }

    #[test]
    fn one_overlap_multiplies_odds_by_exp_beta() {
        let c = LogisticCoefficients::<f64>::default();
        let odds = |p: f64| p / (1.0 - p);
        let p0 = logistic_follow_prob(0, 120, 3000, &c);
        let p1 = logistic_follow_prob(1, 120, 3000, &c);
        assert!((odds(p1) / odds(p0) - 0.28f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn logistic_close_to_product_form_for_small_probabilities() {
        let c = LogisticCoefficients::<f64>::default();
        let p: f64 = logistic_follow_prob(0, 45, 49_300_000, &c);
        let g: f64 = susceptibility(45, 49_300_000, &c).unwrap();
        assert!(rel(p, g) < 0.01);
    }

    #[test]
    fn monotone_in_features() {
        let c = LogisticCoefficients::<f64>::default();
        let mut last = 0.0;
        for k in 0..10 {
            let p = logistic_follow_prob(k, 100, 1000, &c);
            assert!(p > last);
            last = p;
        }
        let g = |fr, fo| susceptibility::<f64>(fr, fo, &c).unwrap();
        assert!(g(200, 1000) > g(100, 1000));
        assert!(g(100, 2000) < g(100, 1000));
    }

    #[test]
    fn clamped_and_non_finite() {
        let big = LogisticCoefficients {
            intercept: 5.0f64,
            ..Default::default()
        };
        let g = susceptibility(0, 0, &big).unwrap();
        assert!(g < 1.0 && g > 0.99);
        let bad = LogisticCoefficients {
            intercept: f64::INFINITY,
            ..Default::default()
        };
        assert!(susceptibility(0, 0, &bad).is_err());
        assert!(bad.validate().is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let c = LogisticCoefficients::<f32>::default();
        let g = susceptibility(45, 49_300_000, &c).unwrap();
        assert!((g - 0.0014).abs() / 0.0014 < 0.05);
    }
}
