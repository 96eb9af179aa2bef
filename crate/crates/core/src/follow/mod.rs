//! Follow-probability models: the logistic model, its product-form
//! linearization, and exact evaluators on DAGs.

mod delta;
mod evaluate;
mod logistic;

pub use delta::{coefficient_triangle, delta_table, DeltaTable, MAX_DELTA_ORDER};
pub use evaluate::{
    dag_follow_probs_general, dag_follow_probs_linear, expected_follows, path_sum_probs,
    FollowProbabilities, ProductModel, MAX_GENERAL_PARENTS,
};
pub use logistic::{
    graph_susceptibilities, logistic_follow_prob, sigmoid, susceptibility, LogisticCoefficients,
};
