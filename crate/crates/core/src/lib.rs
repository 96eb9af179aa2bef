//! Planning interactions with a social network to maximize the expected
//! number of follows from a set of target users.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to one of them.

pub mod error;
pub mod follow;
pub mod graph;
pub mod ip;
pub mod policies;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
pub use graph::{Policy, SocialGraph, VertexId, VertexMeta};
pub use scalar::Scalar;

pub type ProductModelF64 = follow::ProductModel<f64>;
pub type ProductModelF32 = follow::ProductModel<f32>;
pub type LogisticCoefficientsF64 = follow::LogisticCoefficients<f64>;
pub type LogisticCoefficientsF32 = follow::LogisticCoefficients<f32>;
pub type MilpModelF64 = ip::MilpModel<f64>;
pub type MilpModelF32 = ip::MilpModel<f32>;
pub type SolutionF64 = ip::Solution<f64>;
pub type SolutionF32 = ip::Solution<f32>;
pub type FollowProbabilitiesF64 = follow::FollowProbabilities<f64>;
pub type FollowProbabilitiesF32 = follow::FollowProbabilities<f32>;
