//! Computational engine for the achievable rate region of the broadcast
//! channel with cognitive relays: channel and distribution models,
//! information measures, the inequality systems of the region and their
//! projections, a small-blocklength coding simulator, and message-plan
//! graphs.
//!
//! Core numerics are generic over the scalar type through [`real::Real`]
//! (`f32` or `f64`); the aliases below fix the common concrete choices.
//! The simulator and interchange formats are `f64` only.

pub mod channel;
pub mod dist;
pub mod error;
pub mod info;
pub mod io;
pub mod joint;
pub mod linsys;
pub mod maccm;
pub mod region;
pub mod sim;
pub mod tensor;
pub mod variable;

mod real;

pub use error::{Error, Result};
pub use real::Real;

pub use channel::{Alphabet, ChannelSpec, Receiver};
pub use dist::{AuxSizes, FactoredDistribution};
pub use info::{cond_mutual_info, entropy};
pub use joint::JointTensor;
pub use linsys::{LinearConstraint, LinearSystem};
pub use maccm::{bccr_graph, build_plan, Digraph, MessageLabel, NetworkSpec, PlanGraph};
pub use region::{
    build_system, build_system_cm, build_system_nocm, compute_profile, hk_reduction,
    jiang_reduction, marton_reduction, membership, rate_region, region_boundary, BoundaryPoint,
    MutualInfoProfile, RatePoint, Variant,
};
pub use sim::{
    generate_codebooks, marton_encode, run_experiment, transmit_and_decode, CodebookSet,
    SimConfig, SimReport,
};
pub use tensor::Tensor;
pub use variable::VariableId;

/// Default-precision concrete types.
pub type ChannelSpec64 = channel::ChannelSpec<f64>;
pub type FactoredDistribution64 = dist::FactoredDistribution<f64>;
pub type JointTensor64 = joint::JointTensor<f64>;
pub type LinearSystem64 = linsys::LinearSystem<f64>;
pub type MutualInfoProfile64 = region::MutualInfoProfile<f64>;
pub type RatePoint64 = region::RatePoint<f64>;

/// Single-precision concrete types.
pub type ChannelSpec32 = channel::ChannelSpec<f32>;
pub type FactoredDistribution32 = dist::FactoredDistribution<f32>;
pub type JointTensor32 = joint::JointTensor<f32>;
pub type LinearSystem32 = linsys::LinearSystem<f32>;
pub type MutualInfoProfile32 = region::MutualInfoProfile<f32>;
pub type RatePoint32 = region::RatePoint<f32>;
