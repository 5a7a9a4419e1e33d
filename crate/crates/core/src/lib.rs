pub mod baselines;
pub mod benchmarks;
pub mod cli;
pub mod confidence;
pub mod domain;
pub mod error;
pub mod gp;
pub mod harness;
pub mod msafeopt;
