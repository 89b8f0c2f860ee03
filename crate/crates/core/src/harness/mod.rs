//! Experiment plumbing: synthetic data generation, whole-pipeline
//! evaluation, and natural-language rendering of explanations.

pub mod evaluate;
pub mod generator;
pub mod verbalize;
