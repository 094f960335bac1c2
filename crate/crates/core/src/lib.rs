//! Wrapper-based genetic-algorithm feature selection for multiclass intrusion
//! detection.
//!
//! The pipeline has three phases: preprocessing ([`dataio`]), feature
//! selection with a genetic algorithm scored by Gaussian Naive Bayes
//! cross-validation accuracy ([`gaselect`]), and training/evaluation of
//! stacking and bagging ensembles ([`learners`], [`ensembles`],
//! [`evaluation`]). [`harness`] wires the phases together behind the `ids`
//! command-line tool.

pub mod dataio;
pub mod ensembles;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod gaselect;
pub mod harness;
pub mod learners;
pub mod seeds;
pub mod synthetic;

pub use error::{Error, Result};
