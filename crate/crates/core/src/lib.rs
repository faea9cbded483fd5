//! Batch gender inference for personal names written in Chinese characters
//! or Latin script.
//!
//! The pipeline for one name is [`script::detect_script`], then given-name
//! extraction in [`namesplit`], then a Naive Bayes posterior from
//! [`classifier`], then the four-way [`classifier::GenderLabel`]. Models are
//! built from name-frequency corpora in [`corpus`] and persisted with
//! [`cache`]. [`batch`] drives whole files and [`report`] turns the results
//! into charts and accuracy figures.

pub mod batch;
pub mod cache;
pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod namesplit;
pub mod report;
pub mod script;

pub use batch::{AggregateStats, NameRecord};
pub use classifier::{ClassifierConfig, GenderLabel, Models, Posterior, Prediction};
pub use corpus::{ChineseCharModel, EnglishNameModel};
pub use script::Script;
