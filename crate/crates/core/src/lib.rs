//! Moira: a shared knowledge base in Controlled English (CE), fed by people
//! typing ordinary sentences.
//!
//! - [`kernel`] holds the conceptual model, instances and facts;
//! - [`ce`] reads and writes CE;
//! - [`interpret`] turns free text into CE by bag-of-words matching;
//! - [`fusion`] runs forward-chaining rules and explains their conclusions;
//! - [`tasking`] turns inferences into sensing tasks and matches assets;
//! - [`gist`] renders short summaries for each role and device;
//! - [`protocol`] and [`hub`] carry the conversations between people and agents;
//! - [`persist`] saves and restores a knowledge base;
//! - [`report`] and [`stats`] summarise batches of interpretations.

pub mod bundled;
pub mod fusion;
pub mod gist;
pub mod hub;
pub mod ce;
pub mod interpret;
pub mod kernel;
pub mod persist;
pub mod protocol;
pub mod report;
pub mod stats;
pub mod tasking;

pub use stats::Summary;

/// Summaries of counts and scores.
pub type SummaryStats = Summary<f64>;
