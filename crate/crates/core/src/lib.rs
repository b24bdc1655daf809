//! Building and scoring infobox table-generation datasets.
//!
//! * [`model`]: cells, tables and the ` | ` / ` <> ` linearized format
//! * [`extract`]: infobox extraction from article HTML
//! * [`split`]: hash-based train/valid/test assignment
//! * [`emit`]: JSON Lines task files, prompts and image geometry
//! * [`metrics`]: ROUGE, clipped Table-F1 / Corpus-F1, paired bootstrap
//! * [`stats`]: corpus statistics
//!
//! Data-parallel loops go through [`par::Execution`]; the `parallel` feature
//! (default) backs them with rayon.

pub mod emit;
pub mod error;
pub mod extract;
pub mod metrics;
pub mod model;
pub mod par;
pub mod split;
pub mod stats;

pub use error::{Error, Result};
pub use extract::{ExtractionReport, InfoboxRecord};
pub use model::{Cell, InfoboxTable, ParseMode};
pub use par::Execution;
pub use split::SplitLabel;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
