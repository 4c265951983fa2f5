//! Trace encoding and log diagnostics for process mining.
//!
//! An [`EventLog`] is read from XES or CSV ([`ingest`]), turned into a
//! case-by-dimension [`FeatureMatrix`] by an [`EncodingSpec`] ([`encode`]),
//! and inspected with variant and dependency diagnostics ([`stats`],
//! [`flow`]).

pub mod encode;
pub mod flow;
pub mod ingest;
pub mod log;
pub mod stats;

pub use encode::{apply_encoding, EncodeError, EncodingSpec, FeatureMatrix, FilterPredicate};
pub use flow::{ConcurrencyRelation, DirectlyFollows, FlowError};
pub use ingest::{CsvError, CsvMapping, ValidationReport, XesError};
pub use log::{
    extract_variants, AttributeValue, Case, Event, EventLog, LogError, ValueKind, Variant,
    VariantTable,
};
pub use stats::{BalanceKind, BalanceStrategy, StatsError};
