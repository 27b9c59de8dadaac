//! Registries, the per-dimension verification driver, and report export.
mod driver;
mod registry;

pub use driver::{
    run_chart, verify_registered, ArrowRecord, ChartError, ChartReport, Elapsed, Node, PairRecord,
    Summary, MAX_DIM,
};
pub use registry::{
    ArrowEntry, CitationEntry, FamilyEntry, RegisteredArrow, Registries, RegistryError,
    SequenceFile, REGISTRY_DIR_VAR,
};
