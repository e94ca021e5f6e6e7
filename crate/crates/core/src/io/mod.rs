//! Dataset ingestion and CSV output.

pub mod csv;
pub mod libsvm;

pub use self::csv::{format_float, MetricsWriter, ParticleWriter, TableRow, TableWriter};
pub use libsvm::{parse_libsvm, read_libsvm, to_libsvm, LibsvmDataset};
