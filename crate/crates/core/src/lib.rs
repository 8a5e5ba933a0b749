//! The alpha power Harris–G family of lifetime distributions and its Burr XII
//! member: evaluation, properties, maximum likelihood, goodness of fit and
//! simulation.

pub mod aphbxii;
pub mod cli;
pub mod data;
pub mod error;
pub mod estimation;
pub mod family;
pub mod gof;
pub mod montecarlo;
pub mod numeric;
pub mod optimize;
pub mod properties;
pub mod quadrature;

pub use aphbxii::{Aphbxii, BurrXii, QuantileSummary};
pub use data::{Dataset, DescriptiveStats};
pub use error::{Error, Result};
pub use estimation::{FitConfig, FitResult, ModelKind};
pub use family::{AphG, Baseline, FamilyParams};
pub use gof::{EdfVariant, GofReport};
pub use montecarlo::{McConfig, McResult};
