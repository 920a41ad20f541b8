pub mod bs_g2;
pub mod bs_spin7;
pub mod error;
pub mod exterior;
pub mod immersions;
pub mod octonion;
pub mod report;
pub mod sampling;
pub mod stenzel;
pub mod tolerances;
pub mod verify;

pub use bs_g2::BsProfile;
pub use error::{Error, Result};
pub use exterior::{InnerProductSpace, KForm};
pub use immersions::{CatalogEntry, CatalogParams, Immersion};
pub use report::{DefectReport, Defects, SCHEMA_VERSION};
pub use stenzel::StenzelProfile;
pub use verify::{algebra_selftest, verify_g2, verify_spin7, verify_stenzel, G2Mode, SelftestSizes, StenzelJob, SurfaceJob};
