//! Measurement machinery for the cultural competence of text-to-image models.
//!
//! * [`kernels`] and [`vendi`]: composite geo kernels and quality-weighted,
//!   size-normalized Vendi diversity.
//! * [`extraction`]: bounded-hop artifact extraction over a knowledge-base dump,
//!   plus refinement, popularity ranking and prompt rendering.
//! * [`pipeline`]: prompt/seed plans, image mapping, filtering, batch scoring
//!   and aggregation.
//! * [`stats`]: Pearson correlation and rater agreement statistics.
//! * [`clients`]: pluggable JSON clients for the external models.

pub mod clients;
pub mod concept;
pub mod extraction;
pub mod geo;
pub mod item;
pub mod kernels;
pub mod pipeline;
pub mod stats;
pub mod tablecheck;
pub mod vendi;

pub use concept::{ArtSubkind, Concept};
pub use geo::{Continent, CountryTable};
pub use item::MappedItem;
pub use kernels::{build_kernel_matrix, GeoLevel, KernelConfig, KernelMatrix, KernelPreset};
pub use vendi::{cultural_diversity, DiversityResult, EigenSpectrum, QualityScore};
