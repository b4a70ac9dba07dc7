//! Simulates multi-generation population histories, builds kin and
//! kin-plus-homophily networks over the final cohorts, and measures how well
//! relatedness and trait similarity predict shared social contacts across a
//! range of fertilities.

pub mod analysis;
pub mod demography;
pub mod graph;
pub mod kinship;
pub mod runner;
pub mod seed;
pub mod socialnet;

pub use analysis::{AnalysisOptions, FigureTables, RunAnalysis};
pub use demography::{LibraryConfig, LibraryRun, SimConfig};
pub use socialnet::NetworkCaps;
