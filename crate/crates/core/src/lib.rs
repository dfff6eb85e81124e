//! Exploration of small-machine "software space": exhaustive enumeration of
//! Turing machines and turmites, output-frequency (CTM) tables, block
//! decomposition (BDM) complexity estimates, perturbation analysis and
//! runtime deep-field rendering.

pub mod error;
pub mod grid;
pub mod machine;
pub mod output;
pub mod enumeration;
pub mod runner;
pub mod ctm;
pub mod bdm;
pub mod aid;
pub mod render;

pub use error::{Error, Result};
pub use grid::Grid;
pub use machine::{Budget, Dimension, MachineRule, MachineSpace};
pub use output::OutputObject;
