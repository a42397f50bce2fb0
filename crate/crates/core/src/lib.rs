pub mod error;
pub mod finite;
pub mod matrix;

pub use error::{LabError, Result};
pub mod expander;
pub mod experiments;
pub mod mazur;
pub mod pipeline;
pub mod report;
