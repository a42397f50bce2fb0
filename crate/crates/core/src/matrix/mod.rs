//! Dense complex matrices and norm services.

pub mod columns;
pub mod dense;
pub mod norms;
pub mod random;

pub use columns::{
    column_inequality_check, column_ratio, column_ratio_search, InequalityCheck, RatioSearch, Variant,
};
pub use dense::{DenseMatrix, Svd, C64};
pub use norms::{
    opnorm, opnorm_value, regular_norm, schatten_norm, vec_norm, NormIndex, NormReport,
    SchattenOrder,
};
pub use random::{gaussian_matrix, haar_unitary, rng_from_seed, LabRng};
