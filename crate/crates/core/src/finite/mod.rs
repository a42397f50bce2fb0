//! Finite fields, `SL(3, F_l)` and the projective planes it acts on.

pub mod field;
pub mod group;
pub mod plane;

pub use field::{is_prime, FieldElement, Prime, DEFAULT_MAX_PRIME};
pub use group::{
    enumerate_quotient, sl3_order, GeneratorSet, GeneratorTag, GroupElement, IntMatrix3, Quotient,
    DEFAULT_CLOSURE_CAP,
};
pub use plane::{
    act, orbit_count_product_action, perm_matrix, sign_isometry, ProjPoint, ProjectivePlane,
};
