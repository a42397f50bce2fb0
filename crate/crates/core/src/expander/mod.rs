//! Expander graphs from `SL(3, F_l)` quotients and the concentration machinery around them.

pub mod cheeger;
pub mod concentration;
pub mod graph;
pub mod kazhdan;

pub use cheeger::{
    adjacency_spectrum, cheeger_exact, cheeger_spectral, Expansion, ExpansionKind, SpectralReport,
};
pub use concentration::{
    coarea_check, concentration_banach, concentration_l1, concentration_median, orbit_cloud,
    BanachPointCloud, BanachReport, CoareaCheck, ConcentrationCheck, MedianCheck, RadiusStatus,
};
pub use graph::{cayley_graph, cayley_graph_with, Graph};
pub use kazhdan::{
    invariant_vector, kazhdan_constant, orbit_average, verify_kazhdan, InvariantReport,
    KazhdanReport, Operator, Representation,
};
