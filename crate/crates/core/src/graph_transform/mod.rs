//! Graph transforms: the scalar transform on a local unstable leaf and the
//! order-l jet transform over a dominated splitting.

pub mod jet;
pub mod leaf;
pub mod transform;

pub use jet::{jet_compose, jet_invert, scaled_norm, JetPoly, MonomialBasis, Poly, PolyMap};
pub use leaf::{graph_transform_step, interpolation_error_bound, iterate_to_fixed_point, FixedPointRun, LeafGraph};
pub use transform::{
    explicit_first_order, jet_graph_transform, q_norm_bound, verify_fiber_contraction, BlockLinearMap, ContractionConfig,
    ContractionReport, HypothesisReport, SyntheticCase, SyntheticFamily,
};
