//! Deterministic numerical primitives shared by the estimators and the
//! simulation harness.

mod normal;
mod rng;
mod root;

pub use normal::{normal_cdf, normal_quantile};
pub use rng::{derive_stream, RandomStream};
pub use root::{find_root_increasing, BRACKET_EXPANSIONS};
