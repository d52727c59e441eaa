//! Binary shortened projective Reed-Muller codes as PIR codes.
//!
//! The crate builds the codes and their disjoint recovery sets, shortens them
//! to any dimension, certifies block-length bounds and runs private retrieval
//! over simulated coded servers.

pub mod bounds;
pub mod error;
pub mod gf2;
pub mod pirsim;
pub mod prm;
pub mod shorten;
pub mod subsets;
pub mod verify;

pub use bounds::{best_code, lb_systematic, BoundReport};
pub use error::{Error, Result};
pub use gf2::Gf2Matrix;
pub use pirsim::{
    execute, make_query_plan, privacy_audit, setup, ClientKind, QueryPlan, ServerArray,
};
pub use prm::{build_prm, prm_params, CodeDescriptor, CodeSpec, PirCode};
pub use shorten::{
    arbitrary_shorten, build_sprm, puncture, shortening_plan, RhoDecomposition, ShorteningPlan,
};
pub use subsets::SubsetMask;
