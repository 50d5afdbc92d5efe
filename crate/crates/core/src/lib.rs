//! Upper bounds on the topological and restoration entropy of smooth flows
//! from continuous piecewise affine Riemannian metrics and Lyapunov-type
//! functions on triangulated boxes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certificate;
pub mod cpa;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod lyapopt;
pub mod metricopt;
pub mod symlin;
pub mod sysmodel;

pub use certificate::{verify_certificate, EntropyCertificate, VerificationReport};
pub use entropy::{bound_from_q, EntropyReport};
pub use error::{Error, Result};
pub use geometry::{AxisBox, GridSpec, Subdivision, Triangulation};
pub use symlin::{Mat, SymMatrix};
pub use sysmodel::{LorenzParams, ModelSpec, SystemModel};
