//! Planning and construction of layered linear network codes for
//! single-source acyclic networks.

pub mod bench;
pub mod builder;
pub mod code;
pub mod dag;
pub mod distributed;
pub mod error;
pub mod fan;
mod flow;
pub mod format;
pub mod gf;
pub mod instances;
pub mod mincut;
pub mod oracle;
pub mod paths;
pub mod two_layer;
pub mod two_max;

pub use code::{is_proper, Demand, HeightFunction, NetworkCode, PerformanceFunction};
pub use dag::{Arc, ArcId, CostFunction, Dag, NodeId, NodeSet};
pub use error::{Error, Result};
pub use gf::{CoeffVector, Field, Subspace};
