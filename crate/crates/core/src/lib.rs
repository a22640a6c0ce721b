//! Stability-number bounds for Paley graphs: Lovász theta, the exact
//! subgraph hierarchy and its vertex-transitive reduction, and rational
//! certificates for the cases where the hierarchy stalls.

pub mod gf;
pub mod graph;
pub mod linalg;
pub mod par;
pub mod conic;
pub mod theta;
pub mod esc;
pub mod hierarchy;
pub mod certify;
pub mod bounds;
