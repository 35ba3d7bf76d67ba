//! Combinatorial engine for disentangling several knotted cables.
//!
//! * [`diagram`]: the configuration graph, its invariants and the MCD text format.
//! * [`analysis`]: trivial/non-trivial crossing classification and target queries.
//! * [`moves`]: Reidemeister, Node Deletion and Cable Extraction rewrites.
//! * [`planner`]: the disentangling loop, rollout traces and tier statistics.
//! * [`corpus`]: knot generators, random instances and a brute-force oracle.
//! * [`cli`]: the `cablegraph` command line.

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod diagram;
pub mod moves;
pub mod planner;
