//! Cut-set capacities of wireless erasure networks on random geometric graphs.
//!
//! A wireless erasure network is modeled as a directed geometric graph over
//! points in the unit square: nodes are connected when their L∞ distance is
//! at most a transmission radius `r`, and each link `(u, v)` independently
//! erases transmitted symbols with probability `γ_uv`. Under a broadcast
//! constraint (each node sends one signal on all outgoing links) the value of
//! a cut with source side `V_S` is
//!
//! ```text
//! C(V_S) = Σ_{u ∈ V_S*} (1 − Π_{v : (u,v) crosses the cut} γ_uv)
//! ```
//!
//! where `V_S*` is the set of source-side nodes with at least one cut edge,
//! and the network capacity is the minimum of `C(V_S)` over all admissible
//! cuts. Relaxing the broadcast constraint (multicast) replaces the value by
//! `Σ (1 − γ_uv)` over the cut edges.
//!
//! The crate provides:
//!
//! - [`geometry`]: seeded point sampling, L∞ geometric graphs, the cell
//!   dissection of the unit square, per-cell occupancy ("niceness") checks
//!   and connectivity.
//! - [`cutset`]: cuts, erasure models, exact brute-force min-cut with a
//!   super-node reduction for multiple sources/destinations, sweep-cut
//!   families and a greedy upper-bound heuristic for large instances.
//! - [`bounds`]: closed-form lower bounds on broadcast and multicast cut-set
//!   capacity, the multicast gain and its scaling regimes, and the gain from
//!   random (variable) erasure probabilities.
//! - [`gridiso`]: the discrete isoperimetric inequality on square grids
//!   (with exhaustive verification for small grids) and the cell-coloring /
//!   recoloring argument that connects it to cut values.
//! - [`harness`]: a seeded, reproducible Monte Carlo experiment runner with
//!   CSV/JSON emission.
//! - [`instance`]: JSON instance files (points, radius, erasures,
//!   sources, destinations) shared by the CLI and the library.

pub mod bounds;
pub mod cutset;
pub mod error;
pub mod geometry;
pub mod gridiso;
pub mod harness;
pub mod instance;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
