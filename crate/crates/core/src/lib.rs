//! Quiver mutation, tagged triangulations of marked surfaces, and
//! construction and search of maximal green sequences.
//!
//! The crate is organised around four layers:
//!
//! * [`quiver`]: ice quivers, mutation, framing, green/red vertex states.
//! * [`surface`]: tagged triangulations, flips, and the signed adjacency
//!   quiver of a triangulation.
//! * [`construct`]: the staged construction of a maximal green sequence for
//!   the quiver of a triangulated surface.
//! * [`search`]: mutation-class enumeration and breadth-first search for
//!   shortest maximal green sequences, plus the catalog of exceptional
//!   mutation-finite quivers.

pub mod construct;
pub mod quiver;
pub mod search;
pub mod surface;

pub use quiver::{
    apply_green_sequence, apply_permutation, canonical_form, parse_quiver, serialize_quiver,
    GreenSequenceTrace, IceQuiver, QuiverError, Verdict, VertexId, VertexState,
};
