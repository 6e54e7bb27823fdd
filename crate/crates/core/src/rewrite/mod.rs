//! Semantics-preserving rewrites of einsum expressions.
//!
//! Every rule is a pure function from a tree to a tree. Positions are 0-based
//! throughout this module; [`Rewrite::parse`] accepts the 1-based form used on
//! the command line.

mod delta;
mod distribute;
mod nesting;
mod rename;
mod rules;
mod simplify;

pub use delta::{delta_merge, delta_split, general_denest_via_deltas, substitute_delta, Keep};
pub use distribute::{distribute, factor};
pub use nesting::{
    apply_contraction_path, build_index_symbol_graph, denest_fully, derive_symbol_map,
    general_denest, general_denest_at, restricted_denest, restricted_denest_at, restricted_nest,
    ContractionPath, IndexSymbolGraph, SymbolMap, UnionFind, Vertex,
};
pub use rename::{alpha_equivalent, canonicalize, permute_args, rename_symbols, tidy_symbols};
pub use rules::{apply_rewrite, Rewrite, RULE_NAMES};
pub use simplify::{
    add_neutral_ones, drop_neutral_ones, eliminate_identity, normalize,
    remove_deltas_and_constants, vectorize_constant,
};
