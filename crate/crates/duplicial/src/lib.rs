//! Exact-arithmetic kernel for planar binary trees and the algebraic
//! structures built on them: the duplicial operad, groups of tree-expanded
//! power series, the Tamari order with its Mobius function, pruning-style
//! Hopf coproducts, and an abstract Dyson-Schwinger recursion harness.
//!
//! All computation is exact over the rationals; nothing in the crate uses
//! floating point. Tree-indexed data structures iterate in a single canonical
//! order (the lexicographic order of tree literals) so that equal inputs
//! always produce byte-identical output.

pub mod catalog;
pub mod hopf;
pub mod dyson;
pub mod operad;
pub mod ring;
pub mod series;
pub mod tamari;
pub mod tree;
pub mod verify;

pub use ring::Coeff;
pub use series::{Flavor, PowerSeries, TreeSeries};
pub use tree::Tree;
