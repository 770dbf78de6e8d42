//! Symbolic calculus for edge shift spaces of finitely presented ultragraphs.
//!
//! An ultragraph is a directed graph whose edges may point at whole vertex
//! sets instead of single vertices. This crate realizes, with exact
//! arithmetic over ultimately periodic index sets:
//!
//! * the boolean algebra of vertex/edge sets ([`setcalc`]),
//! * finite presentations of (possibly infinite) ultragraphs together with
//!   their emitter analysis ([`ultragraph`]),
//! * the path and point calculus of the associated one-sided shift space
//!   ([`ultrapath`]),
//! * the clopen cylinder topology with a canonical disjoint normal form
//!   ([`topology`]),
//! * the shift map, local windows and graph conversions ([`dynamics`]),
//! * the partial action of the free group on edges ([`paction`]),
//! * the algebraic crossed product spanned by indicator functions and the
//!   generator-level verification of the defining relations ([`crossed`]),
//! * naive brute-force oracles used to cross-check the symbolic layer
//!   ([`oracle`]).
//!
//! Text formats for presentations, points, words and reports live in
//! [`syntax`] and [`files`]; canonical example presentations in [`presets`].

pub mod crossed;
pub mod dynamics;
pub mod files;
pub mod oracle;
pub mod paction;
pub mod presets;
pub mod setcalc;
pub mod syntax;
pub mod topology;
pub mod ultragraph;
pub mod ultrapath;

// pub use crossed::{CrossedElem, IndicatorCombo};
// pub use paction::{FWord, PartialAction};
pub use setcalc::{Cardinality, SetOp, UpSet, Universe};
pub use topology::{Clopen, Cylinder, Tail};
pub use ultragraph::{EdgeFamily, EdgeId, GSet, Ultragraph, UltragraphPresentation, VertexId};
pub use ultrapath::{Point, Ultrapath};
