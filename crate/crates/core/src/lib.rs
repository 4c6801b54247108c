//! Combinatorial knot Floer homology of the preimage of a knot in its
//! m-fold cyclic branched cover, computed from a grid diagram.

pub mod clifford;
pub mod complex;
pub mod cover;
pub mod error;
pub mod grid;
pub mod homology;
pub mod pipeline;
pub mod signs;
pub mod snf;
pub mod stab;
pub mod xor;

pub use complex::{ChainComplex, Generator, Rect, RectDomain};
pub use cover::{CoverDiagram, Cuts, Point};
pub use error::{Error, ErrorClass, Result};
pub use grid::{count_j, Axis, GridDiagram, HalfPoint, Marking, PointWeightSet, Rational};
