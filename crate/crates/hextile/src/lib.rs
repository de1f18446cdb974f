//! Modular synthesis of hexagonal phased arrays clustered into diamond
//! (lozenge) tiles.
//!
//! The crate covers the full pipeline:
//!
//! * [`lattice`] — hexagonal aperture geometry, element positions, boundary
//!   heights and vertex depths;
//! * [`tiling`] — complete diamond tilings, height fields, and the bijective
//!   integer tiling-word encoding;
//! * [`enumerate`] — exact solution-space cardinality and exhaustive
//!   generation of every tiling in word order;
//! * [`pattern`] — sub-array excitation mapping, array-factor evaluation in
//!   (u, v) space, mask-violation cost and radiation metrics;
//! * [`iga`] — integer-coded genetic search over tiling words for apertures
//!   too large to enumerate;
//! * [`synth`] — end-to-end enumerative/stochastic design drivers and
//!   solution records;
//! * [`config`] / [`formats`] — run configuration and the plain-text file
//!   formats used by the `hextile` command-line tool.

pub mod config;
pub mod enumerate;
pub mod formats;
pub mod iga;
pub mod lattice;
pub mod pattern;
pub mod synth;
pub mod tiling;

pub use lattice::{BoundaryHeights, HexAperture, LatticeError, OrientedEdge, Pointing, Triangle};
pub use tiling::{HeightField, Orientation, Tile, Tiling, TilingError, TilingWord};
