//! Exact billiards on prefractal Sierpinski carpets.

pub mod billiard;
pub mod carpet;
pub mod compat;
pub mod error;
pub mod geom;
pub mod oracle;
pub mod segment;
pub mod slopes;
pub mod suites;
pub mod surface;
pub mod svg;
pub mod walk;
pub mod wire;

pub use carpet::{CarpetParams, CellAddress, PeripheralSquare, PointClass};
pub use error::{Error, Result};
pub use geom::{Direction, Point, Rational};
