use thiserror::Error;

use crate::geom::Point;

/// Errors raised by the exact kernel and the layers built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse rational {0:?}: expected reduced \"p/q\" with q > 0")]
    BadRational(String),
    #[error("carpet parameter a = {0} must be an odd integer >= 3")]
    BadCarpetParameter(u64),
    #[error("{0}")]
    BadArgument(String),
    #[error("address digit ({0}, {1}) is the removed middle")]
    MiddleAddress(u64, u64),
    #[error("address digit ({0}, {1}) is outside [0, a-1]")]
    DigitOutOfRange(u64, u64),
    #[error("level {level} is outside 1..={depth}")]
    LevelOutOfRange { level: u32, depth: u32 },
    #[error("start point {0} is not on the bottom edge of the unit square")]
    StartOffBoundary(Box<Point>),
    #[error("slope must be a non-negative rational; reflect the query first")]
    SlopeNotPositiveRational,
    #[error("slope {0} is not of the form p/q with p + q = a and gcd(p, q) = 1")]
    NotANewSlope(String),
    #[error("parity precondition fails: p, q and r must all be odd")]
    BadParity,
    #[error("slope {0} is not in the reduced slope set")]
    NotInReducedSet(String),
    #[error("direction is parallel to the wall through {0}")]
    DegenerateTangency(Box<Point>),
    #[error("{0} is not on the table boundary")]
    NotOnBoundary(Box<Point>),
    #[error("direction does not point into the table at {0}")]
    NotInward(Box<Point>),
    #[error("{0} is a vertex of a peripheral square; no orbit can start there")]
    SingularStart(Box<Point>),
    #[error("the unfolded path never leaves the cell within {0} traversals")]
    InsufficientTraversals(usize),
    #[error("reflected-unfolding meets a peripheral square at {0}")]
    UnfoldingBlocked(Box<Point>),
    #[error("cell orbit must be periodic to be unfolded")]
    NotPeriodic,
    #[error("initial conditions are at the same level {0}")]
    SameLevel(u32),
    #[error("base point {point} is not on the boundary at level {level}")]
    NotOnAllBoundaries { point: Box<Point>, level: u32 },
    #[error("sequence is not eventually constant and periodic")]
    NotEventuallyConstant,
    #[error("Euler characteristic {gauss_bonnet} from Gauss-Bonnet disagrees with the cell count {euler}")]
    InconsistentComplex { gauss_bonnet: i64, euler: i64 },
    #[error("genus formula evaluates to the non-integer {0}")]
    NonIntegerGenus(String),
    #[error("value does not fit the exhaustive oracle's fixed-width arithmetic")]
    OracleOverflow,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
