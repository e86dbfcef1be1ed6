//! Classification of line segments in `S_{a,n}`: corner hits, avoidance,
//! and interior crossings, with two-tier certificates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::carpet::{CarpetParams, CellIndex, PeripheralSquare};
use crate::error::{Error, Result};
use crate::geom::{make_rational, solve_linear_diophantine, Direction, Point, Rational};
use crate::oracle::{chord_end, oracle_contacts, OracleContact};
use crate::slopes::{in_a_previous, slopes_b};
use crate::walk::{scan, ContactFeature, ScanOrder};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentQuery {
    pub start: Point,
    pub slope: Rational,
    pub params: CarpetParams,
}

/// The argument behind a depth-independent avoidance claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "argument", rename_all = "kebab-case")]
pub enum Argument {
    /// The segment is the bottom edge, below every square.
    BottomEdge,
    /// From the origin with slope in `A_{a-2}`: `(p+q)/a` is not an integer.
    Integrality { p_plus_q: u64, a: u64 },
    /// From `(r/2a^n, 0)` with slope in `B_a`: even left side, odd right side.
    /// Squares of levels `<= n` were checked exhaustively.
    Parity { n: u32, r: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tier", rename_all = "kebab-case")]
pub enum Certificate {
    TheoremBacked(Argument),
    ExhaustiveToDepth { depth: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "classification", rename_all = "kebab-case")]
pub enum SegmentClassification {
    AvoidsAll { certified: Certificate },
    HitsCorner { point: Point, level: u32, square: PeripheralSquare },
    EntersInterior { level: u32, square: PeripheralSquare, entry_point: Point },
}

impl SegmentClassification {
    pub fn label(&self) -> &'static str {
        match self {
            SegmentClassification::AvoidsAll { .. } => "avoids-all",
            SegmentClassification::HitsCorner { .. } => "hits-corner",
            SegmentClassification::EntersInterior { .. } => "enters-interior",
        }
    }
}

/// Writes `x` as `r / (2 a^n)` with `r` odd and `n` minimal, if possible.
pub fn odd_half_power(a: u64, x: &Rational) -> Option<(u32, u64)> {
    let mut power = BigInt::one();
    for n in 0..=40u32 {
        let scaled = x.mul_int(&(&power * 2u32));
        if scaled.is_integer() {
            let r = scaled.numer();
            if r.is_odd() && r.is_positive() {
                return u64::try_from(r.clone()).ok().map(|r| (n, r));
            }
            return None;
        }
        power *= a;
    }
    None
}

fn avoidance_certificate(q: &SegmentQuery) -> Certificate {
    let a = q.params.a;
    if q.slope.is_zero() {
        return Certificate::TheoremBacked(Argument::BottomEdge);
    }
    if q.start == Point::origin() && in_a_previous(a, &q.slope) {
        let p_plus_q = q.slope.numer() + q.slope.denom();
        return Certificate::TheoremBacked(Argument::Integrality { p_plus_q: u64::try_from(p_plus_q).unwrap_or(u64::MAX), a });
    }
    let in_b = slopes_b(a).map(|b| b.contains(&q.slope)).unwrap_or(false);
    if in_b {
        if let Some((n, r)) = odd_half_power(a, &q.start.x) {
            if n <= q.params.depth {
                return Certificate::TheoremBacked(Argument::Parity { n, r });
            }
        }
    }
    Certificate::ExhaustiveToDepth { depth: q.params.depth }
}

fn check_query(q: &SegmentQuery) -> Result<(Direction, Rational)> {
    let (zero, one) = (Rational::zero(), Rational::one());
    if !q.start.y.is_zero() || q.start.x < zero || q.start.x > one {
        return Err(Error::StartOffBoundary(Box::new(q.start.clone())));
    }
    if q.slope.is_negative() {
        return Err(Error::SlopeNotPositiveRational);
    }
    let dir = Direction::from_slope(&q.slope);
    let end = chord_end(&q.start, &dir).ok_or_else(|| Error::NotInward(Box::new(q.start.clone())))?;
    Ok((dir, end))
}

/// First interference of the chord from `q.start` with slope `q.slope`:
/// coarsest level first, then smallest parameter. A first contact at a
/// vertex is a corner hit even if the line goes on into the square.
pub fn classify_segment(q: &SegmentQuery) -> Result<SegmentClassification> {
    let (dir, end) = check_query(q)?;
    if q.slope.is_zero() {
        return Ok(SegmentClassification::AvoidsAll { certified: avoidance_certificate(q) });
    }
    let a = q.params.a;
    let hit = scan(a, CellIndex::ROOT, q.params.depth, &q.start, &dir, &end, ScanOrder::LowestLevel);
    Ok(match hit {
        None => SegmentClassification::AvoidsAll { certified: avoidance_certificate(q) },
        Some(c) if c.feature == ContactFeature::Corner => {
            SegmentClassification::HitsCorner { point: c.point, level: c.square.level, square: c.square }
        }
        Some(c) => SegmentClassification::EntersInterior { level: c.square.level, square: c.square, entry_point: c.point },
    })
}

/// The same classification computed by the exhaustive oracle; certificates
/// are always `ExhaustiveToDepth`.
pub fn classify_segment_exhaustive(q: &SegmentQuery) -> Result<SegmentClassification> {
    let (dir, end) = check_query(q)?;
    let first = oracle_contacts(&q.params, &q.start, &dir, &Rational::zero(), &end, 1..=q.params.depth)?.into_iter().next();
    Ok(match first {
        None => SegmentClassification::AvoidsAll { certified: Certificate::ExhaustiveToDepth { depth: q.params.depth } },
        Some(c) if c.kind == crate::oracle::OracleKind::Vertex => {
            SegmentClassification::HitsCorner { point: c.point, level: c.level, square: c.square }
        }
        Some(c) => SegmentClassification::EntersInterior { level: c.level, square: c.square, entry_point: c.point },
    })
}

/// Output of the corner solver for a new slope `p/q`, `p + q = a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerHit {
    pub a: u64,
    pub slope: Rational,
    /// Least non-negative `u` with `a u + q r = -(a+1)/2`.
    #[serde(with = "crate::geom::decimal")]
    pub u: BigInt,
    #[serde(with = "crate::geom::decimal")]
    pub r: BigInt,
    #[serde(with = "crate::geom::decimal")]
    pub v: BigInt,
    /// Minimal level of a square whose inferior-right corner is on the line.
    pub level: u32,
    pub corner: Point,
    pub square: PeripheralSquare,
}

impl CornerHit {
    /// The same corner pattern `k - level` levels deeper, scaled towards the
    /// origin by `a^-(k - level)`. `None` for `k < level`.
    pub fn at_level(&self, k: u32) -> Option<(Point, PeripheralSquare)> {
        if k < self.level {
            return None;
        }
        let shrink = Rational::inv_pow(self.a, k - self.level);
        let parent = self.square.address.index(self.a);
        let deeper = CellIndex { level: k - 1, ..parent };
        Some((self.corner.scale(&shrink), PeripheralSquare::in_parent(self.a, deeper)))
    }
}

/// Solves `a u + q r = -(a+1)/2` for the least `u` in `0..q`, then places
/// the inferior-right corner `a^-n (u + (a+1)/2a, v + (a-1)/2a)` at the
/// smallest `n` with `u, v < a^n`.
pub fn corner_hit_solver(a: u64, slope: &Rational) -> Result<CornerHit> {
    crate::carpet::check_a(a)?;
    let not_new = || Error::NotANewSlope(slope.to_string());
    let (p, q) = (slope.numer().clone(), slope.denom().clone());
    let big_a = BigInt::from(a);
    if p < BigInt::one() || &p + &q != big_a || p >= q {
        return Err(not_new());
    }
    let half = BigInt::from(a.div_ceil(2));
    let sol = solve_linear_diophantine(&big_a, &q, &-&half);
    let (u, r) = sol.with_least_first().ok_or_else(not_new)?;
    // v = ((a+1) + 2 a u) / (2 q) - (u + 1); the division is exact
    let num = BigInt::from(a + 1) + BigInt::from(2 * a) * &u;
    let den = BigInt::from(2u32) * &q;
    if !num.is_multiple_of(&den) {
        return Err(not_new());
    }
    let v = num / den - (&u + 1u32);
    if v.is_negative() {
        return Err(not_new());
    }
    let mut n = 0u32;
    let mut power = BigInt::one();
    while u >= power || v >= power {
        power *= a;
        n += 1;
    }
    let two_a = BigInt::from(2 * a);
    let corner = Point::new(
        make_rational(&u * &two_a + (a + 1), &two_a * &power)?,
        make_rational(&v * &two_a + (a - 1), &two_a * &power)?,
    );
    let to_u64 = |x: &BigInt| u64::try_from(x.clone()).map_err(|_| not_new());
    let parent = CellIndex { level: n, ix: to_u64(&u)?, iy: to_u64(&v)? };
    Ok(CornerHit { a, slope: slope.clone(), u, r, v, level: n + 1, corner, square: PeripheralSquare::in_parent(a, parent) })
}

/// Whether `(u/a^l, v/a^m)` lies on `y = (p/q)(x - r/(2a^n))`, decided by
/// the integer identity `2 q v a^(n+l) = p a^m (2 u a^n - r a^l)`.
#[allow(clippy::too_many_arguments)]
pub fn parity_point_on_line(a: u64, p: u64, q: u64, n: u32, r: u64, u: u64, v: u64, l: u32, m: u32) -> bool {
    let a = BigInt::from(a);
    let lhs = BigInt::from(2 * q) * BigInt::from(v) * a.pow(n + l);
    let rhs = BigInt::from(p) * a.pow(m) * (BigInt::from(2 * u) * a.pow(n) - BigInt::from(r) * a.pow(l));
    lhs == rhs
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BAvoidance {
    pub certificate: Certificate,
    pub depth: u32,
    /// Contacts with squares of side `< a^-n`; empty when the claim holds.
    pub fine_contacts: Vec<Point>,
    /// Contacts with squares of side `>= a^-n`, reported as found.
    pub coarse_contacts: Vec<Point>,
}

impl BAvoidance {
    pub fn confirmed(&self) -> bool {
        self.fine_contacts.is_empty()
    }
}

/// Parity certificate for the segment from `(r/2a^n, 0)` with slope
/// `p/q` in `B_a`, plus an exhaustive check of every square of side
/// `< a^-n` up to `depth`.
pub fn verify_b_avoidance(a: u64, slope: &Rational, n: u32, r: u64, depth: u32) -> Result<BAvoidance> {
    crate::carpet::check_a(a)?;
    let (p, q) = (slope.numer(), slope.denom());
    if p.is_even() || q.is_even() || r.is_multiple_of(2) {
        return Err(Error::BadParity);
    }
    if !slopes_b(a)?.contains(slope) {
        return Err(Error::NotInReducedSet(slope.to_string()));
    }
    let two_an = 2u128 * (a as u128).pow(n);
    if (r as u128) >= two_an {
        return Err(Error::BadArgument(format!("r = {r} must be below 2 a^n = {two_an}")));
    }
    let params = CarpetParams::new(a, depth)?;
    let start = Point::new(make_rational(r, BigInt::from(two_an))?, Rational::zero());
    let dir = Direction::from_slope(slope);
    let end = chord_end(&start, &dir).ok_or_else(|| Error::NotInward(Box::new(start.clone())))?;
    let points = |v: Vec<OracleContact>| v.into_iter().map(|c| c.point).collect::<Vec<_>>();
    let fine = oracle_contacts(&params, &start, &dir, &Rational::zero(), &end, n + 1..=depth)?;
    let coarse = if n >= 1 { oracle_contacts(&params, &start, &dir, &Rational::zero(), &end, 1..=n)? } else { Vec::new() };
    Ok(BAvoidance {
        certificate: Certificate::TheoremBacked(Argument::Parity { n, r }),
        depth,
        fine_contacts: points(fine),
        coarse_contacts: points(coarse),
    })
}

/// Integrality certificate that `y = (p/q) x` meets no inferior-right
/// (and by symmetry no superior-left) corner, for `p/q` in `A_{a-2}`.
pub fn verify_a_avoidance_proof(a: u64, slope: &Rational) -> Result<Certificate> {
    crate::carpet::check_a(a)?;
    if !in_a_previous(a, slope) {
        return Err(Error::NotInReducedSet(slope.to_string()));
    }
    let p_plus_q = u64::try_from(slope.numer() + slope.denom()).expect("small slope");
    // p + q <= a - 2 < a, so (p + q)/a is never an integer
    debug_assert!(p_plus_q < a);
    Ok(Certificate::TheoremBacked(Argument::Integrality { p_plus_q, a }))
}
