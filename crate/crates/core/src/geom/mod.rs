//! Exact planar primitives: rationals, points, primitive directions,
//! axis-aligned walls and the linear Diophantine solver.

mod diophantine;
mod rational;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serde adapter writing a big integer as its decimal string.
pub mod decimal {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub use diophantine::{solve_linear_diophantine, DiophantineSolution};
pub use rational::{make_rational, Rational};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(from = "(Rational, Rational)", into = "(Rational, Rational)")]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn frac(xn: i64, xd: i64, yn: i64, yd: i64) -> Self {
        Point::new(Rational::frac(xn, xd), Rational::frac(yn, yd))
    }

    pub fn origin() -> Self {
        Point::default()
    }

    /// `self + t * dir`.
    pub fn advance(&self, t: &Rational, dir: &Direction) -> Point {
        Point { x: &self.x + t.mul_int(&dir.dx), y: &self.y + t.mul_int(&dir.dy) }
    }

    pub fn scale(&self, k: &Rational) -> Point {
        Point::new(&self.x * k, &self.y * k)
    }

    pub fn translate(&self, dx: &Rational, dy: &Rational) -> Point {
        Point::new(&self.x + dx, &self.y + dy)
    }
}

impl From<(Rational, Rational)> for Point {
    fn from((x, y): (Rational, Rational)) -> Self {
        Point { x, y }
    }
}

impl From<Point> for (Rational, Rational) {
    fn from(p: Point) -> Self {
        (p.x, p.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Primitive integer direction vector `(dx, dy)`, never `(0, 0)`.
///
/// On the wire a direction is a JSON pair of integers `[dx, dy]`; components
/// must fit in an `i64` there.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction {
    dx: BigInt,
    dy: BigInt,
}

impl Direction {
    /// Reduces `(dx, dy)` to its primitive representative.
    pub fn new(dx: impl Into<BigInt>, dy: impl Into<BigInt>) -> Result<Self> {
        let (dx, dy) = (dx.into(), dy.into());
        if dx.is_zero() && dy.is_zero() {
            return Err(Error::BadArgument("direction (0, 0)".into()));
        }
        let g = dx.gcd(&dy);
        Ok(Direction { dx: dx / &g, dy: dy / &g })
    }

    /// The rightward direction of slope `p/q`, i.e. `(q, p)`.
    pub fn from_slope(slope: &Rational) -> Self {
        Direction { dx: slope.denom().clone(), dy: slope.numer().clone() }
    }

    pub fn vertical() -> Self {
        Direction { dx: BigInt::zero(), dy: BigInt::one() }
    }

    pub fn dx(&self) -> &BigInt {
        &self.dx
    }

    pub fn dy(&self) -> &BigInt {
        &self.dy
    }

    /// `dy/dx`, or `None` for vertical directions.
    pub fn slope(&self) -> Option<Rational> {
        if self.dx.is_zero() {
            None
        } else {
            Some(make_rational(self.dy.clone(), self.dx.clone()).expect("dx != 0"))
        }
    }

    pub fn flip_x(&self) -> Self {
        Direction { dx: -&self.dx, dy: self.dy.clone() }
    }

    pub fn flip_y(&self) -> Self {
        Direction { dx: self.dx.clone(), dy: -&self.dy }
    }

    pub fn reversed(&self) -> Self {
        Direction { dx: -&self.dx, dy: -&self.dy }
    }

    /// Mirror image across the line `y = x`.
    pub fn swapped(&self) -> Self {
        Direction { dx: self.dy.clone(), dy: self.dx.clone() }
    }

    /// `{|dx|, |dy|}` as a sorted pair.
    pub fn speed_components(&self) -> (BigInt, BigInt) {
        let (a, b) = (self.dx.abs(), self.dy.abs());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

impl TryFrom<(i64, i64)> for Direction {
    type Error = Error;

    fn try_from((dx, dy): (i64, i64)) -> Result<Self> {
        let d = Direction::new(dx, dy)?;
        if d.dx != BigInt::from(dx) {
            return Err(Error::BadArgument(format!("direction ({dx}, {dy}) is not primitive")));
        }
        Ok(d)
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use num_traits::ToPrimitive;
        let (Some(dx), Some(dy)) = (self.dx.to_i64(), self.dy.to_i64()) else {
            return Err(serde::ser::Error::custom("direction component exceeds i64"));
        };
        (dx, dy).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pair = <(i64, i64)>::deserialize(deserializer)?;
        Direction::try_from(pair).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.dx, self.dy)
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Closed axis-aligned segment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Wall {
    /// `x = at`, `y` in `[lo, hi]`.
    Vertical { at: Rational, lo: Rational, hi: Rational },
    /// `y = at`, `x` in `[lo, hi]`.
    Horizontal { at: Rational, lo: Rational, hi: Rational },
}

impl Wall {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Wall::Vertical { at, lo, hi } => p.x == *at && *lo <= p.y && p.y <= *hi,
            Wall::Horizontal { at, lo, hi } => p.y == *at && *lo <= p.x && p.x <= *hi,
        }
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self, Wall::Vertical { .. })
    }

    pub fn endpoints(&self) -> (Point, Point) {
        match self {
            Wall::Vertical { at, lo, hi } => (Point::new(at.clone(), lo.clone()), Point::new(at.clone(), hi.clone())),
            Wall::Horizontal { at, lo, hi } => (Point::new(lo.clone(), at.clone()), Point::new(hi.clone(), at.clone())),
        }
    }
}

/// Smallest `t > 0` with `origin + t*dir` on the closed wall.
///
/// Directions parallel to the wall never hit it, even when the ray runs
/// along it.
pub fn ray_wall_hit(origin: &Point, dir: &Direction, wall: &Wall) -> Option<(Rational, Point)> {
    let (at, lo, hi, start, comp) = match wall {
        Wall::Vertical { at, lo, hi } => (at, lo, hi, &origin.x, dir.dx()),
        Wall::Horizontal { at, lo, hi } => (at, lo, hi, &origin.y, dir.dy()),
    };
    if comp.is_zero() {
        return None;
    }
    let t = (at - start) / Rational::integer(comp.clone());
    if !t.is_positive() {
        return None;
    }
    let hit = origin.advance(&t, dir);
    let along = if wall.is_vertical() { &hit.y } else { &hit.x };
    (lo <= along && along <= hi).then_some((t, hit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_right() -> Wall {
        Wall::Vertical { at: Rational::one(), lo: Rational::zero(), hi: Rational::one() }
    }

    fn unit_top() -> Wall {
        Wall::Horizontal { at: Rational::one(), lo: Rational::zero(), hi: Rational::one() }
    }

    #[test]
    fn wall_hits() {
        let o = Point::origin();
        let (t, p) = ray_wall_hit(&o, &Direction::new(2, 1).unwrap(), &unit_right()).unwrap();
        assert_eq!(t, Rational::frac(1, 2));
        assert_eq!(p, Point::frac(1, 1, 1, 2));

        assert!(ray_wall_hit(&o, &Direction::new(1, 0).unwrap(), &unit_top()).is_none());

        let (_, p) = ray_wall_hit(&o, &Direction::new(1, 1).unwrap(), &unit_top()).unwrap();
        assert_eq!(p, Point::frac(1, 1, 1, 1));
    }

    #[test]
    fn directions_are_primitive() {
        let d = Direction::new(6, -4).unwrap();
        assert_eq!((d.dx().clone(), d.dy().clone()), (BigInt::from(3), BigInt::from(-2)));
        assert!(Direction::new(0, 0).is_err());
        assert_eq!(Direction::from_slope(&Rational::frac(2, 3)), Direction::new(3, 2).unwrap());
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, "[3,-2]");
        assert!(serde_json::from_str::<Direction>("[6,-4]").is_err());
    }

    proptest! {
        #[test]
        fn hit_lies_on_ray_and_wall(
            ox in 0i64..20, oy in 0i64..20, den in 1i64..12,
            dx in -6i64..7, dy in -6i64..7,
            at in -10i64..30, lo in -10i64..10, len in 0i64..20, vertical: bool,
        ) {
            prop_assume!(dx != 0 || dy != 0);
            let origin = Point::frac(ox, den, oy, den);
            let dir = Direction::new(dx, dy).unwrap();
            let (at, lo, hi) = (Rational::frac(at, 7), Rational::frac(lo, 3), Rational::frac(lo + len, 3));
            let wall = if vertical {
                Wall::Vertical { at, lo, hi }
            } else {
                Wall::Horizontal { at, lo, hi }
            };
            if let Some((t, hit)) = ray_wall_hit(&origin, &dir, &wall) {
                prop_assert!(t.is_positive());
                prop_assert!(wall.contains(&hit));
                prop_assert_eq!(origin.advance(&t, &dir), hit);
            }
        }
    }
}
