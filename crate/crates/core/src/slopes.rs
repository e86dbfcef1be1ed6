//! Slope sets `A_a`, `B_a`, the new slopes `A_a \ A_{a-2}`, and their
//! closure under the symmetries of the square.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::carpet::check_a;
use crate::error::{Error, Result};
use crate::geom::{Direction, Rational};

/// A slope in the extended sense: a rational or the vertical direction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slope {
    Finite(Rational),
    Vertical,
}

impl Slope {
    pub fn direction(&self) -> Direction {
        match self {
            Slope::Finite(r) => Direction::from_slope(r),
            Slope::Vertical => Direction::vertical(),
        }
    }

    pub fn of_direction(d: &Direction) -> Slope {
        d.slope().map_or(Slope::Vertical, Slope::Finite)
    }

    pub fn reciprocal(&self) -> Slope {
        match self {
            Slope::Vertical => Slope::Finite(Rational::zero()),
            Slope::Finite(r) if r.is_zero() => Slope::Vertical,
            Slope::Finite(r) => Slope::Finite(r.recip().expect("nonzero")),
        }
    }

    pub fn negated(&self) -> Slope {
        match self {
            Slope::Vertical => Slope::Vertical,
            Slope::Finite(r) => Slope::Finite(-r),
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(r) => write!(f, "{r}"),
            Slope::Vertical => write!(f, "vertical"),
        }
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "vertical" {
            Ok(Slope::Vertical)
        } else {
            s.parse().map(Slope::Finite)
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn collect(pairs: impl Iterator<Item = (u64, u64)>) -> Vec<Rational> {
    let set: BTreeSet<Rational> = pairs.map(|(p, q)| Rational::frac(p as i64, q as i64)).collect();
    set.into_iter().collect()
}

/// `{p/q : p+q <= a, 0 <= p < q <= a-1, p+q odd}`, as reduced values.
pub fn slopes_a(a: u64) -> Result<Vec<Rational>> {
    check_a(a)?;
    Ok(slopes_a_raw(a))
}

// Also valid for a = 1, where the set is empty.
fn slopes_a_raw(a: u64) -> Vec<Rational> {
    collect((1..a).flat_map(|q| (0..q).map(move |p| (p, q))).filter(|&(p, q)| p + q <= a && (p + q) % 2 == 1))
}

/// `{p/q : p+q <= a-1, 0 <= p <= q <= a-2, p and q odd}`.
pub fn slopes_b(a: u64) -> Result<Vec<Rational>> {
    check_a(a)?;
    Ok(collect((1..=a - 2).flat_map(|q| (0..=q).map(move |p| (p, q))).filter(|&(p, q)| p + q < a && p % 2 == 1 && q % 2 == 1)))
}

/// `{p/q : 1 <= p < q, p+q = a, gcd(p,q) = 1}`. Rejects `a = 3`, where the
/// closed form and the set difference `A_3 \ A_1` disagree.
pub fn slopes_a_new(a: u64) -> Result<Vec<Rational>> {
    check_a(a)?;
    if a == 3 {
        return Err(Error::BadCarpetParameter(a));
    }
    Ok(collect((1..a).map(|p| (p, a - p)).filter(|&(p, q)| p < q && p.gcd(&q) == 1)))
}

/// `A_a \ A_{a-2}` computed by set difference.
pub fn slopes_a_difference(a: u64) -> Result<Vec<Rational>> {
    check_a(a)?;
    let older: BTreeSet<Rational> = slopes_a_raw(a - 2).into_iter().collect();
    Ok(slopes_a_raw(a).into_iter().filter(|r| !older.contains(r)).collect())
}

/// Closure of `A_a ∪ B_a` under `α ↦ 1/α, -α, -1/α` (0 and vertical swap).
pub fn slopes_full(a: u64) -> Result<Vec<Slope>> {
    let mut out = BTreeSet::new();
    for r in slopes_a(a)?.into_iter().chain(slopes_b(a)?) {
        let s = Slope::Finite(r);
        let inv = s.reciprocal();
        out.insert(s.negated());
        out.insert(inv.negated());
        out.insert(s);
        out.insert(inv);
    }
    Ok(out.into_iter().collect())
}

/// Whether `slope` lies in `A_{a-2}`; `A_1` is empty.
pub fn in_a_previous(a: u64, slope: &Rational) -> bool {
    a >= 3 && slopes_a_raw(a - 2).contains(slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(v: &[(i64, i64)]) -> Vec<Rational> {
        let mut out: Vec<_> = v.iter().map(|&(p, q)| Rational::frac(p, q)).collect();
        out.sort();
        out
    }

    #[test]
    fn small_catalogs() {
        assert_eq!(slopes_a(3).unwrap(), list(&[(0, 1), (1, 2)]));
        assert_eq!(slopes_b(3).unwrap(), list(&[(1, 1)]));
        assert_eq!(slopes_b(5).unwrap(), list(&[(1, 3), (1, 1)]));
        assert_eq!(slopes_a_new(5).unwrap(), list(&[(1, 4), (2, 3)]));
        assert_eq!(slopes_a(4), Err(Error::BadCarpetParameter(4)));
        assert_eq!(slopes_a_new(3), Err(Error::BadCarpetParameter(3)));
    }

    #[test]
    fn a3_difference_keeps_zero() {
        assert_eq!(slopes_a_difference(3).unwrap(), list(&[(0, 1), (1, 2)]));
    }

    #[test]
    fn full_set_closure() {
        let full = slopes_full(3).unwrap();
        for s in ["1/2", "2", "-1/2", "-2", "1", "-1", "0", "vertical"] {
            assert!(full.contains(&s.parse().unwrap()), "{s}");
        }
        assert_eq!(full.len(), 8);
    }

    #[test]
    fn slope_wire_format() {
        let s: Slope = serde_json::from_str("\"vertical\"").unwrap();
        assert_eq!(s, Slope::Vertical);
        assert_eq!(serde_json::to_string(&Slope::Finite(Rational::frac(2, 3))).unwrap(), "\"2/3\"");
    }

    #[test]
    fn previous_set_membership() {
        assert!(in_a_previous(7, &Rational::frac(2, 3)));
        assert!(!in_a_previous(7, &Rational::frac(2, 5)));
        assert!(!in_a_previous(3, &Rational::frac(0, 1)));
    }
}
