//! Prefractal carpets `S_{a,n}`: cells addressed by base-`a` digits,
//! peripheral squares, and exact point classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{make_rational, Point, Rational, Wall};

/// Odd `a >= 3` and approximation depth `n >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CarpetParams {
    pub a: u64,
    pub depth: u32,
}

impl CarpetParams {
    pub fn new(a: u64, depth: u32) -> Result<Self> {
        check_a(a)?;
        if a.checked_pow(depth + 1).is_none() {
            return Err(Error::BadArgument(format!("depth {depth} is too large for a = {a}")));
        }
        Ok(CarpetParams { a, depth })
    }

    pub fn with_depth(&self, depth: u32) -> Result<Self> {
        CarpetParams::new(self.a, depth)
    }

    /// The digit `(a-1)/2` whose pair `(m, m)` marks the removed middle.
    pub fn middle(&self) -> u64 {
        (self.a - 1) / 2
    }

    /// `a^k`.
    pub fn cells_per_side(&self, k: u32) -> u64 {
        self.a.pow(k)
    }
}

pub(crate) fn check_a(a: u64) -> Result<()> {
    if a < 3 || a.is_multiple_of(2) {
        return Err(Error::BadCarpetParameter(a));
    }
    Ok(())
}

/// Digits `(u_1, v_1), ..., (u_k, v_k)`, outermost first: the cell is
/// `phi_{d_1} o ... o phi_{d_k}(Q)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellAddress(pub Vec<(u64, u64)>);

impl CellAddress {
    pub fn new(a: u64, digits: Vec<(u64, u64)>) -> Result<Self> {
        check_a(a)?;
        let m = (a - 1) / 2;
        for &(u, v) in &digits {
            if u >= a || v >= a {
                return Err(Error::DigitOutOfRange(u, v));
            }
            if (u, v) == (m, m) {
                return Err(Error::MiddleAddress(u, v));
            }
        }
        Ok(CellAddress(digits))
    }

    pub fn root() -> Self {
        CellAddress(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn digits(&self) -> &[(u64, u64)] {
        &self.0
    }

    pub fn index(&self, a: u64) -> CellIndex {
        let (mut ix, mut iy) = (0u64, 0u64);
        for &(u, v) in &self.0 {
            ix = ix * a + u;
            iy = iy * a + v;
        }
        CellIndex { level: self.0.len() as u32, ix, iy }
    }

    pub fn prefix(&self, len: usize) -> CellAddress {
        CellAddress(self.0[..len].to_vec())
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (u, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({u},{v})")?;
        }
        write!(f, "]")
    }
}

/// Cell of the `a^level` grid: `[ix, ix+1] x [iy, iy+1]` scaled by `a^-level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub level: u32,
    pub ix: u64,
    pub iy: u64,
}

impl CellIndex {
    pub const ROOT: CellIndex = CellIndex { level: 0, ix: 0, iy: 0 };

    pub fn address(&self, a: u64) -> CellAddress {
        let mut digits = Vec::with_capacity(self.level as usize);
        let (mut ix, mut iy) = (self.ix, self.iy);
        for _ in 0..self.level {
            digits.push((ix % a, iy % a));
            ix /= a;
            iy /= a;
        }
        digits.reverse();
        CellAddress(digits)
    }

    /// No digit pair of the address is the removed middle.
    pub fn is_valid(&self, a: u64) -> bool {
        let m = (a - 1) / 2;
        let (mut ix, mut iy) = (self.ix, self.iy);
        for _ in 0..self.level {
            if ix % a == m && iy % a == m {
                return false;
            }
            ix /= a;
            iy /= a;
        }
        true
    }

    pub fn child(&self, a: u64, u: u64, v: u64) -> CellIndex {
        CellIndex { level: self.level + 1, ix: self.ix * a + u, iy: self.iy * a + v }
    }

    pub fn parent(&self, a: u64) -> Option<CellIndex> {
        (self.level > 0).then(|| CellIndex { level: self.level - 1, ix: self.ix / a, iy: self.iy / a })
    }

    pub fn side(&self, a: u64) -> Rational {
        Rational::inv_pow(a, self.level)
    }

    pub fn lower_left(&self, a: u64) -> Point {
        let den = num_bigint::BigInt::from(a).pow(self.level);
        Point::new(make_rational(self.ix, den.clone()).expect("a^k > 0"), make_rational(self.iy, den).expect("a^k > 0"))
    }

    pub fn bounds(&self, a: u64) -> CellBox {
        let side = self.side(a);
        let lo = self.lower_left(a);
        let hi = lo.translate(&side, &side);
        CellBox { lo, hi }
    }
}

/// Closed axis-aligned box `[lo.x, hi.x] x [lo.y, hi.y]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellBox {
    pub lo: Point,
    pub hi: Point,
}

impl CellBox {
    pub fn contains(&self, p: &Point) -> bool {
        self.lo.x <= p.x && p.x <= self.hi.x && self.lo.y <= p.y && p.y <= self.hi.y
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.lo.clone(),
            Point::new(self.hi.x.clone(), self.lo.y.clone()),
            self.hi.clone(),
            Point::new(self.lo.x.clone(), self.hi.y.clone()),
        ]
    }

    pub fn is_corner(&self, p: &Point) -> bool {
        (p.x == self.lo.x || p.x == self.hi.x) && (p.y == self.lo.y || p.y == self.hi.y)
    }

    /// Left, right, bottom, top.
    pub fn walls(&self) -> [Wall; 4] {
        let (lo, hi) = (&self.lo, &self.hi);
        [
            Wall::Vertical { at: lo.x.clone(), lo: lo.y.clone(), hi: hi.y.clone() },
            Wall::Vertical { at: hi.x.clone(), lo: lo.y.clone(), hi: hi.y.clone() },
            Wall::Horizontal { at: lo.y.clone(), lo: lo.x.clone(), hi: hi.x.clone() },
            Wall::Horizontal { at: hi.y.clone(), lo: lo.x.clone(), hi: hi.x.clone() },
        ]
    }

    pub fn on_boundary(&self, p: &Point) -> bool {
        self.contains(p) && (p.x == self.lo.x || p.x == self.hi.x || p.y == self.lo.y || p.y == self.hi.y)
    }
}

/// Region `phi_{d_1} o ... o phi_{d_k}(Q)` of a cell address.
pub fn cell_geometry(params: &CarpetParams, digits: &[(u64, u64)]) -> Result<(Point, Rational)> {
    let addr = CellAddress::new(params.a, digits.to_vec())?;
    let idx = addr.index(params.a);
    Ok((idx.lower_left(params.a), idx.side(params.a)))
}

/// Boundary of an open square removed at stage `level`: the closed
/// middle sub-square of the level-`level - 1` cell named by `address`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeripheralSquare {
    pub level: u32,
    pub address: CellAddress,
    pub lower_left: Point,
    pub side: Rational,
}

impl PeripheralSquare {
    pub fn in_parent(a: u64, parent: CellIndex) -> Self {
        let m = (a - 1) / 2;
        let cell = parent.child(a, m, m);
        PeripheralSquare { level: cell.level, address: parent.address(a), lower_left: cell.lower_left(a), side: cell.side(a) }
    }

    /// The square viewed as the middle cell of the next grid.
    pub fn cell(&self, a: u64) -> CellIndex {
        let m = (a - 1) / 2;
        self.address.index(a).child(a, m, m)
    }

    pub fn bounds(&self) -> CellBox {
        CellBox { lo: self.lower_left.clone(), hi: self.lower_left.translate(&self.side, &self.side) }
    }

    pub fn inferior_right(&self) -> Point {
        Point::new(&self.lower_left.x + &self.side, self.lower_left.y.clone())
    }

    pub fn is_vertex(&self, p: &Point) -> bool {
        self.bounds().is_corner(p)
    }
}

/// Iterator over the valid cells of one grid level, in odometer order.
pub struct ValidCells {
    a: u64,
    level: u32,
    // Per-digit counters in 0..a*a-1 (the middle pair is skipped).
    counters: Vec<u64>,
    done: bool,
}

impl ValidCells {
    pub fn new(a: u64, level: u32) -> Self {
        ValidCells { a, level, counters: vec![0; level as usize], done: false }
    }

    fn digit(&self, c: u64) -> (u64, u64) {
        let mid = (self.a * self.a - 1) / 2;
        let c = if c >= mid { c + 1 } else { c };
        (c % self.a, c / self.a)
    }
}

impl Iterator for ValidCells {
    type Item = CellIndex;

    fn next(&mut self) -> Option<CellIndex> {
        if self.done {
            return None;
        }
        let mut idx = CellIndex::ROOT;
        for &c in &self.counters {
            let (u, v) = self.digit(c);
            idx = idx.child(self.a, u, v);
        }
        // advance the odometer, last digit fastest
        let base = self.a * self.a - 1;
        let mut i = self.counters.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.counters[i] += 1;
            if self.counters[i] < base {
                break;
            }
            self.counters[i] = 0;
        }
        debug_assert_eq!(idx.level, self.level);
        Some(idx)
    }
}

/// All peripheral squares created at stage `level` (`1 <= level <= depth`).
pub fn peripheral_squares(params: &CarpetParams, level: u32) -> Result<impl Iterator<Item = PeripheralSquare>> {
    if level < 1 || level > params.depth {
        return Err(Error::LevelOutOfRange { level, depth: params.depth });
    }
    let a = params.a;
    Ok(ValidCells::new(a, level - 1).map(move |parent| PeripheralSquare::in_parent(a, parent)))
}

/// `sum_{m=1}^{n} (a^2 - 1)^{m-1}`, the number of peripheral squares of `S_{a,n}`.
pub fn peripheral_square_count(a: u64, depth: u32) -> u128 {
    let base = (a * a - 1) as u128;
    (0..depth).map(|k| base.pow(k)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feature {
    Side,
    Corner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointClass {
    OutsideUnitSquare,
    RemovedInterior { level: u32, square: PeripheralSquare },
    OnPeripheralBoundary { square: PeripheralSquare, feature: Feature },
    OnOuterBoundary { feature: Feature },
    InApproximation,
}

impl PointClass {
    pub fn on_boundary(&self) -> bool {
        matches!(self, PointClass::OnPeripheralBoundary { .. } | PointClass::OnOuterBoundary { .. })
    }
}

/// Where `x` sits relative to the closed interval `[i, i+1]` of the
/// middle digit inside its parent: returns `(parent_index, on_edge)`.
fn middle_slot(x: &Rational, a: u64, level: u32, m: u64) -> Option<(u64, bool)> {
    let scaled = x * Rational::integer(a).pow_u32(level) - Rational::integer(m);
    if scaled.is_negative() {
        return None;
    }
    let parent = scaled.floor() / a;
    let offset = scaled - Rational::integer(&parent * a);
    if offset > Rational::one() {
        return None;
    }
    let on_edge = offset.is_zero() || offset == Rational::one();
    let parent: u64 = parent.try_into().ok()?;
    Some((parent, on_edge))
}

/// Exact classification of `p` against `S_{a,depth}` by base-`a` digit
/// extraction, one level at a time.
pub fn classify_point(params: &CarpetParams, p: &Point) -> PointClass {
    let (zero, one) = (Rational::zero(), Rational::one());
    if p.x < zero || p.x > one || p.y < zero || p.y > one {
        return PointClass::OutsideUnitSquare;
    }
    let edge_x = p.x == zero || p.x == one;
    let edge_y = p.y == zero || p.y == one;
    if edge_x || edge_y {
        let feature = if edge_x && edge_y { Feature::Corner } else { Feature::Side };
        return PointClass::OnOuterBoundary { feature };
    }
    let (a, m) = (params.a, params.middle());
    for level in 1..=params.depth {
        let (Some((px, ex)), Some((py, ey))) = (middle_slot(&p.x, a, level, m), middle_slot(&p.y, a, level, m)) else {
            continue;
        };
        let limit = a.pow(level - 1);
        if px >= limit || py >= limit {
            continue;
        }
        let parent = CellIndex { level: level - 1, ix: px, iy: py };
        if !parent.is_valid(a) {
            continue;
        }
        let square = PeripheralSquare::in_parent(a, parent);
        return match (ex, ey) {
            (false, false) => PointClass::RemovedInterior { level, square },
            (true, true) => PointClass::OnPeripheralBoundary { square, feature: Feature::Corner },
            _ => PointClass::OnPeripheralBoundary { square, feature: Feature::Side },
        };
    }
    PointClass::InApproximation
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn params(a: u64, depth: u32) -> CarpetParams {
        CarpetParams::new(a, depth).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(CarpetParams::new(4, 1), Err(Error::BadCarpetParameter(4)));
        assert_eq!(CarpetParams::new(1, 1), Err(Error::BadCarpetParameter(1)));
    }

    #[test]
    fn cell_geometry_composes_contractions() {
        let p = params(7, 3);
        assert_eq!(cell_geometry(&p, &[(0, 0)]).unwrap(), (Point::origin(), Rational::frac(1, 7)));
        assert_eq!(cell_geometry(&p, &[(0, 0), (3, 4)]).unwrap(), (Point::frac(3, 49, 4, 49), Rational::frac(1, 49)));
        assert_eq!(cell_geometry(&p, &[(3, 3)]), Err(Error::MiddleAddress(3, 3)));
        assert_eq!(cell_geometry(&p, &[(7, 0)]), Err(Error::DigitOutOfRange(7, 0)));
    }

    #[test]
    fn nested_cells_shrink_inside_prefixes() {
        let p = params(5, 3);
        let addr = [(4, 1), (0, 3), (2, 2 + 1)];
        for k in 0..=addr.len() {
            let (ll, side) = cell_geometry(&p, &addr[..k]).unwrap();
            assert_eq!(side, Rational::inv_pow(5, k as u32));
            if k > 0 {
                let (pll, pside) = cell_geometry(&p, &addr[..k - 1]).unwrap();
                assert!(pll.x <= ll.x && &ll.x + &side <= &pll.x + &pside);
                assert!(pll.y <= ll.y && &ll.y + &side <= &pll.y + &pside);
            }
        }
    }

    #[test]
    fn square_counts_and_examples() {
        assert_eq!(peripheral_squares(&params(3, 2), 2).unwrap().count(), 8);
        let only: Vec<_> = peripheral_squares(&params(5, 1), 1).unwrap().collect();
        assert_eq!(only.len(), 1);
        assert_eq!(only[0].lower_left, Point::frac(2, 5, 2, 5));
        assert_eq!(only[0].side, Rational::frac(1, 5));

        let sq = peripheral_squares(&params(7, 2), 2).unwrap().find(|s| s.address.digits() == [(0, 0)]).unwrap();
        assert_eq!(sq.inferior_right(), Point::frac(4, 49, 3, 49));
        assert_eq!(peripheral_squares(&params(7, 2), 3).err(), Some(Error::LevelOutOfRange { level: 3, depth: 2 }));
        assert_eq!(peripheral_squares(&params(7, 2), 0).err(), Some(Error::LevelOutOfRange { level: 0, depth: 2 }));
    }

    #[test]
    fn counts_match_closed_form() {
        for a in [3u64, 5, 7] {
            let p = params(a, 3);
            for k in 1..=3 {
                let n = peripheral_squares(&p, k).unwrap().count() as u128;
                assert_eq!(n, ((a * a - 1) as u128).pow(k - 1));
            }
        }
        assert_eq!(peripheral_square_count(3, 2), 9);
    }

    #[test]
    fn squares_are_disjoint_and_off_the_outer_boundary() {
        for a in [3u64, 5] {
            let p = params(a, 3);
            let squares: Vec<_> = (1..=3).flat_map(|k| peripheral_squares(&p, k).unwrap()).collect();
            for s in &squares {
                let b = s.bounds();
                assert!(b.lo.x.is_positive() && b.lo.y.is_positive());
                assert!(b.hi.x < Rational::one() && b.hi.y < Rational::one());
            }
            for (i, s) in squares.iter().enumerate() {
                for t in &squares[i + 1..] {
                    let (b, c) = (s.bounds(), t.bounds());
                    let overlap = b.lo.x <= c.hi.x && c.lo.x <= b.hi.x && b.lo.y <= c.hi.y && c.lo.y <= b.hi.y;
                    assert!(!overlap, "{s:?} touches {t:?}");
                }
            }
        }
    }

    #[test]
    fn corner_denominators_identify_level() {
        for a in [3u64, 5, 7] {
            let p = params(a, 3);
            let mut seen = HashSet::new();
            for k in 1..=3 {
                for s in peripheral_squares(&p, k).unwrap() {
                    let c = s.inferior_right();
                    assert_eq!(c.x.denom(), &num_bigint::BigInt::from(a.pow(k)));
                    assert!(seen.insert(c));
                }
            }
        }
    }

    #[test]
    fn point_classification() {
        let p3 = params(3, 1);
        assert!(matches!(classify_point(&p3, &Point::frac(1, 2, 1, 2)), PointClass::RemovedInterior { level: 1, .. }));
        assert!(matches!(
            classify_point(&p3, &Point::frac(1, 3, 1, 3)),
            PointClass::OnPeripheralBoundary { feature: Feature::Corner, ref square } if square.level == 1
        ));
        assert!(matches!(
            classify_point(&params(5, 1), &Point::frac(2, 5, 1, 2)),
            PointClass::OnPeripheralBoundary { feature: Feature::Side, .. }
        ));
        assert_eq!(classify_point(&p3, &Point::frac(3, 2, 1, 2)), PointClass::OutsideUnitSquare);
        assert_eq!(classify_point(&p3, &Point::frac(0, 1, 1, 1)), PointClass::OnOuterBoundary { feature: Feature::Corner });
        assert_eq!(classify_point(&p3, &Point::frac(1, 7, 0, 1)), PointClass::OnOuterBoundary { feature: Feature::Side });
        assert_eq!(classify_point(&p3, &Point::frac(1, 6, 1, 6)), PointClass::InApproximation);
        // depth 0 has no squares
        assert_eq!(classify_point(&params(3, 0), &Point::frac(1, 2, 1, 2)), PointClass::InApproximation);
        // level-2 square of a=3 in cell (0,0): [1/9, 2/9]^2
        assert!(matches!(classify_point(&params(3, 2), &Point::frac(1, 6, 1, 6)), PointClass::RemovedInterior { level: 2, .. }));
    }

    #[test]
    fn classification_agrees_with_enumeration() {
        let p = params(3, 2);
        let squares: Vec<_> = (1..=2).flat_map(|k| peripheral_squares(&p, k).unwrap()).collect();
        for i in 1..36 {
            for j in 1..36 {
                let pt = Point::frac(i, 36, j, 36);
                let expected = squares.iter().find(|s| s.bounds().contains(&pt));
                match (classify_point(&p, &pt), expected) {
                    (PointClass::InApproximation, None) => {}
                    (PointClass::RemovedInterior { square, .. }, Some(s))
                    | (PointClass::OnPeripheralBoundary { square, .. }, Some(s)) => assert_eq!(&square, s),
                    (got, want) => panic!("{pt}: {got:?} vs {want:?}"),
                }
            }
        }
    }
}
