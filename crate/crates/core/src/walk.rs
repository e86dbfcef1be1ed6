//! Exact cell-walking traversal of a ray through the carpet's digit grid.
//!
//! The walker descends level by level, keeping only the valid cells the
//! ray crosses. A level-`k` peripheral square is the middle sub-cell of a
//! valid level-`k-1` cell, so each square met along the ray is found while
//! splitting its parent. Cost is proportional to the number of cells
//! crossed rather than to the number of squares.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::carpet::{CellBox, CellIndex, PeripheralSquare};
use crate::geom::{Direction, Point, Rational};

/// Where a ray first meets a closed box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactFeature {
    Corner,
    /// Relative interior of a side `x = const`.
    VerticalSide,
    /// Relative interior of a side `y = const`.
    HorizontalSide,
}

impl ContactFeature {
    pub fn of(bx: &CellBox, p: &Point) -> ContactFeature {
        let on_x = p.x == bx.lo.x || p.x == bx.hi.x;
        let on_y = p.y == bx.lo.y || p.y == bx.hi.y;
        match (on_x, on_y) {
            (true, true) => ContactFeature::Corner,
            (true, false) => ContactFeature::VerticalSide,
            _ => ContactFeature::HorizontalSide,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contact {
    pub t: Rational,
    pub point: Point,
    pub square: PeripheralSquare,
    pub feature: ContactFeature,
    /// `true` when the ray touches the square at a single point.
    pub grazing: bool,
}

/// Which contact a scan reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanOrder {
    /// Smallest parameter over all levels.
    Earliest,
    /// Coarsest level met, then smallest parameter within it.
    LowestLevel,
}

/// Parameter interval `[enter, exit]` of `origin + t*dir` inside the closed
/// box, clipped to `[t_lo, t_hi]` (`None` means unbounded above).
pub fn box_interval(
    origin: &Point,
    dir: &Direction,
    bx: &CellBox,
    t_lo: &Rational,
    t_hi: Option<&Rational>,
) -> Option<(Rational, Rational)> {
    let mut enter = t_lo.clone();
    let mut exit = t_hi.cloned();
    for (o, d, lo, hi) in [(&origin.x, dir.dx(), &bx.lo.x, &bx.hi.x), (&origin.y, dir.dy(), &bx.lo.y, &bx.hi.y)] {
        if d.is_zero() {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let d = Rational::integer(d.clone());
        let (mut t1, mut t2) = ((lo - o) / &d, (hi - o) / &d);
        if t1 > t2 {
            std::mem::swap(&mut t1, &mut t2);
        }
        if t1 > enter {
            enter = t1;
        }
        exit = Some(match exit {
            Some(e) if e <= t2 => e,
            _ => t2,
        });
    }
    let exit = exit?;
    (enter <= exit).then_some((enter, exit))
}

fn floor_u64(r: &Rational) -> Option<i128> {
    r.floor().to_i128()
}

fn ceil_i(r: &Rational) -> Option<i128> {
    r.ceil().to_i128()
}

/// The children of `cell` met by the ray on `[t0, t1]`, with their clipped
/// intervals, ordered by entry parameter.
fn crossed_children(
    a: u64,
    cell: CellIndex,
    origin: &Point,
    dir: &Direction,
    t0: &Rational,
    t1: &Rational,
) -> Vec<(CellIndex, Rational, Rational)> {
    let scale = Rational::integer(BigInt::from(a).pow(cell.level + 1));
    let local = |v: &Rational, base: u64| v * &scale - Rational::integer(base * a);
    let p0 = origin.advance(t0, dir);
    let p1 = origin.advance(t1, dir);
    let (x0, x1) = (local(&p0.x, cell.ix), local(&p1.x, cell.ix));
    let (xmin, xmax) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
    let max_digit = a as i128 - 1;
    let clamp = |v: i128| v.clamp(0, max_digit) as u64;
    let (Some(cmin), Some(cmax)) = (ceil_i(&xmin), floor_u64(&xmax)) else {
        return Vec::new();
    };
    let (cols_lo, cols_hi) = (clamp(cmin - 1), clamp(cmax));

    let mut out = Vec::new();
    for col in cols_lo..=cols_hi {
        let column = cell.child(a, col, 0);
        let side = column.side(a);
        let col_box = CellBox {
            lo: Point::new(column.lower_left(a).x, cell.lower_left(a).y),
            hi: Point::new(&column.lower_left(a).x + &side, &cell.lower_left(a).y + &cell.side(a)),
        };
        let Some((c0, c1)) = box_interval(origin, dir, &col_box, t0, Some(t1)) else {
            continue;
        };
        let (y0, y1) = (local(&origin.advance(&c0, dir).y, cell.iy), local(&origin.advance(&c1, dir).y, cell.iy));
        let (ymin, ymax) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
        let (Some(rmin), Some(rmax)) = (ceil_i(&ymin), floor_u64(&ymax)) else {
            continue;
        };
        for row in clamp(rmin - 1)..=clamp(rmax) {
            let child = cell.child(a, col, row);
            if let Some((s0, s1)) = box_interval(origin, dir, &child.bounds(a), &c0, Some(&c1)) {
                out.push((child, s0, s1));
            }
        }
    }
    out.sort_by(|l, r| l.1.cmp(&r.1));
    out
}

/// First peripheral square (levels `root.level + 1 ..= depth`) touched by
/// `origin + t*dir` for `t` in `[0, t_max]`, excluding a square that is
/// touched only at `t = 0` (the ray leaving its side).
pub fn scan(
    a: u64,
    root: CellIndex,
    depth: u32,
    origin: &Point,
    dir: &Direction,
    t_max: &Rational,
    order: ScanOrder,
) -> Option<Contact> {
    let zero = Rational::zero();
    let m = (a - 1) / 2;
    let mut frontier: Vec<(CellIndex, Rational, Rational)> = match box_interval(origin, dir, &root.bounds(a), &zero, Some(t_max))
    {
        Some((t0, t1)) => vec![(root, t0, t1)],
        None => return None,
    };
    let mut best: Option<Contact> = None;
    for level in root.level + 1..=depth {
        let mut next = Vec::new();
        for (cell, t0, t1) in &frontier {
            if let Some(b) = &best {
                if b.t <= *t0 {
                    continue;
                }
            }
            for (child, s0, s1) in crossed_children(a, *cell, origin, dir, t0, t1) {
                let is_middle = child.ix % a == m && child.iy % a == m;
                if is_middle {
                    if s1.is_zero() {
                        continue;
                    }
                    if best.as_ref().is_some_and(|b| b.t <= s0) {
                        continue;
                    }
                    let bx = child.bounds(a);
                    let point = origin.advance(&s0, dir);
                    let feature = ContactFeature::of(&bx, &point);
                    best =
                        Some(Contact { grazing: s0 == s1, t: s0, point, square: PeripheralSquare::in_parent(a, *cell), feature });
                } else if level < depth && s0 < s1 {
                    next.push((child, s0, s1));
                }
            }
        }
        if order == ScanOrder::LowestLevel && best.is_some() {
            return best;
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    best
}
