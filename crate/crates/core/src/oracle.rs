//! Exhaustive line-versus-square oracle in fixed-width integer arithmetic.
//!
//! Every peripheral square up to the table depth is tested individually.
//! Coordinates are scaled to a common integer grid, so the oracle shares no
//! code with the cell walker and serves as its independent reference.

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::carpet::{CarpetParams, CellIndex, PeripheralSquare};
use crate::error::{Error, Result};
use crate::geom::{make_rational, Direction, Point, Rational};

/// How the segment first meets a closed square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    /// The first common point is a vertex of the square.
    Vertex,
    /// The first common point is inside a side.
    Side,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleContact {
    pub level: u32,
    pub square: PeripheralSquare,
    pub kind: OracleKind,
    /// First common point of the segment and the closed square.
    pub point: Point,
    pub t: Rational,
    /// The segment has more than one point in common with the square.
    pub crosses: bool,
}

/// `n/d` with `d > 0`.
#[derive(Clone, Copy, Debug)]
struct Frac {
    n: i128,
    d: i128,
}

impl Frac {
    fn new(n: i128, d: i128) -> Frac {
        if d < 0 {
            Frac { n: -n, d: -d }
        } else {
            Frac { n, d }
        }
    }

    fn cmp(&self, o: &Frac) -> Result<Ordering> {
        let l = self.n.checked_mul(o.d).ok_or(Error::OracleOverflow)?;
        let r = o.n.checked_mul(self.d).ok_or(Error::OracleOverflow)?;
        Ok(l.cmp(&r))
    }
}

fn to_i128(v: &BigInt) -> Result<i128> {
    v.to_i128().ok_or(Error::OracleOverflow)
}

struct Scaled {
    scale: i128,
    x0: i128,
    y0: i128,
    dx: i128,
    dy: i128,
    lo: Frac,
    hi: Frac,
}

impl Scaled {
    fn new(params: &CarpetParams, origin: &Point, dir: &Direction, t: (&Rational, &Rational)) -> Result<Scaled> {
        let grid = BigInt::from(params.a).pow(params.depth);
        let scale = grid.lcm(origin.x.denom()).lcm(origin.y.denom());
        let at = |v: &Rational| to_i128(&(v.numer() * (&scale / v.denom())));
        // t in units of 1/scale
        let tau = |v: &Rational| -> Result<Frac> {
            let num = v.numer() * &scale;
            Ok(Frac::new(to_i128(&num)?, to_i128(v.denom())?))
        };
        Ok(Scaled {
            scale: to_i128(&scale)?,
            x0: at(&origin.x)?,
            y0: at(&origin.y)?,
            dx: to_i128(dir.dx())?,
            dy: to_i128(dir.dy())?,
            lo: tau(t.0)?,
            hi: tau(t.1)?,
        })
    }

    /// Scaled parameter interval of the closed box, clipped to the range.
    fn interval(&self, x: (i128, i128), y: (i128, i128)) -> Result<Option<(Frac, Frac)>> {
        let (mut enter, mut exit) = (self.lo, self.hi);
        for (o, d, (lo, hi)) in [(self.x0, self.dx, x), (self.y0, self.dy, y)] {
            if d == 0 {
                if o < lo || o > hi {
                    return Ok(None);
                }
                continue;
            }
            let (mut a, mut b) = (Frac::new(lo - o, d), Frac::new(hi - o, d));
            if d < 0 {
                std::mem::swap(&mut a, &mut b);
            }
            if a.cmp(&enter)? == Ordering::Greater {
                enter = a;
            }
            if b.cmp(&exit)? == Ordering::Less {
                exit = b;
            }
        }
        Ok((enter.cmp(&exit)? != Ordering::Greater).then_some((enter, exit)))
    }
}

/// Every peripheral square with level in `levels` (clamped to the table
/// depth) that meets `origin + t*dir` for `t` in `[t_lo, t_hi]`, ordered by
/// level, then by first contact.
pub fn oracle_contacts(
    params: &CarpetParams,
    origin: &Point,
    dir: &Direction,
    t_lo: &Rational,
    t_hi: &Rational,
    levels: RangeInclusive<u32>,
) -> Result<Vec<OracleContact>> {
    let sc = Scaled::new(params, origin, dir, (t_lo, t_hi))?;
    let a = params.a;
    let m = (a - 1) / 2;
    let mut out = Vec::new();
    let first = (*levels.start()).max(1);
    let last = (*levels.end()).min(params.depth);
    for level in first..=last {
        let side = sc.scale / (a as i128).pow(level);
        let parents = a.pow(level - 1);
        let mut found = Vec::new();
        for i in 0..parents {
            for j in 0..parents {
                if !digits_valid(a, m, i, j, level - 1) {
                    continue;
                }
                let x1 = ((i * a + m) as i128) * side;
                let y1 = ((j * a + m) as i128) * side;
                let Some((enter, exit)) = sc.interval((x1, x1 + side), (y1, y1 + side))? else {
                    continue;
                };
                // entry point in scaled units: origin + enter * dir
                let px = Frac::new(sc.x0 * enter.d + enter.n * sc.dx, enter.d);
                let py = Frac::new(sc.y0 * enter.d + enter.n * sc.dy, enter.d);
                let on = |p: &Frac, v: i128| p.n == v * p.d;
                let vx = on(&px, x1) || on(&px, x1 + side);
                let vy = on(&py, y1) || on(&py, y1 + side);
                let kind = if vx && vy { OracleKind::Vertex } else { OracleKind::Side };
                let unscale = |f: &Frac| make_rational(f.n, f.d * sc.scale).expect("positive");
                found.push((
                    enter,
                    OracleContact {
                        level,
                        square: PeripheralSquare::in_parent(a, CellIndex { level: level - 1, ix: i, iy: j }),
                        kind,
                        point: Point::new(unscale(&px), unscale(&py)),
                        t: unscale(&enter),
                        crosses: enter.cmp(&exit)? == Ordering::Less,
                    },
                ));
            }
        }
        found.sort_by(|l, r| l.0.cmp(&r.0).unwrap_or(Ordering::Equal));
        out.extend(found.into_iter().map(|(_, c)| c));
    }
    Ok(out)
}

fn digits_valid(a: u64, m: u64, mut i: u64, mut j: u64, level: u32) -> bool {
    for _ in 0..level {
        if i % a == m && j % a == m {
            return false;
        }
        i /= a;
        j /= a;
    }
    true
}

/// Chord of the unit square from a start on its boundary: the parameter at
/// which the ray leaves `[0,1]^2`.
pub fn chord_end(origin: &Point, dir: &Direction) -> Option<Rational> {
    let mut exit: Option<Rational> = None;
    for (o, d) in [(&origin.x, dir.dx()), (&origin.y, dir.dy())] {
        let d = d.to_i64()?;
        if d == 0 {
            continue;
        }
        let target = if d > 0 { Rational::one() } else { Rational::zero() };
        let t = (target - o) / Rational::from(d);
        exit = Some(match exit {
            Some(e) if e <= t => e,
            _ => t,
        });
    }
    exit.filter(|t| t.is_positive())
}

/// The first interference of the chord from `origin`: coarsest level,
/// then smallest parameter.
pub fn oracle_first(params: &CarpetParams, origin: &Point, dir: &Direction) -> Result<Option<OracleContact>> {
    let Some(end) = chord_end(origin, dir) else {
        return Ok(None);
    };
    let all = oracle_contacts(params, origin, dir, &Rational::zero(), &end, 1..=params.depth)?;
    Ok(all.into_iter().next())
}
