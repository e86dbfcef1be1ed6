//! Compatible initial conditions and sequences of compatible orbits.

use std::ops::RangeInclusive;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::billiard::{simulate, BilliardState, BilliardTable, OrbitResult, Outcome};
use crate::carpet::{classify_point, CarpetParams};
use crate::error::{Error, Result};
use crate::geom::{Point, Rational};
use crate::oracle::oracle_contacts;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub level: u32,
    pub state: BilliardState,
}

/// Whether two initial conditions at different levels are compatible: equal
/// directions, and the closed segment joining the base points meets the
/// finer table's boundary only at the finer base point. Equal base points
/// are compatible whenever the directions agree.
pub fn are_compatible(a: u64, first: &InitialCondition, second: &InitialCondition) -> Result<bool> {
    if first.level == second.level {
        return Err(Error::SameLevel(first.level));
    }
    let (coarse, fine) = if first.level < second.level { (first, second) } else { (second, first) };
    let params = CarpetParams::new(a, fine.level)?;
    for ic in [coarse, fine] {
        if !classify_point(&params.with_depth(ic.level)?, &ic.state.pos).on_boundary() {
            return Err(Error::NotOnBoundary(Box::new(ic.state.pos.clone())));
        }
    }
    if coarse.state.dir != fine.state.dir {
        return Ok(false);
    }
    let (xm, xn) = (&coarse.state.pos, &fine.state.pos);
    if xm == xn {
        return Ok(true);
    }
    let dir = &fine.state.dir;
    let (ex, ey) = (&xn.x - &xm.x, &xn.y - &xm.y);
    let cross = &ex * Rational::integer(dir.dy().clone()) - &ey * Rational::integer(dir.dx().clone());
    if !cross.is_zero() {
        return Ok(false);
    }
    // parameter of xn along xm + t*dir (t may be negative)
    let t_end =
        if dir.dx().is_zero() { &ey / Rational::integer(dir.dy().clone()) } else { &ex / Rational::integer(dir.dx().clone()) };
    let (t_lo, t_hi) = if t_end.is_negative() { (t_end, Rational::zero()) } else { (Rational::zero(), t_end) };
    // outer square: a chord of a convex region meets its boundary only at
    // its endpoints, unless it runs along a side
    let on_outer = |p: &Point| {
        let (z, o) = (Rational::zero(), Rational::one());
        p.x == z || p.x == o || p.y == z || p.y == o
    };
    if on_outer(xm) || (on_outer(xn) && on_outer(&midpoint(xm, xn))) {
        return Ok(false);
    }
    let contacts = oracle_contacts(&params, xm, dir, &t_lo, &t_hi, 1..=fine.level)?;
    Ok(contacts.iter().all(|c| !c.crosses && c.point == *xn))
}

fn midpoint(p: &Point, q: &Point) -> Point {
    let half = Rational::frac(1, 2);
    Point::new((&p.x + &q.x) * &half, (&p.y + &q.y) * &half)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceClass {
    EventuallyConstantPeriodic,
    ConstantClosed,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelOrbit {
    pub level: u32,
    pub orbit: OrbitResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceResult {
    pub a: u64,
    pub levels: (u32, u32),
    pub orbits: Vec<LevelOrbit>,
    /// First level from which all footprints coincide.
    pub onset: Option<u32>,
    pub classification: SequenceClass,
}

/// What must agree for two orbits to trace the same path: the rotated cycle
/// of states for periodic orbits, the point sequence otherwise.
#[derive(PartialEq, Eq)]
enum PathKey {
    Cycle(Vec<BilliardState>),
    Open(Vec<Point>),
}

fn path_key(o: &OrbitResult) -> PathKey {
    match o.canonical_cycle() {
        Some(c) => PathKey::Cycle(c),
        None => PathKey::Open(o.footprint.clone()),
    }
}

/// Simulates one initial state at every level of `levels` and looks for the
/// level from which the footprints stop changing.
pub fn build_sequence(a: u64, start: &BilliardState, levels: RangeInclusive<u32>, max_steps: u64) -> Result<SequenceResult> {
    let (lo, hi) = (*levels.start(), *levels.end());
    if lo > hi {
        return Err(Error::BadArgument(format!("empty level range {lo}..{hi}")));
    }
    for level in lo..=hi {
        let params = CarpetParams::new(a, level)?;
        if !classify_point(&params, &start.pos).on_boundary() {
            return Err(Error::NotOnAllBoundaries { point: Box::new(start.pos.clone()), level });
        }
    }
    let orbits: Vec<LevelOrbit> = (lo..=hi)
        .into_par_iter()
        .map(|level| {
            let table = BilliardTable::new(CarpetParams::new(a, level)?);
            Ok(LevelOrbit { level, orbit: simulate(&table, start, max_steps)? })
        })
        .collect::<Result<_>>()?;

    let truncated = orbits.iter().any(|o| !o.orbit.is_closed());
    let keys: Vec<PathKey> = orbits.iter().map(|o| path_key(&o.orbit)).collect();
    let mut first = keys.len() - 1;
    while first > 0 && keys[first - 1] == keys[first] {
        first -= 1;
    }
    let onset = (!truncated).then_some(lo + first as u32);
    let stable = &orbits[first..];
    let classification = match onset {
        None => SequenceClass::Undetermined,
        // a change at the last level shows no constancy yet
        Some(n) if n == hi && lo < hi => SequenceClass::Undetermined,
        Some(_) if stable.iter().all(|o| o.orbit.is_periodic()) => SequenceClass::EventuallyConstantPeriodic,
        Some(_) => SequenceClass::ConstantClosed,
    };
    Ok(SequenceResult { a, levels: (lo, hi), orbits, onset, classification })
}

/// The constant footprint of an eventually constant periodic sequence.
pub fn trivial_limit(seq: &SequenceResult) -> Result<Vec<Point>> {
    if seq.classification != SequenceClass::EventuallyConstantPeriodic {
        return Err(Error::NotEventuallyConstant);
    }
    let onset = seq.onset.ok_or(Error::NotEventuallyConstant)?;
    let member = seq.orbits.iter().find(|o| o.level == onset).ok_or(Error::NotEventuallyConstant)?;
    debug_assert!(matches!(member.orbit.outcome, Outcome::Periodic { .. }));
    Ok(member.orbit.footprint.clone())
}
