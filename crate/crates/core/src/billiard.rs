//! Exact billiard dynamics on `Ω(S_{a,n})` and on single cells of it.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::carpet::{
    classify_point, CarpetParams, CellAddress, CellBox, CellIndex, Feature, PeripheralSquare, PointClass, ValidCells,
};
use crate::error::{Error, Result};
use crate::geom::{ray_wall_hit, Direction, Point, Rational};
use crate::walk::{box_interval, scan, ContactFeature, ScanOrder};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Continuation at a corner of the outer square (or of a barrier cell).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CornerRule {
    /// `d -> -d`, the limit of the two nearby wall reflections.
    #[default]
    Retro,
    /// Mirror image of `-d` across the corner's angle bisector.
    Bisector,
}

impl FromStr for CornerRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retro" => Ok(CornerRule::Retro),
            "bisector" => Ok(CornerRule::Bisector),
            _ => Err(Error::BadArgument(format!("unknown corner rule {s:?} (expected retro or bisector)"))),
        }
    }
}

impl fmt::Display for CornerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CornerRule::Retro => "retro",
            CornerRule::Bisector => "bisector",
        })
    }
}

impl CornerRule {
    /// Outgoing direction at a corner; `main_diagonal` marks the lower-left
    /// and upper-right corners, whose bisector has slope 1.
    pub fn apply(&self, d: &Direction, main_diagonal: bool) -> Direction {
        match self {
            CornerRule::Retro => d.reversed(),
            CornerRule::Bisector if main_diagonal => d.swapped().reversed(),
            CornerRule::Bisector => d.swapped(),
        }
    }
}

/// The prefractal table, optionally cut down to one cell whose boundary
/// acts as a wall.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilliardTable {
    pub params: CarpetParams,
    pub barrier: Option<CellAddress>,
    pub corner_rule: CornerRule,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BilliardState {
    pub pos: Point,
    pub dir: Direction,
}

impl BilliardState {
    pub fn new(pos: Point, dir: Direction) -> Self {
        BilliardState { pos, dir }
    }
}

impl fmt::Display for BilliardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.pos, self.dir)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Moved(BilliardState),
    Singular { at: Point, square: PeripheralSquare },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum Outcome {
    Periodic { period: u64 },
    Singular { at: Point, square: PeripheralSquare },
    Truncated { steps: u64 },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Periodic { .. } => "periodic",
            Outcome::Singular { .. } => "singular",
            Outcome::Truncated { .. } => "truncated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub initial: BilliardState,
    pub footprint: Vec<Point>,
    pub outcome: Outcome,
}

impl OrbitResult {
    pub fn is_periodic(&self) -> bool {
        matches!(self.outcome, Outcome::Periodic { .. })
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self.outcome, Outcome::Truncated { .. })
    }

    /// Primitive direction of each footprint segment.
    pub fn segment_directions(&self) -> Vec<Direction> {
        self.footprint
            .windows(2)
            .map(|w| {
                let d = Point::new(&w[1].x - &w[0].x, &w[1].y - &w[0].y);
                primitive(&d)
            })
            .collect()
    }

    /// The states leaving each footprint point (all but the last point).
    pub fn states(&self) -> Vec<BilliardState> {
        self.footprint.iter().zip(self.segment_directions()).map(|(p, d)| BilliardState::new(p.clone(), d)).collect()
    }

    /// States of one period rotated to start at the least state; equal for
    /// two periodic orbits exactly when they trace the same closed path.
    pub fn canonical_cycle(&self) -> Option<Vec<BilliardState>> {
        let Outcome::Periodic { .. } = self.outcome else {
            return None;
        };
        let mut states = self.states();
        let start = states.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(i, _)| i)?;
        states.rotate_left(start);
        Some(states)
    }
}

/// Primitive direction of a nonzero rational vector.
fn primitive(v: &Point) -> Direction {
    let l = num_integer::Integer::lcm(v.x.denom(), v.y.denom());
    let dx = v.x.numer() * (&l / v.x.denom());
    let dy = v.y.numer() * (&l / v.y.denom());
    Direction::new(dx, dy).expect("distinct footprint points")
}

/// Where a point sits on the table boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum BoundaryPlace {
    Outer(Feature),
    Peripheral { square: PeripheralSquare, feature: Feature },
}

impl BilliardTable {
    pub fn new(params: CarpetParams) -> Self {
        BilliardTable { params, barrier: None, corner_rule: CornerRule::Retro }
    }

    pub fn with_corner_rule(mut self, rule: CornerRule) -> Self {
        self.corner_rule = rule;
        self
    }

    /// The same table restricted to `cell`; the empty address is the full table.
    pub fn with_barrier(&self, cell: CellAddress) -> Result<Self> {
        let cell = CellAddress::new(self.params.a, cell.0)?;
        if cell.len() as u32 > self.params.depth {
            return Err(Error::BadArgument(format!(
                "barrier cell of level {} is deeper than the table depth {}",
                cell.len(),
                self.params.depth
            )));
        }
        let barrier = (!cell.is_empty()).then_some(cell);
        Ok(BilliardTable { barrier, ..self.clone() })
    }

    pub fn root(&self) -> CellIndex {
        self.barrier.as_ref().map_or(CellIndex::ROOT, |c| c.index(self.params.a))
    }

    pub fn root_box(&self) -> CellBox {
        self.root().bounds(self.params.a)
    }

    pub fn boundary_place(&self, p: &Point) -> Option<BoundaryPlace> {
        let bx = self.root_box();
        if !bx.contains(p) {
            return None;
        }
        if bx.on_boundary(p) {
            let feature = if bx.is_corner(p) { Feature::Corner } else { Feature::Side };
            return Some(BoundaryPlace::Outer(feature));
        }
        match classify_point(&self.params, p) {
            PointClass::OnPeripheralBoundary { square, feature } => Some(BoundaryPlace::Peripheral { square, feature }),
            _ => None,
        }
    }

    /// Checks that `s` is a legal starting state.
    pub fn validate(&self, s: &BilliardState) -> Result<()> {
        let place = self.boundary_place(&s.pos).ok_or_else(|| Error::NotOnBoundary(Box::new(s.pos.clone())))?;
        let (dx, dy) = (s.dir.dx(), s.dir.dy());
        // For each wall through the point: the sign the normal component must have.
        let mut needs: Vec<(bool, i8)> = Vec::new();
        let (bx, outward) = match &place {
            BoundaryPlace::Outer(_) => (self.root_box(), false),
            BoundaryPlace::Peripheral { square, feature } => {
                if *feature == Feature::Corner {
                    return Err(Error::SingularStart(Box::new(s.pos.clone())));
                }
                (square.bounds(), true)
            }
        };
        let flip = |sign: i8| if outward { -sign } else { sign };
        if s.pos.x == bx.lo.x {
            needs.push((true, flip(1)));
        }
        if s.pos.x == bx.hi.x {
            needs.push((true, flip(-1)));
        }
        if s.pos.y == bx.lo.y {
            needs.push((false, flip(1)));
        }
        if s.pos.y == bx.hi.y {
            needs.push((false, flip(-1)));
        }
        for (vertical, sign) in needs {
            let comp = if vertical { dx } else { dy };
            if comp.is_zero() {
                return Err(Error::DegenerateTangency(Box::new(s.pos.clone())));
            }
            if (comp.is_positive() && sign < 0) || (comp.is_negative() && sign > 0) {
                return Err(Error::NotInward(Box::new(s.pos.clone())));
            }
        }
        Ok(())
    }

    /// Peripheral squares inside the root cell, coarsest first.
    pub fn squares(&self) -> impl Iterator<Item = PeripheralSquare> + '_ {
        let a = self.params.a;
        let root = self.root();
        (0..self.params.depth.saturating_sub(root.level)).flat_map(move |j| {
            let scale = a.pow(j);
            ValidCells::new(a, j).map(move |c| {
                let parent = CellIndex { level: root.level + j, ix: root.ix * scale + c.ix, iy: root.iy * scale + c.iy };
                PeripheralSquare::in_parent(a, parent)
            })
        })
    }

    fn reflect_at_outer(&self, p: &Point, d: &Direction) -> Direction {
        let bx = self.root_box();
        if bx.is_corner(p) {
            self.corner_rule.apply(d, (p.x == bx.lo.x) == (p.y == bx.lo.y))
        } else if p.x == bx.lo.x || p.x == bx.hi.x {
            d.flip_x()
        } else {
            d.flip_y()
        }
    }
}

/// One application of the billiard map, using the cell walker to find the
/// first wall.
pub fn billiard_step(table: &BilliardTable, s: &BilliardState) -> Result<Step> {
    let a = table.params.a;
    let root = table.root();
    let zero = Rational::zero();
    let (_, t_exit) = box_interval(&s.pos, &s.dir, &table.root_box(), &zero, None)
        .filter(|(_, t)| t.is_positive())
        .ok_or_else(|| Error::NotInward(Box::new(s.pos.clone())))?;
    if let Some(c) = scan(a, root, table.params.depth, &s.pos, &s.dir, &t_exit, ScanOrder::Earliest) {
        return Ok(match c.feature {
            ContactFeature::Corner => Step::Singular { at: c.point, square: c.square },
            ContactFeature::VerticalSide => Step::Moved(BilliardState::new(c.point, s.dir.flip_x())),
            ContactFeature::HorizontalSide => Step::Moved(BilliardState::new(c.point, s.dir.flip_y())),
        });
    }
    let p = s.pos.advance(&t_exit, &s.dir);
    let dir = table.reflect_at_outer(&p, &s.dir);
    Ok(Step::Moved(BilliardState::new(p, dir)))
}

/// Reference billiard map: minimizes the hit parameter over every wall of
/// the table.
pub fn billiard_step_exhaustive(table: &BilliardTable, s: &BilliardState) -> Result<Step> {
    let mut best: Option<(Rational, Point)> = None;
    let mut singular: Option<PeripheralSquare> = None;
    let mut consider = |t: Rational, p: Point, square: Option<PeripheralSquare>| match &best {
        Some((bt, _)) if *bt < t => {}
        Some((bt, _)) if *bt == t => {
            if square.as_ref().is_some_and(|sq| sq.is_vertex(&p)) {
                singular = square;
            }
        }
        _ => {
            singular = square.filter(|sq| sq.is_vertex(&p));
            best = Some((t, p));
        }
    };
    for wall in table.root_box().walls() {
        if let Some((t, p)) = ray_wall_hit(&s.pos, &s.dir, &wall) {
            consider(t, p, None);
        }
    }
    for sq in table.squares() {
        for wall in sq.bounds().walls() {
            if let Some((t, p)) = ray_wall_hit(&s.pos, &s.dir, &wall) {
                consider(t, p, Some(sq.clone()));
            }
        }
    }
    let (_, p) = best.ok_or_else(|| Error::NotInward(Box::new(s.pos.clone())))?;
    if let Some(square) = singular {
        return Ok(Step::Singular { at: p, square });
    }
    if table.root_box().on_boundary(&p) {
        let dir = table.reflect_at_outer(&p, &s.dir);
        return Ok(Step::Moved(BilliardState::new(p, dir)));
    }
    // a side of a peripheral square
    let on_vertical = table.squares().any(|sq| {
        let b = sq.bounds();
        (p.x == b.lo.x || p.x == b.hi.x) && b.contains(&p)
    });
    let dir = if on_vertical { s.dir.flip_x() } else { s.dir.flip_y() };
    Ok(Step::Moved(BilliardState::new(p, dir)))
}

/// Iterates the billiard map until the initial state recurs, a peripheral
/// vertex is hit, or `max_steps` steps have been taken.
pub fn simulate(table: &BilliardTable, initial: &BilliardState, max_steps: u64) -> Result<OrbitResult> {
    simulate_with(table, initial, max_steps, billiard_step)
}

pub fn simulate_with(
    table: &BilliardTable,
    initial: &BilliardState,
    max_steps: u64,
    step: impl Fn(&BilliardTable, &BilliardState) -> Result<Step>,
) -> Result<OrbitResult> {
    if max_steps == 0 {
        return Err(Error::BadArgument("max_steps must be at least 1".into()));
    }
    table.validate(initial)?;
    let mut footprint = vec![initial.pos.clone()];
    let mut state = initial.clone();
    for k in 1..=max_steps {
        match step(table, &state)? {
            Step::Singular { at, square } => {
                footprint.push(at.clone());
                return Ok(OrbitResult { initial: initial.clone(), footprint, outcome: Outcome::Singular { at, square } });
            }
            Step::Moved(next) => {
                footprint.push(next.pos.clone());
                if next == *initial {
                    return Ok(OrbitResult { initial: initial.clone(), footprint, outcome: Outcome::Periodic { period: k } });
                }
                state = next;
            }
        }
    }
    Ok(OrbitResult { initial: initial.clone(), footprint, outcome: Outcome::Truncated { steps: max_steps } })
}

/// Orbit of `cell`: the cell boundary is a wall and only squares inside
/// the cell are obstacles.
pub fn orbit_of_cell(table: &BilliardTable, cell: &CellAddress, initial: &BilliardState, max_steps: u64) -> Result<OrbitResult> {
    let cell_table = table.with_barrier(cell.clone())?;
    simulate(&cell_table, initial, max_steps)
}

/// The state that retraces the first `k` footprint segments backwards:
/// the `k`-th footprint point with the arriving velocity negated.
pub fn reversed_state(orbit: &OrbitResult, k: usize) -> Option<BilliardState> {
    if k == 0 || k >= orbit.footprint.len() {
        return None;
    }
    let dirs = orbit.segment_directions();
    Some(BilliardState::new(orbit.footprint[k].clone(), dirs[k - 1].reversed()))
}

/// Isometry `x -> (sx * x, sy * y) + shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct AxisIsometry {
    sx: i8,
    sy: i8,
    shift: Point,
}

impl AxisIsometry {
    fn identity() -> Self {
        AxisIsometry { sx: 1, sy: 1, shift: Point::origin() }
    }

    fn apply(&self, p: &Point) -> Point {
        let f = |s: i8, v: &Rational| if s > 0 { v.clone() } else { -v };
        Point::new(f(self.sx, &p.x) + &self.shift.x, f(self.sy, &p.y) + &self.shift.y)
    }

    fn apply_dir(&self, d: &Direction) -> Direction {
        let mut out = d.clone();
        if self.sx < 0 {
            out = out.flip_x();
        }
        if self.sy < 0 {
            out = out.flip_y();
        }
        out
    }

    /// `self` composed with the reflection across `x = at` (or `y = at`).
    fn then_mirror(&self, vertical: bool, at: &Rational) -> Self {
        let twice = at + at;
        if vertical {
            let moved = if self.sx > 0 { twice } else { -twice };
            AxisIsometry { sx: -self.sx, sy: self.sy, shift: Point::new(&self.shift.x + moved, self.shift.y.clone()) }
        } else {
            let moved = if self.sy > 0 { twice } else { -twice };
            AxisIsometry { sx: self.sx, sy: -self.sy, shift: Point::new(self.shift.x.clone(), &self.shift.y + moved) }
        }
    }
}

/// Reflected-unfolding of a periodic cell orbit into the full table: at a
/// cell wall lying on the outer square the orbit reflects; at any other
/// cell wall it passes into the mirror-image neighbouring cell. Up to
/// `traversals` periods of the cell orbit are replayed.
pub fn reflect_unfold(cell_table: &BilliardTable, cell_orbit: &OrbitResult, traversals: usize) -> Result<OrbitResult> {
    let Outcome::Periodic { period } = cell_orbit.outcome else {
        return Err(Error::NotPeriodic);
    };
    let a = cell_table.params.a;
    let cell = cell_table.root();
    let cell_box = cell_table.root_box();
    let period = period as usize;
    let dirs = cell_orbit.segment_directions();
    let (zero, one) = (Rational::zero(), Rational::one());
    let on_outer = |v: &Rational| *v == zero || *v == one;

    let mut iso = AxisIsometry::identity();
    let initial = cell_orbit.initial.clone();
    let mut footprint = vec![initial.pos.clone()];
    let mut exited = false;
    for i in 0..period * traversals.max(1) {
        let here = &cell_orbit.footprint[i % period + 1];
        let image = iso.apply(here);
        // the copy holding the current segment must be a cell of the table
        let copy_ll = iso.apply(&cell_box.lo).min_corner(&iso.apply(&cell_box.hi));
        let scale = Rational::integer(BigInt::from(a).pow(cell.level));
        let (cx, cy) = (&copy_ll.x * &scale, &copy_ll.y * &scale);
        let limit = Rational::integer(BigInt::from(a).pow(cell.level));
        let copy_ok = cx.is_integer()
            && cy.is_integer()
            && !cx.is_negative()
            && !cy.is_negative()
            && cx < limit
            && cy < limit
            && CellIndex {
                level: cell.level,
                ix: u64::try_from(cx.numer().clone()).unwrap_or(u64::MAX),
                iy: u64::try_from(cy.numer().clone()).unwrap_or(u64::MAX),
            }
            .is_valid(a);
        if !copy_ok {
            return Err(Error::UnfoldingBlocked(Box::new(footprint.last().cloned().unwrap_or_default())));
        }
        let mut bounced = !cell_box.on_boundary(here);
        if !bounced {
            let walls = [(true, &here.x, &cell_box.lo.x, &cell_box.hi.x), (false, &here.y, &cell_box.lo.y, &cell_box.hi.y)];
            let mut next = iso.clone();
            let mut crossings = 0;
            for (vertical, coord, lo, hi) in walls {
                if coord != lo && coord != hi {
                    continue;
                }
                let image_coord = if vertical { &image.x } else { &image.y };
                if on_outer(image_coord) {
                    bounced = true;
                } else {
                    next = next.then_mirror(vertical, coord);
                    crossings += 1;
                }
            }
            if crossings > 0 {
                exited = true;
                if cell_table.corner_rule != CornerRule::Retro && cell_box.is_corner(here) {
                    return Err(Error::BadArgument("reflected-unfolding needs the retro corner rule".into()));
                }
            }
            iso = next;
        }
        if bounced {
            footprint.push(image.clone());
            let d_next = iso.apply_dir(&dirs[(i + 1) % period]);
            if image == initial.pos && d_next == initial.dir {
                let steps = (footprint.len() - 1) as u64;
                return Ok(OrbitResult { initial, footprint, outcome: Outcome::Periodic { period: steps } });
            }
        }
    }
    if !exited {
        return Err(Error::InsufficientTraversals(traversals));
    }
    let steps = (footprint.len() - 1) as u64;
    Ok(OrbitResult { initial, footprint, outcome: Outcome::Truncated { steps } })
}

trait MinCorner {
    fn min_corner(&self, other: &Point) -> Point;
}

impl MinCorner for Point {
    fn min_corner(&self, other: &Point) -> Point {
        Point::new(self.x.clone().min(other.x.clone()), self.y.clone().min(other.y.clone()))
    }
}

/// Straightens an orbit by reflecting a copy of the table at every bounce.
/// Returns the images of the footprint points, which are collinear.
pub fn unfold_to_line(orbit: &OrbitResult) -> Vec<Point> {
    let dirs = orbit.segment_directions();
    // x -> m * (x - pivot) + image(pivot), with m a signed permutation
    let mut m = [[1i8, 0], [0, 1]];
    let mut pivot = orbit.footprint.first().cloned().unwrap_or_default();
    let mut pivot_image = pivot.clone();
    let map = |m: &[[i8; 2]; 2], pivot: &Point, image: &Point, p: &Point| {
        let (dx, dy) = (&p.x - &pivot.x, &p.y - &pivot.y);
        let comb = |a: i8, b: i8| Rational::integer(a) * &dx + Rational::integer(b) * &dy;
        Point::new(comb(m[0][0], m[0][1]) + &image.x, comb(m[1][0], m[1][1]) + &image.y)
    };
    let mut out = Vec::with_capacity(orbit.footprint.len());
    for (i, p) in orbit.footprint.iter().enumerate() {
        let image = map(&m, &pivot, &pivot_image, p);
        out.push(image.clone());
        if let (Some(d_in), Some(d_out)) = (i.checked_sub(1).and_then(|j| dirs.get(j)), dirs.get(i)) {
            // linear part r with r * d_out = d_in, composed on the right
            let r = local_mirror(d_in, d_out);
            m = [
                [m[0][0] * r[0][0] + m[0][1] * r[1][0], m[0][0] * r[0][1] + m[0][1] * r[1][1]],
                [m[1][0] * r[0][0] + m[1][1] * r[1][0], m[1][0] * r[0][1] + m[1][1] * r[1][1]],
            ];
            pivot = p.clone();
            pivot_image = image;
        }
    }
    out
}

/// The signed permutation matrix taking `d_out` back to `d_in`.
fn local_mirror(d_in: &Direction, d_out: &Direction) -> [[i8; 2]; 2] {
    let candidates =
        [[[1, 0], [0, 1]], [[-1, 0], [0, 1]], [[1, 0], [0, -1]], [[-1, 0], [0, -1]], [[0, -1], [-1, 0]], [[0, 1], [1, 0]]];
    for c in candidates {
        let x = BigInt::from(c[0][0]) * d_out.dx() + BigInt::from(c[0][1]) * d_out.dy();
        let y = BigInt::from(c[1][0]) * d_out.dx() + BigInt::from(c[1][1]) * d_out.dy();
        if &x == d_in.dx() && &y == d_in.dy() {
            return c;
        }
    }
    [[1, 0], [0, 1]]
}
