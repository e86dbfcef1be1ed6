//! Translation surface of a prefractal table: four reflected copies glued
//! along their walls, the cone-angle census of the glued vertices, and
//! genus computed by several independent routes.

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::carpet::{peripheral_squares, CarpetParams, CellIndex};
use crate::error::{Error, Result};
use crate::geom::{Point, Rational};

/// One of the four copies, named by the reflections applied to the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sheet {
    Id,
    Rx,
    Ry,
    Rxy,
}

impl Sheet {
    pub const ALL: [Sheet; 4] = [Sheet::Id, Sheet::Rx, Sheet::Ry, Sheet::Rxy];

    fn flips(self) -> (bool, bool) {
        match self {
            Sheet::Id => (false, false),
            Sheet::Rx => (true, false),
            Sheet::Ry => (false, true),
            Sheet::Rxy => (true, true),
        }
    }

    fn from_flips(fx: bool, fy: bool) -> Sheet {
        match (fx, fy) {
            (false, false) => Sheet::Id,
            (true, false) => Sheet::Rx,
            (false, true) => Sheet::Ry,
            (true, true) => Sheet::Rxy,
        }
    }

    /// The copy reached by crossing a wall with the given orientation: a
    /// horizontal wall reflects in y, a vertical one in x.
    pub fn across(self, axis: Axis) -> Sheet {
        let (fx, fy) = self.flips();
        match axis {
            Axis::Horizontal => Sheet::from_flips(fx, !fy),
            Axis::Vertical => Sheet::from_flips(!fx, fy),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// A straight side of the table boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSide {
    pub from: Point,
    pub to: Point,
    pub axis: Axis,
}

/// A corner of the table with its two incident sides and the number of
/// quarter turns of table around it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableVertex {
    pub point: Point,
    pub sides: [usize; 2],
    pub quarter_turns: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WallSide {
    pub copy: Sheet,
    pub side: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexOrbit {
    pub members: Vec<(Sheet, usize)>,
    pub angle_over_pi: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceData {
    pub params: CarpetParams,
    pub copies: [Sheet; 4],
    pub sides: Vec<TableSide>,
    pub vertices: Vec<TableVertex>,
    /// Each unordered pair once.
    pub gluing: Vec<(WallSide, WallSide)>,
    pub vertex_orbits: Vec<VertexOrbit>,
}

impl SurfaceData {
    pub fn partner_map(&self) -> HashMap<WallSide, WallSide> {
        let mut map = HashMap::with_capacity(2 * self.gluing.len());
        for &(l, r) in &self.gluing {
            map.insert(l, r);
            map.insert(r, l);
        }
        map
    }

    pub fn census(&self) -> SingularityCensus {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for o in &self.vertex_orbits {
            *counts.entry(o.angle_over_pi).or_default() += 1;
        }
        SingularityCensus { entries: counts.into_iter().collect() }
    }
}

/// Cone angles in units of pi with their multiplicities, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityCensus {
    pub entries: Vec<(u64, u64)>,
}

impl SingularityCensus {
    pub fn count(&self, angle_over_pi: u64) -> u64 {
        self.entries.iter().find(|e| e.0 == angle_over_pi).map_or(0, |e| e.1)
    }
}

/// Side length of the finest grid as an integer.
fn grid_size(params: &CarpetParams) -> Result<u64> {
    params
        .a
        .checked_pow(params.depth)
        .ok_or_else(|| Error::BadArgument(format!("grid a^n too large for a={} n={}", params.a, params.depth)))
}

fn to_grid(v: &Rational, g: u64) -> u64 {
    let scaled = v.mul_int(&g.into());
    debug_assert!(scaled.is_integer());
    num_traits::ToPrimitive::to_u64(scaled.numer()).expect("grid coordinate")
}

fn cell_valid(params: &CarpetParams, g: u64, ix: i64, iy: i64) -> bool {
    let in_range = |v: i64| v >= 0 && (v as u64) < g;
    in_range(ix) && in_range(iy) && CellIndex { level: params.depth, ix: ix as u64, iy: iy as u64 }.is_valid(params.a)
}

fn quarter_turns(params: &CarpetParams, g: u64, p: &Point) -> u32 {
    let (i, j) = (to_grid(&p.x, g) as i64, to_grid(&p.y, g) as i64);
    [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)].into_iter().filter(|&(x, y)| cell_valid(params, g, x, y)).count() as u32
}

/// Sides and corners of a closed box, counterclockwise from the bottom.
fn box_pieces(lo: &Point, hi: &Point, first_side: usize) -> ([TableSide; 4], [(Point, [usize; 2]); 4]) {
    let c = [lo.clone(), Point::new(hi.x.clone(), lo.y.clone()), hi.clone(), Point::new(lo.x.clone(), hi.y.clone())];
    let axes = [Axis::Horizontal, Axis::Vertical, Axis::Horizontal, Axis::Vertical];
    let sides = std::array::from_fn(|k| TableSide { from: c[k].clone(), to: c[(k + 1) % 4].clone(), axis: axes[k] });
    // corner k joins side k and side k-1
    let corners = std::array::from_fn(|k| (c[k].clone(), [first_side + k, first_side + (k + 3) % 4]));
    (sides, corners)
}

pub fn build_surface(a: u64, n: u32) -> Result<SurfaceData> {
    let params = CarpetParams::new(a, n)?;
    let g = grid_size(&params)?;
    let mut boxes = vec![(Point::origin(), Point::frac(1, 1, 1, 1))];
    for level in 1..=n {
        for sq in peripheral_squares(&params, level)? {
            let b = sq.bounds();
            boxes.push((b.lo, b.hi));
        }
    }
    let mut sides = Vec::with_capacity(4 * boxes.len());
    let mut vertices = Vec::with_capacity(4 * boxes.len());
    for (lo, hi) in &boxes {
        let (s, c) = box_pieces(lo, hi, sides.len());
        sides.extend(s);
        for (point, inc) in c {
            let quarter_turns = quarter_turns(&params, g, &point);
            vertices.push(TableVertex { point, sides: inc, quarter_turns });
        }
    }

    let mut gluing = Vec::with_capacity(2 * sides.len());
    for (k, side) in sides.iter().enumerate() {
        for copy in Sheet::ALL {
            let here = WallSide { copy, side: k };
            let there = WallSide { copy: copy.across(side.axis), side: k };
            if here < there {
                gluing.push((here, there));
            }
        }
    }

    let mut surface = SurfaceData { params, copies: Sheet::ALL, sides, vertices, gluing, vertex_orbits: Vec::new() };
    surface.vertex_orbits = vertex_orbits(&surface)?;
    Ok(surface)
}

/// Follows wedges around each vertex: leave the wedge of one copy through
/// an incident side, arrive in the glued copy, leave through the other side.
fn vertex_orbits(s: &SurfaceData) -> Result<Vec<VertexOrbit>> {
    let partner = s.partner_map();
    let mut seen = vec![[false; 4]; s.vertices.len()];
    let mut out = Vec::new();
    for (vi, v) in s.vertices.iter().enumerate() {
        for start in Sheet::ALL {
            if seen[vi][start.index()] {
                continue;
            }
            let mut members = Vec::new();
            let (mut copy, mut exit) = (start, 0usize);
            loop {
                seen[vi][copy.index()] = true;
                members.push((copy, vi));
                let ws = WallSide { copy, side: v.sides[exit] };
                copy = partner.get(&ws).ok_or(Error::BadArgument(format!("side {} of {:?} is unglued", ws.side, ws.copy)))?.copy;
                exit = 1 - exit;
                if copy == start && exit == 0 {
                    break;
                }
            }
            // each wedge visit is one pass through the vertex's table angle
            let quarter_turns = members.len() as u64 * v.quarter_turns as u64;
            if !quarter_turns.is_multiple_of(2) {
                return Err(Error::BadArgument(format!("vertex {} has angle {quarter_turns}/2 pi", v.point)));
            }
            out.push(VertexOrbit { members, angle_over_pi: quarter_turns / 2 });
        }
    }
    Ok(out)
}

/// Euler characteristic from Gauss-Bonnet: `chi = -sum(angle/pi - 2)/2`.
fn euler_gauss_bonnet(s: &SurfaceData) -> Result<i64> {
    let excess: i64 = s.vertex_orbits.iter().map(|o| o.angle_over_pi as i64 - 2).sum();
    if excess % 2 != 0 {
        return Err(Error::NonIntegerGenus(format!("cone excess {excess} pi is not a multiple of 2 pi")));
    }
    Ok(-excess / 2)
}

const MAX_GRID_CELLS: u64 = 1 << 24;

/// Smallest partition of the four copies closed under the given crossings.
fn copy_classes(crossings: &[Axis]) -> i64 {
    let mut parent = [0usize, 1, 2, 3];
    fn find(p: &mut [usize; 4], x: usize) -> usize {
        if p[x] != x {
            p[x] = find(p, p[x]);
        }
        p[x]
    }
    for &axis in crossings {
        for c in Sheet::ALL {
            let (l, r) = (find(&mut parent, c.index()), find(&mut parent, c.across(axis).index()));
            parent[l] = r;
        }
    }
    (0..4).filter(|&i| find(&mut parent, i) == i).count() as i64
}

/// `V - E + F` on the complex whose faces are the valid cells of the finest
/// grid in each copy. Cells are disks, so no slits are needed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerCount {
    pub vertices: i64,
    pub edges: i64,
    pub faces: i64,
}

impl EulerCount {
    pub fn chi(&self) -> i64 {
        self.vertices - self.edges + self.faces
    }
}

pub fn euler_count(params: &CarpetParams) -> Result<EulerCount> {
    let g = grid_size(params)?;
    if g.saturating_mul(g) > MAX_GRID_CELLS {
        return Err(Error::BadArgument(format!("grid of {g}x{g} cells is too large for the Euler count")));
    }
    let gi = g as i64;
    let valid: Vec<bool> =
        (0..g * g).map(|k| CellIndex { level: params.depth, ix: k % g, iy: k / g }.is_valid(params.a)).collect();
    let cell = |x: i64, y: i64| x >= 0 && y >= 0 && x < gi && y < gi && valid[(y * gi + x) as usize];

    let faces = 4 * valid.iter().filter(|&&v| v).count() as i64;
    // unit edge from (x,y) along the axis: adjacent cells on either side
    let edge_cells = |x: i64, y: i64, axis: Axis| match axis {
        Axis::Horizontal => (cell(x, y - 1), cell(x, y)),
        Axis::Vertical => (cell(x - 1, y), cell(x, y)),
    };
    let mut edges = 0;
    let mut vertices = 0;
    for y in 0..=gi {
        for x in 0..=gi {
            for axis in [Axis::Horizontal, Axis::Vertical] {
                let (inside, past) = match axis {
                    Axis::Horizontal => (x < gi, edge_cells(x, y, axis)),
                    Axis::Vertical => (y < gi, edge_cells(x, y, axis)),
                };
                if !inside || !(past.0 || past.1) {
                    continue;
                }
                let boundary = past.0 != past.1;
                edges += if boundary { copy_classes(&[axis]) } else { copy_classes(&[]) };
            }
            // boundary edges meeting the grid point decide which copies share it
            let incident = [
                (x, y, Axis::Horizontal, x < gi),
                (x - 1, y, Axis::Horizontal, x > 0),
                (x, y, Axis::Vertical, y < gi),
                (x, y - 1, Axis::Vertical, y > 0),
            ];
            let mut touched = false;
            let mut crossings = Vec::new();
            for (ex, ey, axis, inside) in incident {
                if !inside {
                    continue;
                }
                let (l, r) = edge_cells(ex, ey, axis);
                touched |= l || r;
                if l != r {
                    crossings.push(axis);
                }
            }
            if touched {
                vertices += copy_classes(&crossings);
            }
        }
    }
    Ok(EulerCount { vertices, edges, faces })
}

/// Genus and Euler characteristic, by Gauss-Bonnet on the census and by
/// counting cells; the two must agree.
pub fn genus_census(s: &SurfaceData) -> Result<(u64, i64)> {
    let gauss_bonnet = euler_gauss_bonnet(s)?;
    let euler = euler_count(&s.params)?.chi();
    if gauss_bonnet != euler {
        return Err(Error::InconsistentComplex { gauss_bonnet, euler });
    }
    if euler > 2 || euler % 2 != 0 {
        return Err(Error::NonIntegerGenus(format!("euler characteristic {euler}")));
    }
    Ok((((2 - euler) / 2) as u64, euler))
}

/// The closed form `1 + 2 * sum_{m=1}^{n} a^{m-1}`.
pub fn genus_paper_formula(a: u64, n: u32) -> Result<u128> {
    CarpetParams::new(a, n)?;
    Ok(1 + 2 * (0..n).map(|k| (a as u128).pow(k)).sum::<u128>())
}

/// `1 + (N/2)(k - 2 - sum 1/n_i)` for a rational polygon with `k` sides and
/// interior angles `m_i pi / n_i`, where `N = lcm(n_i)`.
pub fn genus_polygon_formula(k: u64, denominators: &[u64], n: u64) -> Result<i64> {
    if k < 3 {
        return Err(Error::BadArgument(format!("a polygon needs at least 3 sides, got {k}")));
    }
    if denominators.len() as u64 != k || denominators.contains(&0) {
        return Err(Error::BadArgument(format!("expected {k} positive angle denominators")));
    }
    let lcm = denominators.iter().fold(1u64, |acc, d| acc.lcm(d));
    if lcm != n {
        return Err(Error::BadArgument(format!("N = {n} is not the lcm {lcm} of the denominators")));
    }
    let sum = denominators.iter().fold(Rational::zero(), |acc, &d| acc + Rational::frac(1, d as i64));
    let g = Rational::one() + Rational::frac(n as i64, 2) * (Rational::integer(k as i64 - 2) - sum);
    if !g.is_integer() {
        return Err(Error::NonIntegerGenus(g.to_string()));
    }
    num_traits::ToPrimitive::to_i64(g.numer()).ok_or_else(|| Error::NonIntegerGenus(g.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyFlags {
    pub paper_vs_census: bool,
    pub polygon_vs_census: bool,
    pub gauss_bonnet_vs_euler: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusReport {
    pub a: u64,
    pub n: u32,
    pub census: Vec<(u64, u64)>,
    pub genus_paper: u128,
    pub genus_polygon: i64,
    pub genus_census: u64,
    pub euler: i64,
    /// Whether the closed form agrees with the census.
    pub consistent: bool,
    pub flags: ConsistencyFlags,
}

pub fn surface_report(a: u64, n: u32) -> Result<GenusReport> {
    let s = build_surface(a, n)?;
    let gauss_bonnet = euler_gauss_bonnet(&s)?;
    let euler = euler_count(&s.params)?.chi();
    let (genus_census, euler) = match genus_census(&s) {
        Ok(v) => v,
        Err(Error::InconsistentComplex { .. }) => ((2 - gauss_bonnet) as u64 / 2, euler),
        Err(e) => return Err(e),
    };
    let genus_paper = genus_paper_formula(a, n)?;
    // table as one polygon: every outer corner has angle pi/2, every
    // peripheral corner 3pi/2, all with denominator 2
    let k = s.sides.len() as u64;
    let genus_polygon = genus_polygon_formula(k, &vec![2; k as usize], 2)?;
    let flags = ConsistencyFlags {
        paper_vs_census: genus_paper == genus_census as u128,
        polygon_vs_census: genus_polygon == genus_census as i64,
        gauss_bonnet_vs_euler: gauss_bonnet == euler,
    };
    Ok(GenusReport {
        a,
        n,
        census: s.census().entries,
        genus_paper,
        genus_polygon,
        genus_census,
        euler,
        consistent: flags.paper_vs_census,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_at_depth_zero() {
        let s = build_surface(5, 0).unwrap();
        assert_eq!(s.census().entries, vec![(2, 4)]);
        assert_eq!(genus_census(&s).unwrap(), (1, 0));
        assert_eq!(euler_count(&s.params).unwrap(), EulerCount { vertices: 4, edges: 8, faces: 4 });
    }

    #[test]
    fn first_level_census() {
        for a in [3, 5] {
            let s = build_surface(a, 1).unwrap();
            assert_eq!(s.census().entries, vec![(2, 4), (6, 4)]);
        }
        let s = build_surface(3, 1).unwrap();
        assert_eq!(genus_census(&s).unwrap(), (5, -8));
        assert_eq!(euler_count(&s.params).unwrap(), EulerCount { vertices: 24, edges: 64, faces: 32 });
        assert_eq!(genus_census(&build_surface(3, 2).unwrap()).unwrap().0, 37);
    }

    #[test]
    fn gluing_is_an_involutive_matching() {
        let s = build_surface(3, 2).unwrap();
        let map = s.partner_map();
        assert_eq!(map.len(), 4 * s.sides.len());
        for (k, v) in &map {
            assert_ne!(k, v);
            assert_eq!(map[v], *k);
        }
    }

    #[test]
    fn polygon_formula() {
        assert_eq!(genus_polygon_formula(4, &[2; 4], 2).unwrap(), 1);
        assert_eq!(genus_polygon_formula(3, &[2, 4, 4], 4).unwrap(), 1);
        assert_eq!(genus_polygon_formula(8, &[2; 8], 2).unwrap(), 3);
        // equilateral triangle: 1 + (3/2)(1 - 1) = 1
        assert_eq!(genus_polygon_formula(3, &[3, 3, 3], 3).unwrap(), 1);
        assert!(matches!(genus_polygon_formula(3, &[2, 3, 6], 6), Ok(1)));
        assert!(matches!(genus_polygon_formula(2, &[2, 2], 2), Err(Error::BadArgument(_))));
        assert!(matches!(genus_polygon_formula(4, &[2; 4], 4), Err(Error::BadArgument(_))));
    }

    #[test]
    fn reports() {
        let r = surface_report(3, 1).unwrap();
        assert_eq!((r.genus_paper, r.genus_census, r.genus_polygon, r.consistent), (3, 5, 3, false));
        assert!(r.flags.gauss_bonnet_vs_euler);
        let r = surface_report(7, 0).unwrap();
        assert_eq!((r.genus_paper, r.genus_census, r.consistent), (1, 1, true));
        assert_eq!(genus_paper_formula(3, 2).unwrap(), 9);
    }
}
