//! Named verification suites run by `carpet verify`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::billiard::{simulate, BilliardState, BilliardTable, Outcome};
use crate::carpet::{classify_point, peripheral_square_count, CarpetParams, PointClass};
use crate::compat::{build_sequence, SequenceClass};
use crate::error::{Error, Result};
use crate::geom::{make_rational, Direction, Point, Rational};
use crate::oracle::{chord_end, oracle_contacts, OracleKind};
use crate::segment::{
    classify_segment, classify_segment_exhaustive, corner_hit_solver, parity_point_on_line, verify_a_avoidance_proof,
    verify_b_avoidance, SegmentClassification, SegmentQuery,
};
use crate::slopes::{slopes_a, slopes_a_difference, slopes_a_new, slopes_b};
use crate::surface::{build_surface, genus_census, genus_paper_formula, surface_report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Catalog,
    Lemma31,
    Theorem34,
    Theorem46,
    Prop47,
    Surface,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Catalog, Suite::Lemma31, Suite::Theorem34, Suite::Theorem46, Suite::Prop47, Suite::Surface];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Catalog => "catalog",
            Suite::Lemma31 => "lemma31",
            Suite::Theorem34 => "theorem34",
            Suite::Theorem46 => "theorem46",
            Suite::Prop47 => "prop47",
            Suite::Surface => "surface",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::BadArgument(format!("unknown suite {s:?}")))
    }
}

/// Comma-separated suite names; `all` expands to every suite.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part == "all" {
            out.extend(Suite::ALL);
        } else {
            out.push(part.parse()?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub a_values: Vec<u64>,
    pub depth: u32,
    pub max_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed, detail: detail.into() }
    }

    fn from_result(name: impl Into<String>, r: Result<(bool, String)>) -> Check {
        match r {
            Ok((passed, detail)) => Check::new(name, passed, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

type Job = Box<dyn Fn() -> Check + Send + Sync>;

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> SuiteReport {
    let jobs = match suite {
        Suite::Catalog => catalog_jobs(cfg),
        Suite::Lemma31 => lemma31_jobs(),
        Suite::Theorem34 => theorem34_jobs(cfg),
        Suite::Theorem46 => theorem46_jobs(cfg),
        Suite::Prop47 => prop47_jobs(cfg),
        Suite::Surface => surface_jobs(cfg),
    };
    let checks: Vec<Check> = jobs.par_iter().map(|j| j()).collect();
    SuiteReport { suite, passed: checks.iter().all(|c| c.passed), checks }
}

fn fracs(v: &[(i64, i64)]) -> Vec<Rational> {
    let mut out: Vec<Rational> = v.iter().map(|&(p, q)| Rational::frac(p, q)).collect();
    out.sort();
    out
}

type Pairs = &'static [(i64, i64)];

/// The published catalogs for the first four carpets.
pub fn printed_catalog(a: u64) -> Option<(Vec<Rational>, Vec<Rational>)> {
    let (sa, sb): (Pairs, Pairs) = match a {
        3 => (&[(0, 1), (1, 2)], &[(1, 1)]),
        5 => (&[(0, 1), (1, 4), (1, 2), (2, 3)], &[(1, 3), (1, 1)]),
        7 => (&[(0, 1), (1, 6), (1, 4), (2, 5), (1, 2), (2, 3), (3, 4)], &[(1, 5), (1, 3), (1, 1)]),
        9 => (
            &[(0, 1), (1, 8), (1, 6), (1, 4), (2, 7), (2, 5), (1, 2), (2, 3), (3, 4), (4, 5)],
            &[(1, 7), (1, 5), (1, 3), (3, 5), (1, 1)],
        ),
        _ => return None,
    };
    Some((fracs(sa), fracs(sb)))
}

fn show(v: &[Rational]) -> String {
    v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

fn catalog_jobs(cfg: &SuiteConfig) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &a in &cfg.a_values {
        jobs.push(Box::new(move || {
            Check::from_result(
                format!("catalog a={a}"),
                (|| {
                    let (sa, sb) = (slopes_a(a)?, slopes_b(a)?);
                    Ok(match printed_catalog(a) {
                        Some((pa, pb)) => (sa == pa && sb == pb, format!("A = {{{}}}, B = {{{}}}", show(&sa), show(&sb))),
                        None => {
                            // no printed list: check nesting in the previous carpet
                            let nested = a < 5
                                || (slopes_a(a - 2)?.iter().all(|r| sa.contains(r))
                                    && slopes_b(a - 2)?.iter().all(|r| sb.contains(r)));
                            (nested, format!("|A| = {}, |B| = {}, nested in a-2: {nested}", sa.len(), sb.len()))
                        }
                    })
                })(),
            )
        }));
    }
    jobs
}

fn lemma31_jobs() -> Vec<Job> {
    (5..=99u64)
        .step_by(2)
        .map(|a| -> Job {
            Box::new(move || {
                Check::from_result(
                    format!("new slopes a={a}"),
                    (|| {
                        let (closed, diff) = (slopes_a_new(a)?, slopes_a_difference(a)?);
                        Ok((closed == diff, format!("{} slopes", closed.len())))
                    })(),
                )
            })
        })
        .collect()
}

fn query(a: u64, depth: u32, start: Point, slope: Rational) -> Result<SegmentQuery> {
    Ok(SegmentQuery { start, slope, params: CarpetParams::new(a, depth)? })
}

fn case1(a: u64, alpha: &Rational, depth: u32) -> Result<(bool, String)> {
    let hit = corner_hit_solver(a, alpha)?;
    let collinear = hit.corner.y == alpha * &hit.corner.x;
    let depth = depth.max(hit.level);
    let q = query(a, depth, Point::origin(), alpha.clone())?;
    // the oracle must see the solver's corner as a vertex contact
    let dir = Direction::from_slope(alpha);
    let end = chord_end(&q.start, &dir).ok_or_else(|| Error::NotInward(Box::new(q.start.clone())))?;
    let contacts = oracle_contacts(&q.params, &q.start, &dir, &Rational::zero(), &end, hit.level..=hit.level)?;
    let seen = contacts.iter().any(|c| c.square == hit.square && c.kind == OracleKind::Vertex && c.point == hit.corner);
    let fast = classify_segment(&q)?;
    let slow = classify_segment_exhaustive(&q)?;
    let corner = |c: &SegmentClassification| matches!(c, SegmentClassification::HitsCorner { .. });
    let ok = collinear && seen && hit.square.is_vertex(&hit.corner) && corner(&fast) && fast == slow;
    let first = match &fast {
        SegmentClassification::HitsCorner { point, .. } => point.to_string(),
        other => other.label().to_string(),
    };
    Ok((ok, format!("solver corner {} at level {}, first contact {first}", hit.corner, hit.level)))
}

fn case2(a: u64, alpha: &Rational, depth: u32) -> Result<(bool, String)> {
    verify_a_avoidance_proof(a, alpha)?;
    let q = query(a, depth, Point::origin(), alpha.clone())?;
    let fast = classify_segment(&q)?;
    let slow = classify_segment_exhaustive(&q)?;
    let avoid = |c: &SegmentClassification| matches!(c, SegmentClassification::AvoidsAll { .. });
    Ok((avoid(&fast) && avoid(&slow), format!("{} / exhaustive {}", fast.label(), slow.label())))
}

/// Every odd `r` below `2a^n`.
pub fn odd_offsets(a: u64, n: u32) -> Vec<u64> {
    let top = 2 * a.pow(n);
    (1..top).step_by(2).collect()
}

fn case3(a: u64, alpha: &Rational, n: u32, depth: u32) -> Result<(bool, String)> {
    let mut fine = 0;
    let mut coarse = 0;
    for r in odd_offsets(a, n) {
        let res = verify_b_avoidance(a, alpha, n, r, depth)?;
        fine += res.fine_contacts.len();
        coarse += res.coarse_contacts.len();
    }
    Ok((fine == 0, format!("{fine} contacts below side a^-{n}, {coarse} at coarser levels")))
}

/// Sweeps small `(u, v, l, m)` and confirms none lies on a `B_a` line.
fn parity_sweep(a: u64, alpha: &Rational, n: u32) -> Result<(bool, String)> {
    let (p, q) = (u64::try_from(alpha.numer().clone()).unwrap_or(0), u64::try_from(alpha.denom().clone()).unwrap_or(1));
    let mut tested = 0u64;
    for r in odd_offsets(a, n).into_iter().take(8) {
        for l in 0..=2u32 {
            for m in 0..=2u32 {
                for u in 0..=a.pow(l) {
                    for v in 0..=a.pow(m) {
                        tested += 1;
                        if parity_point_on_line(a, p, q, n, r, u, v, l, m) {
                            return Ok((false, format!("({u}/{a}^{l}, {v}/{a}^{m}) lies on the line, r={r}")));
                        }
                    }
                }
            }
        }
    }
    Ok((true, format!("{tested} grid points off the line")))
}

fn theorem34_jobs(cfg: &SuiteConfig) -> Vec<Job> {
    let d = cfg.depth;
    let mut jobs: Vec<Job> = Vec::new();
    for &a in &cfg.a_values {
        if a >= 5 {
            for alpha in slopes_a_new(a).unwrap_or_default() {
                jobs.push(Box::new(move || Check::from_result(format!("corner a={a} slope={alpha}"), case1(a, &alpha, d))));
            }
        }
        for alpha in slopes_a(a - 2).unwrap_or_default() {
            jobs.push(Box::new(move || Check::from_result(format!("avoid a={a} slope={alpha} depth={d}"), case2(a, &alpha, d))));
        }
        for alpha in slopes_b(a).unwrap_or_default() {
            for n in 0..=2.min(d) {
                let al = alpha.clone();
                jobs.push(Box::new(move || {
                    Check::from_result(format!("parity a={a} slope={al} n={n} depth={d}"), case3(a, &al, n, d))
                }));
                let al = alpha.clone();
                jobs.push(Box::new(move || {
                    Check::from_result(format!("parity sweep a={a} slope={al} n={n}"), parity_sweep(a, &al, n))
                }));
            }
        }
    }
    jobs
}

fn state(x: Rational, slope: &Rational) -> BilliardState {
    BilliardState::new(Point::new(x, Rational::zero()), Direction::from_slope(slope))
}

fn on_peripheral(a: u64, level: u32, pts: &[Point]) -> Result<bool> {
    let params = CarpetParams::new(a, level)?;
    Ok(pts.iter().any(|p| matches!(classify_point(&params, p), PointClass::OnPeripheralBoundary { .. })))
}

fn part1(a: u64, alpha: &Rational, d: u32, max_steps: u64) -> Result<(bool, String)> {
    let seq = build_sequence(a, &state(Rational::zero(), alpha), 0..=d, max_steps)?;
    let mut touches = false;
    for o in &seq.orbits {
        touches |= on_peripheral(a, o.level, &o.orbit.footprint)?;
    }
    let ok = seq.classification == SequenceClass::EventuallyConstantPeriodic && seq.onset == Some(0) && !touches;
    Ok((ok, format!("{:?} onset {:?}, touches squares: {touches}", seq.classification, seq.onset)))
}

fn part2(a: u64, alpha: &Rational, n: u32, r: u64, d: u32, max_steps: u64) -> Result<(bool, String)> {
    let x = make_rational(r, 2 * a.pow(n))?;
    let seq = build_sequence(a, &state(x, alpha), 0..=d, max_steps)?;
    let ok = seq.classification == SequenceClass::EventuallyConstantPeriodic && seq.onset.is_some_and(|o| o <= n);
    Ok((ok, format!("{:?} onset {:?}", seq.classification, seq.onset)))
}

/// A few spread-out odd offsets for the sampled sequence checks.
fn sample_offsets(a: u64, n: u32) -> Vec<u64> {
    let top = 2 * a.pow(n);
    let mut v = vec![1, a.pow(n), top - 1];
    if top > 6 {
        v.push(3);
    }
    v.sort();
    v.dedup();
    v
}

fn theorem46_jobs(cfg: &SuiteConfig) -> Vec<Job> {
    let (d, steps) = (cfg.depth, cfg.max_steps);
    let mut jobs: Vec<Job> = Vec::new();
    for &a in &cfg.a_values {
        for alpha in slopes_a(a - 2).unwrap_or_default().into_iter().filter(|x| !x.is_zero()) {
            jobs.push(Box::new(move || Check::from_result(format!("origin a={a} slope={alpha}"), part1(a, &alpha, d, steps))));
        }
        for alpha in slopes_b(a).unwrap_or_default() {
            for n in 0..=2.min(d) {
                for r in sample_offsets(a, n) {
                    let al = alpha.clone();
                    jobs.push(Box::new(move || {
                        Check::from_result(format!("offset a={a} slope={al} r/2a^n={r}/2*{a}^{n}"), part2(a, &al, n, r, d, steps))
                    }));
                }
            }
        }
    }
    jobs.push(Box::new(move || {
        Check::from_result(
            "start (3/10,0) a=5 slope 1/3".to_string(),
            (|| {
                let seq = build_sequence(5, &state(Rational::frac(3, 10), &Rational::frac(1, 3)), 0..=d.max(1), steps)?;
                let ok = seq.classification == SequenceClass::EventuallyConstantPeriodic && seq.onset.is_some_and(|o| o <= 1);
                Ok((ok, format!("{:?} onset {:?}", seq.classification, seq.onset)))
            })(),
        )
    }));
    jobs
}

fn corner_base(a: u64, alpha: &Rational, m: u32, d: u32, max_steps: u64) -> Result<(bool, String)> {
    let mut worst = 0;
    let mut bases = 0;
    for k in 0..a.pow(m) {
        let x = make_rational(k, a.pow(m))?;
        let seq = build_sequence(a, &state(x.clone(), alpha), 0..=d, max_steps)?;
        bases += 1;
        if seq.orbits.iter().any(|o| !o.orbit.is_closed()) {
            return Ok((false, format!("base {x}: truncated orbit")));
        }
        match seq.onset {
            Some(n) if n <= m => worst = worst.max(n),
            _ => return Ok((false, format!("base {x}: onset {:?} above {m}", seq.onset))),
        }
    }
    Ok((worst <= m, format!("{bases} bases, latest onset {worst}")))
}

fn prop47_jobs(cfg: &SuiteConfig) -> Vec<Job> {
    let (d, steps) = (cfg.depth, cfg.max_steps);
    let mut jobs: Vec<Job> = Vec::new();
    for &a in cfg.a_values.iter().filter(|&&a| a == 5 || a == 7) {
        for alpha in slopes_a(a - 2).unwrap_or_default().into_iter().filter(|x| !x.is_zero()) {
            for m in 1..=2.min(d) {
                let al = alpha.clone();
                jobs.push(Box::new(move || {
                    Check::from_result(format!("bases k/{a}^{m} slope={al}"), corner_base(a, &al, m, d, steps))
                }));
            }
        }
    }
    for (slope, want) in [((2, 3), "singular"), ((1, 2), "periodic")] {
        jobs.push(Box::new(move || {
            Check::from_result(
                format!("start (1/7,0) a=7 n=2 slope {}/{}", slope.0, slope.1),
                (|| {
                    let table = BilliardTable::new(CarpetParams::new(7, 2)?);
                    let o = simulate(&table, &state(Rational::frac(1, 7), &Rational::frac(slope.0, slope.1)), steps)?;
                    let at = match &o.outcome {
                        Outcome::Singular { at, .. } => format!(" at {at}"),
                        _ => String::new(),
                    };
                    Ok((o.outcome.label() == want, format!("{}{at}", o.outcome.label())))
                })(),
            )
        }));
    }
    jobs
}

fn census_check(a: u64, n: u32) -> Result<(bool, String)> {
    let s = build_surface(a, n)?;
    let census = s.census();
    let p = peripheral_square_count(a, n) as u64;
    let mut want = vec![(2, 4)];
    if p > 0 {
        want.push((6, 4 * p));
    }
    let (g, chi) = genus_census(&s)?;
    Ok((census.entries == want, format!("census {:?}, genus {g}, euler {chi}", census.entries)))
}

fn surface_jobs(cfg: &SuiteConfig) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &a in &cfg.a_values {
        for n in 0..=2.min(cfg.depth) {
            jobs.push(Box::new(move || Check::from_result(format!("census a={a} n={n}"), census_check(a, n))));
        }
    }
    jobs.push(Box::new(|| {
        Check::from_result(
            "closed-form genus (3,1)=3 and (3,2)=9",
            (|| {
                let (g1, g2) = (genus_paper_formula(3, 1)?, genus_paper_formula(3, 2)?);
                Ok((g1 == 3 && g2 == 9, format!("{g1}, {g2}")))
            })(),
        )
    }));
    jobs.push(Box::new(|| {
        Check::from_result(
            "census genus (3,1)=5",
            (|| {
                let (g, chi) = genus_census(&build_surface(3, 1)?)?;
                Ok((g == 5 && chi == -8, format!("genus {g}, euler {chi}")))
            })(),
        )
    }));
    jobs.push(Box::new(|| {
        Check::from_result(
            "census genus increasing a=3 n<=4",
            (|| {
                let gs = (0..=4).map(|n| Ok(genus_census(&build_surface(3, n)?)?.0)).collect::<Result<Vec<_>>>()?;
                Ok((gs.windows(2).all(|w| w[0] < w[1]), format!("{gs:?}")))
            })(),
        )
    }));
    jobs.push(Box::new(|| {
        Check::from_result(
            "report flags the closed-form mismatch at (3,1)",
            (|| {
                let r = surface_report(3, 1)?;
                Ok((
                    !r.consistent && r.flags.gauss_bonnet_vs_euler,
                    format!("closed form {}, census {}", r.genus_paper, r.genus_census),
                ))
            })(),
        )
    }));
    jobs
}
