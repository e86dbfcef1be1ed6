//! End-to-end acceptance run. One line per criterion, with its wall time
//! against the allowed budget. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use carpet_core::billiard::{reversed_state, simulate, BilliardState, BilliardTable, Outcome};
use carpet_core::carpet::peripheral_square_count;
use carpet_core::compat::{build_sequence, SequenceClass};
use carpet_core::oracle::{chord_end, oracle_contacts, OracleKind};
use carpet_core::segment::{
    classify_segment, classify_segment_exhaustive, corner_hit_solver, parity_point_on_line, verify_b_avoidance, Argument,
    Certificate, SegmentClassification, SegmentQuery,
};
use carpet_core::slopes::{slopes_a, slopes_a_difference, slopes_a_new, slopes_b};
use carpet_core::surface::{build_surface, genus_census, genus_paper_formula, surface_report};
use carpet_core::{CarpetParams, Direction, Point, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Verdict = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Verdict);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fracs(v: &[(i64, i64)]) -> Vec<Rational> {
    let mut out: Vec<Rational> = v.iter().map(|&(p, q)| Rational::frac(p, q)).collect();
    out.sort();
    out
}

fn from_origin(a: u64, depth: u32, slope: &Rational) -> SegmentQuery {
    SegmentQuery { start: Point::origin(), slope: slope.clone(), params: CarpetParams::new(a, depth).unwrap() }
}

fn bottom(x: Rational, slope: &Rational) -> BilliardState {
    BilliardState::new(Point::new(x, Rational::zero()), Direction::from_slope(slope))
}

fn catalogs() -> Verdict {
    let printed = [
        (3, fracs(&[(0, 1), (1, 2)]), fracs(&[(1, 1)])),
        (5, fracs(&[(0, 1), (1, 4), (1, 2), (2, 3)]), fracs(&[(1, 3), (1, 1)])),
        (7, fracs(&[(0, 1), (1, 6), (1, 4), (2, 5), (1, 2), (2, 3), (3, 4)]), fracs(&[(1, 5), (1, 3), (1, 1)])),
        (
            9,
            fracs(&[(0, 1), (1, 8), (1, 6), (1, 4), (2, 7), (2, 5), (1, 2), (2, 3), (3, 4), (4, 5)]),
            fracs(&[(1, 7), (1, 5), (1, 3), (3, 5), (1, 1)]),
        ),
    ];
    for (a, sa, sb) in printed {
        ensure(slopes_a(a).map_err(fail)? == sa, format!("A_{a} differs"))?;
        ensure(slopes_b(a).map_err(fail)? == sb, format!("B_{a} differs"))?;
    }
    Ok("A and B match for a = 3, 5, 7, 9".into())
}

fn new_slopes() -> Verdict {
    let mut total = 0;
    for a in (5..=99u64).step_by(2) {
        let (closed, diff) = (slopes_a_new(a).map_err(fail)?, slopes_a_difference(a).map_err(fail)?);
        ensure(closed == diff, format!("a={a}: {} vs {} slopes", closed.len(), diff.len()))?;
        total += closed.len();
    }
    Ok(format!("48 carpets, {total} new slopes"))
}

fn corner_case() -> Verdict {
    let jobs: Vec<(u64, Rational)> =
        [5u64, 7, 9].into_iter().flat_map(|a| slopes_a_new(a).unwrap().into_iter().map(move |s| (a, s))).collect();
    let n = jobs.len();
    jobs.into_par_iter().try_for_each(|(a, alpha)| {
        let hit = corner_hit_solver(a, &alpha).map_err(fail)?;
        let q = from_origin(a, hit.level.max(2), &alpha);
        ensure(hit.corner.y == &alpha * &hit.corner.x, format!("a={a} {alpha}: corner off the line"))?;
        ensure(hit.square.is_vertex(&hit.corner), format!("a={a} {alpha}: not a vertex"))?;
        let dir = Direction::from_slope(&alpha);
        let end = chord_end(&q.start, &dir).unwrap();
        let contacts =
            oracle_contacts(&q.params, &q.start, &dir, &Rational::zero(), &end, hit.level..=hit.level).map_err(fail)?;
        let seen = contacts.iter().any(|c| c.kind == OracleKind::Vertex && c.point == hit.corner && c.square == hit.square);
        ensure(seen, format!("a={a} {alpha}: oracle does not see the corner"))?;
        let fast = classify_segment(&q).map_err(fail)?;
        ensure(matches!(fast, SegmentClassification::HitsCorner { .. }), format!("a={a} {alpha}: {}", fast.label()))?;
        ensure(fast == classify_segment_exhaustive(&q).map_err(fail)?, format!("a={a} {alpha}: classifiers disagree"))
    })?;
    let five = corner_hit_solver(5, &Rational::frac(2, 3)).map_err(fail)?;
    ensure(five.corner == Point::frac(3, 5, 2, 5), format!("a=5 2/3 gave {}", five.corner))?;
    let seven = corner_hit_solver(7, &Rational::frac(3, 4)).map_err(fail)?;
    let (deep, _) = seven.at_level(2).ok_or("a=7 3/4 has no level-2 corner")?;
    ensure(deep == Point::frac(4, 49, 3, 49), format!("a=7 3/4 gave {deep}"))?;
    Ok(format!("{n} new slopes, spot values (3/5,2/5) and (4/49,3/49)"))
}

fn avoidance_case() -> Verdict {
    let jobs: Vec<(u64, Rational)> =
        [3u64, 5, 7, 9].into_iter().flat_map(|a| slopes_a(a - 2).unwrap_or_default().into_iter().map(move |s| (a, s))).collect();
    let n = jobs.len();
    jobs.into_par_iter().try_for_each(|(a, alpha)| {
        let q = from_origin(a, 4, &alpha);
        let fast = classify_segment(&q).map_err(fail)?;
        ensure(matches!(fast, SegmentClassification::AvoidsAll { .. }), format!("a={a} {alpha}: {}", fast.label()))?;
        let slow = classify_segment_exhaustive(&q).map_err(fail)?;
        ensure(matches!(slow, SegmentClassification::AvoidsAll { .. }), format!("a={a} {alpha}: oracle says {}", slow.label()))
    })?;
    Ok(format!("{n} slopes avoid every square to depth 4"))
}

fn parity_case() -> Verdict {
    let mut jobs = Vec::new();
    for a in [3u64, 5, 7] {
        for alpha in slopes_b(a).unwrap() {
            for n in 0..=2u32 {
                for r in (1..2 * a.pow(n)).step_by(2) {
                    jobs.push((a, alpha.clone(), n, r));
                }
            }
        }
    }
    let n_lines = jobs.len();
    jobs.par_iter().try_for_each(|(a, alpha, n, r)| {
        let res = verify_b_avoidance(*a, alpha, *n, *r, 4).map_err(fail)?;
        let backed = res.certificate == Certificate::TheoremBacked(Argument::Parity { n: *n, r: *r });
        ensure(backed && res.confirmed(), format!("a={a} {alpha} n={n} r={r}: {} fine contacts", res.fine_contacts.len()))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..10_000 {
        let a = [3u64, 5, 7][rng.gen_range(0..3)];
        let b = slopes_b(a).unwrap();
        let alpha = &b[rng.gen_range(0..b.len())];
        let (p, q) = (u64::try_from(alpha.numer().clone()).unwrap(), u64::try_from(alpha.denom().clone()).unwrap());
        let n = rng.gen_range(0..=2u32);
        let r = 2 * rng.gen_range(0..a.pow(n)) + 1;
        let (l, m) = (rng.gen_range(0..=6u32), rng.gen_range(0..=6u32));
        let (u, v) = (rng.gen_range(0..=a.pow(l)), rng.gen_range(0..=a.pow(m)));
        ensure(!parity_point_on_line(a, p, q, n, r, u, v, l, m), format!("({u}/{a}^{l},{v}/{a}^{m}) on a={a} {alpha} r={r}"))?;
    }
    Ok(format!("{n_lines} lines confirmed to depth 4, 10000 random grid points off their lines"))
}

fn origin_sequences() -> Verdict {
    let jobs: Vec<(u64, Rational)> = [3u64, 5, 7]
        .into_iter()
        .flat_map(|a| slopes_a(a - 2).unwrap_or_default().into_iter().filter(|s| !s.is_zero()).map(move |s| (a, s)))
        .collect();
    let n = jobs.len();
    jobs.into_par_iter().try_for_each(|(a, alpha)| {
        let seq = build_sequence(a, &bottom(Rational::zero(), &alpha), 0..=3, 1_000_000).map_err(fail)?;
        ensure(
            seq.classification == SequenceClass::EventuallyConstantPeriodic && seq.onset == Some(0),
            format!("a={a} {alpha}: {:?} onset {:?}", seq.classification, seq.onset),
        )
    })?;
    Ok(format!("{n} sequences periodic and constant from level 0"))
}

fn offset_sequence() -> Verdict {
    let seq = build_sequence(5, &bottom(Rational::frac(3, 10), &Rational::frac(1, 3)), 0..=3, 1_000_000).map_err(fail)?;
    let detail = format!("{:?} onset {:?}", seq.classification, seq.onset);
    ensure(seq.classification == SequenceClass::EventuallyConstantPeriodic && seq.onset.is_some_and(|o| o <= 1), detail.clone())?;
    Ok(detail)
}

fn one_seventh_orbits() -> Verdict {
    let table = BilliardTable::new(CarpetParams::new(7, 2).map_err(fail)?);
    let start = Rational::frac(1, 7);
    let steep = simulate(&table, &bottom(start.clone(), &Rational::frac(2, 3)), 1_000_000).map_err(fail)?;
    let flat = simulate(&table, &bottom(start, &Rational::frac(1, 2)), 1_000_000).map_err(fail)?;
    ensure(matches!(steep.outcome, Outcome::Singular { .. }), format!("slope 2/3 is {}", steep.outcome.label()))?;
    ensure(matches!(flat.outcome, Outcome::Periodic { .. }), format!("slope 1/2 is {}", flat.outcome.label()))?;
    let Outcome::Periodic { period } = flat.outcome else { unreachable!() };
    Ok(format!("2/3 singular after {} bounces, 1/2 periodic with period {period}", steep.footprint.len() - 2))
}

fn surfaces() -> Verdict {
    let (p1, p2) = (genus_paper_formula(3, 1).map_err(fail)?, genus_paper_formula(3, 2).map_err(fail)?);
    ensure(p1 == 3 && p2 == 9, format!("closed form gives {p1}, {p2}"))?;
    let (g, chi) = genus_census(&build_surface(3, 1).map_err(fail)?).map_err(fail)?;
    ensure(g == 5 && chi == -8, format!("(3,1) census genus {g}, euler {chi}"))?;
    let r = surface_report(3, 1).map_err(fail)?;
    ensure(r.flags.gauss_bonnet_vs_euler && r.euler == chi, "Gauss-Bonnet and cell count disagree")?;
    ensure(!r.consistent && !r.flags.paper_vs_census, "closed-form mismatch not flagged")?;
    for a in [3u64, 5, 7] {
        for n in 0..=2 {
            let p = peripheral_square_count(a, n) as u64;
            let mut want = vec![(2, 4)];
            if p > 0 {
                want.push((6, 4 * p));
            }
            let census = build_surface(a, n).map_err(fail)?.census();
            ensure(census.entries == want, format!("({a},{n}) census {:?}", census.entries))?;
        }
    }
    let gs = (0..=4)
        .map(|n| build_surface(3, n).and_then(|s| genus_census(&s)).map(|x| x.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(fail)?;
    ensure(gs.windows(2).all(|w| w[0] < w[1]), format!("genera {gs:?}"))?;
    Ok(format!("census genera for a=3, n=0..4: {gs:?}; closed form 3 vs census 5 flagged"))
}

fn random_state(rng: &mut ChaCha8Rng) -> BilliardState {
    let den = rng.gen_range(2..=60i64);
    let x = Rational::frac(rng.gen_range(1..den), den);
    let (dx, dy) = loop {
        let (dx, dy) = (rng.gen_range(-9..=9i64), rng.gen_range(1..=9i64));
        if num_integer::gcd(dx, dy) == 1 {
            break (dx, dy);
        }
    };
    // bottom or left wall, both pointing inwards
    if rng.gen_bool(0.5) {
        BilliardState::new(Point::new(x, Rational::zero()), Direction::new(dx, dy).unwrap())
    } else {
        BilliardState::new(Point::new(Rational::zero(), x), Direction::new(dy, dx).unwrap())
    }
}

fn dynamics() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases: Vec<(u64, u32, BilliardState)> =
        (0..1000).map(|_| ([3u64, 5, 7][rng.gen_range(0..3)], rng.gen_range(0..=2u32), random_state(&mut rng))).collect();
    let counts = cases
        .par_iter()
        .map(|(a, depth, s)| {
            let table = BilliardTable::new(CarpetParams::new(*a, *depth).unwrap());
            let o = simulate(&table, s, 1_000_000).map_err(fail)?;
            let speed = s.dir.speed_components();
            ensure(o.segment_directions().iter().all(|d| d.speed_components() == speed), format!("a={a} {s}: speed changed"))?;
            let moved = match o.outcome {
                Outcome::Periodic { .. } => o.footprint.len() - 1,
                Outcome::Singular { .. } => o.footprint.len() - 2,
                Outcome::Truncated { .. } => return Err(format!("a={a} depth={depth} {s}: not closed in 10^6 steps")),
            };
            if moved > 0 {
                let back = simulate(&table, &reversed_state(&o, moved).unwrap(), moved as u64).map_err(fail)?;
                let mut want = o.footprint[..=moved].to_vec();
                want.reverse();
                ensure(back.footprint == want, format!("a={a} depth={depth} {s}: reversal does not retrace"))?;
            }
            Ok(matches!(o.outcome, Outcome::Periodic { .. }))
        })
        .collect::<Result<Vec<bool>, String>>()?;
    let periodic = counts.iter().filter(|&&p| p).count();
    Ok(format!("1000 orbits closed: {periodic} periodic, {} singular", 1000 - periodic))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("slope catalogs", 1, catalogs),
        ("new slopes are the set difference", 5, new_slopes),
        ("new slopes hit a corner", 10, corner_case),
        ("older slopes avoid every square", 300, avoidance_case),
        ("B slopes and the parity property", 300, parity_case),
        ("sequences from the origin", 120, origin_sequences),
        ("sequence from (3/10,0)", 30, offset_sequence),
        ("singular and periodic orbits from (1/7,0)", 10, one_seventh_orbits),
        ("surface genus and census", 60, surfaces),
        ("time reversal, speed and closedness", 300, dynamics),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let res = run();
        let took = t0.elapsed();
        let over = took > Duration::from_secs(budget);
        let (tag, detail) = match (&res, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {tag} {:>8.3}s / {budget}s  {name}: {detail}", i + 1, took.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
