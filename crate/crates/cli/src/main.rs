use std::fs;
use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use carpet_core::billiard::{simulate, BilliardState, BilliardTable, CornerRule, Outcome, DEFAULT_MAX_STEPS};
use carpet_core::compat::build_sequence;
use carpet_core::segment::{classify_segment, SegmentClassification, SegmentQuery};
use carpet_core::slopes::{slopes_a, slopes_a_new, slopes_b, slopes_full, Slope};
use carpet_core::suites::{parse_suites, run_suite, SuiteConfig, SuiteReport};
use carpet_core::surface::surface_report;
use carpet_core::svg::render_svg;
use carpet_core::wire::{ClassifyRecord, OrbitRecord, RunManifest, SequenceRecord};
use carpet_core::{CarpetParams, Point, Rational};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// `println!` that reports write errors instead of panicking on a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {
        writeln!(std::io::stdout().lock(), $($t)*).map_err(Failure::from)?
    };
}

const MAX_STEPS_VAR: &str = "CARPET_MAX_STEPS";

#[derive(Parser, Debug)]
#[command(name = "carpet", version, about = "Exact billiards on prefractal Sierpinski carpets")]
struct Cli {
    /// Also write a JSON run manifest to this file.
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List a slope set of the carpet S_a.
    Slopes {
        #[arg(long, value_parser = odd_a)]
        a: u64,
        #[arg(long, value_enum)]
        set: SlopeSet,
        #[arg(long)]
        json: bool,
    },
    /// Classify the segment from a bottom-edge point against the peripheral squares.
    Classify {
        #[arg(long, value_parser = odd_a)]
        a: u64,
        #[command(flatten)]
        ic: StartArgs,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        json: bool,
    },
    /// Simulate one billiard orbit on the level-n prefractal table.
    Orbit {
        #[arg(long, value_parser = odd_a)]
        a: u64,
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        ic: StartArgs,
        #[arg(long, value_name = "N")]
        max_steps: Option<u64>,
        #[arg(long, value_enum, default_value_t = Rule::Retro)]
        corner_rule: Rule,
        /// Write an SVG drawing of the table and orbit.
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Follow one initial condition through a range of prefractal levels.
    Sequence {
        #[arg(long, value_parser = odd_a)]
        a: u64,
        #[command(flatten)]
        ic: StartArgs,
        #[arg(long, value_parser = level_range, value_name = "N..M")]
        levels: (u32, u32),
        #[arg(long, value_name = "N")]
        max_steps: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Cone-angle census and genus of the translation surface.
    Surface {
        #[arg(long, value_parser = odd_a)]
        a: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        json: bool,
    },
    /// Run named verification suites; exits 1 if any check fails.
    Verify {
        /// Comma-separated suite names or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, value_delimiter = ',', value_parser = odd_a, default_value = "3,5,7")]
        a: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, value_name = "N")]
        max_steps: Option<u64>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct StartArgs {
    /// Base point as `x,y` with rational coordinates.
    #[arg(long, value_parser = point, value_name = "X,Y")]
    start: Point,
    /// Rational slope `p/q`, or `vertical`.
    #[arg(long, value_parser = slope, value_name = "P/Q")]
    slope: Slope,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SlopeSet {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
    #[value(name = "A-new")]
    ANew,
    #[value(name = "full")]
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rule {
    Retro,
    Bisector,
}

impl From<Rule> for CornerRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Retro => CornerRule::Retro,
            Rule::Bisector => CornerRule::Bisector,
        }
    }
}

fn odd_a(s: &str) -> Result<u64, String> {
    let a: u64 = s.trim().parse().map_err(|_| format!("{s:?} is not a positive integer"))?;
    if a < 3 || a.is_multiple_of(2) {
        return Err(format!("a = {a} must be an odd integer >= 3"));
    }
    Ok(a)
}

fn point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("{s:?} is not of the form x,y"))?;
    let parse = |v: &str| v.parse::<Rational>().map_err(|e| e.to_string());
    Ok(Point::new(parse(x)?, parse(y)?))
}

fn slope(s: &str) -> Result<Slope, String> {
    s.parse().map_err(|e: carpet_core::Error| e.to_string())
}

fn level_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("{s:?} is not of the form N..M"))?;
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|_| format!("{v:?} is not a level"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

/// Failures after argument parsing; the message names the offending flag
/// where one is to blame.
enum Failure {
    Usage(String),
    Verification,
    Io(String),
    /// Standard output was closed by the reader.
    Closed,
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == ErrorKind::BrokenPipe {
            Failure::Closed
        } else {
            Failure::Io(e.to_string())
        }
    }
}

fn blame(flag: &str) -> impl Fn(carpet_core::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{flag}: {e}"))
}

fn max_steps(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(n) = flag {
        return if n == 0 { Err(Failure::Usage("--max-steps: must be at least 1".into())) } else { Ok(n) };
    }
    match std::env::var(MAX_STEPS_VAR) {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::Usage(format!("{MAX_STEPS_VAR}: {v:?} is not a positive integer"))),
        },
        Err(_) => Ok(DEFAULT_MAX_STEPS),
    }
}

fn emit_json<T: Serialize>(v: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Io(e.to_string()))?;
    out!("{text}");
    Ok(())
}

fn state(ic: &StartArgs) -> BilliardState {
    BilliardState::new(ic.start.clone(), ic.slope.direction())
}

fn finite_slope(s: &Slope) -> Result<Rational, Failure> {
    match s {
        Slope::Finite(r) => Ok(r.clone()),
        Slope::Vertical => Err(Failure::Usage("--slope: the classifier needs a finite slope".into())),
    }
}

fn describe_orbit(o: &carpet_core::billiard::OrbitResult) -> String {
    match &o.outcome {
        Outcome::Periodic { period } => format!("periodic, period {period}"),
        Outcome::Singular { at, .. } => format!("singular at {at} after {} bounces", o.footprint.len() - 2),
        Outcome::Truncated { steps } => format!("truncated after {steps} steps"),
    }
}

fn run(cli: &Cli, manifest: &mut RunManifest) -> Result<(), Failure> {
    let p = &mut manifest.params;
    match &cli.command {
        Command::Slopes { a, set, json } => {
            p.insert("a".into(), a.to_string());
            p.insert("set".into(), format!("{set:?}"));
            let list: Vec<String> = match set {
                SlopeSet::A => slopes_a(*a).map_err(blame("--a"))?.iter().map(|r| r.to_string()).collect(),
                SlopeSet::B => slopes_b(*a).map_err(blame("--a"))?.iter().map(|r| r.to_string()).collect(),
                SlopeSet::ANew => slopes_a_new(*a).map_err(blame("--a"))?.iter().map(|r| r.to_string()).collect(),
                SlopeSet::Full => slopes_full(*a).map_err(blame("--a"))?.iter().map(|s| s.to_string()).collect(),
            };
            if *json {
                emit_json(&list)?;
            } else {
                out!("{}", list.join(" "));
            }
        }
        Command::Classify { a, ic, depth, json } => {
            p.insert("a".into(), a.to_string());
            p.insert("start".into(), format!("{},{}", ic.start.x, ic.start.y));
            p.insert("slope".into(), ic.slope.to_string());
            p.insert("depth".into(), depth.to_string());
            let params = CarpetParams::new(*a, *depth).map_err(blame("--a"))?;
            let q = SegmentQuery { start: ic.start.clone(), slope: finite_slope(&ic.slope)?, params };
            let c = classify_segment(&q).map_err(blame("--start/--slope"))?;
            if *json {
                emit_json(&ClassifyRecord::new(params, q.start, q.slope, &c))?;
            } else {
                match &c {
                    SegmentClassification::AvoidsAll { certified } => out!("avoids-all ({certified:?})"),
                    SegmentClassification::HitsCorner { point, level, .. } => out!("hits-corner at {point}, level {level}"),
                    SegmentClassification::EntersInterior { level, entry_point, .. } => {
                        out!("enters-interior at {entry_point}, level {level}")
                    }
                }
            }
        }
        Command::Orbit { a, n, ic, max_steps: steps, corner_rule, svg, json } => {
            p.insert("a".into(), a.to_string());
            p.insert("n".into(), n.to_string());
            p.insert("start".into(), format!("{},{}", ic.start.x, ic.start.y));
            p.insert("slope".into(), ic.slope.to_string());
            p.insert("corner_rule".into(), CornerRule::from(*corner_rule).to_string());
            let steps = max_steps(*steps)?;
            p.insert("max_steps".into(), steps.to_string());
            let table =
                BilliardTable::new(CarpetParams::new(*a, *n).map_err(blame("--a"))?).with_corner_rule((*corner_rule).into());
            let orbit = simulate(&table, &state(ic), steps).map_err(blame("--start/--slope"))?;
            if let Some(path) = svg {
                fs::write(path, render_svg(&table, &orbit))?;
                manifest.outputs.push(path.display().to_string());
            }
            if *json {
                emit_json(&OrbitRecord::new(&table, &orbit))?;
            } else {
                out!("{}", describe_orbit(&orbit));
                for pt in &orbit.footprint {
                    out!("  {pt}");
                }
            }
        }
        Command::Sequence { a, ic, levels, max_steps: steps, json } => {
            p.insert("a".into(), a.to_string());
            p.insert("start".into(), format!("{},{}", ic.start.x, ic.start.y));
            p.insert("slope".into(), ic.slope.to_string());
            p.insert("levels".into(), format!("{}..{}", levels.0, levels.1));
            let steps = max_steps(*steps)?;
            p.insert("max_steps".into(), steps.to_string());
            let init = state(ic);
            let seq = build_sequence(*a, &init, levels.0..=levels.1, steps).map_err(blame("--start/--slope"))?;
            let rec = SequenceRecord::new(&seq, &init);
            if *json {
                emit_json(&rec)?;
            } else {
                for o in &seq.orbits {
                    out!("level {}: {}", o.level, describe_orbit(&o.orbit));
                }
                let onset = seq.onset.map_or("none".to_string(), |o| o.to_string());
                out!("{:?}, onset {onset}", seq.classification);
            }
        }
        Command::Surface { a, n, json } => {
            p.insert("a".into(), a.to_string());
            p.insert("n".into(), n.to_string());
            let r = surface_report(*a, *n).map_err(blame("--n"))?;
            if *json {
                emit_json(&r)?;
            } else {
                let census: Vec<String> = r.census.iter().map(|(k, c)| format!("{k}pi x {c}")).collect();
                out!("cone angles: {}", census.join(", "));
                out!("genus: census {}, closed form {}, polygon {}", r.genus_census, r.genus_paper, r.genus_polygon);
                out!("euler characteristic {}; closed form consistent: {}", r.euler, r.consistent);
            }
        }
        Command::Verify { suite, a, depth, max_steps: steps, json } => {
            p.insert("suite".into(), suite.clone());
            p.insert("a".into(), a.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
            p.insert("depth".into(), depth.to_string());
            let steps = max_steps(*steps)?;
            p.insert("max_steps".into(), steps.to_string());
            let suites = parse_suites(suite).map_err(blame("--suite"))?;
            let cfg = SuiteConfig { a_values: a.clone(), depth: *depth, max_steps: steps };
            let reports: Vec<SuiteReport> = suites.into_iter().map(|s| run_suite(s, &cfg)).collect();
            if *json {
                emit_json(&reports)?;
            } else {
                for r in &reports {
                    for c in &r.checks {
                        out!("{} {:<10} {}: {}", if c.passed { "PASS" } else { "FAIL" }, r.suite.name(), c.name, c.detail);
                    }
                }
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            if !*json {
                out!("{} of {} suites passed", reports.len() - failed, reports.len());
            }
            if failed > 0 {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Slopes { .. } => "slopes",
        Command::Classify { .. } => "classify",
        Command::Orbit { .. } => "orbit",
        Command::Sequence { .. } => "sequence",
        Command::Surface { .. } => "surface",
        Command::Verify { .. } => "verify",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut manifest = RunManifest::new(command_name(&cli.command));
    let result = run(&cli, &mut manifest);
    if let Some(path) = &cli.manifest {
        let written = serde_json::to_string_pretty(&manifest)
            .map_err(|e| e.to_string())
            .and_then(|text| fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display())));
        if let Err(e) = written {
            eprintln!("error: --manifest: {e}");
            return ExitCode::from(2);
        }
    }
    match result {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
