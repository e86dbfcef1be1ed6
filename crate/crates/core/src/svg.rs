//! SVG rendering of a table and an orbit. The only place where rationals
//! become decimals.

use std::fmt::Write;

use crate::billiard::{BilliardTable, OrbitResult, Outcome};
use crate::geom::{Point, Rational};

const VIEW: i64 = 1000;
const SIGNIFICANT: i32 = 12;

/// Decimal with at most 12 significant digits, trailing zeros dropped.
pub fn fmt_decimal(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".to_string();
    }
    let int_digits = v.abs().log10().floor() as i32 + 1;
    let places = (SIGNIFICANT - int_digits).max(0) as usize;
    let mut s = format!("{v:.places$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn coord(v: &Rational) -> String {
    fmt_decimal(v.mul_int(&VIEW.into()).to_f64())
}

/// Viewport coordinates, y pointing down.
fn xy(p: &Point) -> (String, String) {
    (coord(&p.x), coord(&(Rational::one() - &p.y)))
}

pub fn render_svg(table: &BilliardTable, orbit: &OrbitResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW} {VIEW}" width="{VIEW}" height="{VIEW}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{VIEW}" height="{VIEW}" fill="white" stroke="black" stroke-width="2"/>"#);
    let _ = writeln!(s, r##"<g class="squares" fill="#444">"##);
    for sq in table.squares() {
        let top_left = Point::new(sq.lower_left.x.clone(), &sq.lower_left.y + &sq.side);
        let (x, y) = xy(&top_left);
        let w = coord(&sq.side);
        let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{w}" height="{w}"/>"#);
    }
    let _ = writeln!(s, "</g>");
    let points: Vec<String> = orbit
        .footprint
        .iter()
        .map(|p| {
            let (x, y) = xy(p);
            format!("{x},{y}")
        })
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline class="footprint" points="{}" fill="none" stroke="crimson" stroke-width="2"/>"#,
        points.join(" ")
    );
    if let Outcome::Singular { at, .. } = &orbit.outcome {
        let (x, y) = xy(at);
        let _ = writeln!(s, r#"<circle class="singular" cx="{x}" cy="{y}" r="8" fill="none" stroke="blue" stroke-width="3"/>"#);
    }
    let _ = writeln!(s, "</svg>");
    s
}
