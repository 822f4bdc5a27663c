//! Minimal SVG phase portraits.
//!
//! Three-opinion games are drawn on the ternary triangle (A lower left,
//! B lower right, E on top); two-opinion games on a segment from A to B.
//! Fixed points are the only `<circle>` elements: black fill for stable,
//! white fill for unstable, grey for members of a continuum.

use std::fmt::Write;

use crate::equilibria::FixedPoint;
use crate::error::{Error, Result};
use crate::phase::{ternary_xy, FieldSample};

const SIZE: f64 = 520.0;
const MARGIN: f64 = 40.0;
const LINE_Y: f64 = 60.0;

/// What to draw. All parts are optional except the labels.
#[derive(Debug, Clone, Default)]
pub struct Portrait<'a> {
    pub labels: Vec<String>,
    pub points: &'a [FixedPoint],
    pub field: &'a [FieldSample],
    /// Each locus is a path of simplex states.
    pub loci: Vec<Vec<Vec<f64>>>,
    pub title: Option<String>,
}

fn n_of(p: &Portrait) -> usize {
    p.labels.len()
}

fn to_canvas(n: usize, x: &[f64]) -> (f64, f64) {
    if n == 2 {
        (MARGIN + SIZE * x[1], LINE_Y)
    } else {
        let (u, v) = ternary_xy(x);
        (MARGIN + SIZE * u, MARGIN + SIZE * (3f64.sqrt() / 2.0 - v))
    }
}

/// Direction of a field vector on the canvas, unnormalized.
fn canvas_direction(n: usize, dx: &[f64]) -> (f64, f64) {
    if n == 2 {
        (dx[1], 0.0)
    } else {
        let (u, v) = (dx[1] + 0.5 * dx[2], 3f64.sqrt() / 2.0 * dx[2]);
        (u, -v)
    }
}

fn f(v: f64) -> String {
    // avoid "-0.00"
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

/// Renders the portrait. Errors for games with more than three opinions.
pub fn render(p: &Portrait) -> Result<String> {
    let n = n_of(p);
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!("cannot draw a game with {n} opinions")));
    }
    let height = if n == 2 { 2.0 * LINE_Y } else { 2.0 * MARGIN + SIZE * 3f64.sqrt() / 2.0 };
    let width = 2.0 * MARGIN + SIZE;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        f(width),
        f(height),
        f(width),
        f(height)
    )
    .unwrap();
    if let Some(t) = &p.title {
        writeln!(s, r#"<title>{}</title>"#, escape(t)).unwrap();
    }
    s.push_str("<defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" orient=\"auto\"><polygon points=\"0,0 6,3 0,6\" fill=\"#555\"/></marker></defs>\n");

    // frame and vertex labels
    let corners: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let pts: Vec<(f64, f64)> = corners.iter().map(|c| to_canvas(n, c)).collect();
    if n == 2 {
        writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
            f(pts[0].0),
            f(pts[0].1),
            f(pts[1].0),
            f(pts[1].1)
        )
        .unwrap();
    } else {
        let poly: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", f(*x), f(*y))).collect();
        writeln!(s, r#"<polygon points="{}" fill="none" stroke="black"/>"#, poly.join(" ")).unwrap();
    }
    for (i, (x, y)) in pts.iter().enumerate() {
        let dy = if n == 3 && i == 2 { -10.0 } else { 22.0 };
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
            f(*x),
            f(y + dy),
            escape(&p.labels[i])
        )
        .unwrap();
    }

    // field arrows of fixed length; only the direction is shown
    if let Some(cell) = arrow_length(n, p.field) {
        s.push_str("<g stroke=\"#555\" stroke-width=\"1\">\n");
        for sample in p.field {
            let (dx, dy) = canvas_direction(n, &sample.field);
            let norm = dx.hypot(dy);
            if norm < 1e-12 {
                continue;
            }
            let (x0, y0) = to_canvas(n, sample.state.as_slice());
            let (x1, y1) = (x0 + cell * dx / norm, y0 + cell * dy / norm);
            writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" marker-end="url(#head)"/>"#,
                f(x0),
                f(y0),
                f(x1),
                f(y1)
            )
            .unwrap();
        }
        s.push_str("</g>\n");
    }

    for locus in &p.loci {
        let path: Vec<String> = locus
            .iter()
            .map(|x| {
                let (cx, cy) = to_canvas(n, x);
                format!("{},{}", f(cx), f(cy))
            })
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="red" stroke-dasharray="6,4"/>"#,
            path.join(" ")
        )
        .unwrap();
    }

    for point in p.points {
        let (cx, cy) = to_canvas(n, point.x.as_slice());
        let fill = match point.classification {
            None => "gray",
            Some(c) if c.is_stable() => "black",
            Some(_) => "white",
        };
        writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="6" fill="{fill}" stroke="black" stroke-width="1.5"/>"#,
            f(cx),
            f(cy)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Arrow length on the canvas: 40% of the lattice spacing.
fn arrow_length(n: usize, field: &[FieldSample]) -> Option<f64> {
    let spacing = if n == 2 {
        (field.len() as f64 - 1.0).recip()
    } else {
        // k(k+1)/2 ... with k = 1/h + 1 points per edge
        let k = ((8.0 * field.len() as f64 + 1.0).sqrt() - 1.0) / 2.0;
        (k - 1.0).recip()
    };
    (field.len() > 1).then_some(0.4 * spacing * SIZE)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
