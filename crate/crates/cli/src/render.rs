//! SVG figures of parallelogram families and partial gaskets.
//!
//! Geometry is written in unit-square coordinates scaled by 1000 and the
//! whole drawing is flipped so height 0 is the bottom edge.

use std::fmt::Write;

use trapmeasure_core::exact::to_f64;
use trapmeasure_core::gasket::{gasket_anchors, GasketSpec};
use trapmeasure_core::trapezoid::TrapezoidSpec;
use trapmeasure_core::Rational;

const SCALE: f64 = 1000.0;

fn coord(r: &Rational) -> String {
    let s = format!("{:.3}", to_f64(r) * SCALE);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn points(vertices: &[(Rational, Rational)]) -> String {
    vertices
        .iter()
        .map(|(x, y)| format!("{} {}", coord(x), coord(y)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn document(body: &str, title: &str) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 1000 1000\" width=\"1000\" height=\"1000\">\n",
    );
    let _ = writeln!(s, "<title>{title}</title>");
    s.push_str("<g transform=\"translate(0,1000) scale(1,-1)\">\n");
    s.push_str(body);
    s.push_str("</g>\n</svg>\n");
    s
}

/// One polygon per parallelogram, in ascending bottom index.
pub fn trapezoid_svg(spec: &TrapezoidSpec) -> String {
    let mut body = String::new();
    for p in spec.parallelograms() {
        let _ = writeln!(
            body,
            "<polygon points=\"{}\" fill=\"#1f4e8c\" fill-opacity=\"0.5\"/>",
            points(&p.corners())
        );
    }
    let title = if spec.n() <= 32 {
        format!("T^{} for {}", spec.n(), spec.sigma())
    } else {
        format!("T^{}", spec.n())
    };
    document(&body, &title)
}

/// Generation-`n` triangles of the partial gasket.
pub fn gasket_svg(spec: &GasketSpec) -> String {
    // Legs have length 3^{-n}, one over the triangle count.
    let h = Rational::new(1.into(), (spec.triangles() as i64).into());
    let mut body = String::new();
    for (x, y) in gasket_anchors(spec) {
        let tri = [
            (x.clone(), y.clone()),
            (&x + &h, y.clone()),
            (x.clone(), &y + &h),
        ];
        let _ = writeln!(
            body,
            "<polygon points=\"{}\" fill=\"#222222\" fill-opacity=\"0.5\"/>",
            points(&tri)
        );
    }
    document(&body, &format!("partial gasket, depth {}", spec.depth))
}
