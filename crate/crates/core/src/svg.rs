//! Deterministic SVG plots of map graphs on the unit square.

use std::fmt::Write as _;

use crate::error::Result;
use crate::interval::Interval;
use crate::map::PwaMap;
use crate::markov::markov_partition;
use crate::orbit::OrbitCaps;
use crate::rational::{to_f64, Rational};
use crate::structure::transitivity_components;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 20.0;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overlays {
    pub diagonal: bool,
    /// Drawn as a grid of vertical and horizontal lines.
    pub partition: Option<Vec<Rational>>,
    /// Drawn as squares `J × J`.
    pub boxes: Vec<Interval>,
}

impl Overlays {
    pub fn with_diagonal(mut self) -> Self {
        self.diagonal = true;
        self
    }

    /// Adds the Markov partition grid if one is detected.
    pub fn with_partition(mut self, f: &PwaMap) -> Result<Self> {
        self.partition = markov_partition(f, OrbitCaps::default())?
            .system()
            .map(|ms| ms.points);
        Ok(self)
    }

    /// Adds the transitivity components as boxes.
    pub fn with_components(mut self, f: &PwaMap) -> Result<Self> {
        self.boxes = transitivity_components(f)?.components;
        Ok(self)
    }
}

fn px(v: f64) -> String {
    format!("{:.3}", MARGIN + v * SIZE)
}

fn py(v: f64) -> String {
    format!("{:.3}", MARGIN + (1.0 - v) * SIZE)
}

pub fn render_svg(f: &PwaMap, overlays: &Overlays) -> String {
    let total = SIZE + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="white" stroke="black" stroke-width="1"/>"#
    );
    if let Some(points) = &overlays.partition {
        for p in points {
            let v = to_f64(p);
            let _ = writeln!(
                s,
                r##"<line class="partition" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
                px(v),
                py(0.0),
                px(v),
                py(1.0)
            );
            let _ = writeln!(
                s,
                r##"<line class="partition" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
                px(0.0),
                py(v),
                px(1.0),
                py(v)
            );
        }
    }
    for b in &overlays.boxes {
        let (lo, hi) = (to_f64(&b.lo), to_f64(&b.hi));
        let _ = writeln!(
            s,
            r##"<rect class="component" x="{}" y="{}" width="{:.3}" height="{:.3}" fill="none" stroke="#3366cc" stroke-width="1.5"/>"##,
            px(lo),
            py(hi),
            (hi - lo) * SIZE,
            (hi - lo) * SIZE
        );
    }
    if overlays.diagonal {
        let _ = writeln!(
            s,
            r##"<line class="diagonal" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999999" stroke-dasharray="4 3"/>"##,
            px(0.0),
            py(0.0),
            px(1.0),
            py(1.0)
        );
    }
    let pts: Vec<String> = f
        .nodes()
        .iter()
        .map(|(x, y)| format!("{},{}", px(to_f64(x)), py(to_f64(y))))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline class="graph" points="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        pts.join(" ")
    );
    s.push_str("</svg>\n");
    s
}
