//! SVG snapshots of the rink: density heatmap, Voronoi borders, players and
//! active pass lanes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::cbf::EllipseCbf;
use crate::coverage::{DefenderState, VoronoiPartition};
use crate::density::{OffensiveFrame, WeightField};
use crate::field::{FieldSpec, Point2};

/// Pixels per meter.
pub const SCALE: f64 = 12.0;

const DEFENDER_COLOR: &str = "#1f5fbf";
const HOLDER_COLOR: &str = "#f28c28";
const ATTACKER_COLOR: &str = "#d62728";

pub struct SceneView<'a> {
    pub frame: &'a OffensiveFrame,
    pub defenders: &'a [DefenderState],
    pub field: &'a WeightField,
    pub partition: Option<&'a VoronoiPartition>,
    pub lanes: &'a [EllipseCbf],
}

struct Canvas {
    height: f64,
}

impl Canvas {
    fn px(&self, p: Point2) -> (f64, f64) {
        (p.x * SCALE, (self.height - p.y) * SCALE)
    }
}

/// Corner points of the house outline: the apex where the two bounding
/// lines meet, then the two points where they hit the circle.
pub fn house_outline() -> [Point2; 3] {
    let r = 15.0 / std::f64::consts::SQRT_2;
    [
        Point2::new(5.0, 15.0),
        Point2::new(5.0 + r, 15.0 - r),
        Point2::new(5.0 + r, 15.0 + r),
    ]
}

fn heat_color(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
    if t < 0.5 {
        let s = t * 2.0;
        (
            lerp(255.0, 255.0, s),
            lerp(255.0, 200.0, s),
            lerp(255.0, 60.0, s),
        )
    } else {
        let s = (t - 0.5) * 2.0;
        (
            lerp(255.0, 190.0, s),
            lerp(200.0, 25.0, s),
            lerp(60.0, 30.0, s),
        )
    }
}

pub fn render_svg_string(view: &SceneView<'_>) -> String {
    let spec: FieldSpec = view.field.grid.spec;
    let canvas = Canvas {
        height: spec.height,
    };
    let (w, h) = (spec.width * SCALE, spec.height * SCALE);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(s, "<title>t = {:.3} s</title>", view.frame.t);

    // heatmap
    let grid = &view.field.grid;
    let (cw, ch) = grid.cell_size();
    let peak = view.field.max_value();
    let _ = writeln!(s, r#"<g class="heatmap" shape-rendering="crispEdges">"#);
    for (k, v) in view.field.values.iter().enumerate() {
        let c = grid.center(k);
        let (x, y) = canvas.px(Point2::new(c.x - cw / 2.0, c.y + ch / 2.0));
        let t = if peak > 0.0 { v / peak } else { 0.0 };
        let (r, g, b) = heat_color(t);
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
            cw * SCALE,
            ch * SCALE
        );
    }
    let _ = writeln!(s, "</g>");

    // rink outline, half line, goal
    let _ = writeln!(
        s,
        r#"<rect class="rink" x="0" y="0" width="{w:.0}" height="{h:.0}" fill="none" stroke="black" stroke-width="2"/>"#
    );
    let (mx0, my0) = canvas.px(Point2::new(spec.active_x_max, 0.0));
    let (_, my1) = canvas.px(Point2::new(spec.active_x_max, spec.height));
    let _ = writeln!(
        s,
        r#"<line class="half" x1="{mx0:.2}" y1="{my0:.2}" x2="{mx0:.2}" y2="{my1:.2}" stroke="gray" stroke-dasharray="6 4"/>"#
    );
    let (gx, gy) = canvas.px(spec.goal);
    let _ = writeln!(
        s,
        r#"<rect class="goal" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        gx - 1.0 * SCALE,
        gy - 0.9 * SCALE,
        1.0 * SCALE,
        1.8 * SCALE
    );

    // house boundary
    let [apex, low, high] = house_outline();
    let (ax, ay) = canvas.px(apex);
    let (lx, ly) = canvas.px(low);
    let (hx, hy) = canvas.px(high);
    let r = 15.0 * SCALE;
    let _ = writeln!(
        s,
        r#"<path class="house" d="M {ax:.2} {ay:.2} L {lx:.2} {ly:.2} A {r:.2} {r:.2} 0 0 1 {hx:.2} {hy:.2} Z" fill="none" stroke="goldenrod" stroke-width="2"/>"#
    );

    // Voronoi borders between differently owned neighbours
    if let Some(part) = view.partition {
        let mut d = String::new();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let own = part.owner[grid.index(i, j)];
                let c = grid.center_ij(i, j);
                if i + 1 < grid.nx && part.owner[grid.index(i + 1, j)] != own {
                    let (x0, y0) = canvas.px(Point2::new(c.x + cw / 2.0, c.y - ch / 2.0));
                    let _ = write!(d, "M{x0:.2} {y0:.2}v{:.2}", -ch * SCALE);
                }
                if j + 1 < grid.ny && part.owner[grid.index(i, j + 1)] != own {
                    let (x0, y0) = canvas.px(Point2::new(c.x - cw / 2.0, c.y + ch / 2.0));
                    let _ = write!(d, "M{x0:.2} {y0:.2}h{:.2}", cw * SCALE);
                }
            }
        }
        let _ = writeln!(
            s,
            r##"<path class="voronoi" d="{d}" fill="none" stroke="#333" stroke-width="1"/>"##
        );
    }

    for lane in view.lanes {
        let (cx, cy) = canvas.px(lane.center);
        let deg = lane.sin_theta.atan2(lane.cos_theta).to_degrees();
        let _ = writeln!(
            s,
            r#"<ellipse class="lane" cx="{cx:.3}" cy="{cy:.3}" rx="{:.4}" ry="{:.4}" transform="rotate({:.4} {cx:.3} {cy:.3})" fill="none" stroke="{DEFENDER_COLOR}" stroke-width="1"/>"#,
            lane.length / 2.0 * SCALE,
            lane.minor / 2.0 * SCALE,
            -deg
        );
    }

    let dot = |s: &mut String, class: &str, p: Point2, color: &str| {
        let (x, y) = canvas.px(p);
        let _ = writeln!(
            s,
            r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="{:.1}" fill="{color}" stroke="black"/>"#,
            0.5 * SCALE
        );
    };
    for p in &view.frame.players {
        if p.id == view.frame.puck_holder {
            dot(&mut s, "holder", p.position, HOLDER_COLOR);
        } else {
            dot(&mut s, "attacker", p.position, ATTACKER_COLOR);
        }
    }
    for d in view.defenders {
        dot(&mut s, "defender", d.position, DEFENDER_COLOR);
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_svg(view: &SceneView<'_>, path: impl AsRef<Path>) -> io::Result<()> {
    fs::write(path, render_svg_string(view))
}
