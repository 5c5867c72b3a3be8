//! Static wall diagrams in the `(b, t)` half-plane.

use std::fmt::Write;

use bridgeland_core::num::to_f64;
use bridgeland_core::walls::{WallKind, WallScan};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;

struct Frame {
    b0: f64,
    b1: f64,
    t1: f64,
}

impl Frame {
    fn x(&self, b: f64) -> f64 {
        MARGIN + (b - self.b0) / (self.b1 - self.b0) * WIDTH
    }

    fn y(&self, t: f64) -> f64 {
        MARGIN + (1.0 - t / self.t1) * HEIGHT
    }

    fn sx(&self) -> f64 {
        WIDTH / (self.b1 - self.b0)
    }

    fn sy(&self) -> f64 {
        HEIGHT / self.t1
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Ticks at integers when there are few of them, otherwise at the ends only.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
    if b >= a && b - a <= 20 {
        (a..=b).map(|k| k as f64).collect()
    } else {
        vec![lo, hi]
    }
}

fn label(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.2}")
    }
}

/// Semicircles and vertical lines of `scan`, clipped to its region, with
/// axes and wall ids. `metadata` is embedded verbatim in a `<metadata>` element.
pub fn render(scan: &WallScan, metadata: Option<&str>) -> String {
    let r = &scan.region;
    let mut b0 = to_f64(&r.b_min);
    let mut b1 = to_f64(&r.b_max);
    if b1 <= b0 {
        b0 -= 0.5;
        b1 += 0.5;
    }
    let f = Frame {
        b0,
        b1,
        t1: to_f64(&r.t_max).max(1e-9),
    };
    let total_w = WIDTH + 2.0 * MARGIN;
    let total_h = HEIGHT + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w:.0}" height="{total_h:.0}" viewBox="0 0 {total_w:.0} {total_h:.0}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(m) = metadata {
        let _ = writeln!(s, "<metadata>{}</metadata>", escape(m));
    }
    let _ = writeln!(
        s,
        r#"<title>potential walls for v = {}</title>"#,
        escape(&scan.v.to_flat_string())
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{MARGIN:.3}" y="{MARGIN:.3}" width="{WIDTH:.3}" height="{HEIGHT:.3}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN:.3}" y="{MARGIN:.3}" width="{WIDTH:.3}" height="{HEIGHT:.3}" fill="none" stroke="#000"/>"##
    );
    // strip below t_min, where walls are not scanned
    let tmin = to_f64(&r.t_min);
    let _ = writeln!(
        s,
        r##"<rect x="{:.3}" y="{:.3}" width="{WIDTH:.3}" height="{:.3}" fill="#eee"/>"##,
        MARGIN,
        f.y(tmin),
        f.y(0.0) - f.y(tmin)
    );

    for b in ticks(f.b0, f.b1) {
        let x = f.x(b);
        let y = f.y(0.0);
        let _ = writeln!(s, r##"<line x1="{x:.3}" y1="{y:.3}" x2="{x:.3}" y2="{:.3}" stroke="#000"/>"##, y + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.3}" y="{:.3}" text-anchor="middle">{}</text>"#, y + 20.0, label(b));
    }
    for t in ticks(0.0, f.t1) {
        let x = f.x(f.b0);
        let y = f.y(t);
        let _ = writeln!(s, r##"<line x1="{:.3}" y1="{y:.3}" x2="{x:.3}" y2="{y:.3}" stroke="#000"/>"##, x - 5.0);
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#, x - 8.0, y + 4.0, label(t));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">b</text>"#,
        MARGIN + WIDTH / 2.0,
        MARGIN + HEIGHT + 45.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle" transform="rotate(-90 {:.3} {:.3})">t</text>"#,
        MARGIN - 40.0,
        MARGIN + HEIGHT / 2.0,
        MARGIN - 40.0,
        MARGIN + HEIGHT / 2.0
    );

    let _ = writeln!(s, r#"<g clip-path="url(#plot)" fill="none" stroke-width="1.5">"#);
    let mut labels = Vec::new();
    for wall in &scan.walls {
        match &wall.locus.kind {
            WallKind::Semicircle { center, radius_sq } => {
                let c = to_f64(center);
                let rad = to_f64(radius_sq).sqrt();
                let (rx, ry) = (rad * f.sx(), rad * f.sy());
                let y = f.y(0.0);
                let _ = writeln!(
                    s,
                    r##"<path id="{}" d="M {:.3} {y:.3} A {rx:.3} {ry:.3} 0 0 1 {:.3} {y:.3}" stroke="#1f4e9c"/>"##,
                    escape(&wall.id),
                    f.x(c - rad),
                    f.x(c + rad)
                );
                let lb = c.clamp(f.b0, f.b1);
                let lt = (rad * rad - (lb - c) * (lb - c)).max(0.0).sqrt().min(f.t1);
                labels.push((f.x(lb), f.y(lt) - 4.0, wall.id.clone()));
            }
            WallKind::VerticalLine { b } => {
                let x = f.x(to_f64(b));
                let _ = writeln!(
                    s,
                    r##"<line id="{}" x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="#b22222"/>"##,
                    escape(&wall.id),
                    f.y(0.0),
                    f.y(f.t1)
                );
                labels.push((x + 4.0, f.y(f.t1) + 14.0, wall.id.clone()));
            }
            WallKind::Empty | WallKind::Degenerate => {}
        }
    }
    let _ = writeln!(s, "</g>");
    for (x, y, id) in labels {
        let _ = writeln!(s, r#"<text x="{x:.3}" y="{y:.3}">{}</text>"#, escape(&id));
    }
    s.push_str("</svg>\n");
    s
}
