//! Deterministic SVG rendering of slices of a divisorial fan. All pixel
//! coordinates are computed in exact arithmetic and rounded once, so the
//! output is byte-identical across runs.

use num_traits::{Signed, Zero};

use crate::curve::PointP1;
use crate::divfan::DivisorialFan;
use crate::error::{Result, TvbError};
use crate::polyhedral::Polyhedron;
use crate::qq::{fmt_qq, qq, qq_floor, QQ, RatVec};

const WIDTH: i64 = 640;
const HEIGHT: i64 = 640;
const MARGIN: i64 = 60;

const FILLS: [&str; 6] = [
    "#dbeafe", "#dcfce7", "#fee2e2", "#fef9c3", "#f3e8ff", "#e0f2fe",
];

struct Viewport {
    min: Vec<QQ>,
    max: Vec<QQ>,
}

impl Viewport {
    fn of(points: &[RatVec], dim: usize) -> Viewport {
        let mut min = vec![qq(-1); dim];
        let mut max = vec![qq(1); dim];
        for p in points {
            for k in 0..dim {
                if p.coords[k] < min[k] {
                    min[k] = p.coords[k].clone();
                }
                if p.coords[k] > max[k] {
                    max[k] = p.coords[k].clone();
                }
            }
        }
        // One unit of padding so rays have room to point outward.
        for k in 0..dim {
            min[k] = min[k].clone() - qq(1);
            max[k] = max[k].clone() + qq(1);
        }
        Viewport { min, max }
    }

    fn pixel(&self, p: &RatVec) -> (i64, i64) {
        let span_x = &self.max[0] - &self.min[0];
        let sx = (&p.coords[0] - &self.min[0]) / span_x;
        let px = qq(MARGIN) + sx * qq(WIDTH - 2 * MARGIN);
        let py = if p.dim() > 1 {
            let span_y = &self.max[1] - &self.min[1];
            let sy = (&p.coords[1] - &self.min[1]) / span_y;
            qq(HEIGHT - MARGIN) - sy * qq(HEIGHT - 2 * MARGIN)
        } else {
            qq(HEIGHT / 2)
        };
        (round(&px), round(&py))
    }
}

fn round(q: &QQ) -> i64 {
    let half = QQ::new(1.into(), 2.into());
    qq_floor(&(q + half))
        .to_integer()
        .to_string()
        .parse()
        .expect("pixel in range")
}

/// Exact angular order around a center, for polygon paths.
fn angular_sort(center: &RatVec, mut pts: Vec<RatVec>) -> Vec<RatVec> {
    let half_class = |d: &RatVec| -> u8 {
        // 0: upper half plane (y > 0 or (y = 0 and x > 0)); 1: lower.
        if d.coords[1].is_positive()
            || (d.coords[1].is_zero() && d.coords[0].is_positive())
        {
            0
        } else {
            1
        }
    };
    pts.sort_by(|a, b| {
        let da = a.sub(center);
        let db = b.sub(center);
        let (ha, hb) = (half_class(&da), half_class(&db));
        if ha != hb {
            return ha.cmp(&hb);
        }
        // Same half plane: compare by cross product (counterclockwise).
        let cross = &da.coords[0] * &db.coords[1] - &da.coords[1] * &db.coords[0];
        if cross.is_positive() {
            std::cmp::Ordering::Less
        } else if cross.is_negative() {
            std::cmp::Ordering::Greater
        } else {
            a.cmp(b)
        }
    });
    pts
}

/// Renders the slice of a divisorial fan at a point, for slices of dimension
/// at most two: cells (unbounded ones clipped to the viewport), vertices
/// labeled with exact coordinates, and tail rays drawn as arrows.
pub fn render_slice(fan: &DivisorialFan, point: &PointP1) -> Result<String> {
    if fan.dim > 2 {
        return Err(TvbError::DimensionTooLarge(fan.dim));
    }
    let slice = fan.slice_at(point);
    let vertices = slice.vertices();
    let mut frame_points = vertices.clone();
    frame_points.push(RatVec::zero(fan.dim.max(1)));
    let view = if fan.dim == 0 {
        Viewport::of(&[RatVec::new(vec![QQ::zero()])], 1)
    } else {
        Viewport::of(&frame_points, fan.dim)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"30\" font-family=\"monospace\" font-size=\"16\">slice at {point}</text>\n"
    ));

    if fan.dim == 0 {
        let (px, py) = view.pixel(&RatVec::new(vec![QQ::zero()]));
        svg.push_str(&format!(
            "<circle cx=\"{px}\" cy=\"{py}\" r=\"4\" fill=\"black\"/>\n<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">0</text>\n",
            px + 8,
            py - 8
        ));
        svg.push_str("</svg>\n");
        return Ok(svg);
    }

    // The clipping box as a polyhedron, in exact coordinates.
    let clip = box_polyhedron(&view, fan.dim);

    // Cells, largest dimension first so fills stack underneath edges.
    let mut cells: Vec<&Polyhedron> = slice.maximal_cells();
    cells.sort_by(|a, b| (&a.vertices, &a.rays).cmp(&(&b.vertices, &b.rays)));
    for (idx, cell) in cells.iter().enumerate() {
        let Some(clipped) = cell.intersect(&clip)? else {
            continue;
        };
        let fill = FILLS[idx % FILLS.len()];
        if fan.dim == 2 {
            let pts = if clipped.vertices.len() > 2 {
                angular_sort(&clipped.sample_point(), clipped.vertices.clone())
            } else {
                clipped.vertices.clone()
            };
            let path: Vec<String> = pts
                .iter()
                .map(|p| {
                    let (x, y) = view.pixel(p);
                    format!("{x},{y}")
                })
                .collect();
            if pts.len() > 2 {
                svg.push_str(&format!(
                    "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"#334155\" stroke-width=\"1\"/>\n",
                    path.join(" ")
                ));
            } else if pts.len() == 2 {
                let (x1, y1) = view.pixel(&pts[0]);
                let (x2, y2) = view.pixel(&pts[1]);
                svg.push_str(&format!(
                    "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#334155\" stroke-width=\"2\"/>\n"
                ));
            }
        } else {
            // One-dimensional slices: segments on the axis.
            if clipped.vertices.len() >= 2 {
                let (x1, y1) = view.pixel(&clipped.vertices[0]);
                let (x2, y2) = view.pixel(&clipped.vertices[clipped.vertices.len() - 1]);
                svg.push_str(&format!(
                    "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#334155\" stroke-width=\"3\"/>\n"
                ));
            }
        }
    }

    // Tail ray arrows from each vertex.
    for cell in &cells {
        for vtx in &cell.vertices {
            for ray in &cell.rays {
                let tip = vtx.add(&ray.primitive().scale(&QQ::new(3.into(), 4.into())));
                let (x1, y1) = view.pixel(vtx);
                let (x2, y2) = view.pixel(&tip);
                svg.push_str(&format!(
                    "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#0f172a\" stroke-width=\"1\" stroke-dasharray=\"4 2\"/>\n"
                ));
                svg.push_str(&arrow_head(x1, y1, x2, y2));
            }
        }
    }

    // Vertices with exact labels.
    for vtx in &vertices {
        let (x, y) = view.pixel(vtx);
        let label: Vec<String> = vtx.coords.iter().map(fmt_qq).collect();
        svg.push_str(&format!(
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"#b91c1c\"/>\n<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">({})</text>\n",
            x + 7,
            y - 7,
            label.join(",")
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn box_polyhedron(view: &Viewport, dim: usize) -> Polyhedron {
    let mut ineqs: Vec<(RatVec, QQ)> = Vec::new();
    for k in 0..dim {
        let mut plus = vec![QQ::zero(); dim];
        plus[k] = qq(1);
        ineqs.push((RatVec::new(plus.clone()), view.min[k].clone()));
        let mut minus = vec![QQ::zero(); dim];
        minus[k] = qq(-1);
        ineqs.push((RatVec::new(minus), -view.max[k].clone()));
    }
    Polyhedron::from_inequalities(dim, &ineqs)
        .expect("box is well formed")
        .expect("box is nonempty")
}

fn arrow_head(x1: i64, y1: i64, x2: i64, y2: i64) -> String {
    // Integer arithmetic arrow head: offset the tip back along the segment.
    let dx = x2 - x1;
    let dy = y2 - y1;
    if dx == 0 && dy == 0 {
        return String::new();
    }
    // Components scaled to roughly unit length without floats: use the
    // larger coordinate as the divisor.
    let scale = dx.abs().max(dy.abs());
    let ux = dx * 8 / scale;
    let uy = dy * 8 / scale;
    let (bx, by) = (x2 - ux, y2 - uy);
    let (px, py) = (-uy / 2, ux / 2);
    format!(
        "<polygon points=\"{x2},{y2} {},{} {},{}\" fill=\"#0f172a\"/>\n",
        bx + px,
        by + py,
        bx - px,
        by - py
    )
}
