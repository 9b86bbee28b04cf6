//! Self-contained SVG emitters: contour maps by marching squares and simple
//! line plots. No external renderer; output is deterministic text.

use std::fmt::Write as _;

use crate::field::HeightField;
use crate::grid::NodeTag;

const PALETTE: [&str; 8] = [
    "#26456e", "#2d6a9f", "#3d8ec4", "#6fb3d9", "#a7d0e4", "#e8c37e", "#d98a4a", "#b54d2e",
];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

struct Mapper {
    sx: f64,
    sy: f64,
    ox: f64,
    oy: f64,
    height: f64,
}

impl Mapper {
    fn new(x_range: (f64, f64), y_range: (f64, f64), width: f64, height: f64, margin: f64) -> Mapper {
        let sx = (width - 2.0 * margin) / (x_range.1 - x_range.0);
        let sy = (height - 2.0 * margin) / (y_range.1 - y_range.0);
        Mapper {
            sx,
            sy,
            ox: margin - x_range.0 * sx,
            oy: margin - y_range.0 * sy,
            height,
        }
    }

    fn x(&self, x: f64) -> f64 {
        self.ox + x * self.sx
    }

    // svg y grows downward
    fn y(&self, y: f64) -> f64 {
        self.height - (self.oy + y * self.sy)
    }
}

/// Contour map of a height field. Levels are evenly spaced strictly between
/// the field minimum and maximum.
pub fn contour_svg(f: &HeightField, levels: usize, title: &str) -> String {
    let d = f.domain();
    let (width, height, margin) = (760.0, 560.0, 45.0);
    let map = Mapper::new(
        (d.node_x(0), d.node_x(d.nx - 1)),
        (d.node_y(0), d.node_y(d.ny - 1)),
        width,
        height,
        margin,
    );
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for j in 0..d.ny {
        for i in 0..d.nx {
            let v = f.value(i, j);
            if v.is_finite() {
                vmin = vmin.min(v);
                vmax = vmax.max(v);
            }
        }
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" font-family="monospace" font-size="14">{}</text>"#,
        margin, title
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="11">min {} max {}</text>"#,
        margin,
        height - 12.0,
        fmt(vmin),
        fmt(vmax)
    );
    if vmax > vmin {
        for li in 0..levels {
            let level = vmin + (vmax - vmin) * (li as f64 + 1.0) / (levels as f64 + 1.0);
            let color = PALETTE[li % PALETTE.len()];
            let mut path = String::new();
            for j in 0..d.ny - 1 {
                for i in 0..d.nx - 1 {
                    segments_for_cell(f, i, j, level, &map, &mut path);
                }
            }
            if !path.is_empty() {
                let _ = writeln!(
                    svg,
                    r#"<path d="{path}" stroke="{color}" stroke-width="1" fill="none"/>"#
                );
            }
        }
    }
    // domain frame
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" stroke="#555" fill="none"/>"##,
        fmt(map.x(d.node_x(0))),
        fmt(map.y(d.node_y(d.ny - 1))),
        fmt(map.x(d.node_x(d.nx - 1)) - map.x(d.node_x(0))),
        fmt(map.y(d.node_y(0)) - map.y(d.node_y(d.ny - 1)))
    );
    svg.push_str("</svg>\n");
    svg
}

/// Marching-squares segments for one cell, appended as SVG path commands.
fn segments_for_cell(f: &HeightField, i: usize, j: usize, level: f64, map: &Mapper, path: &mut String) {
    let d = f.domain();
    let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
    if corners.iter().any(|&(a, b)| d.tag(a, b) == NodeTag::Exterior) {
        return;
    }
    let vals = [
        f.value(i, j),
        f.value(i + 1, j),
        f.value(i + 1, j + 1),
        f.value(i, j + 1),
    ];
    let pos = [
        (d.node_x(i), d.node_y(j)),
        (d.node_x(i + 1), d.node_y(j)),
        (d.node_x(i + 1), d.node_y(j + 1)),
        (d.node_x(i), d.node_y(j + 1)),
    ];
    let mut case = 0usize;
    for (k, v) in vals.iter().enumerate() {
        if *v > level {
            case |= 1 << k;
        }
    }
    if case == 0 || case == 15 {
        return;
    }
    // edge index -> its two corner ids
    let edges = [(0usize, 1usize), (1, 2), (2, 3), (3, 0)];
    let cross = |e: usize| -> (f64, f64) {
        let (a, b) = edges[e];
        let t = (level - vals[a]) / (vals[b] - vals[a]);
        (
            pos[a].0 + t * (pos[b].0 - pos[a].0),
            pos[a].1 + t * (pos[b].1 - pos[a].1),
        )
    };
    // pairs of edges crossed per case; ambiguous saddles resolved by the
    // cell-average rule
    let segs: &[(usize, usize)] = match case {
        1 => &[(3, 0)],
        2 => &[(0, 1)],
        3 => &[(3, 1)],
        4 => &[(1, 2)],
        5 => {
            let avg = (vals[0] + vals[1] + vals[2] + vals[3]) / 4.0;
            if avg > level {
                &[(3, 2), (0, 1)]
            } else {
                &[(3, 0), (1, 2)]
            }
        }
        6 => &[(0, 2)],
        7 => &[(3, 2)],
        8 => &[(2, 3)],
        9 => &[(0, 2)],
        10 => {
            let avg = (vals[0] + vals[1] + vals[2] + vals[3]) / 4.0;
            if avg > level {
                &[(3, 0), (1, 2)]
            } else {
                &[(3, 2), (0, 1)]
            }
        }
        11 => &[(1, 2)],
        12 => &[(1, 3)],
        13 => &[(0, 1)],
        14 => &[(3, 0)],
        _ => &[],
    };
    for &(e1, e2) in segs {
        let (x1, y1) = cross(e1);
        let (x2, y2) = cross(e2);
        let _ = write!(
            path,
            "M{} {} L{} {} ",
            fmt(map.x(x1)),
            fmt(map.y(y1)),
            fmt(map.x(x2)),
            fmt(map.y(y2))
        );
    }
}

/// One polyline in a line plot.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Fixed-viewport line plot with axes, tick labels and a legend.
pub fn line_plot_svg(series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let (width, height, margin) = (760.0, 480.0, 55.0);
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
    }
    if !(x_max > x_min) {
        x_max = x_min + 1.0;
    }
    if !(y_max > y_min) {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let map = Mapper::new((x_min, x_max), (y_min - pad, y_max + pad), width, height, margin);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{margin}" y="22" font-family="monospace" font-size="14">{title}</text>"#
    );
    // axes with 5 ticks each
    let _ = writeln!(
        svg,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333"/>"##,
        fmt(map.x(x_min)),
        fmt(map.y(y_min - pad)),
        fmt(map.x(x_max)),
        fmt(map.y(y_min - pad))
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333"/>"##,
        fmt(map.x(x_min)),
        fmt(map.y(y_min - pad)),
        fmt(map.x(x_min)),
        fmt(map.y(y_max + pad))
    );
    for k in 0..=4 {
        let xv = x_min + (x_max - x_min) * k as f64 / 4.0;
        let yv = (y_min - pad) + (y_max - y_min + 2.0 * pad) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="10" text-anchor="middle">{}</text>"#,
            fmt(map.x(xv)),
            fmt(map.y(y_min - pad) + 16.0),
            fmt(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="10" text-anchor="end">{}</text>"#,
            fmt(map.x(x_min) - 6.0),
            fmt(map.y(yv) + 3.0),
            fmt(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="11" text-anchor="middle">{}</text>"#,
        fmt((map.x(x_min) + map.x(x_max)) / 2.0),
        fmt(height - 8.0),
        x_label
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" font-family="monospace" font-size="11">{}</text>"#,
        fmt(map.y(y_max)),
        y_label
    );
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{},{}", fmt(map.x(x)), fmt(map.y(y))))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#,
                pts.join(" ")
            );
        }
        for p in &pts {
            let xy: Vec<&str> = p.split(',').collect();
            let _ = writeln!(
                svg,
                r#"<circle cx="{}" cy="{}" r="2.2" fill="{color}"/>"#,
                xy[0], xy[1]
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="11" fill="{color}">{}</text>"#,
            fmt(width - margin - 200.0),
            fmt(30.0 + 14.0 * si as f64),
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Contour map with tangency markers overlaid.
pub fn overlay_svg(f: &HeightField, points: &[(f64, f64)], title: &str) -> String {
    let base = contour_svg(f, 10, title);
    let d = f.domain();
    let map = Mapper::new(
        (d.node_x(0), d.node_x(d.nx - 1)),
        (d.node_y(0), d.node_y(d.ny - 1)),
        760.0,
        560.0,
        45.0,
    );
    let mut marks = String::new();
    for &(x, y) in points {
        let _ = writeln!(
            marks,
            r##"<circle cx="{}" cy="{}" r="5" stroke="#c00" stroke-width="2" fill="none"/>"##,
            fmt(map.x(x)),
            fmt(map.y(y))
        );
    }
    base.replace("</svg>\n", &format!("{marks}</svg>\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_rectangle_domain;

    #[test]
    fn contour_svg_is_wellformed_and_deterministic() {
        let d = make_rectangle_domain(1.0, 1.0, 17, 17).unwrap();
        let f = HeightField::from_fn(d, |x, y| x * x + y * y).unwrap();
        let a = contour_svg(&f, 8, "test");
        let b = contour_svg(&f, 8, "test");
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("<path"));
    }

    #[test]
    fn line_plot_handles_empty_and_flat_series() {
        let s = [Series {
            label: "flat".into(),
            points: vec![(0.0, 1.0), (1.0, 1.0)],
        }];
        let svg = line_plot_svg(&s, "t", "x", "y");
        assert!(svg.contains("polyline"));
    }
}
