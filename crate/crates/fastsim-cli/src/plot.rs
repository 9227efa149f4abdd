//! Minimal SVG line plots for bench sweeps.
//!
//! Rendering is a pure function of the rows: fixed canvas, fixed-precision
//! coordinates, no timestamps. The same CSV always yields the same bytes,
//! so plots can be diffed in CI.

use crate::bench::BenchRow;

const W: f64 = 560.0;
const H: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 42.0;
const BOTTOM: f64 = 52.0;

pub fn rate_plot(rows: &[BenchRow]) -> String {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n_workers as f64, r.events_per_second))
        .collect();
    line_plot("Event rate vs worker count", "workers", "events / s", &points)
}

pub fn memory_plot(rows: &[BenchRow]) -> String {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            r.max_rss_bytes
                .map(|b| (r.n_workers as f64, b as f64 / (1024.0 * 1024.0)))
        })
        .collect();
    line_plot("Peak memory vs worker count", "workers", "MiB", &points)
}

fn line_plot(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let mut svg = String::with_capacity(4096);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W:.0}\" height=\"{H:.0}\" \
         viewBox=\"0 0 {W:.0} {H:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W:.0}\" height=\"{H:.0}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        W / 2.0
    ));

    if points.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#888\">no data</text>\n",
            W / 2.0,
            H / 2.0
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    let (mut x_lo, mut x_hi) = (points[0].0, points[0].0);
    let mut y_max = 0.0f64;
    for &(x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_max = y_max.max(y);
    }
    if x_lo == x_hi {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    let (step, y_top) = y_ticks(y_max);
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * (W - LEFT - RIGHT);
    let py = |y: f64| TOP + (1.0 - y / y_top) * (H - TOP - BOTTOM);

    // gridlines and y tick labels
    let mut y = 0.0;
    while y <= y_top + step * 1e-9 {
        let yy = py(y);
        svg.push_str(&format!(
            "<line x1=\"{LEFT:.2}\" y1=\"{yy:.2}\" x2=\"{:.2}\" y2=\"{yy:.2}\" stroke=\"#ddd\"/>\n",
            W - RIGHT
        ));
        let label = if step >= 1.0 {
            format!("{y:.0}")
        } else {
            format!("{y:.2}")
        };
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{label}</text>\n",
            LEFT - 8.0,
            yy + 4.0
        ));
        y += step;
    }

    // x ticks at each measured worker count
    for &(x, _) in points {
        let xx = px(x);
        let base = H - BOTTOM;
        svg.push_str(&format!(
            "<line x1=\"{xx:.2}\" y1=\"{base:.2}\" x2=\"{xx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            base + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{xx:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x:.0}</text>\n",
            base + 20.0
        ));
    }

    // axes
    svg.push_str(&format!(
        "<line x1=\"{LEFT:.2}\" y1=\"{TOP:.2}\" x2=\"{LEFT:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        H - BOTTOM
    ));
    svg.push_str(&format!(
        "<line x1=\"{LEFT:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>\n",
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"{LEFT:.2}\" y=\"{:.2}\" text-anchor=\"start\">{y_label}</text>\n",
        TOP - 8.0
    ));

    // data
    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
        path.join(" ")
    ));
    for &(x, y) in points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"#1f77b4\"/>\n",
            px(x),
            py(y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Round-number tick step covering [0, max] with at most five labels.
fn y_ticks(max: f64) -> (f64, f64) {
    let raw = max / 4.0;
    let mut mag = 1.0;
    while mag * 10.0 <= raw {
        mag *= 10.0;
    }
    while mag > raw {
        mag /= 10.0;
    }
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        mag
    } else if norm <= 2.0 {
        2.0 * mag
    } else if norm <= 5.0 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let top = (max / step).ceil() * step;
    (step, top)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<BenchRow> {
        vec![
            BenchRow {
                n_workers: 1,
                events_per_second: 101.5,
                max_rss_bytes: Some(40 << 20),
                wall_seconds: 9.85,
                events: 1000,
            },
            BenchRow {
                n_workers: 4,
                events_per_second: 398.0,
                max_rss_bytes: Some(55 << 20),
                wall_seconds: 2.51,
                events: 1000,
            },
        ]
    }

    #[test]
    fn rendering_is_reproducible() {
        let rows = rows();
        assert_eq!(rate_plot(&rows), rate_plot(&rows));
        assert_eq!(memory_plot(&rows), memory_plot(&rows));
        assert!(rate_plot(&rows).contains("</svg>"));
    }

    #[test]
    fn missing_memory_numbers_degrade_to_a_note() {
        let mut rows = rows();
        for r in &mut rows {
            r.max_rss_bytes = None;
        }
        assert!(memory_plot(&rows).contains("no data"));
    }

    #[test]
    fn tick_steps_are_round_numbers() {
        assert_eq!(y_ticks(100.0), (50.0, 100.0));
        assert_eq!(y_ticks(7.3), (2.0, 8.0));
        assert_eq!(y_ticks(0.9), (0.5, 1.0));
        let (step, top) = y_ticks(12345.0);
        assert_eq!(step, 5000.0);
        assert_eq!(top, 15000.0);
    }
}
