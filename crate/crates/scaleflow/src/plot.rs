//! Minimal standalone SVG line charts for scenario reports.
//!
//! Deterministic output: fixed canvas, explicit float formatting, no
//! timestamps.  Series render as polylines with point markers; the y axis
//! may be logarithmic (zero or negative values are dropped from log plots).

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64, log: bool) -> String {
    let raw = if log { 10f64.powf(v) } else { v };
    if raw != 0.0 && (raw.abs() >= 1e4 || raw.abs() < 1e-3) {
        format!("{raw:.1e}")
    } else {
        format!("{raw:.3}")
    }
}

impl Chart {
    pub fn render(&self) -> String {
        let mut pts: Vec<Vec<(f64, f64)>> = Vec::new();
        for s in &self.series {
            let transformed = s
                .points
                .iter()
                .filter(|(x, y)| (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0))
                .map(|(x, y)| {
                    (
                        if self.log_x { x.log10() } else { *x },
                        if self.log_y { y.log10() } else { *y },
                    )
                })
                .collect();
            pts.push(transformed);
        }
        let all: Vec<(f64, f64)> = pts.iter().flatten().copied().collect();
        let (mut x0, mut x1) = all
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (x, _)| {
                (a.min(*x), b.max(*x))
            });
        let (mut y0, mut y1) = all
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, y)| {
                (a.min(*y), b.max(*y))
            });
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad_y = 0.05 * (y1 - y0);
        y0 -= pad_y;
        y1 += pad_y;

        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
        let sy = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
        );
        let _ = write!(
            svg,
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        );

        // axes and ticks
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(MARGIN_L),
            fmt(HEIGHT - MARGIN_B),
            fmt(WIDTH - MARGIN_R),
            fmt(HEIGHT - MARGIN_B)
        );
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(MARGIN_L),
            fmt(MARGIN_T),
            fmt(MARGIN_L),
            fmt(HEIGHT - MARGIN_B)
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                fmt(sx(fx)),
                fmt(HEIGHT - MARGIN_B + 18.0),
                tick_label(fx, self.log_x)
            );
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
                fmt(MARGIN_L - 6.0),
                fmt(sy(fy) + 4.0),
                tick_label(fy, self.log_y)
            );
            let _ = write!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n",
                fmt(sx(fx)),
                fmt(MARGIN_T),
                fmt(sx(fx)),
                fmt(HEIGHT - MARGIN_B)
            );
        }
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = write!(
            svg,
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );

        for (idx, (series, transformed)) in self.series.iter().zip(&pts).enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let path: Vec<String> = transformed
                .iter()
                .map(|(x, y)| format!("{},{}", fmt(sx(*x)), fmt(sy(*y))))
                .collect();
            if path.len() > 1 {
                let _ = write!(
                    svg,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                    path.join(" ")
                );
            }
            for (x, y) in transformed {
                let _ = write!(
                    svg,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                    fmt(sx(*x)),
                    fmt(sy(*y))
                );
            }
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
                fmt(WIDTH - MARGIN_R - 180.0),
                fmt(MARGIN_T + 16.0 * idx as f64),
                escape(&series.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_deterministic_svg() {
        let chart = Chart {
            title: "decay".into(),
            x_label: "N".into(),
            y_label: "eps".into(),
            log_x: false,
            log_y: true,
            series: vec![Series {
                label: "eps(N)".into(),
                points: vec![(8.0, 1.0), (16.0, 0.5), (32.0, 0.2)],
            }],
        };
        let a = chart.render();
        let b = chart.render();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("polyline"));
    }

    #[test]
    fn log_plot_drops_nonpositive_points() {
        let chart = Chart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y: true,
            series: vec![Series {
                label: "s".into(),
                points: vec![(1.0, 0.0), (2.0, 1.0), (3.0, 2.0)],
            }],
        };
        let svg = chart.render();
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
