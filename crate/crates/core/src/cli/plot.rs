//! Static SVG regret charts: a mean curve and a 10–90 percentile band per
//! policy, plus the `c ln t` lower-bound line on log-time charts. Output is a
//! pure function of the input series, so identical CSVs give identical bytes.

use std::fmt::Write;

use super::output::AggregateSeries;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 60.0;

const LOWER_BOUND_COLOR: &str = "#1f4fd1";
const PALETTE: [&str; 9] = [
    "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn nice_step(range: f64, target: usize) -> f64 {
    let raw = range / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn tick_label(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e6 || x.abs() < 1e-3) {
        format!("{x:.0e}")
    } else {
        let s = format!("{x:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Axes {
    log_time: bool,
    t_min: f64,
    t_max: f64,
    y_max: f64,
}

impl Axes {
    fn scale_t(&self, t: f64) -> f64 {
        let (a, b, x) = if self.log_time {
            (self.t_min.ln(), self.t_max.ln(), t.max(self.t_min).ln())
        } else {
            (self.t_min, self.t_max, t)
        };
        let frac = if b > a { (x - a) / (b - a) } else { 0.5 };
        LEFT + frac * (WIDTH - LEFT - RIGHT)
    }

    fn scale_y(&self, y: f64) -> f64 {
        TOP + (1.0 - (y / self.y_max).clamp(0.0, 1.0)) * (HEIGHT - TOP - BOTTOM)
    }

    fn point(&self, t: u64, y: f64) -> String {
        format!("{:.2},{:.2}", self.scale_t(t as f64), self.scale_y(y))
    }

    fn time_ticks(&self) -> Vec<f64> {
        if self.log_time {
            let lo = self.t_min.log10().ceil() as i32;
            let hi = self.t_max.log10().floor() as i32;
            let ticks: Vec<f64> = (lo..=hi).map(|e| 10f64.powi(e)).collect();
            if ticks.is_empty() {
                vec![self.t_min, self.t_max]
            } else {
                ticks
            }
        } else {
            let step = nice_step((self.t_max - self.t_min).max(1.0), 5);
            let first = (self.t_min / step).ceil() * step;
            (0..)
                .map(|i| first + i as f64 * step)
                .take_while(|&t| t <= self.t_max + 1e-9)
                .collect()
        }
    }
}

/// Renders `series` as an SVG document.
pub fn render_svg(series: &[AggregateSeries], log_time: bool) -> String {
    let all_t = series.iter().flat_map(|s| s.t.iter().copied());
    let t_min = all_t.clone().min().unwrap_or(1).max(1) as f64;
    let t_max = all_t.max().unwrap_or(1) as f64;
    // one reference line; the lower bound is shared by every policy
    let lower_bound = series
        .first()
        .filter(|_| log_time)
        .map(|s| (s.t.clone(), s.lb_curve.clone()));
    let y_top = series
        .iter()
        .flat_map(|s| s.p90.iter().chain(&s.mean))
        .chain(lower_bound.iter().flat_map(|(_, lb)| lb.iter()))
        .copied()
        .filter(|y| y.is_finite())
        .fold(0.0, f64::max);
    let y_step = nice_step(if y_top > 0.0 { y_top * 1.05 } else { 1.0 }, 5);
    let y_max = (y_top * 1.05 / y_step).ceil().max(1.0) * y_step;
    let axes = Axes {
        log_time,
        t_min,
        t_max,
        y_max,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let title = if log_time {
        "Cumulative regret (log time)"
    } else {
        "Cumulative regret"
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="26" text-anchor="middle" font-size="16">{title}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0
    );

    // axes and grid
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(svg, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g class="ticks">"#);
    for t in axes.time_ticks() {
        let x = axes.scale_t(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{y1:.2}\" stroke=\"#e0e0e0\"/>"
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick_label(t)
        );
    }
    let mut y = 0.0;
    while y <= y_max + y_step * 1e-9 {
        let py = axes.scale_y(y);
        let _ = writeln!(
            svg,
            "<line x1=\"{x0:.2}\" y1=\"{py:.2}\" x2=\"{x1:.2}\" y2=\"{py:.2}\" stroke=\"#e0e0e0\"/>"
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            tick_label(y)
        );
        y += y_step;
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        if log_time { "t (log scale)" } else { "t" }
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">regret</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper = s.t.iter().zip(&s.p90).map(|(&t, &y)| axes.point(t, y));
        let lower = s.t.iter().zip(&s.p10).rev().map(|(&t, &y)| axes.point(t, y));
        let points: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="band" data-policy="{}" fill="{color}" fill-opacity="0.2" stroke="none" points="{}"/>"#,
            escape(&s.policy),
            points.join(" ")
        );
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s.t.iter().zip(&s.mean).map(|(&t, &y)| axes.point(t, y)).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="mean" data-policy="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(&s.policy),
            points.join(" ")
        );
    }
    if let Some((ts, lb)) = &lower_bound {
        let points: Vec<String> = ts.iter().zip(lb).map(|(&t, &y)| axes.point(t, y)).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="lower-bound" fill="none" stroke="{LOWER_BOUND_COLOR}" stroke-width="2" stroke-dasharray="6 4" points="{}"/>"#,
            points.join(" ")
        );
    }

    // legend
    let lx = WIDTH - RIGHT + 20.0;
    let mut ly = TOP + 10.0;
    let _ = writeln!(svg, r#"<g class="legend">"#);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.2}" y="{:.2}" width="18" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            ly - 9.0,
            lx + 26.0,
            ly,
            escape(&s.policy)
        );
        ly += 20.0;
    }
    if lower_bound.is_some() {
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{LOWER_BOUND_COLOR}" stroke-width="2" stroke-dasharray="6 4"/><text x="{:.2}" y="{ly:.2}">lower bound</text>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0,
            lx + 26.0
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}
