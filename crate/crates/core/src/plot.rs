//! Static SVG rendering of the per-age analysis.
//!
//! One self-contained file: light-gray boxplots of the p-values at each age,
//! filled circles for the geometric means, a shaded stripe for the central
//! 95% interval of the null law and a dotted line at its mean. No external
//! assets, no scripts; byte-identical output for identical input.

use crate::error::{Error, Result};
use crate::xa::{BoxStats, XAResult};

/// Everything the renderer needs, already reduced to plain numbers.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub ages: Vec<f64>,
    pub boxes: Vec<BoxStats>,
    pub g_points: Vec<f64>,
    pub stripe_lo: f64,
    pub stripe_hi: f64,
    pub mu0: f64,
    pub width: u32,
    pub height: u32,
}

impl PlotSpec {
    pub fn from_result(result: &XAResult, title: impl Into<String>) -> Self {
        PlotSpec {
            title: title.into(),
            ages: result.ages.iter().map(|a| a.t_a).collect(),
            boxes: result.ages.iter().map(|a| a.box_stats).collect(),
            g_points: result.ages.iter().map(|a| a.g_p).collect(),
            stripe_lo: result.stripe_lo,
            stripe_hi: result.stripe_hi,
            mu0: result.mu0,
            width: 760,
            height: 480,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ages.is_empty() {
            return Err(Error::InvalidParameter(
                "plot needs at least one age".into(),
            ));
        }
        if self.ages.len() != self.boxes.len() || self.ages.len() != self.g_points.len() {
            return Err(Error::InvalidParameter(
                "ages, boxes and g-points must have equal lengths".into(),
            ));
        }
        if self.width < 200 || self.height < 160 {
            return Err(Error::InvalidParameter("plot dimensions too small".into()));
        }
        Ok(())
    }
}

const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 52.0;

/// Fixed two-decimal pixel coordinates keep the output byte-stable.
fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Short tick label without trailing zeros.
fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() {
        "0".into()
    } else {
        trimmed.to_string()
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    plot_w: f64,
    plot_h: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x0) / (self.x1 - self.x0) * self.plot_w
    }
    // y axis is the p-value scale [0, 1], top-down in SVG coordinates
    fn y(&self, p: f64) -> f64 {
        MARGIN_TOP + (1.0 - p.clamp(0.0, 1.0)) * self.plot_h
    }
}

/// Render the plot to an SVG string.
pub fn render_xa_svg(spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let plot_w = spec.width as f64 - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = spec.height as f64 - MARGIN_TOP - MARGIN_BOTTOM;
    let age_span = spec.ages.last().unwrap() - spec.ages[0];
    let pad = if age_span > 0.0 {
        age_span * 0.05
    } else {
        spec.ages[0].abs().max(1.0) * 0.1
    };
    let frame = Frame {
        x0: spec.ages[0] - pad,
        x1: spec.ages.last().unwrap() + pad,
        plot_w,
        plot_h,
    };
    // Box width: at most 60% of the smallest age gap, capped in pixels.
    let min_gap = spec
        .ages
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let box_w = if min_gap.is_finite() {
        (min_gap * 0.6 / (frame.x1 - frame.x0) * plot_w).clamp(3.0, 26.0)
    } else {
        18.0
    };

    let mut s = String::with_capacity(16 * 1024);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n",
        w = spec.width,
        h = spec.height
    ));
    s.push_str(
        "<style>text{font-family:sans-serif;font-size:11px;fill:#222;}\
         .title{font-size:14px;}\
         .axis{stroke:#222;stroke-width:1;}\
         .tick{stroke:#222;stroke-width:1;}\
         .grid{stroke:#eee;stroke-width:1;}\
         .stripe{fill:#dcdcdc;fill-opacity:0.55;}\
         .mu0{stroke:#666;stroke-width:1;stroke-dasharray:2,3;fill:none;}\
         .box{fill:#d3d3d3;fill-opacity:0.85;stroke:#9a9a9a;stroke-width:1;}\
         .whisker{stroke:#9a9a9a;stroke-width:1;}\
         .median{stroke:#666;stroke-width:1.2;}\
         .gp{fill:#333;}\
         .outliers{font-size:9px;fill:#888;}</style>\n",
    );
    s.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        spec.width, spec.height
    ));
    s.push_str(&format!(
        "<text class=\"title\" x=\"{}\" y=\"22\" text-anchor=\"middle\">{}</text>\n",
        px(MARGIN_LEFT + plot_w / 2.0),
        escape_xml(&spec.title)
    ));

    // y grid and ticks at 0, 0.25, .., 1
    for i in 0..=4 {
        let p = i as f64 * 0.25;
        let y = frame.y(p);
        s.push_str(&format!(
            "<line class=\"grid\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            px(MARGIN_LEFT),
            px(y),
            px(MARGIN_LEFT + plot_w),
            px(y)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            px(MARGIN_LEFT - 8.0),
            px(y + 4.0),
            tick_label(p)
        ));
    }

    // stripe and mu0 line
    s.push_str(&format!(
        "<rect class=\"stripe\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>\n",
        px(MARGIN_LEFT),
        px(frame.y(spec.stripe_hi)),
        px(plot_w),
        px(frame.y(spec.stripe_lo) - frame.y(spec.stripe_hi))
    ));
    s.push_str(&format!(
        "<line class=\"mu0\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        px(MARGIN_LEFT),
        px(frame.y(spec.mu0)),
        px(MARGIN_LEFT + plot_w),
        px(frame.y(spec.mu0))
    ));

    // boxplots
    for (i, bs) in spec.boxes.iter().enumerate() {
        let xc = frame.x(spec.ages[i]);
        if !bs.median.is_finite() {
            continue;
        }
        s.push_str(&format!("<g class=\"boxgroup\" data-age=\"{}\">\n", i));
        // whiskers
        s.push_str(&format!(
            "<line class=\"whisker\" x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\"/>\n",
            px(frame.y(bs.whisker_lo)),
            px(frame.y(bs.q1)),
            x = px(xc)
        ));
        s.push_str(&format!(
            "<line class=\"whisker\" x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\"/>\n",
            px(frame.y(bs.q3)),
            px(frame.y(bs.whisker_hi)),
            x = px(xc)
        ));
        for cap in [bs.whisker_lo, bs.whisker_hi] {
            s.push_str(&format!(
                "<line class=\"whisker\" x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\"/>\n",
                px(xc - box_w / 3.0),
                px(xc + box_w / 3.0),
                y = px(frame.y(cap))
            ));
        }
        // interquartile box and median
        s.push_str(&format!(
            "<rect class=\"box\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>\n",
            px(xc - box_w / 2.0),
            px(frame.y(bs.q3)),
            px(box_w),
            px(frame.y(bs.q1) - frame.y(bs.q3))
        ));
        s.push_str(&format!(
            "<line class=\"median\" x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\"/>\n",
            px(xc - box_w / 2.0),
            px(xc + box_w / 2.0),
            y = px(frame.y(bs.median))
        ));
        if bs.n_outliers > 0 {
            s.push_str(&format!(
                "<text class=\"outliers\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                px(xc),
                px(frame.y(bs.whisker_hi) - 5.0),
                bs.n_outliers
            ));
        }
        s.push_str("</g>\n");
    }

    // geometric means on top
    for (i, &g) in spec.g_points.iter().enumerate() {
        if !g.is_finite() {
            continue;
        }
        s.push_str(&format!(
            "<circle class=\"gp\" cx=\"{}\" cy=\"{}\" r=\"3.2\"/>\n",
            px(frame.x(spec.ages[i])),
            px(frame.y(g))
        ));
    }

    // x ticks: first, middle, last ages
    let tick_idx = {
        let n = spec.ages.len();
        let mut idx = vec![0usize];
        if n > 2 {
            idx.push(n / 2);
        }
        if n > 1 {
            idx.push(n - 1);
        }
        idx
    };
    for &i in &tick_idx {
        let x = frame.x(spec.ages[i]);
        s.push_str(&format!(
            "<line class=\"tick\" x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\"/>\n",
            px(MARGIN_TOP + plot_h),
            px(MARGIN_TOP + plot_h + 5.0),
            x = px(x)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            px(x),
            px(MARGIN_TOP + plot_h + 18.0),
            tick_label(spec.ages[i])
        ));
    }

    // axes
    s.push_str(&format!(
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        px(MARGIN_LEFT),
        px(MARGIN_TOP),
        px(MARGIN_LEFT),
        px(MARGIN_TOP + plot_h)
    ));
    s.push_str(&format!(
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        px(MARGIN_LEFT),
        px(MARGIN_TOP + plot_h),
        px(MARGIN_LEFT + plot_w),
        px(MARGIN_TOP + plot_h)
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">latency t_a</text>\n",
        px(MARGIN_LEFT + plot_w / 2.0),
        px(MARGIN_TOP + plot_h + 36.0)
    ));
    s.push_str(&format!(
        "<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {y})\" text-anchor=\"middle\">p-value</text>\n",
        px(MARGIN_TOP + plot_h / 2.0),
        y = px(MARGIN_TOP + plot_h / 2.0)
    ));

    // legend
    let lx = MARGIN_LEFT + plot_w - 150.0;
    let ly = MARGIN_TOP + 8.0;
    s.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"142\" height=\"52\" fill=\"white\" \
         stroke=\"#ccc\"/>\n",
        px(lx),
        px(ly)
    ));
    s.push_str(&format!(
        "<circle class=\"gp\" cx=\"{}\" cy=\"{}\" r=\"3.2\"/>\
         <text x=\"{}\" y=\"{}\">geometric mean</text>\n",
        px(lx + 12.0),
        px(ly + 13.0),
        px(lx + 24.0),
        px(ly + 17.0)
    ));
    s.push_str(&format!(
        "<rect class=\"stripe\" x=\"{}\" y=\"{}\" width=\"16\" height=\"8\"/>\
         <text x=\"{}\" y=\"{}\">95% null stripe</text>\n",
        px(lx + 4.0),
        px(ly + 24.0),
        px(lx + 24.0),
        px(ly + 32.0)
    ));
    s.push_str(&format!(
        "<line class=\"mu0\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\
         <text x=\"{}\" y=\"{}\">null mean</text>\n",
        px(lx + 4.0),
        px(ly + 43.0),
        px(lx + 20.0),
        px(ly + 43.0),
        px(lx + 24.0),
        px(ly + 47.0)
    ));

    s.push_str("</svg>\n");
    Ok(s)
}

/// One power curve: x values with one y series per label.
#[derive(Debug, Clone)]
pub struct PowerCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Minimal line chart for power sweeps: power (y, in [0,1]) against the
/// swept parameter (x, log-scaled when it spans more than a decade).
pub fn render_power_svg(title: &str, x_label: &str, curves: &[PowerCurve]) -> Result<String> {
    if curves.is_empty() || curves.iter().any(|c| c.points.is_empty()) {
        return Err(Error::InvalidParameter(
            "power plot needs non-empty curves".into(),
        ));
    }
    let (width, height) = (640u32, 420u32);
    let plot_w = width as f64 - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = height as f64 - MARGIN_TOP - MARGIN_BOTTOM;
    let xs: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .collect();
    let (x_min, x_max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let log_x = x_min > 0.0 && x_max / x_min > 10.0;
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let (fx0, fx1) = (tx(x_min), tx(x_max));
    let frame = Frame {
        x0: fx0,
        x1: fx1 + (fx1 - fx0) * 1e-9,
        plot_w,
        plot_h,
    };

    let mut s = String::with_capacity(8 * 1024);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    s.push_str(
        "<style>text{font-family:sans-serif;font-size:11px;fill:#222;}\
         .title{font-size:14px;}.axis{stroke:#222;stroke-width:1;}\
         .grid{stroke:#eee;stroke-width:1;}\
         .curve{fill:none;stroke-width:1.6;}</style>\n",
    );
    s.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    s.push_str(&format!(
        "<text class=\"title\" x=\"{}\" y=\"22\" text-anchor=\"middle\">{}</text>\n",
        px(MARGIN_LEFT + plot_w / 2.0),
        escape_xml(title)
    ));
    for i in 0..=4 {
        let p = i as f64 * 0.25;
        let y = frame.y(p);
        s.push_str(&format!(
            "<line class=\"grid\" x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\"/>\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            px(MARGIN_LEFT),
            px(MARGIN_LEFT + plot_w),
            px(MARGIN_LEFT - 8.0),
            px(y + 4.0),
            tick_label(p),
            y = px(y)
        ));
    }
    let palette = ["#31688e", "#35b779", "#e8602d", "#8a4fb0", "#726658"];
    for (ci, curve) in curves.iter().enumerate() {
        let color = palette[ci % palette.len()];
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", px(frame.x(tx(x))), px(frame.y(y))))
            .collect();
        s.push_str(&format!(
            "<polyline class=\"curve\" stroke=\"{color}\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            px(MARGIN_LEFT + plot_w - 120.0),
            px(MARGIN_TOP + 16.0 + 14.0 * ci as f64),
            escape_xml(&curve.label)
        ));
    }
    // x ticks at ends
    for &x in &[x_min, x_max] {
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            px(frame.x(tx(x))),
            px(MARGIN_TOP + plot_h + 18.0),
            tick_label(x)
        ));
    }
    s.push_str(&format!(
        "<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\
         <line class=\"axis\" x1=\"{0}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\"/>\n",
        px(MARGIN_LEFT),
        px(MARGIN_TOP),
        px(MARGIN_TOP + plot_h),
        px(MARGIN_LEFT + plot_w)
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        px(MARGIN_LEFT + plot_w / 2.0),
        px(MARGIN_TOP + plot_h + 36.0),
        escape_xml(x_label)
    ));
    s.push_str(&format!(
        "<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {y})\" text-anchor=\"middle\">power</text>\n",
        px(MARGIN_TOP + plot_h / 2.0),
        y = px(MARGIN_TOP + plot_h / 2.0)
    ));
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
