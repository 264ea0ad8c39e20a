//! Self-contained SVG renderings of aggregate scan records: no plotting
//! dependency, just the handful of shapes the two scan views need.

use std::fmt::Write as _;
use std::str::FromStr;

use cylproc_core::stats::fit_rate;

use crate::record::ResultRecord;
use crate::run::RunError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Scaled empirical variance against the window dilation, with the
    /// asymptotic constant as a reference line when it is available.
    Variance,
    /// Log–log Kolmogorov–Smirnov distance against the window dilation,
    /// annotated with the fitted rate exponent.
    CltRate,
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "variance" => Ok(PlotKind::Variance),
            "clt-rate" => Ok(PlotKind::CltRate),
            other => Err(format!(
                "unknown plot kind `{other}` (expected variance or clt-rate)"
            )),
        }
    }
}

/// Renders the aggregate rows of a scan into an SVG document.
pub fn plot_scan(records: &[ResultRecord], kind: PlotKind) -> Result<String, RunError> {
    let aggregates: Vec<&ResultRecord> = records.iter().filter(|r| r.is_aggregate()).collect();
    if aggregates.is_empty() {
        return Err(RunError::Config(
            "nothing to plot: the record set has no aggregate rows".into(),
        ));
    }
    match kind {
        PlotKind::Variance => variance_svg(&aggregates),
        PlotKind::CltRate => clt_rate_svg(&aggregates),
    }
}

/// Affine map from the data interval to the pixel interval; degenerate data
/// ranges collapse to the midpoint.
fn scale(v: f64, data: (f64, f64), pixels: (f64, f64)) -> f64 {
    let (lo, hi) = data;
    let (plo, phi) = pixels;
    if hi == lo {
        return (plo + phi) / 2.0;
    }
    plo + (v - lo) / (hi - lo) * (phi - plo)
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

/// Widens a range by 8% on both sides so points never sit on the frame.
fn pad(range: (f64, f64)) -> (f64, f64) {
    let span = (range.1 - range.0).abs().max(1e-12);
    (range.0 - 0.08 * span, range.1 + 0.08 * span)
}

struct Canvas {
    body: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Canvas {
    fn new(x: (f64, f64), y: (f64, f64), title: &str, x_label: &str, y_label: &str) -> Self {
        let mut body = String::new();
        let _ = write!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="black"/>
<text x="{cx}" y="28" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>
<text x="{cx}" y="{label_y}" text-anchor="middle" font-family="sans-serif" font-size="13">{x_label}</text>
<text x="18" y="{cy}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {cy})">{y_label}</text>
"#,
            w = WIDTH - 2.0 * MARGIN,
            h = HEIGHT - 2.0 * MARGIN,
            cx = WIDTH / 2.0,
            cy = HEIGHT / 2.0,
            label_y = HEIGHT - 16.0,
        );
        let mut canvas = Canvas { body, x, y };
        canvas.ticks();
        canvas
    }

    fn px(&self, v: f64) -> f64 {
        scale(v, self.x, (MARGIN, WIDTH - MARGIN))
    }

    fn py(&self, v: f64) -> f64 {
        // SVG y grows downwards.
        scale(v, self.y, (HEIGHT - MARGIN, MARGIN))
    }

    fn ticks(&mut self) {
        for (value, anchor) in [(self.x.0, "start"), (self.x.1, "end")] {
            let _ = write!(
                self.body,
                r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{value:.3}</text>
"#,
                x = self.px(value),
                y = HEIGHT - MARGIN + 16.0,
            );
        }
        for value in [self.y.0, self.y.1] {
            let _ = write!(
                self.body,
                r#"<text x="{x}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="11">{value:.3}</text>
"#,
                x = MARGIN - 6.0,
                y = self.py(value) + 4.0,
            );
        }
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, dashed: bool) {
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = if dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = write!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}"{dash}/>
"#,
            coords.join(" "),
        );
    }

    fn points(&mut self, points: &[(f64, f64)], fill: &str) {
        for &(x, y) in points {
            let _ = write!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}"/>
"#,
                self.px(x),
                self.py(y),
            );
        }
    }

    fn annotation(&mut self, text: &str) {
        let _ = write!(
            self.body,
            r#"<text x="{x}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="13">{text}</text>
"#,
            x = WIDTH - MARGIN - 8.0,
            y = MARGIN + 20.0,
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn variance_svg(aggregates: &[&ResultRecord]) -> Result<String, RunError> {
    let points: Vec<(f64, f64)> = aggregates.iter().map(|rec| (rec.r, rec.vol)).collect();
    let reference = aggregates.iter().find_map(|rec| rec.analytic_var);
    let x = pad(data_range(points.iter().map(|p| p.0)));
    let y = pad(data_range(
        points.iter().map(|p| p.1).chain(reference.into_iter()),
    ));
    let mut canvas = Canvas::new(
        x,
        y,
        "Scaled volume variance",
        "window dilation r",
        "empirical variance / r^(n+m)",
    );
    canvas.polyline(&points, "steelblue", false);
    canvas.points(&points, "steelblue");
    if let Some(v) = reference {
        canvas.polyline(&[(x.0, v), (x.1, v)], "firebrick", true);
        canvas.annotation(&format!("reference constant {v:.4}"));
    }
    Ok(canvas.finish())
}

fn clt_rate_svg(aggregates: &[&ResultRecord]) -> Result<String, RunError> {
    let pairs: Vec<(f64, f64)> = aggregates
        .iter()
        .map(|rec| (rec.r, rec.vol))
        .filter(|&(r, d)| r > 0.0 && d > 0.0)
        .collect();
    if pairs.is_empty() {
        return Err(RunError::Config(
            "nothing to plot: the rate view needs positive distances".into(),
        ));
    }
    let points: Vec<(f64, f64)> = pairs.iter().map(|&(r, d)| (r.ln(), d.ln())).collect();
    let x = pad(data_range(points.iter().map(|p| p.0)));
    let y = pad(data_range(points.iter().map(|p| p.1)));
    let mut canvas = Canvas::new(
        x,
        y,
        "Normal-approximation error",
        "log r",
        "log KS distance",
    );
    canvas.points(&points, "steelblue");
    if pairs.len() >= 3 {
        let fit = fit_rate(&pairs).map_err(|e| RunError::Config(e.to_string()))?;
        canvas.polyline(
            &[
                (x.0, fit.slope * x.0 + fit.intercept),
                (x.1, fit.slope * x.1 + fit.intercept),
            ],
            "firebrick",
            true,
        );
        canvas.annotation(&format!("fitted slope {:.3}", fit.slope));
    }
    Ok(canvas.finish())
}
