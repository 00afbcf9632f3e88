//! Minimal static SVG line plots (800×600, linear or log axes).

use std::fmt::Write;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 95.0;
const RIGHT: f64 = 25.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 65.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Solid,
    Dashed,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    /// Fixed colour; defaults to the palette entry for the series index.
    pub color: Option<&'static str>,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            style: Style::Solid,
            color: None,
        }
    }

    pub fn with_style(mut self, style: Style) -> Self {
        self.style = style;
        self
    }

    pub fn with_color(mut self, color: &'static str) -> Self {
        self.color = Some(color);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

struct Axis {
    scale: Scale,
    lo: f64,
    hi: f64,
    pix_lo: f64,
    pix_hi: f64,
}

impl Axis {
    fn value(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (self.value(v) - self.lo) / (self.hi - self.lo);
        self.pix_lo + t * (self.pix_hi - self.pix_lo)
    }

    /// Tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        match self.scale {
            Scale::Log => {
                let (a, b) = (self.lo.round() as i32, self.hi.round() as i32);
                let stride = ((b - a) as f64 / 10.0).ceil().max(1.0) as i32;
                (a..=b)
                    .filter(|e| (e - a) % stride == 0)
                    .map(|e| 10f64.powi(e))
                    .collect()
            }
            Scale::Linear => {
                let step = nice_step((self.hi - self.lo) / 8.0);
                let first = (self.lo / step).ceil() as i64;
                let last = (self.hi / step).floor() as i64;
                (first..=last).map(|i| i as f64 * step).collect()
            }
        }
    }

    fn label(&self, v: f64) -> String {
        match self.scale {
            Scale::Log => format!("1e{}", v.log10().round() as i32),
            Scale::Linear => {
                let s = format!("{v:.6}");
                let s = s.trim_end_matches('0').trim_end_matches('.');
                if s == "-0" {
                    "0".into()
                } else {
                    s.into()
                }
            }
        }
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn range(values: impl Iterator<Item = f64>, scale: Scale) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    match scale {
        Scale::Log => {
            let (a, b) = (lo.floor(), hi.ceil());
            if a == b {
                (a, a + 1.0)
            } else {
                (a, b)
            }
        }
        Scale::Linear => {
            if lo == hi {
                (lo - 1.0, hi + 1.0)
            } else {
                let step = nice_step((hi - lo) / 8.0);
                ((lo / step).floor() * step, (hi / step).ceil() * step)
            }
        }
    }
}

fn usable(v: f64, scale: Scale) -> bool {
    v.is_finite() && (scale == Scale::Linear || v > 0.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Plot {
    pub fn to_svg(&self) -> String {
        let pts = || {
            self.series
                .iter()
                .flat_map(|s| s.points.iter())
                .filter(|(x, y)| usable(*x, self.x_scale) && usable(*y, self.y_scale))
        };
        let xv = |v: f64| {
            if self.x_scale == Scale::Log {
                v.log10()
            } else {
                v
            }
        };
        let yv = |v: f64| {
            if self.y_scale == Scale::Log {
                v.log10()
            } else {
                v
            }
        };
        let (xlo, xhi) = range(pts().map(|p| xv(p.0)), self.x_scale);
        let (ylo, yhi) = range(pts().map(|p| yv(p.1)), self.y_scale);
        let x = Axis {
            scale: self.x_scale,
            lo: xlo,
            hi: xhi,
            pix_lo: LEFT,
            pix_hi: WIDTH - RIGHT,
        };
        let y = Axis {
            scale: self.y_scale,
            lo: ylo,
            hi: yhi,
            pix_lo: HEIGHT - BOTTOM,
            pix_hi: TOP,
        };

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="30" font-size="18" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        // Grid and tick labels.
        for t in x.ticks() {
            let px = x.map(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd"/>
<text x="{px:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"##,
                TOP,
                HEIGHT - BOTTOM,
                HEIGHT - BOTTOM + 18.0,
                x.label(t)
            );
        }
        for t in y.ticks() {
            let py = y.map(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>
<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"##,
                LEFT,
                WIDTH - RIGHT,
                LEFT - 6.0,
                py + 4.0,
                y.label(t)
            );
        }
        let _ = writeln!(
            svg,
            r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            escape(&self.y_label)
        );

        let _ = writeln!(
            svg,
            r#"<clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}"/></clipPath>"#,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = s.color.unwrap_or(PALETTE[i % PALETTE.len()]);
            let coords: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|(px, py)| usable(*px, self.x_scale) && usable(*py, self.y_scale))
                .map(|&(px, py)| (x.map(px), y.map(py)))
                .collect();
            match s.style {
                Style::Markers => {
                    for (cx, cy) in coords {
                        let _ = writeln!(
                            svg,
                            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{color}" clip-path="url(#plot-area)"/>"#
                        );
                    }
                }
                Style::Solid | Style::Dashed => {
                    let path: Vec<String> = coords
                        .iter()
                        .map(|(cx, cy)| format!("{cx:.2},{cy:.2}"))
                        .collect();
                    let dash = if s.style == Style::Dashed {
                        r#" stroke-dasharray="8 5""#
                    } else {
                        ""
                    };
                    let _ = writeln!(
                        svg,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash} clip-path="url(#plot-area)"/>"#,
                        path.join(" ")
                    );
                }
            }
        }

        // Legend.
        for (i, s) in self.series.iter().enumerate() {
            let color = s.color.unwrap_or(PALETTE[i % PALETTE.len()]);
            let ly = TOP + 18.0 + 18.0 * i as f64;
            let lx = WIDTH - RIGHT - 210.0;
            match s.style {
                Style::Markers => {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                        lx + 12.0,
                        ly - 4.0
                    );
                }
                _ => {
                    let dash = if s.style == Style::Dashed {
                        r#" stroke-dasharray="8 5""#
                    } else {
                        ""
                    };
                    let _ = writeln!(
                        svg,
                        r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
                        ly - 4.0,
                        lx + 24.0,
                        ly - 4.0
                    );
                }
            }
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{ly:.2}" font-size="12">{}</text>"#,
                lx + 30.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> Plot {
        Plot {
            title: "noise <demo>".into(),
            x_label: "Frequency [Hz]".into(),
            y_label: "Strain [1/rtHz]".into(),
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            series: vec![
                Series::line("a", vec![(1.0, 1e-23), (10.0, 3e-24), (100.0, 1e-22)]),
                Series::line("SQL", vec![(1.0, 7e-23), (100.0, 7e-25)]).with_style(Style::Dashed),
            ],
        }
    }

    #[test]
    fn svg_has_fixed_viewport_and_dashed_reference() {
        let svg = demo().to_svg();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains(r#"width="800" height="600""#));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("noise &lt;demo&gt;"));
        assert!(svg.contains(">1e-25<") && svg.contains(">1e-22<"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn non_positive_points_skipped_on_log_axes() {
        let mut p = demo();
        p.series
            .push(Series::line("bad", vec![(0.0, 1.0), (-1.0, 2.0)]));
        let svg = p.to_svg();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn nice_linear_ticks() {
        let a = Axis {
            scale: Scale::Linear,
            lo: -15.0,
            hi: 20.0,
            pix_lo: 0.0,
            pix_hi: 1.0,
        };
        assert_eq!(
            a.ticks(),
            vec![-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]
        );
        assert_eq!(a.label(-0.0), "0");
        assert_eq!(a.label(2.5), "2.5");
    }
}
