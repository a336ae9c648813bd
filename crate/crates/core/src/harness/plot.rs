//! Standalone SVG line charts of epoch records.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::record::EpochRecord;
use crate::channel::Parity;
use crate::error::{FlashError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    /// True mutual information with the target and setpoint lines.
    Mi,
    /// Scale factor per parity.
    Alpha,
    /// Raw BER on a log axis with the 1e-2 line.
    Ber,
}

impl FromStr for PlotKind {
    type Err = FlashError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mi" => Ok(PlotKind::Mi),
            "alpha" => Ok(PlotKind::Alpha),
            "ber" => Ok(PlotKind::Ber),
            other => Err(FlashError::Argument(format!("unknown plot kind `{other}` (mi, alpha, ber)"))),
        }
    }
}

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const BER_FLOOR: f64 = 1e-12;
const TARGET_MI: f64 = 1.945;
const SETPOINT_MI: f64 = 1.965;

fn value(kind: PlotKind, r: &EpochRecord) -> f64 {
    match kind {
        PlotKind::Mi => r.mi_true,
        PlotKind::Alpha => r.alpha,
        PlotKind::Ber => r.ber.max(BER_FLOOR).log10(),
    }
}

/// Renders the chart as an SVG document.
pub fn render_svg(records: &[EpochRecord], kind: PlotKind) -> Result<String> {
    if records.is_empty() {
        return Err(FlashError::Argument("nothing to plot: no records".into()));
    }
    let x_max = records.iter().map(|r| r.cycle).max().unwrap_or(0).max(1) as f64;
    let values: Vec<f64> = records.iter().map(|r| value(kind, r)).filter(|v| v.is_finite()).collect();
    let (mut y_lo, mut y_hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let refs: Vec<(f64, &str)> = match kind {
        PlotKind::Mi => vec![(TARGET_MI, "target 1.945"), (SETPOINT_MI, "setpoint 1.965")],
        PlotKind::Alpha => vec![],
        PlotKind::Ber => vec![(-2.0, "1e-2")],
    };
    for (v, _) in &refs {
        y_lo = y_lo.min(*v);
        y_hi = y_hi.max(*v);
    }
    match kind {
        PlotKind::Ber => {
            y_lo = y_lo.floor();
            y_hi = y_hi.ceil().max(y_lo + 1.0);
        }
        _ => {
            let pad = ((y_hi - y_lo) * 0.05).max(1e-3);
            y_lo -= pad;
            y_hi += pad;
        }
    }
    let px = |x: f64| LEFT + x / x_max * (W - LEFT - RIGHT);
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let title = match kind {
        PlotKind::Mi => "Mutual information vs P/E cycles",
        PlotKind::Alpha => "Scale factor vs P/E cycles",
        PlotKind::Ber => "Raw BER vs P/E cycles",
    };
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let (x0, x1, y0, y1) = (px(0.0), px(x_max), py(y_lo), py(y_hi));
    let _ = writeln!(s, r#"<path d="M{x0:.1},{y1:.1} V{y0:.1} H{x1:.1}" fill="none" stroke="black"/>"#);

    for k in 0..=5 {
        let xv = x_max * k as f64 / 5.0;
        let x = px(xv);
        let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{xv:.0}</text>"#, y0 + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">P/E cycles</text>"#, (x0 + x1) / 2.0, H - 10.0);
    let ticks: Vec<f64> = match kind {
        PlotKind::Ber => (y_lo as i64..=y_hi as i64).map(|e| e as f64).collect(),
        _ => (0..=5).map(|k| y_lo + (y_hi - y_lo) * k as f64 / 5.0).collect(),
    };
    for yv in ticks {
        let y = py(yv);
        let label = match kind {
            PlotKind::Ber => format!("1e{}", yv as i64),
            _ => format!("{yv:.3}"),
        };
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#, x0 - 8.0, y + 4.0);
    }
    for (v, label) in &refs {
        let y = py(*v);
        let _ = writeln!(
            s,
            r##"<line class="reference" x1="{x0:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#888" stroke-dasharray="6,4"/>"##
        );
        let _ = writeln!(s, r##"<text x="{:.1}" y="{:.1}" text-anchor="end" fill="#555">{label}</text>"##, x1 - 4.0, y - 4.0);
    }
    for (i, (parity, colour)) in [(Parity::Even, "#1f77b4"), (Parity::Odd, "#d62728")].into_iter().enumerate() {
        let pts: Vec<String> = records
            .iter()
            .filter(|r| r.parity == parity)
            .map(|r| (r.cycle as f64, value(kind, r)))
            .filter(|(_, v)| v.is_finite())
            .map(|(x, v)| format!("{:.2},{:.2}", px(x), py(v)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-parity="{}" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            parity.name(),
            pts.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#, x0 + 10.0, x0 + 30.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{} cells</text>"#, x0 + 36.0, ly + 4.0, parity.name());
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(records: &[EpochRecord], kind: PlotKind, path: &Path) -> Result<()> {
    let svg = render_svg(records, kind)?;
    std::fs::write(path, svg).map_err(|e| FlashError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> Vec<EpochRecord> {
        (0..5)
            .flat_map(|k| {
                Parity::ALL.map(|p| {
                    EpochRecord::new(k * 100, p, 1.99 - 0.01 * k as f64, None, 0.4 + 0.1 * k as f64, 0.0, 0.0, 10f64.powi(-6 + k as i32), None, None, false)
                })
            })
            .collect()
    }

    #[test]
    fn empty_is_rejected() {
        assert!(render_svg(&[], PlotKind::Mi).is_err());
    }

    #[test]
    fn mi_plot_has_reference_lines_and_two_series() {
        let svg = render_svg(&series(), PlotKind::Mi).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("class=\"series\"").count(), 2);
        assert_eq!(svg.matches("class=\"reference\"").count(), 2);
        assert!(svg.contains("target 1.945"));
    }

    #[test]
    fn ber_plot_is_logarithmic() {
        let svg = render_svg(&series(), PlotKind::Ber).unwrap();
        assert!(svg.contains("1e-2"));
        assert!(svg.contains(">1e-6<"));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("alpha".parse::<PlotKind>().unwrap(), PlotKind::Alpha);
        assert!("bogus".parse::<PlotKind>().is_err());
    }
}
