use std::fmt::Write as _;
use std::path::Path;

use super::Summary;
use crate::error::Result;

const PALETTE: [&str; 6] = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#555555"];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

/// Write `<path>.csv` (long format: variant, episode, mean, median) and
/// `<path>.svg` (mean return per episode, one line per variant).
pub fn emit_curves(summary: &Summary, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path.with_extension("csv"))?;
    w.write_record(["variant", "episode", "mean", "median"])?;
    for v in &summary.variants {
        for (e, (mean, median)) in v.mean.iter().zip(&v.median).enumerate() {
            w.write_record([
                v.variant.name().to_string(),
                e.to_string(),
                mean.to_string(),
                median.to_string(),
            ])?;
        }
    }
    w.flush()?;
    std::fs::write(path.with_extension("svg"), render_svg(summary))?;
    Ok(())
}

fn render_svg(summary: &Summary) -> String {
    let values = summary.variants.iter().flat_map(|v| v.mean.iter().copied());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let last = summary.episodes.saturating_sub(1).max(1) as f64;
    let x_of = |e: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * e as f64 / last;
    let y_of = |r: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (r - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(s, r#"<text x="{x0}" y="{:.1}">0</text>"#, y0 + 16.0);
    let _ = writeln!(
        s,
        r#"<text x="{x1}" y="{:.1}" text-anchor="end">{}</text>"#,
        y0 + 16.0,
        summary.episodes.saturating_sub(1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">episode</text>"#,
        (x0 + x1) / 2.0,
        y0 + 32.0
    );
    for (label, y) in [(lo, y0), (hi, y1)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label:.3}</text>"#,
            x0 - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">mean return</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for (i, v) in summary.variants.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = v
            .mean
            .iter()
            .enumerate()
            .map(|(e, &r)| format!("{:.2},{:.2}", x_of(e), y_of(r)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = y1 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#,
            x1 - 120.0,
            x1 - 100.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            x1 - 95.0,
            ly + 4.0,
            v.variant
        );
    }
    s.push_str("</svg>\n");
    s
}
