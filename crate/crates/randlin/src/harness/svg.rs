//! Minimal standalone SVG line plots with a log-scaled vertical axis.
//!
//! One polyline per series; the theoretical bound, when given, is drawn as a
//! dashed straight line (slope in log10 units per x unit) anchored at the
//! first point of the first series. No external assets, fixed-precision
//! coordinates, byte-reproducible output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::HarnessError;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 620.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Writes a log-y line plot. Points with `y ≤ 0` are dropped (they have no
/// logarithm); a series may become empty that way. Errors — and creates no
/// file — if no plottable point remains.
pub fn emit_svg(
    series: &[(String, Vec<(f64, f64)>)],
    bound_slope: Option<f64>,
    path: impl AsRef<Path>,
) -> Result<(), HarnessError> {
    let text = render_svg(series, bound_slope)?;
    fs::write(path, text)?;
    Ok(())
}

/// Renders the document; split from the file write for golden tests.
pub fn render_svg(
    series: &[(String, Vec<(f64, f64)>)],
    bound_slope: Option<f64>,
) -> Result<String, HarnessError> {
    let filtered: Vec<(&str, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(label, pts)| {
            (
                label.as_str(),
                pts.iter().copied().filter(|(_, y)| *y > 0.0).collect(),
            )
        })
        .collect();
    if filtered.iter().all(|(_, pts)| pts.is_empty()) {
        return Err(HarnessError::EmptySeries);
    }

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut lmin = f64::INFINITY;
    let mut lmax = f64::NEG_INFINITY;
    for (_, pts) in &filtered {
        for (x, y) in pts {
            xmin = xmin.min(*x);
            xmax = xmax.max(*x);
            let l = y.log10();
            lmin = lmin.min(l);
            lmax = lmax.max(l);
        }
    }
    if xmax - xmin < 1e-12 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if lmax - lmin < 1e-12 {
        lmin -= 0.5;
        lmax += 0.5;
    }
    lmin -= 0.2;
    lmax += 0.2;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * plot_w;
    let sy = move |l: f64| MARGIN_T + (lmax - l) / (lmax - lmin) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");

    // axes
    let _ = writeln!(
        out,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
        MARGIN_L,
        MARGIN_T,
        MARGIN_L,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        out,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
        MARGIN_L,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );

    // y ticks at integer decades
    let dec_lo = lmin.ceil() as i64;
    let dec_hi = lmax.floor() as i64;
    let n_dec = (dec_hi - dec_lo).max(0) as usize + 1;
    let stride = (n_dec / 10).max(1);
    let mut dec = dec_lo;
    while dec <= dec_hi {
        let y = sy(dec as f64);
        let _ = writeln!(
            out,
            "<line x1=\"{:.3}\" y1=\"{y:.3}\" x2=\"{:.3}\" y2=\"{y:.3}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>",
            MARGIN_L,
            WIDTH - MARGIN_R
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" text-anchor=\"end\">1e{dec}</text>",
            MARGIN_L - 6.0,
            y + 4.0
        );
        dec += stride as i64;
    }

    // x ticks
    for k in 0..=4 {
        let x = xmin + (xmax - xmin) * k as f64 / 4.0;
        let px = sx(x);
        let _ = writeln!(
            out,
            "<line x1=\"{px:.3}\" y1=\"{:.3}\" x2=\"{px:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{px:.3}\" y=\"{:.3}\" font-size=\"12\" text-anchor=\"middle\">{:.0}</text>",
            HEIGHT - MARGIN_B + 20.0,
            x
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"13\" text-anchor=\"middle\">iteration</text>",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 15.0
    );

    // bound line, anchored at the first plottable point of the first series
    if let Some(slope) = bound_slope {
        if let Some((x0, y0)) = filtered.iter().find_map(|(_, pts)| pts.first().copied()) {
            let l0 = y0.log10();
            let (x1, l1) = if slope < 0.0 {
                let x_floor = x0 + (lmin - l0) / slope;
                if x_floor < xmax {
                    (x_floor, lmin)
                } else {
                    (xmax, l0 + slope * (xmax - x0))
                }
            } else {
                (xmax, l0 + slope * (xmax - x0))
            };
            let _ = writeln!(
                out,
                "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"8 5\"/>",
                sx(x0),
                sy(l0),
                sx(x1),
                sy(l1.min(lmax).max(lmin))
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" fill=\"#555555\">theoretical bound</text>",
                WIDTH - MARGIN_R - 150.0,
                MARGIN_T + 14.0
            );
        }
    }

    // series polylines + legend
    for (k, (label, pts)) in filtered.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = PALETTE[k % PALETTE.len()];
        let mut coords = String::new();
        for (x, y) in pts {
            let _ = write!(coords, "{:.3},{:.3} ", sx(*x), sy(y.log10()));
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>",
            coords.trim_end()
        );
        let ly = MARGIN_T + 14.0 * (k as f64 + 2.0);
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"{ly:.3}\" font-size=\"12\" fill=\"{color}\">{label}</text>",
            WIDTH - MARGIN_R - 150.0
        );
    }

    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_series_has_exactly_one_polyline() {
        let series = vec![("run".to_string(), vec![(0.0, 1.0), (1.0, 0.1)])];
        let text = render_svg(&series, None).unwrap();
        assert_eq!(text.matches("<polyline").count(), 1);
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_series_errors_without_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.svg");
        let err = emit_svg(&[], None, &path);
        assert!(matches!(err, Err(HarnessError::EmptySeries)));
        assert!(!path.exists());

        // all-nonpositive values are just as unplottable
        let series = vec![("zeros".to_string(), vec![(0.0, 0.0), (1.0, 0.0)])];
        assert!(matches!(
            emit_svg(&series, None, &path),
            Err(HarnessError::EmptySeries)
        ));
        assert!(!path.exists());
    }

    #[test]
    fn bound_line_is_dashed_not_polyline() {
        let series = vec![("run".to_string(), vec![(0.0, 1.0), (10.0, 0.01)])];
        let text = render_svg(&series, Some(-0.2)).unwrap();
        assert_eq!(text.matches("<polyline").count(), 1);
        assert!(text.contains("stroke-dasharray"));
        assert!(text.contains("theoretical bound"));
    }

    #[test]
    fn golden_fixed_input() {
        let series = vec![
            ("trial 0".to_string(), vec![(0.0, 1.0), (5.0, 0.25), (10.0, 0.03)]),
            ("trial 1".to_string(), vec![(0.0, 0.8), (5.0, 0.2), (10.0, 0.05)]),
        ];
        let text = render_svg(&series, Some(-0.15)).unwrap();
        let golden_path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/golden_plot.svg");
        if std::env::var_os("RANDLIN_UPDATE_GOLDEN").is_some() {
            std::fs::write(golden_path, &text).unwrap();
            return;
        }
        let golden = std::fs::read_to_string(golden_path).unwrap();
        assert_eq!(text, golden, "rendered SVG deviates from the golden file");
    }
}
