//! Minimal self-contained SVG plots: line charts and heat maps.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

pub struct Series<'a> {
    pub label: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct LinePlot<'a> {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series<'a>>,
    /// Lower clamp for the y axis (useful for dB plots).
    pub y_floor: Option<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let px = x0 + f * (x1 - x0);
        let py = y0 - f * (y0 - y1);
        let _ = writeln!(
            out,
            r#"<text x="{px}" y="{}" text-anchor="middle">{:.4}</text><text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
            y0 + 16.0,
            x.0 + f * (x.1 - x.0),
            x0 - 6.0,
            py + 4.0,
            y.0 + f * (y.1 - y.0)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

pub fn line_plot(plot: &LinePlot<'_>) -> String {
    let mut out = String::new();
    header(&mut out, &plot.title);
    let xr = range(plot.series.iter().flat_map(|s| s.x.iter().copied()));
    let floor = plot.y_floor.unwrap_or(f64::NEG_INFINITY);
    let mut yr = range(
        plot.series
            .iter()
            .flat_map(|s| s.y.iter().map(|v| v.max(floor))),
    );
    if let Some(f) = plot.y_floor {
        yr.0 = yr.0.max(f);
    }
    axes(&mut out, xr, yr, &plot.x_label, &plot.y_label);
    let sx = |v: f64| MARGIN_L + (v - xr.0) / (xr.1 - xr.0) * (WIDTH - MARGIN_L - MARGIN_R);
    let sy = |v: f64| {
        let v = v.max(yr.0).min(yr.1);
        HEIGHT - MARGIN_B - (v - yr.0) / (yr.1 - yr.0) * (HEIGHT - MARGIN_B - MARGIN_T)
    };
    for (i, s) in plot.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut points = String::new();
        for (x, y) in s.x.iter().zip(s.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", sx(*x), sy(*y));
            }
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            points.trim_end()
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            MARGIN_L + 10.0,
            MARGIN_T + 16.0 + 15.0 * i as f64,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heat map of `rows` (one per y value) in dB relative to the global
/// maximum, clamped at `floor_db`. Columns are max-pooled to at most
/// `max_columns`.
pub struct HeatMap<'a> {
    pub title: String,
    pub rows: &'a [Vec<f64>],
    pub x_extent: (f64, f64),
    pub y_values: &'a [f64],
    pub x_label: String,
    pub y_label: String,
    pub floor_db: f64,
    pub max_columns: usize,
}

pub fn heat_map(map: &HeatMap<'_>) -> String {
    let HeatMap {
        title,
        rows,
        x_extent,
        y_values,
        x_label,
        y_label,
        floor_db,
        max_columns,
    } = map;
    let (x_extent, floor_db, max_columns) = (*x_extent, *floor_db, *max_columns);
    let mut out = String::new();
    header(&mut out, title);
    let cols = rows.first().map_or(0, Vec::len);
    let pool = cols.div_ceil(max_columns.max(1)).max(1);
    let pooled: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.chunks(pool)
                .map(|c| c.iter().cloned().fold(0.0, f64::max))
                .collect()
        })
        .collect();
    let peak = pooled
        .iter()
        .flatten()
        .cloned()
        .fold(0.0, f64::max)
        .max(1e-300);
    let yr = range(y_values.iter().copied());
    axes(&mut out, x_extent, yr, x_label, y_label);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let n_rows = pooled.len().max(1);
    let n_cols = pooled.first().map_or(1, Vec::len).max(1);
    let cw = plot_w / n_cols as f64;
    let rh = plot_h / n_rows as f64;
    for (r, row) in pooled.iter().enumerate() {
        // First row at the bottom.
        let y = HEIGHT - MARGIN_B - (r + 1) as f64 * rh;
        for (c, v) in row.iter().enumerate() {
            let db = 20.0 * (v / peak).max(1e-300).log10();
            let t = ((db - floor_db) / -floor_db).clamp(0.0, 1.0);
            if t <= 0.0 {
                continue;
            }
            let shade = (255.0 * (1.0 - t)) as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb(255,{shade},{shade})"/>"#,
                MARGIN_L + c as f64 * cw,
                y,
                cw + 0.3,
                rh + 0.3
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, f64::NAN, 3.0];
        let svg = line_plot(&LinePlot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "s".into(),
                x: &x,
                y: &y,
            }],
            y_floor: None,
        });
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn heat_map_pools_columns() {
        let rows = vec![vec![1.0; 100], vec![0.5; 100]];
        let svg = heat_map(&HeatMap {
            title: "m".into(),
            rows: &rows,
            x_extent: (0.0, 1.0),
            y_values: &[0.0, 1.0],
            x_label: "x".into(),
            y_label: "y".into(),
            floor_db: -40.0,
            max_columns: 10,
        });
        assert_eq!(svg.matches("<rect").count(), 2 + 20);
    }
}
