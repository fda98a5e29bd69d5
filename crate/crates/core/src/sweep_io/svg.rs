//! Self-contained SVG heatmaps of two-axis result tables.

use std::fmt::Write as _;
use std::path::Path;

use super::table::ResultTable;
use super::SweepError;

const CELL: f64 = 12.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const BAR_GAP: f64 = 30.0;
const BAR_WIDTH: f64 = 20.0;
const MISSING_COLOR: &str = "#bfbfbf";

/// Viridis-like stops, interpolated linearly in RGB.
const STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let i = STOPS.iter().position(|s| s.0 >= t).unwrap_or(STOPS.len() - 1).max(1);
    let (t0, c0) = STOPS[i - 1];
    let (t1, c1) = STOPS[i];
    let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2]))
}

fn distinct_sorted(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `z_col` over the `(x_col, y_col)` grid. Cells are placed by grid
/// index, so logarithmic axes appear evenly spaced.
pub fn heatmap_svg(table: &ResultTable, x_col: &str, y_col: &str, z_col: &str) -> Result<String, SweepError> {
    let xs = table.real_column(x_col)?;
    let ys = table.real_column(y_col)?;
    let zs = table.real_column(z_col)?;
    let ux = distinct_sorted(&xs);
    let uy = distinct_sorted(&ys);
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(SweepError::NonGrid("axis columns contain non-finite values".into()));
    }
    if ux.len() * uy.len() != table.rows.len() {
        return Err(SweepError::NonGrid(format!(
            "{} rows do not form a {}x{} grid",
            table.rows.len(),
            ux.len(),
            uy.len()
        )));
    }
    let mut seen = vec![false; ux.len() * uy.len()];
    let mut placed = Vec::with_capacity(xs.len());
    for (x, y) in xs.iter().zip(&ys) {
        let ix = ux.binary_search_by(|v| v.total_cmp(x)).unwrap();
        let iy = uy.binary_search_by(|v| v.total_cmp(y)).unwrap();
        if std::mem::replace(&mut seen[iy * ux.len() + ix], true) {
            return Err(SweepError::NonGrid(format!("duplicate grid point ({x}, {y})")));
        }
        placed.push((ix, iy));
    }

    let finite: Vec<f64> = zs.iter().copied().filter(|z| z.is_finite()).collect();
    let z_min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let z_max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = finite.is_empty() || z_max == z_min;
    let norm = |z: f64| if degenerate { 0.5 } else { (z - z_min) / (z_max - z_min) };

    let plot_w = CELL * ux.len() as f64;
    let plot_h = CELL * uy.len() as f64;
    let bar_x = MARGIN_LEFT + plot_w + BAR_GAP;
    let width = bar_x + BAR_WIDTH + 90.0;
    let height = MARGIN_TOP + plot_h + MARGIN_BOTTOM;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(out, r#"<title>{}</title>"#, escape(&format!("{z_col} over {x_col} and {y_col}"))).unwrap();
    for ((ix, iy), z) in placed.iter().zip(&zs) {
        let fill = if z.is_finite() { color(norm(*z)) } else { MISSING_COLOR.to_string() };
        let x = MARGIN_LEFT + CELL * *ix as f64;
        let y = MARGIN_TOP + plot_h - CELL * (*iy as f64 + 1.0);
        writeln!(out, r#"<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"/>"#).unwrap();
    }
    writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();

    let label_y = MARGIN_TOP + plot_h + 15.0;
    writeln!(out, r#"<text x="{MARGIN_LEFT}" y="{label_y}">{:.4e}</text>"#, ux[0]).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{label_y}" text-anchor="end">{:.4e}</text>"#,
        MARGIN_LEFT + plot_w,
        ux[ux.len() - 1]
    )
    .unwrap();
    writeln!(
        out,
        r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        label_y + 25.0,
        escape(x_col)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{:.4e}</text>"#,
        MARGIN_LEFT - 4.0,
        MARGIN_TOP + plot_h,
        uy[0]
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{:.4e}</text>"#,
        MARGIN_LEFT - 4.0,
        MARGIN_TOP + 10.0,
        uy[uy.len() - 1]
    )
    .unwrap();
    writeln!(
        out,
        r#"<text class="axis-label" x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_col)
    )
    .unwrap();

    // Colour bar.
    if degenerate {
        writeln!(
            out,
            r#"<rect class="colorbar" x="{bar_x}" y="{MARGIN_TOP}" width="{BAR_WIDTH}" height="{plot_h}" fill="{}"/>"#,
            if finite.is_empty() { MISSING_COLOR.to_string() } else { color(0.5) }
        )
        .unwrap();
        let label = if finite.is_empty() { "no data".to_string() } else { format!("{z_min:.4e}") };
        writeln!(
            out,
            r#"<text class="colorbar-label" x="{}" y="{}">{}</text>"#,
            bar_x + BAR_WIDTH + 4.0,
            MARGIN_TOP + plot_h / 2.0,
            label
        )
        .unwrap();
    } else {
        writeln!(out, r#"<defs><linearGradient id="cbar" x1="0" y1="1" x2="0" y2="0">"#).unwrap();
        for (t, _) in STOPS {
            writeln!(out, r#"<stop offset="{t}" stop-color="{}"/>"#, color(t)).unwrap();
        }
        writeln!(out, "</linearGradient></defs>").unwrap();
        writeln!(
            out,
            r#"<rect class="colorbar" x="{bar_x}" y="{MARGIN_TOP}" width="{BAR_WIDTH}" height="{plot_h}" fill="url(#cbar)"/>"#
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="colorbar-label" x="{}" y="{}">{z_max:.4e}</text>"#,
            bar_x + BAR_WIDTH + 4.0,
            MARGIN_TOP + 10.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="colorbar-label" x="{}" y="{}">{z_min:.4e}</text>"#,
            bar_x + BAR_WIDTH + 4.0,
            MARGIN_TOP + plot_h
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text class="axis-label" x="{}" y="{}">{}</text>"#,
        bar_x,
        MARGIN_TOP - 10.0,
        escape(z_col)
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_heatmap_svg(table: &ResultTable, x_col: &str, y_col: &str, z_col: &str, path: &Path) -> Result<(), SweepError> {
    std::fs::write(path, heatmap_svg(table, x_col, y_col, z_col)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep_io::table::{Cell, Column, ColumnKind};

    fn table(z: [f64; 4]) -> ResultTable {
        let pts = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];
        ResultTable {
            columns: vec![
                Column::new("gamma", ColumnKind::Real),
                Column::new("k", ColumnKind::Real),
                Column::new("p", ColumnKind::Real),
            ],
            rows: pts.iter().zip(z).map(|(&(x, y), z)| vec![Cell::Real(x), Cell::Real(y), Cell::Real(z)]).collect(),
            metadata: serde_json::Value::Null,
        }
    }

    fn cell_fills(svg: &str) -> Vec<String> {
        svg.lines()
            .filter(|l| l.contains(r#"class="cell""#))
            .map(|l| l.split("fill=\"").nth(1).unwrap().split('"').next().unwrap().to_string())
            .collect()
    }

    #[test]
    fn four_cells_two_colours() {
        let svg = heatmap_svg(&table([0.0, 0.0, 0.5, 0.5]), "k", "gamma", "p").unwrap();
        let fills = cell_fills(&svg);
        assert_eq!(fills.len(), 4);
        let mut distinct = fills.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn constant_field_is_single_colour_with_labelled_bar() {
        let svg = heatmap_svg(&table([0.3; 4]), "k", "gamma", "p").unwrap();
        let mut fills = cell_fills(&svg);
        fills.dedup();
        assert_eq!(fills.len(), 1);
        assert!(svg.contains("3.0000e-1"));
        assert!(!svg.contains("linearGradient"));
    }

    #[test]
    fn non_grid_is_rejected() {
        let mut t = table([0.0; 4]);
        t.rows.pop();
        assert!(matches!(heatmap_svg(&t, "k", "gamma", "p"), Err(SweepError::NonGrid(_))));
        let mut t = table([0.0; 4]);
        t.rows[3] = t.rows[0].clone();
        assert!(matches!(heatmap_svg(&t, "k", "gamma", "p"), Err(SweepError::NonGrid(_))));
    }
}
