//! Deterministic table and CSV rendering for benchmark output.
//!
//! Layout mirrors the benchmark write-up: one table per (model, horizon)
//! with columns rel.err (%), sd(rel.err), √MSE×10⁴, one row per estimator,
//! fixed 4-decimal formatting. Raw per-path estimates use 17 significant
//! digits so a round-trip through text is exact at the 1e-10 level.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::runner::CellResult;

fn write_file(path: &Path, contents: String) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Data { row: None, msg: format!("writing {}: {e}", path.display()) })
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .map_err(|e| Error::Data { row: None, msg: format!("creating {}: {e}", path.display()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// Stable file label for a horizon: the three standard horizons get their
/// trading-calendar names, anything else a sanitized numeric tag.
pub fn horizon_label(horizon: f64) -> String {
    let named = [(1.0 / 252.0, "1d"), (5.0 / 252.0, "1w"), (1.0 / 12.0, "1m")];
    for (value, name) in named {
        if (horizon - value).abs() < 1e-12 {
            return name.to_string();
        }
    }
    format!("T{}", format!("{horizon:.6}").replace('.', "p"))
}

pub fn cell_label(cell: &CellResult) -> String {
    format!("model{}_{}", cell.model, horizon_label(cell.horizon))
}

/// Render one cell's summary table.
pub fn render_table(cell: &CellResult, format: TableFormat) -> String {
    let has_coverage = cell.summaries.iter().any(|s| s.ci_coverage.is_some());
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("estimator,rel_err_pct,sd_rel_err_pct,sqrt_mse_x1e4");
            if has_coverage {
                out.push_str(",ci95_coverage");
            }
            out.push('\n');
            for s in &cell.summaries {
                out.push_str(&format!(
                    "{},{:.4},{:.4},{:.4}",
                    s.estimator_id,
                    s.mean_rel_err_pct,
                    s.sd_rel_err_pct,
                    s.sqrt_mse * 1e4
                ));
                if has_coverage {
                    match s.ci_coverage {
                        Some(c) => out.push_str(&format!(",{c:.4}")),
                        None => out.push(','),
                    }
                }
                out.push('\n');
            }
        }
        TableFormat::Markdown => {
            out.push_str(&format!(
                "### Model {}, T = {} (n = {})\n\n",
                cell.model,
                horizon_label(cell.horizon),
                cell.n
            ));
            out.push_str("| estimator | rel.err (%) | sd(rel.err) | sqrt(MSE) x 1e4 |");
            if has_coverage {
                out.push_str(" CI95 coverage |");
            }
            out.push('\n');
            out.push_str("|---|---|---|---|");
            if has_coverage {
                out.push_str("---|");
            }
            out.push('\n');
            for s in &cell.summaries {
                out.push_str(&format!(
                    "| {} | {:.4} | {:.4} | {:.4} |",
                    s.estimator_id,
                    s.mean_rel_err_pct,
                    s.sd_rel_err_pct,
                    s.sqrt_mse * 1e4
                ));
                if has_coverage {
                    match s.ci_coverage {
                        Some(c) => out.push_str(&format!(" {c:.4} |")),
                        None => out.push_str("  |"),
                    }
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Per-path estimates, 17 significant digits.
pub fn render_raw_csv(cell: &CellResult) -> String {
    let mut out = String::from("path,c_true");
    for id in &cell.estimator_ids {
        out.push_str(&format!(",est_{id}"));
    }
    out.push('\n');
    for row in &cell.rows {
        out.push_str(&format!("{},{:.16e}", row.path, row.c_true));
        for e in &row.estimates {
            out.push_str(&format!(",{e:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// Stabilization-count histograms for the iterative estimators.
pub fn render_iters_csv(cell: &CellResult) -> String {
    let iterative: Vec<usize> = cell
        .summaries
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.iter_histogram.is_empty())
        .map(|(i, _)| i)
        .collect();
    let mut out = String::from("iterations");
    for &i in &iterative {
        out.push_str(&format!(",frac_{}", cell.estimator_ids[i]));
    }
    out.push('\n');
    let mut keys: Vec<usize> = iterative
        .iter()
        .flat_map(|&i| cell.summaries[i].iter_histogram.keys().copied())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    for k in keys {
        out.push_str(&k.to_string());
        for &i in &iterative {
            let frac = cell.summaries[i].iter_histogram.get(&k).copied().unwrap_or(0.0);
            out.push_str(&format!(",{frac:.6}"));
        }
        out.push('\n');
    }
    out
}

/// Write one table file per cell in the chosen format; returns the paths.
pub fn emit_tables(
    cells: &[CellResult],
    format: TableFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let ext = match format {
        TableFormat::Csv => "csv",
        TableFormat::Markdown => "md",
    };
    let mut written = Vec::new();
    for cell in cells {
        let path = dir.join(format!("{}.{ext}", cell_label(cell)));
        write_file(&path, render_table(cell, format))?;
        written.push(path);
    }
    Ok(written)
}

/// Write the full benchmark output tree: `tables/`, `raw/`, `iters/`.
pub fn write_outputs(cells: &[CellResult], out_dir: &Path) -> Result<()> {
    let tables = out_dir.join("tables");
    emit_tables(cells, TableFormat::Csv, &tables)?;
    emit_tables(cells, TableFormat::Markdown, &tables)?;
    let raw = out_dir.join("raw");
    let iters = out_dir.join("iters");
    ensure_dir(&raw)?;
    ensure_dir(&iters)?;
    for cell in cells {
        let label = cell_label(cell);
        write_file(&raw.join(format!("{label}.csv")), render_raw_csv(cell))?;
        write_file(&iters.join(format!("{label}.csv")), render_iters_csv(cell))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::metrics::McSummary;
    use crate::harness::runner::PathRow;
    use std::collections::BTreeMap;

    fn fake_cell() -> CellResult {
        let mut hist = BTreeMap::new();
        hist.insert(2, 0.75);
        hist.insert(3, 0.25);
        CellResult {
            model: 1,
            horizon: 5.0 / 252.0,
            n: 390,
            estimator_ids: vec!["2".into(), "4".into()],
            summaries: vec![
                McSummary {
                    estimator_id: "2".into(),
                    mean_rel_err_pct: 4.87335,
                    sd_rel_err_pct: 8.7488,
                    sqrt_mse: 0.804e-4,
                    iter_histogram: BTreeMap::new(),
                    ci_coverage: None,
                    degenerate_sd: false,
                },
                McSummary {
                    estimator_id: "4".into(),
                    mean_rel_err_pct: 3.9688,
                    sd_rel_err_pct: 8.4253,
                    sqrt_mse: 0.7478e-4,
                    iter_histogram: hist,
                    ci_coverage: None,
                    degenerate_sd: false,
                },
            ],
            rows: vec![PathRow { path: 0, c_true: 7.936507936507937e-4, estimates: vec![8.1e-4, 8.0e-4] }],
        }
    }

    #[test]
    fn labels() {
        assert_eq!(horizon_label(1.0 / 252.0), "1d");
        assert_eq!(horizon_label(5.0 / 252.0), "1w");
        assert_eq!(horizon_label(1.0 / 12.0), "1m");
        assert_eq!(horizon_label(0.5), "T0p500000");
        assert_eq!(cell_label(&fake_cell()), "model1_1w");
    }

    #[test]
    fn csv_table_shape_and_rounding() {
        let cell = fake_cell();
        let csv = render_table(&cell, TableFormat::Csv);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "estimator,rel_err_pct,sd_rel_err_pct,sqrt_mse_x1e4");
        assert_eq!(lines.next().unwrap(), "2,4.8734,8.7488,0.8040");
        assert_eq!(lines.next().unwrap(), "4,3.9688,8.4253,0.7478");
        assert!(lines.next().is_none());
    }

    #[test]
    fn empty_cell_gives_header_only() {
        let mut cell = fake_cell();
        cell.summaries.clear();
        cell.estimator_ids.clear();
        cell.rows.clear();
        let csv = render_table(&cell, TableFormat::Csv);
        assert_eq!(csv.lines().count(), 1);
        let raw = render_raw_csv(&cell);
        assert_eq!(raw.trim(), "path,c_true");
    }

    #[test]
    fn raw_round_trips_exactly() {
        let cell = fake_cell();
        let raw = render_raw_csv(&cell);
        let line = raw.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        let c: f64 = fields[1].parse().unwrap();
        assert_eq!(c, cell.rows[0].c_true);
        let e: f64 = fields[2].parse().unwrap();
        assert_eq!(e, cell.rows[0].estimates[0]);
    }

    #[test]
    fn iters_columns_only_for_iterative() {
        let cell = fake_cell();
        let iters = render_iters_csv(&cell);
        let mut lines = iters.lines();
        assert_eq!(lines.next().unwrap(), "iterations,frac_4");
        assert_eq!(lines.next().unwrap(), "2,0.750000");
        assert_eq!(lines.next().unwrap(), "3,0.250000");
    }

    #[test]
    fn markdown_renders() {
        let md = render_table(&fake_cell(), TableFormat::Markdown);
        assert!(md.contains("### Model 1"));
        assert!(md.contains("| 4 | 3.9688 |"));
    }
}
