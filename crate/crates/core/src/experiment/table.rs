//! Result tables.
//!
//! CSV columns: `dataset,method,noise_level,seed,accuracy,wall_time_s,pca`,
//! one row per cell, accuracy as a fraction in [0, 1] written with full
//! precision, `pca` as `true`/`false`. The text form is one grid per
//! (dataset, pca) pair: methods as rows, noise levels as columns, entries
//! the median accuracy over seeds in percent with two decimals.

use std::fmt::Write;

use super::{Method, ResultRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "dataset,method,noise_level,seed,accuracy,wall_time_s,pca";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub dataset: String,
    pub pca: bool,
    pub method: Method,
    pub noise_level: f64,
    /// Median accuracy over seeds, as a fraction.
    pub median_accuracy: f64,
    pub seeds: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Seed medians, ordered by dataset, pca flag, method, then noise level.
pub fn median_grid(rows: &[ResultRow]) -> Vec<GridEntry> {
    let mut keys: Vec<(String, bool, Method, f64)> = rows
        .iter()
        .map(|r| (r.dataset.clone(), r.pca, r.method, r.noise_level))
        .collect();
    keys.sort_by(|a, b| {
        (&a.0, a.1, a.2)
            .cmp(&(&b.0, b.1, b.2))
            .then(a.3.total_cmp(&b.3))
    });
    keys.dedup();
    keys.into_iter()
        .map(|(dataset, pca, method, noise_level)| {
            let mut acc: Vec<f64> = rows
                .iter()
                .filter(|r| r.dataset == dataset && r.pca == pca && r.method == method && r.noise_level == noise_level)
                .map(|r| r.accuracy)
                .collect();
            GridEntry {
                seeds: acc.len(),
                median_accuracy: median(&mut acc),
                dataset,
                pca,
                method,
                noise_level,
            }
        })
        .collect()
}

fn level_label(level: f64) -> String {
    let pct = level * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}%", pct.round())
    } else {
        format!("{pct:.1}%")
    }
}

pub fn emit_table(rows: &[ResultRow], format: TableFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Parameter("no results to tabulate".into()));
    }
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.dataset, r.method, r.noise_level, r.seed, r.accuracy, r.wall_time_s, r.pca
                )
                .unwrap();
            }
        }
        TableFormat::Text => {
            let grid = median_grid(rows);
            let mut groups: Vec<(String, bool)> = grid.iter().map(|g| (g.dataset.clone(), g.pca)).collect();
            groups.dedup();
            for (i, (dataset, pca)) in groups.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let cells: Vec<&GridEntry> = grid.iter().filter(|g| &g.dataset == dataset && g.pca == *pca).collect();
                let mut levels: Vec<f64> = cells.iter().map(|g| g.noise_level).collect();
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                let mut methods: Vec<Method> = cells.iter().map(|g| g.method).collect();
                methods.dedup();
                let seeds = cells.iter().map(|g| g.seeds).max().unwrap_or(0);
                writeln!(
                    out,
                    "{dataset} ({}, median of {seeds} seed{})",
                    if *pca { "PCA" } else { "no PCA" },
                    if seeds == 1 { "" } else { "s" }
                )
                .unwrap();
                write!(out, "{:<15}", "method").unwrap();
                for &l in &levels {
                    write!(out, " {:>8}", level_label(l)).unwrap();
                }
                out.push('\n');
                for m in methods {
                    write!(out, "{:<15}", m.name()).unwrap();
                    for &l in &levels {
                        match cells.iter().find(|g| g.method == m && g.noise_level == l) {
                            Some(g) => write!(out, " {:>8.2}", 100.0 * g.median_accuracy).unwrap(),
                            None => write!(out, " {:>8}", "-").unwrap(),
                        }
                    }
                    out.push('\n');
                }
            }
        }
    }
    Ok(out)
}

/// Reads rows back from the CSV form.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let bad = |line: usize, detail: String| Error::Parameter(format!("results CSV line {line}: {detail}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(i + 1, format!("expected 7 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, format!("bad number `{s}`")));
        rows.push(ResultRow {
            dataset: f[0].to_string(),
            method: f[1].parse().map_err(|e: Error| bad(i + 1, e.to_string()))?,
            noise_level: num(f[2])?,
            seed: f[3].parse().map_err(|_| bad(i + 1, format!("bad seed `{}`", f[3])))?,
            accuracy: num(f[4])?,
            wall_time_s: num(f[5])?,
            pca: f[6].parse().map_err(|_| bad(i + 1, format!("bad pca flag `{}`", f[6])))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn row(method: Method, level: f64, seed: u64, accuracy: f64) -> ResultRow {
        ResultRow {
            dataset: "usps".into(),
            method,
            noise_level: level,
            seed,
            accuracy,
            wall_time_s: 0.25,
            pca: true,
        }
    }

    #[test]
    fn single_row() {
        let csv = emit_table(&[row(Method::Gcn, 0.15, 2, 0.9)], TableFormat::Csv).unwrap();
        assert_eq!(csv, format!("{CSV_HEADER}\nusps,gcn,0.15,2,0.9,0.25,true\n"));
        assert!(emit_table(&[], TableFormat::Text).is_err());
    }

    fn full_grid() -> Vec<ResultRow> {
        let mut rng = SeededRng::new(4);
        let mut rows = Vec::new();
        for m in Method::ALL {
            for l in [0.0, 0.15, 0.3, 0.45] {
                for s in 1..=3 {
                    rows.push(row(m, l, s, rng.below(10_000) as f64 / 10_000.0 + 1e-17 * s as f64));
                }
            }
        }
        rows
    }

    #[test]
    fn grid_of_medians() {
        let rows = full_grid();
        let grid = median_grid(&rows);
        assert_eq!(grid.len(), 20);
        for g in &grid {
            let mut acc: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == g.method && r.noise_level == g.noise_level)
                .map(|r| r.accuracy)
                .collect();
            acc.sort_by(f64::total_cmp);
            assert_eq!(g.median_accuracy, acc[1]);
            assert_eq!(g.seeds, 3);
        }
        let text = emit_table(&rows, TableFormat::Text).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[1].contains("0%") && lines[1].contains("45%"));
        assert!(lines[2].starts_with("graph-ssl"));
        assert_eq!(lines[2].split_whitespace().count(), 5);
    }

    #[test]
    fn csv_round_trip_keeps_medians() {
        let rows = full_grid();
        let parsed = parse_csv(&emit_table(&rows, TableFormat::Csv).unwrap()).unwrap();
        assert_eq!(parsed, rows);
        assert_eq!(median_grid(&parsed), median_grid(&rows));
    }

    #[test]
    fn even_seed_count_averages_middle_pair() {
        let rows = vec![row(Method::Hgnn, 0.0, 1, 0.5), row(Method::Hgnn, 0.0, 2, 0.7)];
        assert!((median_grid(&rows)[0].median_accuracy - 0.6).abs() < 1e-15);
    }

    #[test]
    fn csv_errors() {
        assert!(parse_csv("nope\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\nusps,gcn,0,1\n")).is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\nusps,xyz,0,1,0.5,1,true\n")).is_err());
    }
}
