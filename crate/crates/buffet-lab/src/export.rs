//! Deterministic serialization of trajectories, summaries and reports.
//!
//! Trajectory CSV: `#`-prefixed provenance lines (the fully resolved
//! configuration and build identifier), one fixed header, then one row
//! per checkpoint. Reals are written with the shortest decimal that
//! round-trips, missing values as empty fields, so re-importing an
//! export reproduces every numeric field exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::ensemble::EnsembleSummary;
use crate::error::{Error, Result};
use crate::estimate::EstimationReport;
use crate::observables::{AggregateRow, TaggedObs};
use crate::trajectory::Trajectory;

/// Shortest round-trip decimal for a real.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn header(n_tagged: usize) -> String {
    let mut h = String::from("t,D,T,Tbar,S,Z,Pbar,Kbar,R,lambda,Lambda");
    for i in 1..=n_tagged {
        write!(h, ",K_tag{i},P_tag{i},tau_tag{i}").unwrap();
    }
    h
}

/// Renders a trajectory as CSV text.
pub fn trajectory_to_csv(tr: &Trajectory, echo: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in echo {
        writeln!(out, "# {k} = {v}").unwrap();
    }
    writeln!(out, "{}", header(tr.n_tagged)).unwrap();
    for row in &tr.rows {
        write_row(&mut out, row, tr.n_tagged);
    }
    out
}

fn write_row(out: &mut String, row: &AggregateRow, n_tagged: usize) {
    write!(
        out,
        "{},{},{},{},{},{},",
        row.t,
        row.d,
        row.tried,
        fmt_f64(row.tbar),
        fmt_f64(row.s),
        fmt_f64(row.z)
    )
    .unwrap();
    match row.pbar {
        Some(v) => write!(out, "{}", fmt_f64(v)).unwrap(),
        None => {}
    }
    out.push(',');
    match row.kbar {
        Some(v) => write!(out, "{}", fmt_f64(v)).unwrap(),
        None => {}
    }
    write!(
        out,
        ",{},{},{}",
        fmt_f64(row.r),
        fmt_f64(row.lambda),
        fmt_f64(row.lambda_cum)
    )
    .unwrap();
    for i in 0..n_tagged {
        match row.tagged.get(i) {
            Some(obs) => write!(
                out,
                ",{},{},{}",
                obs.count,
                fmt_f64(obs.inclusion_probability),
                obs.birth
            )
            .unwrap(),
            None => out.push_str(",,,"),
        }
    }
    out.push('\n');
}

/// Writes a trajectory CSV to `path`.
pub fn export_trajectory(tr: &Trajectory, echo: &[(String, String)], path: &Path) -> Result<()> {
    write_text(path, &trajectory_to_csv(tr, echo))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A trajectory read back from CSV (provenance echo and numeric rows).
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedTrajectory {
    pub echo: Vec<(String, String)>,
    pub n_tagged: usize,
    pub rows: Vec<AggregateRow>,
}

/// Parses a trajectory CSV produced by [`trajectory_to_csv`].
pub fn import_trajectory(text: &str) -> Result<ImportedTrajectory> {
    let mut echo = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.peek() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                echo.push((k.trim().to_string(), v.trim().to_string()));
            }
            lines.next();
        } else {
            break;
        }
    }
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing header".into()))?;
    let cols: Vec<&str> = header_line.split(',').collect();
    if cols.len() < 11 || (cols.len() - 11) % 3 != 0 {
        return Err(Error::Parse(format!("unexpected header `{header_line}`")));
    }
    let n_tagged = (cols.len() - 11) / 3;
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse(format!(
                "row {}: {} fields, expected {}",
                lineno + 1,
                fields.len(),
                cols.len()
            )));
        }
        let req = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: field {i} = `{}`", lineno + 1, fields[i])))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if fields[i].is_empty() {
                Ok(None)
            } else {
                req(i).map(Some)
            }
        };
        let mut tagged = Vec::new();
        for k in 0..n_tagged {
            let base = 11 + 3 * k;
            if fields[base].is_empty() {
                continue;
            }
            tagged.push(TaggedObs {
                id: (k + 1) as u64,
                birth: fields[base + 2].parse().map_err(|_| {
                    Error::Parse(format!("row {}: tau field `{}`", lineno + 1, fields[base + 2]))
                })?,
                count: fields[base].parse().map_err(|_| {
                    Error::Parse(format!("row {}: K field `{}`", lineno + 1, fields[base]))
                })?,
                inclusion_probability: req(base + 1)?,
            });
        }
        rows.push(AggregateRow {
            t: fields[0].parse().map_err(|_| Error::Parse("t".into()))?,
            d: fields[1].parse().map_err(|_| Error::Parse("D".into()))?,
            tried: fields[2].parse().map_err(|_| Error::Parse("T".into()))?,
            tbar: req(3)?,
            s: req(4)?,
            z: req(5)?,
            pbar: opt(6)?,
            kbar: opt(7)?,
            r: req(8)?,
            lambda: req(9)?,
            lambda_cum: req(10)?,
            tagged,
        });
    }
    Ok(ImportedTrajectory {
        echo,
        n_tagged,
        rows,
    })
}

/// Renders an ensemble summary as a structured text document: key/value
/// sections plus a machine-readable per-replica table.
pub fn summary_to_text(summary: &EnsembleSummary, echo: &[(String, String)]) -> String {
    let mut out = String::new();
    writeln!(out, "[provenance]").unwrap();
    for (k, v) in echo {
        writeln!(out, "{k}: {v}").unwrap();
    }
    writeln!(out, "\n[regime]").unwrap();
    writeln!(out, "mean-case: {}", summary.regime.mean_case).unwrap();
    writeln!(out, "dish-case: {}", summary.regime.dish_case).unwrap();
    for q in &summary.quantities {
        writeln!(out, "\n[quantity {}]", q.quantity).unwrap();
        if let Some(reason) = &q.skipped {
            writeln!(out, "skipped: {reason}").unwrap();
            continue;
        }
        if let Some(rule) = &q.rule {
            writeln!(out, "factor: {}", rule.factor).unwrap();
            match rule.limit {
                crate::scaling::LimitKind::Deterministic(v) => {
                    writeln!(out, "limit: deterministic {}", fmt_f64(v)).unwrap()
                }
                crate::scaling::LimitKind::RandomZstar { coeff } => {
                    writeln!(out, "limit: {} * Zstar_inf", fmt_f64(coeff)).unwrap()
                }
                crate::scaling::LimitKind::RandomKstar { coeff } => {
                    writeln!(out, "limit: {} * Kstar_inf_j", fmt_f64(coeff)).unwrap()
                }
            }
        }
        writeln!(out, "replicas-used: {}", q.terminal_rescaled.len()).unwrap();
        writeln!(out, "replicas-dropped: {}", q.dropped_replicas).unwrap();
        writeln!(out, "mean: {}", fmt_f64(q.mean)).unwrap();
        writeln!(out, "std-error: {}", fmt_f64(q.std_error)).unwrap();
        writeln!(out, "cv: {}", fmt_f64(q.cv)).unwrap();
        if let Some(n) = &q.normality {
            writeln!(
                out,
                "normality: skewness {} excess-kurtosis {} cdf-deviation {} band {} pass {}",
                fmt_f64(n.skewness),
                fmt_f64(n.excess_kurtosis),
                fmt_f64(n.cdf_max_deviation),
                fmt_f64(n.cdf_band),
                n.pass
            )
            .unwrap();
        }
    }
    if let Some(lil) = &summary.lil {
        writeln!(out, "\n[lil]").unwrap();
        writeln!(out, "c: {}", fmt_f64(lil.c)).unwrap();
        writeln!(out, "checked: {}", lil.checked).unwrap();
        writeln!(out, "violations: {}", lil.violations).unwrap();
        writeln!(out, "fraction: {}", fmt_f64(lil.fraction())).unwrap();
    }
    writeln!(out, "\n[per-replica terminal values]").unwrap();
    let with_values: Vec<&crate::ensemble::QuantitySummary> = summary
        .quantities
        .iter()
        .filter(|q| q.skipped.is_none())
        .collect();
    let names: Vec<String> = with_values.iter().map(|q| q.quantity.to_string()).collect();
    writeln!(out, "replica,{}", names.join(",")).unwrap();
    let rows = with_values
        .iter()
        .map(|q| q.terminal_rescaled.len())
        .min()
        .unwrap_or(0);
    for i in 0..rows {
        let vals: Vec<String> = with_values
            .iter()
            .map(|q| fmt_f64(q.terminal_rescaled[i]))
            .collect();
        writeln!(out, "{i},{}", vals.join(",")).unwrap();
    }
    out
}

pub fn export_summary(
    summary: &EnsembleSummary,
    echo: &[(String, String)],
    path: &Path,
) -> Result<()> {
    write_text(path, &summary_to_text(summary, echo))
}

/// Renders an estimation report as a structured text document.
pub fn estimation_to_text(report: &EstimationReport, echo: &[(String, String)]) -> String {
    let mut out = String::new();
    writeln!(out, "[provenance]").unwrap();
    for (k, v) in echo {
        writeln!(out, "{k}: {v}").unwrap();
    }
    writeln!(out, "\n[estimates]").unwrap();
    let mut put = |name: &str, e: &crate::estimate::Estimate| {
        writeln!(
            out,
            "{name}: {} (se {}; {})",
            fmt_f64(e.value),
            fmt_f64(e.std_error),
            e.assumption
        )
        .unwrap();
    };
    put("alpha-hat", &report.alpha_hat);
    put("beta-hat", &report.beta_hat);
    put("w-hat", &report.w_hat);
    match &report.iota_hat {
        Some(e) => put("iota-hat", e),
        None => writeln!(out, "iota-hat: refused").unwrap(),
    }
    writeln!(out, "beta-zero-assumed: {}", report.beta_zero_assumed).unwrap();
    writeln!(out, "\n[fits]").unwrap();
    let mut fit = |name: &str, f: &crate::stats::LoglogFit| {
        writeln!(
            out,
            "{name}: slope {} intercept {} slope-se {} curvature-t {} n {} skipped {}",
            fmt_f64(f.slope),
            fmt_f64(f.intercept),
            fmt_f64(f.slope_std_error),
            fmt_f64(f.curvature_t),
            f.n_used,
            f.n_skipped_nonpositive
        )
        .unwrap();
    };
    fit("D", &report.d_fit);
    fit("Tbar", &report.tbar_fit);
    if let Some(k) = &report.k_fit {
        fit("K_tagged", k);
    }
    if !report.warnings.is_empty() {
        writeln!(out, "\n[warnings]").unwrap();
        for w in &report.warnings {
            writeln!(out, "- {w}").unwrap();
        }
    }
    out
}

pub fn export_estimation(
    report: &EstimationReport,
    echo: &[(String, String)],
    path: &Path,
) -> Result<()> {
    write_text(path, &estimation_to_text(report, echo))
}
