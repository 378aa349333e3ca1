//! Files written by the harness: `report.json`, serialized fields,
//! `series.csv`, and a gnuplot script with the data inlined.

use super::{ConvergenceReport, Reference, SchemeRun, REPORT_SCHEMA};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// File stem for a step size: `tau_2e-7` for dyadic steps.
fn tau_stem(tau: f64) -> String {
    let e = -tau.log2();
    if (e - e.round()).abs() < 1e-12 {
        format!("tau_2e-{}", e.round() as i64)
    } else {
        format!("tau_{tau}")
    }
}

/// Writes one report and, if given, its final fields under `dir`.
pub fn write_report(
    dir: &Path,
    report: &ConvergenceReport,
    fields: Option<&[Option<SpectralField>]>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("report.json");
    write_json(&path, report)?;
    if let Some(fields) = fields {
        let fdir = dir.join("fields");
        fs::create_dir_all(&fdir)?;
        for (rec, field) in report.records.iter().zip(fields) {
            if let Some(u) = field {
                write_json(
                    &fdir.join(format!("{}.json", tau_stem(rec.tau))),
                    &u.to_record(),
                )?;
            }
        }
    }
    Ok(path)
}

/// Writes a sweep: one subdirectory per scheme when there are several, the
/// reference field, `series.csv` and `plot.gp`. Returns the report paths.
pub fn write_sweep(
    dir: &Path,
    reference: &Reference,
    reports: &[SchemeRun],
    save_fields: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (report, fields) in reports {
        let sub = if reports.len() == 1 {
            dir.to_path_buf()
        } else {
            dir.join(report.scheme.name())
        };
        paths.push(write_report(
            &sub,
            report,
            save_fields.then_some(fields.as_slice()),
        )?);
    }
    if save_fields {
        write_json(
            &dir.join("reference.json"),
            &reference.final_state.to_record(),
        )?;
    }
    let plain: Vec<ConvergenceReport> = reports.iter().map(|(r, _)| r.clone()).collect();
    write_plot_files(&plain, dir)?;
    Ok(paths)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `series.csv` and `plot.gp` for the given reports, written into `out`.
pub fn write_plot_files(reports: &[ConvergenceReport], out: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter("no reports to plot".into()));
    }
    fs::create_dir_all(out)?;
    let mut csv = csv::Writer::from_path(out.join("series.csv")).map_err(csv_err)?;
    csv.write_record(["scheme", "tau", "K", "error_l2", "wallclock_s", "status"])
        .map_err(csv_err)?;
    for rep in reports {
        for r in &rep.records {
            csv.write_record([
                rep.scheme.name().to_string(),
                r.tau.to_string(),
                r.k.to_string(),
                fmt_opt(r.error_l2),
                fmt_opt(r.wallclock_s),
                r.status.as_str().to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    csv.flush()?;
    fs::write(out.join("plot.gp"), plot_script(reports))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn plot_script(reports: &[ConvergenceReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# L2 error at the final time against the step size.");
    let _ = writeln!(s, "set terminal pngcairo size 900,650");
    let _ = writeln!(s, "set output 'convergence.png'");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set format xy '%.0e'");
    let _ = writeln!(s, "set xlabel 'tau'");
    let _ = writeln!(s, "set ylabel 'L2 error'");
    let _ = writeln!(s, "set key left top");
    for (i, rep) in reports.iter().enumerate() {
        let _ = writeln!(s, "$series{i} << EOD");
        for r in &rep.records {
            if let Some(e) = r.error_l2 {
                let _ = writeln!(s, "{} {}", r.tau, e);
            }
        }
        let _ = writeln!(s, "EOD");
    }
    let anchor = reports
        .iter()
        .flat_map(|r| r.records.iter())
        .find_map(|r| r.error_l2.filter(|e| *e > 0.0).map(|e| (r.tau, e)))
        .unwrap_or((1.0, 1.0));
    let _ = writeln!(s, "slope1(x) = {} * x", anchor.1 / anchor.0);
    let _ = writeln!(
        s,
        "slope34(x) = {} * x**0.75",
        anchor.1 / anchor.0.powf(0.75)
    );
    let mut items: Vec<String> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| format!("$series{i} using 1:2 with linespoints title '{}'", r.label))
        .collect();
    items.push("slope1(x) with lines lc rgb 'black' dt 2 title 'slope 1'".into());
    items.push("slope34(x) with lines lc rgb 'black' dt 3 title 'slope 3/4'".into());
    let _ = writeln!(s, "plot {}", items.join(", \\\n     "));
    s
}

/// Reads reports from disk and writes `series.csv` and `plot.gp` into `out`.
pub fn emit_plot(report_paths: &[PathBuf], out: &Path) -> Result<()> {
    if report_paths.is_empty() {
        return Err(Error::InvalidParameter(
            "emit_plot needs at least one report".into(),
        ));
    }
    let reports = report_paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            let rep: ConvergenceReport = serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", p.display())))?;
            if rep.schema != REPORT_SCHEMA {
                return Err(Error::Format(format!(
                    "{}: not a convergence report",
                    p.display()
                )));
            }
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    write_plot_files(&reports, out)
}
