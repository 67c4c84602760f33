use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::threshold::{fit_threshold, ExperimentResult, ThresholdFit};

/// One row of a result CSV as far as plotting cares.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotRow {
    pub p: f64,
    pub p_logical: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub result: ExperimentResult,
}

const COLUMNS: [&str; 7] = ["p", "shots", "failures", "aborts", "p_logical", "ci_low", "ci_high"];

fn column_error(column: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        field: column.into(),
        message: message.into(),
    }
}

pub fn read_rows(csv_path: &Path) -> Result<Vec<PlotRow>> {
    let mut reader = csv::Reader::from_path(csv_path)
        .map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let mut idx = [0usize; COLUMNS.len()];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| column_error(name, "missing column"))?;
    }
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let get = |k: usize| -> Result<&str> {
            rec.get(idx[k])
                .ok_or_else(|| column_error(COLUMNS[k], format!("row {} is short", line + 1)))
        };
        let float = |k: usize| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| column_error(COLUMNS[k], format!("row {}: not a number", line + 1)))
        };
        let int = |k: usize| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| column_error(COLUMNS[k], format!("row {}: not a count", line + 1)))
        };
        let (shots, failures, aborts) = (int(1)?, int(2)?, int(3)?);
        if failures + aborts > shots {
            return Err(column_error("failures", format!("row {}: more failures than shots", line + 1)));
        }
        rows.push(PlotRow {
            p: float(0)?,
            p_logical: float(4)?,
            ci_low: float(5)?,
            ci_high: float(6)?,
            result: ExperimentResult::from_counts(shots, failures, aborts),
        });
    }
    Ok(rows)
}

/// Gnuplot data (index 0: points with CI; index 1: the slope-2 reference
/// line) and a script that draws them.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    pub data: String,
    pub script: String,
    /// Coefficient of the reference line `C p²`, if one could be anchored.
    pub c: Option<f64>,
    pub reference: Vec<(f64, f64)>,
}

/// Coefficient for the reference line: the attached fit if given, else a
/// fresh fit of the rows, else the unweighted slope-2 intercept.
fn anchor(rows: &[PlotRow], fit: Option<&ThresholdFit>) -> Option<f64> {
    if let Some(f) = fit {
        return Some(f.c);
    }
    let pts: Vec<_> = rows.iter().map(|r| (r.p, r.result)).collect();
    if let Ok(f) = fit_threshold(&pts) {
        return Some(f.c);
    }
    let logs: Vec<f64> = rows
        .iter()
        .filter(|r| r.p > 0.0 && r.p_logical > 0.0)
        .map(|r| r.p_logical.ln() - 2.0 * r.p.ln())
        .collect();
    (!logs.is_empty()).then(|| (logs.iter().sum::<f64>() / logs.len() as f64).exp())
}

pub fn plot_data(rows: &[PlotRow], fit: Option<&ThresholdFit>, data_file: &str) -> Result<PlotData> {
    if rows.is_empty() {
        return Err(Error::InsufficientData("result CSV has no rows".into()));
    }
    let mut data = String::from("# p p_logical ci_low ci_high\n");
    for r in rows {
        data.push_str(&format!("{} {} {} {}\n", r.p, r.p_logical, r.ci_low, r.ci_high));
    }
    let c = anchor(rows, fit);
    let mut reference = Vec::new();
    if let Some(c) = c {
        let p_t = 1.0 / c;
        let lo = rows.iter().map(|r| r.p).fold(p_t, f64::min);
        let hi = rows.iter().map(|r| r.p).fold(p_t, f64::max);
        reference = vec![(lo, c * lo * lo), (hi, c * hi * hi)];
        data.push_str(&format!("\n\n# reference p_L = C p^2, C = {c}, p_T = {p_t}\n"));
        for (x, y) in &reference {
            data.push_str(&format!("{x} {y}\n"));
        }
    } else {
        log::warn!("plotdata: every point has zero failures, no reference line");
    }

    let mut script = format!(
        "set logscale xy\nset format xy '%.0e'\nset xlabel 'physical error rate p'\n\
         set ylabel 'logical error rate'\nset key top left\n\
         plot '{data_file}' index 0 using 1:2:3:4 with yerrorbars title 'measured'"
    );
    if c.is_some() {
        script.push_str(&format!(
            ", \\\n     '{data_file}' index 1 using 1:2 with lines title 'C p^2'"
        ));
    }
    script.push_str(", \\\n     x with lines dashtype 2 title 'p_L = p'\n");
    Ok(PlotData {
        data,
        script,
        c,
        reference,
    })
}

/// Read `csv_path`, pick up `<stem>.fit.json` beside it when present, and
/// write `<stem>.dat` and `<stem>.gp` into `out_dir`.
pub fn write_plot(csv_path: &Path, out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let rows = read_rows(csv_path)?;
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Io(format!("{}: no file name", csv_path.display())))?;
    let fit_path = csv_path.with_file_name(format!("{stem}.fit.json"));
    let fit: Option<ThresholdFit> = if fit_path.exists() {
        let text = std::fs::read_to_string(&fit_path)?;
        Some(serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", fit_path.display())))?)
    } else {
        None
    };
    let data_name = format!("{stem}.dat");
    let plot = plot_data(&rows, fit.as_ref(), &data_name)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| csv_path.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    std::fs::create_dir_all(&dir)?;
    let data_path = dir.join(&data_name);
    let script_path = dir.join(format!("{stem}.gp"));
    std::fs::write(&data_path, plot.data)?;
    std::fs::write(&script_path, plot.script)?;
    Ok(vec![data_path, script_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(points: &[(f64, u64, u64)]) -> Vec<PlotRow> {
        points
            .iter()
            .map(|&(p, n, k)| {
                let r = ExperimentResult::from_counts(n, k, 0);
                PlotRow {
                    p,
                    p_logical: r.p_logical,
                    ci_low: r.ci_low,
                    ci_high: r.ci_high,
                    result: r,
                }
            })
            .collect()
    }

    #[test]
    fn reference_line_crosses_at_threshold() {
        let rs = rows(&[(1e-3, 100_000, 60), (2e-3, 100_000, 250), (4e-3, 100_000, 980), (8e-3, 100_000, 4000)]);
        let plot = plot_data(&rs, None, "x.dat").unwrap();
        let blocks: Vec<&str> = plot.data.split("\n\n\n").collect();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].lines().filter(|l| !l.starts_with('#')).count(), 4);
        assert_eq!(blocks[1].lines().filter(|l| !l.starts_with('#')).count(), 2);
        let c = plot.c.unwrap();
        let p_t = 1.0 / c;
        // the line is C p², so it meets p_L = p exactly at p_T
        assert!((c * p_t * p_t - p_t).abs() <= 1e-12 * p_t);
        assert!(plot.reference[0].0 <= p_t && p_t <= plot.reference[1].0);
        for (x, y) in &plot.reference {
            assert!((y / (c * x * x) - 1.0).abs() < 1e-12);
        }
        assert!(plot.script.contains("index 1"));
    }

    #[test]
    fn uses_attached_fit() {
        let rs = rows(&[(1e-3, 1000, 0), (2e-3, 1000, 1)]);
        let fit = ThresholdFit {
            c: 500.0,
            c_ci_low: 400.0,
            c_ci_high: 600.0,
            p_t: 2e-3,
            p_t_ci_low: 1.6e-3,
            p_t_ci_high: 2.5e-3,
            slope: 2.0,
            slope_stderr: 0.1,
            free_intercept: 500f64.ln(),
            residuals: vec![],
            points_used: vec![],
            points_excluded: vec![],
        };
        let plot = plot_data(&rs, Some(&fit), "x.dat").unwrap();
        assert_eq!(plot.c, Some(500.0));
        assert!(plot.reference.iter().any(|&(x, y)| (x - 2e-3).abs() < 1e-15 && (y - 2e-3).abs() < 1e-15));
    }

    #[test]
    fn empty_and_malformed_csv() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "p,shots,failures,aborts,p_logical,ci_low,ci_high\n").unwrap();
        assert!(write_plot(&empty, None).is_err());
        assert!(!dir.path().join("empty.dat").exists());

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "p,shots,failures,p_logical,ci_low,ci_high\n1e-3,10,1,0.1,0,0.4\n").unwrap();
        let err = write_plot(&bad, None).unwrap_err();
        assert!(matches!(&err, Error::Schema { field, .. } if field == "aborts"), "{err}");

        let garbled = dir.path().join("garbled.csv");
        std::fs::write(&garbled, "p,shots,failures,aborts,p_logical,ci_low,ci_high\nabc,10,1,0,0.1,0,0.4\n").unwrap();
        let err = write_plot(&garbled, None).unwrap_err();
        assert!(matches!(&err, Error::Schema { field, .. } if field == "p"), "{err}");
    }
}
