//! Result emission: header-first CSV with a fixed column order, or an
//! equivalent JSON array. Identical rows render to identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::harness::config::OutputFormat;
use crate::harness::runner::ResultRow;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "preset,policy,beta,gamma,N,lambda,mu_summary,mean_max_age,\
weighted_mean_age,mean_queue_sum,cost_J,poa_measured,thm1_bound,thm2_bound,age_lb,\
queue_lb_analytic,epsilon,B_gamma,M,stderr_poa,replications,seed";

pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("no result rows to emit".into()));
    }
    let mut out = String::with_capacity(128 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.preset,
            r.policy,
            r.beta,
            r.gamma,
            r.n,
            r.lambda,
            r.mu_summary,
            r.mean_max_age,
            r.weighted_mean_age,
            r.mean_queue_sum,
            r.cost_j,
            r.poa_measured,
            r.thm1_bound,
            r.thm2_bound,
            r.age_lb,
            r.queue_lb_analytic,
            r.epsilon,
            r.b_gamma,
            r.m,
            r.stderr_poa,
            r.replications,
            r.seed,
        );
    }
    Ok(out)
}

pub fn render_json(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("no result rows to emit".into()));
    }
    serde_json::to_string_pretty(rows)
        .map_err(|e| Error::Config(format!("JSON serialization failed: {e}")))
}

pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(rows),
    }
}

/// Writes to `path`, or to stdout when no path is given. Rendering errors
/// (e.g. an empty sweep) happen before any file is created.
pub fn emit_results(rows: &[ResultRow], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = render(rows, format)?;
    match path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            preset: "fig5".into(),
            policy: "selfish".into(),
            beta: 1.0,
            gamma: 0.5,
            n: 10,
            lambda: 0.9,
            mu_summary: "0.1x10".into(),
            mean_max_age: 11.25,
            weighted_mean_age: 5.5,
            mean_queue_sum: 7.75,
            cost_j: 5.6,
            poa_measured: 0.12,
            thm1_bound: 0.1,
            thm2_bound: 0.58,
            age_lb: 91.0 / 18.0,
            queue_lb_analytic: 0.0,
            epsilon: 1.0 / 9.0,
            b_gamma: 1.9 / 3.6,
            m: 0.0,
            stderr_poa: 0.004,
            replications: 10,
            seed: 1005,
        }
    }

    #[test]
    fn csv_has_header_then_one_line_per_row() {
        let text = render_csv(&[row()]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("fig5,selfish,1,0.5,10,0.9,0.1x10,11.25,"));
        assert_eq!(
            lines[1].split(',').count(),
            CSV_HEADER.split(',').count(),
            "row column count must match the header"
        );
    }

    #[test]
    fn empty_rows_error_without_writing() {
        let path = std::env::temp_dir().join("aoisim_empty_rows_test.csv");
        let _ = std::fs::remove_file(&path);
        assert!(emit_results(&[], OutputFormat::Csv, Some(&path)).is_err());
        assert!(!path.exists(), "no file may be created for an empty sweep");
    }

    #[test]
    fn json_field_names_match_csv_columns() {
        let text = render_json(&[row()]).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let object = value.as_array().unwrap()[0].as_object().unwrap();
        for column in CSV_HEADER.split(',') {
            assert!(object.contains_key(column), "missing JSON key {column}");
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let rows = [row(), row()];
        assert_eq!(render_csv(&rows).unwrap(), render_csv(&rows).unwrap());
        assert_eq!(render_json(&rows).unwrap(), render_json(&rows).unwrap());
    }
}
