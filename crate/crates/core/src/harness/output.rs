use std::path::Path;

use serde::Serialize;

use super::{Format, Report, RunOutput};
use crate::Result;

pub const SWEEP_HEADER: &[&str] = &[
    "seed", "config_hash", "family", "param", "alpha", "boundary", "closed_form", "series", "series_value", "series_tail",
    "series_terms", "agree", "mc_mean", "mc_stderr", "mc_censor_rate",
];
pub const STAT_HEADER: &[&str] = &["seed", "config_hash", "statistic", "value", "stderr", "analytic", "z"];
pub const CLASSIFY_HEADER: &[&str] = &["seed", "config_hash", "class", "provenance", "method", "series_value", "bound"];
pub const RANGE_HEADER: &[&str] = &[
    "seed", "config_hash", "t", "mean_distinct", "min_distinct", "max_distinct", "ratio", "mean_span", "lower_bound", "reached",
];

fn kebab<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header and rows of the CSV form of `out`, with the seed and config hash
/// leading every row.
pub fn csv_table(out: &RunOutput) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let lead = || vec![out.seed.to_string(), out.config_hash.clone()];
    let stat = |name: &str, v: String| {
        let mut r = lead();
        r.extend([name.to_string(), v, String::new(), String::new(), String::new()]);
        r
    };
    match &out.report {
        Report::PhaseSweep(r) => (
            SWEEP_HEADER.to_vec(),
            r.points
                .iter()
                .map(|p| {
                    let mut row = lead();
                    row.extend([
                        kebab(&p.family),
                        p.param.to_string(),
                        p.alpha.to_string(),
                        p.boundary.to_string(),
                        kebab(&p.closed_form.class),
                        kebab(&p.series.class),
                        opt(p.series_detail.value()),
                        opt(p.series_detail.value().and(p.series_detail.tail_estimate)),
                        p.series_detail.terms_used.to_string(),
                        opt(p.agree),
                        opt(p.mc.map(|m| m.mean_duration)),
                        opt(p.mc.map(|m| m.stderr_duration)),
                        opt(p.mc.map(|m| m.censor_rate)),
                    ]);
                    row
                })
                .collect(),
        ),
        Report::UniformTest(r) => {
            let mut rows = vec![
                stat("gate_max_tv", r.gate_max_tv.to_string()),
                stat("n", r.n.to_string()),
                stat("replicas", r.replicas.to_string()),
                stat("mean", r.mean.to_string()),
                stat("ks", r.ks.to_string()),
                stat("ks_tol", r.ks_tol.to_string()),
                stat("p_value", r.p_value.to_string()),
                stat("pass", r.pass.to_string()),
            ];
            if let Some(c) = &r.control {
                rows.push(stat("control_n", c.n.to_string()));
                rows.push(stat("control_ks", c.ks.to_string()));
                rows.push(stat("control_fails_bound", c.fails_bound.to_string()));
            }
            (STAT_HEADER.to_vec(), rows)
        }
        Report::Classify(r) => {
            let mut row = lead();
            row.extend([
                kebab(&r.verdict.class),
                kebab(&r.verdict.provenance),
                r.method.clone(),
                opt(r.series.and_then(|s| s.value())),
                opt(r.bound),
            ]);
            (CLASSIFY_HEADER.to_vec(), vec![row])
        }
        Report::Excursions(r) => (STAT_HEADER.to_vec(), stat_rows(&r.rows, &lead)),
        Report::Space(r) => (STAT_HEADER.to_vec(), stat_rows(&r.rows, &lead)),
        Report::Range(r) => (
            RANGE_HEADER.to_vec(),
            r.rows
                .iter()
                .map(|x| {
                    let mut row = lead();
                    row.extend([
                        x.t.to_string(),
                        x.mean_distinct.to_string(),
                        x.min_distinct.to_string(),
                        x.max_distinct.to_string(),
                        x.ratio.to_string(),
                        opt(x.mean_span),
                        opt(x.lower_bound),
                        x.reached.to_string(),
                    ]);
                    row
                })
                .collect(),
        ),
    }
}

fn stat_rows(rows: &[super::StatRow], lead: &dyn Fn() -> Vec<String>) -> Vec<Vec<String>> {
    rows.iter()
        .map(|s| {
            let mut row = lead();
            row.extend([s.statistic.clone(), s.value.to_string(), opt(s.stderr), opt(s.analytic), opt(s.z)]);
            row
        })
        .collect()
}

/// The run serialized as pretty JSON or CSV.
pub fn render(out: &RunOutput, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(out)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let (header, rows) = csv_table(out);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is UTF-8")
        }
    })
}

/// Write the rendered run to `path`.
pub fn emit(out: &RunOutput, format: Format, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, render(out, format)?)?;
    Ok(())
}
