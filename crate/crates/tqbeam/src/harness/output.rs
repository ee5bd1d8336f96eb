//! Result rows and deterministic CSV/JSON emission.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::inner::InnerKind;
use crate::outer::OuterMethod;

/// Fixed header of every aggregate result CSV.
pub const RESULT_CSV_HEADER: &str = "experiment,method,inner,pt_db,delta_rad,trials,\
mean_sum_rate,se_sum_rate,mean_signal,mean_leakage,mean_iters";

/// One aggregated grid point of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub method: OuterMethod,
    pub inner: InnerKind,
    pub pt_db: f64,
    pub delta_rad: f64,
    pub trials: usize,
    pub mean_sum_rate: f64,
    pub se_sum_rate: f64,
    pub mean_signal: f64,
    pub mean_leakage: f64,
    pub mean_iters: f64,
}

/// Formats a float with ten significant digits, in the spirit of `%.10g`:
/// plain decimal notation for moderate exponents, scientific otherwise, with
/// trailing zeros trimmed.
pub fn format_sig10(x: f64) -> String {
    const SIG: i32 = 10;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..SIG).contains(&exp) {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{:.*e}", (SIG - 1) as usize, x);
        // Trim trailing zeros in the mantissa: 1.200000000e-7 -> 1.2e-7.
        match s.split_once('e') {
            Some((mantissa, e)) => {
                let m = mantissa.trim_end_matches('0').trim_end_matches('.');
                format!("{m}e{e}")
            }
            None => s,
        }
    }
}

fn push_row(out: &mut String, row: &ResultRow) {
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{}\n",
        row.experiment,
        row.method,
        row.inner,
        format_sig10(row.pt_db),
        format_sig10(row.delta_rad),
        row.trials,
        format_sig10(row.mean_sum_rate),
        format_sig10(row.se_sum_rate),
        format_sig10(row.mean_signal),
        format_sig10(row.mean_leakage),
        format_sig10(row.mean_iters),
    ));
}

/// Serializes result rows with the fixed header; the output is a pure
/// function of the rows.
pub fn rows_to_csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_CSV_HEADER);
    out.push('\n');
    for row in rows {
        push_row(&mut out, row);
    }
    out
}

/// Serializes per-group objective traces as `experiment,group,iteration,rho`
/// rows, iterations numbered from 1.
pub fn convergence_to_csv_string(experiment: &str, traces: &[super::GroupTrace]) -> String {
    let mut out = String::from("experiment,group,iteration,rho\n");
    for trace in traces {
        for (i, rho) in trace.rho_trace.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                experiment,
                trace.group,
                i + 1,
                format_sig10(*rho)
            ));
        }
    }
    out
}

/// Writes any serializable result as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::Config(format!("JSON serialization failed: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}
