//! Fixed-column CSV output of sweep results.

use std::fmt::Write as _;
use std::path::Path;

use super::{ExperimentError, ResultTable};

pub const HEADER: &str = "axis_name,axis_value,protocol,runs,success_rate_mean,success_rate_std,\
location_error_mean_m,location_error_std_m,bandwidth_mean_Bps_per_node,bandwidth_std,\
query_hops_mean,drop_noprogress_count,drop_deadline_count";

/// Formats `x` with six significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn format_axis(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format_sig(x)
    }
}

/// Renders `table`, rows ordered by axis value then protocol name.
pub fn write_csv(table: &ResultTable) -> Result<String, ExperimentError> {
    if table.rows.is_empty() {
        return Err(ExperimentError::EmptyTable);
    }
    let mut rows: Vec<_> = table.rows.iter().collect();
    rows.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value).then(a.protocol.name().cmp(b.protocol.name())));
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            table.axis_name,
            format_axis(r.axis_value),
            r.protocol.name(),
            r.runs.len(),
            format_sig(r.success_rate.mean),
            format_sig(r.success_rate.std),
            format_sig(r.location_error.mean),
            format_sig(r.location_error.std),
            format_sig(r.bandwidth.mean),
            format_sig(r.bandwidth.std),
            format_sig(r.query_hops_mean),
            r.drop_noprogress,
            r.drop_deadline,
        );
    }
    Ok(out)
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<(), ExperimentError> {
    let text = write_csv(table)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig(0.75), "0.750000");
        assert_eq!(format_sig(123.4567), "123.457");
        assert_eq!(format_sig(1.0), "1.00000");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1234567.0), "1.23457e6");
        assert_eq!(format_sig(-0.012345678), "-0.0123457");
    }

    #[test]
    fn empty_table_is_an_error() {
        let t = ResultTable { axis_name: "v_max".into(), rows: vec![] };
        assert!(matches!(write_csv(&t), Err(ExperimentError::EmptyTable)));
    }
}
