//! `simulate`: time series and audit summary for a run configuration.

use hybrid_core::dynamics::{backreaction_report, canonical_audit_at, expectation_at, propagate_with};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Run, RunConfig};
use crate::error::CliError;

/// Shortest round-trip decimal; exponent form for very small or large
/// magnitudes. Signed zeros print as `0`.
fn plain(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// `a+bi` / `a-bi`, independent of locale.
pub fn complex_cell(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() && z.im != 0.0 { '-' } else { '+' };
    format!("{}{sign}{}i", plain(z.re), plain(z.im.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub hqc: &'static str,
    pub hybrid_core: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Bound {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Bound {
    fn new(value: f64, tolerance: f64) -> Self {
        Bound { value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Debug, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: JsonComplex,
}

#[derive(Debug, Serialize)]
pub struct Backreaction {
    pub max_mean_deviation: f64,
    pub max_cov_deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub versions: Versions,
    pub config: &'a RunConfig,
    pub method: &'static str,
    pub time_points: usize,
    pub consistent_hybrid: bool,
    pub state_warnings: &'a [String],
    /// Largest deviation of `{[q_i(t), p_j(t)]}` from `δ_ij` over the grid.
    pub hybrid_audit: Bound,
    /// Same for the Poisson bracket restricted to classical pairs.
    pub poisson_audit_max: f64,
    /// Same for the Moyal bracket restricted to quantum pairs.
    pub moyal_audit_max: f64,
    pub energy_drift: Bound,
    pub backreaction: Backreaction,
    pub final_observables: Vec<NamedValue>,
}

/// Rendered artifacts of a run.
pub struct Artifacts {
    pub csv: Vec<u8>,
    pub json: Vec<u8>,
    pub hybrid_audit_pass: bool,
    pub energy_pass: bool,
    pub rows: usize,
}

/// Observable expectations and the hybrid, Poisson and Moyal audits at one time.
type Row = (Vec<Complex64>, f64, f64, f64);

pub fn simulate(config: &RunConfig, run: &Run) -> Result<Artifacts, CliError> {
    let sys = &run.system;
    let exprs: Vec<_> = run.observables.iter().map(|(_, e)| e.clone()).collect();
    let traj = propagate_with(sys, &exprs, &run.times, run.method, &run.options)?;
    let report = backreaction_report(sys, &run.state, &run.times, run.method, &run.options)?;

    let rows: Vec<Row> = (0..run.times.len())
        .into_par_iter()
        .map(|k| {
            let values =
                exprs.iter().map(|e| expectation_at(e, &traj, &run.state, k)).collect::<Result<Vec<_>, _>>()?;
            let audit = canonical_audit_at(&traj, sys, k);
            Ok((values, audit.hybrid_max_dev, audit.poisson_max_dev, audit.moyal_max_dev))
        })
        .collect::<Result<_, hybrid_core::dynamics::DynamicsError>>()?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(run.observables.iter().map(|(name, _)| name.clone()));
    header.extend(["audit_max_abs_dev".to_string(), "energy".to_string()]);
    let csv_err = |e: csv::Error| CliError::Compute(format!("csv: {e}"));
    writer.write_record(&header).map_err(csv_err)?;
    for (k, (values, audit, _, _)) in rows.iter().enumerate() {
        let mut record = vec![plain(run.times[k])];
        record.extend(values.iter().map(|z| complex_cell(*z)));
        record.push(plain(*audit));
        record.push(plain(report.energy[k]));
        writer.write_record(&record).map_err(csv_err)?;
    }
    let csv = writer.into_inner().map_err(|e| CliError::Compute(format!("csv: {e}")))?;

    let fold = |f: fn(&Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let hybrid_audit = Bound::new(fold(|r| r.1), config.tolerances.audit);
    let energy_drift = Bound::new(report.energy_drift, config.tolerances.energy);
    let (hybrid_audit_pass, energy_pass) = (hybrid_audit.pass, energy_drift.pass);
    let last = rows.last().map(|r| r.0.clone()).unwrap_or_default();
    let summary = Summary {
        versions: Versions { hqc: env!("CARGO_PKG_VERSION"), hybrid_core: hybrid_core::VERSION },
        config,
        method: run.method.name(),
        time_points: run.times.len(),
        consistent_hybrid: sys.consistent_hybrid,
        state_warnings: &run.state.warnings,
        hybrid_audit,
        poisson_audit_max: fold(|r| r.2),
        moyal_audit_max: fold(|r| r.3),
        energy_drift,
        backreaction: Backreaction {
            max_mean_deviation: report.max_mean_deviation,
            max_cov_deviation: report.max_cov_deviation,
        },
        final_observables: run
            .observables
            .iter()
            .zip(last)
            .map(|((name, _), z)| NamedValue { name: name.clone(), value: z.into() })
            .collect(),
    };
    let mut json = serde_json::to_vec_pretty(&summary).map_err(|e| CliError::Compute(format!("json: {e}")))?;
    json.push(b'\n');
    Ok(Artifacts { csv, json, hybrid_audit_pass, energy_pass, rows: rows.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_cells() {
        assert_eq!(complex_cell(Complex64::new(1.5, -0.25)), "1.5-0.25i");
        assert_eq!(complex_cell(Complex64::new(-0.0, 0.0)), "0+0i");
        assert_eq!(complex_cell(Complex64::new(2.0, -0.0)), "2+0i");
        assert_eq!(complex_cell(Complex64::new(2.5e-16, -3e20)), "2.5e-16-3e20i");
    }
}
