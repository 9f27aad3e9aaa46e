//! JSON verification report.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shocksynth_core::srs::DbErrorReport;
use shocksynth_core::{ResidualReport, SrsCurve, SynthesisResult};

use crate::io::{write_atomic, IoError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqRow {
    pub freq_hz: f64,
    pub srs: f64,
    pub target: f64,
    /// `None` where the response is zero (written as `null`).
    pub err_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub pass_srs: bool,
    pub pass_net_zero: bool,
    pub max_abs_db: Option<f64>,
    pub per_freq: Vec<FreqRow>,
    pub residual_velocity_ratio: f64,
    pub residual_displacement_ratio: f64,
    pub objective: Option<f64>,
    /// Absent for a standalone verification.
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Report {
    pub fn new(actual: &SrsCurve, target: &SrsCurve, db: &DbErrorReport, res: &ResidualReport) -> Report {
        let per_freq = actual
            .freqs
            .iter()
            .zip(&actual.values)
            .zip(&target.values)
            .zip(&db.per_freq_db)
            .map(|(((&freq_hz, &srs), &target), &e)| FreqRow { freq_hz, srs, target, err_db: finite(e) })
            .collect();
        // the same log misfit the optimizer minimizes, without its floor
        let objective =
            actual.values.iter().zip(&target.values).map(|(a, t)| (a.log10() - t.log10()).powi(2)).sum::<f64>().sqrt();
        Report {
            pass_srs: db.pass,
            pass_net_zero: res.pass,
            max_abs_db: finite(db.max_abs_db),
            per_freq,
            residual_velocity_ratio: res.residual_velocity_ratio,
            residual_displacement_ratio: res.residual_displacement_ratio,
            objective: finite(objective),
            iterations: None,
            seed: None,
        }
    }

    pub fn from_synthesis(r: &SynthesisResult) -> Report {
        Report {
            objective: finite(r.objective_value),
            iterations: Some(r.iterations_used),
            seed: Some(r.seed),
            ..Report::new(&r.srs, &r.target, &r.srs_report, &r.residuals)
        }
    }

    pub fn pass(&self) -> bool {
        self.pass_srs && self.pass_net_zero
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        write_atomic(path, self.to_json().as_bytes())
    }
}
