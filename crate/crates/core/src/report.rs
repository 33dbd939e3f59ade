//! Machine-readable verification reports: one row per checked identity,
//! with the run configuration and the pinned sign conventions embedded so
//! the numbers are comparable across implementations.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Sentinel tolerance for report-only rows (recorded, never failed).
pub const REPORT_ONLY_TOL: f64 = f64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub name: String,
    pub samples: usize,
    pub skipped: usize,
    pub max_res: f64,
    pub mean_res: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub wedge: String,
    pub curvature: String,
    pub sectional_numerator: String,
    pub codazzi: String,
}

pub fn conventions() -> Conventions {
    Conventions {
        wedge: "(X^Y)Z = g(Y,Z)X - g(X,Z)Y".into(),
        curvature: "R(X,Y)Z = nab_X nab_Y Z - nab_Y nab_X Z - nab_[X,Y] Z".into(),
        sectional_numerator: "K(X,JX) = <R(X,JX)JX,X> / |X^JX|^2".into(),
        codazzi: "dA(Y,X) = (nab_X A)Y - (nab_Y A)X = tangential R(Y,X)nu".into(),
    }
}

/// Echo of the run configuration (everything that determines the output).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub suite: String,
    pub model: String,
    pub immersion: Option<String>,
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: String,
    pub config: ConfigEcho,
    pub conventions: Conventions,
    pub residuals: Vec<IdentityResidual>,
    pub overall_pass: bool,
    pub duration_ms: f64,
}

impl ReportDocument {
    pub fn new(config: ConfigEcho, residuals: Vec<IdentityResidual>, duration_ms: f64) -> Self {
        let overall_pass = residuals.iter().all(|r| r.pass);
        ReportDocument {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            conventions: conventions(),
            residuals,
            overall_pass,
            duration_ms,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| GeomError::usage(format!("serialization failed: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| GeomError::usage(format!("bad report JSON: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,samples,skipped,max_res,mean_res,tol,pass\n");
        for r in &self.residuals {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{}\n",
                r.name, r.samples, r.skipped, r.max_res, r.mean_res, r.tol, r.pass
            ));
        }
        out
    }
}

/// Running max/mean aggregator for one identity row.
#[derive(Debug, Clone)]
pub struct ResidualAcc {
    name: String,
    tol: f64,
    max: f64,
    sum: f64,
    count: usize,
    skipped: usize,
    report_only: bool,
}

impl ResidualAcc {
    pub fn new(name: impl Into<String>, tol: f64) -> Self {
        ResidualAcc {
            name: name.into(),
            tol,
            max: 0.0,
            sum: 0.0,
            count: 0,
            skipped: 0,
            report_only: false,
        }
    }

    /// A row whose residual is recorded but never fails the run.
    pub fn report_only(name: impl Into<String>) -> Self {
        let mut acc = Self::new(name, REPORT_ONLY_TOL);
        acc.report_only = true;
        acc
    }

    pub fn push(&mut self, res: f64) {
        self.max = self.max.max(res);
        self.sum += res;
        self.count += 1;
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn add_skips(&mut self, n: usize) {
        self.skipped += n;
    }

    pub fn row(self) -> IdentityResidual {
        let mean = if self.count > 0 {
            self.sum / self.count as f64
        } else {
            0.0
        };
        IdentityResidual {
            name: self.name,
            samples: self.count,
            skipped: self.skipped,
            max_res: self.max,
            mean_res: mean,
            tol: self.tol,
            pass: self.report_only || self.max <= self.tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn echo() -> ConfigEcho {
        ConfigEcho {
            suite: "structure".into(),
            model: "eu(1)xeu(1)".into(),
            immersion: None,
            samples: 10,
            seed: 42,
            tol: None,
            step: 1e-4,
        }
    }

    #[test]
    fn empty_report_passes() {
        let doc = ReportDocument::new(echo(), vec![], 1.0);
        assert!(doc.overall_pass);
        assert_eq!(doc.to_csv(), "name,samples,skipped,max_res,mean_res,tol,pass\n");
    }

    #[test]
    fn acc_pass_iff_max_below_tol() {
        let mut acc = ResidualAcc::new("x", 1e-8);
        acc.push(1e-9);
        acc.push(5e-9);
        let row = acc.row();
        assert!(row.pass);
        assert!((row.mean_res - 3e-9).abs() < 1e-20);

        let mut acc = ResidualAcc::new("x", 1e-8);
        acc.push(1e-7);
        assert!(!acc.row().pass);

        let mut acc = ResidualAcc::report_only("x");
        acc.push(1e3);
        assert!(acc.row().pass);
    }

    #[test]
    fn json_round_trip_exact() {
        let mut acc = ResidualAcc::new("codazzi_vs_numeric", 1e-5);
        acc.push(1.2345e-7);
        acc.skip();
        let doc = ReportDocument::new(echo(), vec![acc.row()], 12.5);
        let parsed = ReportDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(parsed, doc);
    }

    #[test]
    fn csv_header_contract() {
        let doc = ReportDocument::new(echo(), vec![], 0.0);
        assert!(doc
            .to_csv()
            .starts_with("name,samples,skipped,max_res,mean_res,tol,pass"));
    }

    proptest! {
        #[test]
        fn json_round_trip_random(
            max_res in 0.0f64..1.0,
            mean_frac in 0.0f64..1.0,
            samples in 0usize..1000,
            skipped in 0usize..1000,
            tol in prop::sample::select(vec![1e-12, 1e-10, 1e-8, 1e-5, REPORT_ONLY_TOL]),
            dur in 0.0f64..1e6)
        {
            let row = IdentityResidual {
                name: "row".into(),
                samples,
                skipped,
                max_res,
                mean_res: max_res * mean_frac,
                tol,
                pass: max_res <= tol,
            };
            let doc = ReportDocument::new(echo(), vec![row], dur);
            let parsed = ReportDocument::from_json(&doc.to_json().unwrap()).unwrap();
            prop_assert_eq!(parsed, doc);
        }
    }
}
