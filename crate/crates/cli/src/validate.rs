//! Closed form versus quadrature oracle suites.

use std::collections::BTreeMap;

use serde::Serialize;

use spartan_core::covariance::{bl_cov, bl_variance, ssrf_cov_2d, ssrf_variance_2d};
use spartan_core::oracle::{hankel_inverse, RadialProfile};
use spartan_core::scales::{
    bl_corr_spectrum, bl_integral_range, corr_spectrum_numeric_unchecked, integral_range_numeric, ssrf_corr_spectrum,
};
use spartan_core::{BlParams, Model, QuadratureConfig, SsrfParams};

use crate::args::{Suite, ValidateArgs};
use crate::output::{emit, to_json};
use crate::CliError;

/// Default tolerances by check family.
const TOLERANCES: [(&str, f64); 7] = [
    ("ssrf_cov", 1e-7),
    ("ssrf_variance", 1e-7),
    ("bl_cov", 1e-8),
    ("bl_variance", 1e-9),
    ("bl_integral_range", 1e-8),
    ("ssrf_spectrum", 1e-5),
    ("bl_spectrum", 1e-5),
];

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    max_err: f64,
    tol: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct Report {
    suite: &'static str,
    checks: Vec<Check>,
    overall: bool,
}

struct Runner {
    tol: BTreeMap<&'static str, f64>,
    cfg: QuadratureConfig,
    checks: Vec<Check>,
}

impl Runner {
    fn record(&mut self, family: &str, label: String, max_err: f64) {
        let tol = self.tol[family];
        self.checks.push(Check { name: format!("{family} {label}"), max_err, tol, pass: max_err <= tol });
    }

    fn ssrf(&mut self) -> Result<(), CliError> {
        for &eta1 in &[-1.5, -0.5, 0.5, 1.5, 2.0, 5.0, 15.0] {
            let p = SsrfParams::planar(1.0, eta1, 1.0)?;
            let profile = RadialProfile::from_model(&Model::Ssrf(p));
            let mut worst = 0.0f64;
            for i in 1..=40 {
                let h = 10.0 * f64::from(i) / 40.0;
                worst = worst.max((ssrf_cov_2d(h, &p)? - hankel_inverse(&profile, 2, h, &self.cfg)?).abs());
            }
            self.record("ssrf_cov", format!("eta1={eta1}"), worst);
            let var_err = (ssrf_variance_2d(&p)? - hankel_inverse(&profile, 2, 0.0, &self.cfg)?).abs();
            self.record("ssrf_variance", format!("eta1={eta1}"), var_err);
        }
        Ok(())
    }

    fn bl(&mut self) -> Result<(), CliError> {
        for d in 2..=5 {
            for &(eta1, xi, kc) in &[(2.0, 1.0, 2.0), (-1.5, 1.0, 2.0), (10.0, 0.5, 3.0)] {
                let p = BlParams::new(1.0, eta1, xi, kc, d)?;
                let profile = RadialProfile::from_model(&Model::BesselLommel(p));
                let var = bl_variance(&p)?;
                let mut worst = 0.0f64;
                for i in 1..=50 {
                    let r = 20.0 * f64::from(i) / 50.0;
                    worst = worst.max((bl_cov(r, &p)? - hankel_inverse(&profile, d, r, &self.cfg)?).abs() / var);
                }
                let label = format!("d={d} eta1={eta1} xi={xi} kc={kc}");
                self.record("bl_cov", label.clone(), worst);
                let var_err = (var - hankel_inverse(&profile, d, 0.0, &self.cfg)?).abs() / var;
                self.record("bl_variance", label, var_err);
            }
        }
        Ok(())
    }

    fn scales(&mut self) -> Result<(), CliError> {
        let alphas: Vec<f64> = (1..=9).map(|i| f64::from(i) / 10.0).collect();
        for &eta1 in &[-1.9, 0.0, 2.0, 5.0] {
            let p = SsrfParams::planar(1.0, eta1, 5.0)?;
            let mut worst = 0.0f64;
            for &a in &alphas {
                let closed = ssrf_corr_spectrum(a, &p)?.value;
                let numeric = corr_spectrum_numeric_unchecked(&Model::Ssrf(p), a, &self.cfg)?.value;
                worst = worst.max((closed - numeric).abs() / closed);
            }
            self.record("ssrf_spectrum", format!("eta1={eta1}"), worst);
        }
        for d in [2, 3, 5] {
            for &eta1 in &[-1.5, 0.0, 3.0, 20.0] {
                for &kc in &[0.5, 2.0] {
                    let p = BlParams::new(1.0, eta1, 1.0, kc, d)?;
                    let model = Model::BesselLommel(p);
                    let label = format!("d={d} eta1={eta1} kc={kc}");
                    let closed = bl_integral_range(&p)?;
                    let err = (closed - integral_range_numeric(&model, &self.cfg)?).abs() / closed;
                    self.record("bl_integral_range", label.clone(), err);
                    let mut worst = 0.0f64;
                    for &a in &alphas {
                        let closed = bl_corr_spectrum(a, &p)?;
                        let numeric = corr_spectrum_numeric_unchecked(&model, a, &self.cfg)?.value;
                        worst = worst.max((closed - numeric).abs() / closed);
                    }
                    self.record("bl_spectrum", label, worst);
                }
            }
        }
        Ok(())
    }
}

fn parse_overrides(specs: &[String]) -> Result<BTreeMap<&'static str, f64>, CliError> {
    let mut tol: BTreeMap<&'static str, f64> = TOLERANCES.into_iter().collect();
    for spec in specs {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("tolerance override must be NAME=VALUE, got {spec}")))?;
        let key = TOLERANCES
            .iter()
            .map(|t| t.0)
            .find(|k| *k == name.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown check {name}; known: {:?}", TOLERANCES.map(|t| t.0))))?;
        let v: f64 = value
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| *v > 0.0)
            .ok_or_else(|| CliError::Usage(format!("tolerance must be a positive number, got {value}")))?;
        tol.insert(key, v);
    }
    Ok(tol)
}

pub fn run(a: &ValidateArgs) -> Result<(), CliError> {
    let mut runner = Runner { tol: parse_overrides(&a.tol)?, cfg: QuadratureConfig::strict(), checks: Vec::new() };
    let suite = match a.suite {
        Suite::Ssrf => {
            runner.ssrf()?;
            "ssrf"
        }
        Suite::Bl => {
            runner.bl()?;
            "bl"
        }
        Suite::Scales => {
            runner.scales()?;
            "scales"
        }
        Suite::All => {
            runner.ssrf()?;
            runner.bl()?;
            runner.scales()?;
            "all"
        }
    };
    let overall = runner.checks.iter().all(|c| c.pass);
    for c in runner.checks.iter().filter(|c| !c.pass) {
        log::error!("{} failed: {:.3e} > {:.1e}", c.name, c.max_err, c.tol);
    }
    let report = Report { suite, checks: runner.checks, overall };
    emit(a.out.as_deref(), &to_json(&report))?;
    if overall {
        Ok(())
    } else {
        Err(CliError::ChecksFailed)
    }
}
