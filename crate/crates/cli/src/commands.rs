use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use spartan_core::covariance::{variance, CovarianceQuery};
use spartan_core::scales::{bl_integral_range, integral_range_numeric};
use spartan_core::simulate::{estimate_stats, non_ergodicity_probe, simulate_ensemble, ErgodicityReport};
use spartan_core::{
    CorrSpectrum, EmpiricalStats, Model, ParamDoc, QuadratureConfig, SeedSpec, SpectrumMethod, SpectrumQuery,
};

use crate::args::{EvalArgs, FieldFormat, Format, MethodArg, Quantity, ScalesArgs, SimulateArgs};
use crate::output::{emit, num, to_json, write_atomic, write_atomic_with};
use crate::CliError;

#[derive(Serialize)]
struct TableDoc<'a> {
    params: ParamDoc,
    quantity: &'a str,
    abscissa_name: &'a str,
    abscissa: &'a [f64],
    values: &'a [f64],
}

fn grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if min.is_nan() || min < 0.0 || !max.is_finite() || max < min || (n > 1 && max == min) {
        return Err(CliError::Usage(format!("need 0 <= min < max < inf, got [{min}, {max}]")));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    Ok((0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect())
}

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let model = a.model.model()?;
    let xs = grid(a.min, a.max, a.n)?;
    let (name, abscissa, values) = match a.quantity {
        Quantity::Cov => ("cov", "r", CovarianceQuery::new(model, xs.clone())?.covariances()?),
        Quantity::Autocorr => {
            let var = variance(&model)?;
            let cov = CovarianceQuery::new(model, xs.clone())?.covariances()?;
            ("autocorr", "r", cov.into_iter().map(|c| c / var).collect())
        }
        Quantity::Spd => ("spd", "k", xs.iter().map(|&k| model.density(k)).collect()),
    };
    let text = match a.format {
        Format::Csv => {
            let mut s = format!("{abscissa},{name}\n");
            for (x, v) in xs.iter().zip(&values) {
                let _ = writeln!(s, "{},{}", num(*x), num(*v));
            }
            s
        }
        Format::Json => to_json(&TableDoc {
            params: model.to_doc(),
            quantity: name,
            abscissa_name: abscissa,
            abscissa: &xs,
            values: &values,
        }),
    };
    emit(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct ScalesRow {
    alpha: f64,
    lambda: f64,
    divergent: bool,
}

#[derive(Serialize)]
struct ScalesDoc<'a> {
    params: ParamDoc,
    method: SpectrumMethod,
    integral_range: f64,
    rows: &'a [ScalesRow],
}

fn alphas(a: &ScalesArgs) -> Result<Vec<f64>, CliError> {
    match (&a.alpha, a.alpha_grid) {
        (Some(list), _) => Ok(list.clone()),
        (None, Some(0)) => Err(CliError::Usage("--alpha-grid must be at least 1".into())),
        (None, Some(1)) => Ok(vec![0.0]),
        (None, Some(n)) => Ok((0..n).map(|i| i as f64 / (n - 1) as f64).collect()),
        (None, None) => Ok((0..=10).map(|i| i as f64 / 10.0).collect()),
    }
}

pub fn scales(a: &ScalesArgs) -> Result<(), CliError> {
    let model = a.model.model()?;
    let method = match a.method {
        MethodArg::ClosedForm => SpectrumMethod::ClosedForm,
        MethodArg::Numeric => SpectrumMethod::Numeric,
    };
    let cfg = QuadratureConfig::default();
    let integral_range = match (&model, method) {
        (Model::BesselLommel(p), SpectrumMethod::ClosedForm) => bl_integral_range(p)?,
        _ => integral_range_numeric(&model, &cfg)?,
    };
    let rows = alphas(a)?
        .into_iter()
        .map(|alpha| {
            let CorrSpectrum { value, divergent } = SpectrumQuery::new(model, alpha, method)?.evaluate(&cfg)?;
            Ok(ScalesRow { alpha, lambda: value, divergent })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("alpha,lambda,divergent,integral_range\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{}", num(r.alpha), num(r.lambda), r.divergent, num(integral_range));
            }
            s
        }
        Format::Json => to_json(&ScalesDoc { params: model.to_doc(), method, integral_range, rows: &rows }),
    };
    emit(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct StatsDoc<'a> {
    params: ParamDoc,
    grid_size: usize,
    spacing: f64,
    base_seed: u64,
    seeds: Vec<u64>,
    fields: Vec<String>,
    stats: &'a EmpiricalStats,
}

#[derive(Serialize)]
struct ProbeDoc<'a> {
    params: ParamDoc,
    grid_size: usize,
    spacing: f64,
    report: &'a ErgodicityReport,
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let model = a.model.model()?;
    if a.n_real == 0 {
        return Err(CliError::Usage("--n-real must be at least 1".into()));
    }
    let band = match &a.slope_band {
        None => None,
        Some(v) if v.len() == 2 && v[0] > 0.0 && v[1] > v[0] => Some((v[0], v[1])),
        Some(v) => return Err(CliError::Usage(format!("--slope-band needs lo,hi with 0 < lo < hi, got {v:?}"))),
    };
    let seed_spec = match (a.seed, a.clock_seed) {
        (Some(s), _) => SeedSpec::Fixed(s),
        (None, true) => SeedSpec::Clock,
        (None, false) => return Err(CliError::Usage("give --seed or --clock-seed".into())),
    };
    let base = seed_spec.resolve();
    let fields = simulate_ensemble(&model, a.size, a.spacing, base, a.n_real)?;
    std::fs::create_dir_all(&a.out_dir)?;

    let mut names = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        log::info!("realization {i}: seed {}", f.seed);
        if a.stats_only {
            continue;
        }
        let ext = match a.format {
            FieldFormat::Binary => "bin",
            FieldFormat::Csv => "csv",
        };
        let name = format!("field_{i:04}.{ext}");
        let path: PathBuf = a.out_dir.join(&name);
        write_atomic_with(&path, |file| {
            match a.format {
                FieldFormat::Binary => f.write_binary(file)?,
                FieldFormat::Csv => f.write_csv(file)?,
            }
            Ok(())
        })?;
        names.push(name);
    }

    let max_lag = a.max_lag.unwrap_or(10.0 * model.xi());
    let stats = estimate_stats(&fields, max_lag, band)?;
    let doc = StatsDoc {
        params: model.to_doc(),
        grid_size: a.size,
        spacing: a.spacing,
        base_seed: base,
        seeds: fields.iter().map(|f| f.seed).collect(),
        fields: names,
        stats: &stats,
    };
    let stats_path = a.out_dir.join("stats.json");
    write_atomic(&stats_path, to_json(&doc).as_bytes())?;
    println!("{}", stats_path.display());

    if a.probe {
        let report = non_ergodicity_probe(&model, a.size, a.spacing, a.n_real, SeedSpec::Fixed(base), &QuadratureConfig::default())?;
        if report.domain_flag {
            log::warn!(
                "integral range {:.1} exceeds the domain side {:.1}: realizations are not ergodic samples",
                report.integral_range,
                report.domain_size
            );
        }
        let probe_path = a.out_dir.join("probe.json");
        let doc = ProbeDoc { params: model.to_doc(), grid_size: a.size, spacing: a.spacing, report: &report };
        write_atomic(&probe_path, to_json(&doc).as_bytes())?;
        println!("{}", probe_path.display());
    }
    Ok(())
}
