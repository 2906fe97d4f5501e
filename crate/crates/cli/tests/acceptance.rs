//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p twophoton --test acceptance`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tempfile::TempDir;
use twophoton::format::float;
use twophoton::ReportDocument;
use twophoton_core::bogolubov::*;
use twophoton_core::kinematics::*;
use twophoton_core::montecarlo::{pair_variance_squeezed_lossy, DetectorConfig};
use twophoton_core::states::*;
use twophoton_core::Units;

type Check = fn() -> Result<Outcome, String>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run_cli(args: &[&str]) -> (std::process::Output, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_twophoton"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("twophoton binary runs");
    (out, start.elapsed())
}

fn report(args: &[&str]) -> Result<(ReportDocument, Duration), String> {
    let (out, took) = run_cli(args);
    if !out.status.success() {
        return Err(format!(
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    Ok((
        ReportDocument::from_json(&text).map_err(|e| e.to_string())?,
        took,
    ))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn squeezed_discriminant() -> Result<Outcome, String> {
    let mut pass = true;
    let mut notes = Vec::new();
    for zeta in ["0.5", "1", "2"] {
        let (r, took) = report(&[
            "simulate",
            "--source",
            "squeezed",
            "--zeta",
            zeta,
            "--flashes",
            "1000000",
        ])?;
        let var = f(&r.results["var_nab"]);
        let class = r.results["classification"].as_str().unwrap_or("");
        pass &= var == 0.0 && class == "squeezed" && took < Duration::from_secs(5);
        notes.push(format!(
            "ζ={zeta}: var={var} {class} {:.2}s",
            took.as_secs_f64()
        ));
    }
    Ok(outcome(pass, notes.join("; ")))
}

fn thermal_discriminant() -> Result<Outcome, String> {
    let (r, took) = report(&[
        "simulate",
        "--source",
        "thermal",
        "--nbar_a",
        "1",
        "--nbar_b",
        "1",
        "--flashes",
        "1000000",
    ])?;
    let (var, se) = (f(&r.results["var_nab"]), f(&r.results["var_nab_stderr"]));
    let z = (var - 4.0) / se;
    Ok(outcome(
        z.abs() < 3.0 && took < Duration::from_secs(5),
        format!(
            "var={var:.5} ± {se:.5} (z={z:.2}), {}, {:.2}s",
            r.results["classification"],
            took.as_secs_f64()
        ),
    ))
}

fn lossy_variance() -> Result<Outcome, String> {
    let enumerated = support::lossy_squeezed_variance_enumerated(0.5, 0.8, 0.8, 60);
    let closed = pair_variance_squeezed_lossy(
        1.0,
        &DetectorConfig::new(0.8, 0.8).map_err(|e| e.to_string())?,
    );
    let zeta = float(1f64.asinh());
    let (r, _) = report(&[
        "simulate",
        "--source",
        "squeezed",
        "--zeta",
        &zeta,
        "--eta_a",
        "0.8",
        "--eta_b",
        "0.8",
        "--flashes",
        "1000000",
    ])?;
    let (var, se) = (f(&r.results["var_nab"]), f(&r.results["var_nab_stderr"]));
    let z = (var - 0.32) / se;
    Ok(outcome(
        z.abs() < 3.0 && (enumerated - 0.32).abs() < 1e-12 && (closed - 0.32).abs() < 1e-12,
        format!("var={var:.5} ± {se:.5} (z={z:.2}); enumeration n≤60 {enumerated:.15}, closed form {closed:.15}"),
    ))
}

fn states_identities() -> Result<Outcome, String> {
    let start = Instant::now();
    let (mut norm, mut mean, mut var, mut trip) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..100 {
        let zeta = SqueezeParameter::new(5.0 * i as f64 / 99.0).map_err(|e| e.to_string())?;
        let n = mean_occupation_squeezed(zeta);
        let d = number_distribution_squeezed(zeta, 200);
        let t = number_distribution_thermal(n, 200).map_err(|e| e.to_string())?;
        norm = norm
            .max((d.total_mass() - 1.0).abs())
            .max((t.total_mass() - 1.0).abs());
        mean = mean.max((d.mean() - n).abs() / n.max(1.0));
        var = var.max((d.variance() - n * (n + 1.0)).abs() / (n * (n + 1.0)).max(1.0));
    }
    let omega = ModeFrequency::new(1.0).map_err(|e| e.to_string())?;
    for i in 0..1000 {
        let x = 0.1 * 1000f64.powf(i as f64 / 999.0);
        let t = Temperature::new(1.0 / x).map_err(|e| e.to_string())?;
        let zeta = squeeze_from_temperature(omega, t, Units::NATURAL).map_err(|e| e.to_string())?;
        let back = effective_temperature(omega, zeta, Units::NATURAL).map_err(|e| e.to_string())?;
        trip = trip.max((back.kelvin() - t.kelvin()).abs() / t.kelvin());
    }
    let took = start.elapsed();
    Ok(outcome(
        norm < 1e-12
            && mean < 1e-10
            && var < 1e-10
            && trip < 1e-12
            && took < Duration::from_secs(1),
        format!(
            "norm {norm:.1e}, mean {mean:.1e}, variance {var:.1e}, round trip {trip:.1e}, {:.3}s",
            took.as_secs_f64()
        ),
    ))
}

fn beta_limits() -> Result<Outcome, String> {
    let p = RefractiveTransition::new(1.0, 2.0, 1e-15).map_err(|e| e.to_string())?;
    let sudden = (beta_squared_at(&p, 1e-6) / 0.125 - 1.0).abs();
    let omega = ModeFrequency::new(p.omega_out_at(10.0)).map_err(|e| e.to_string())?;
    let adiabatic = (beta_squared_at(&p, 10.0) / beta_squared_adiabatic(&p, omega) - 1.0).abs();
    // (1, 1.5): largest sinh argument 3·ckτ spans [10, 30]
    let q = RefractiveTransition::new(1.0, 1.5, 1e-15).map_err(|e| e.to_string())?;
    let overlap = (0..200)
        .map(|i| 10.0 / 3.0 + (10.0 - 10.0 / 3.0) * i as f64 / 199.0)
        .map(|x| {
            let d = beta_squared_direct(&q, x);
            (beta_squared_log(&q, x) - d).abs() / d
        })
        .fold(0.0, f64::max);
    Ok(outcome(
        sudden < 1e-6 && adiabatic < 0.01 && overlap < 1e-10,
        format!("sudden {sudden:.1e}, adiabatic {adiabatic:.1e}, log/direct {overlap:.1e}"),
    ))
}

fn fine_tuning() -> Result<Outcome, String> {
    let e = |e: twophoton_core::Error| e.to_string();
    let p = RefractiveTransition::new(1.0, 1.3, 1e-15).map_err(e)?;
    let window = |lo: f64, hi: f64| log_grid(p.omega_out_at(lo), p.omega_out_at(hi), 64);
    let cv = |s: &BetaSpectrum, g: &[f64]| {
        fine_tuning_residual(s, (g[0], g[g.len() - 1])).map(|r| r.coefficient_of_variation)
    };
    let g = window(5.0, 20.0);
    let synthetic = cv(
        &BetaSpectrum::thermal(&g, Temperature::new(3000.0).map_err(e)?, Units::SI).map_err(e)?,
        &g,
    )
    .map_err(e)?;
    let adiabatic = cv(&build_spectrum(&p, &g, Units::SI).map_err(e)?, &g).map_err(e)?;
    let g = window(1e-4, 1e-2);
    let sudden = cv(&build_spectrum(&p, &g, Units::SI).map_err(e)?, &g).map_err(e)?;
    Ok(outcome(
        synthetic < 1e-12 && adiabatic < 0.05 && sudden > 0.5,
        format!("synthetic {synthetic:.1e}, adiabatic {adiabatic:.4}, sudden {sudden:.3}"),
    ))
}

fn form_factor_checks() -> Result<Outcome, String> {
    let geometry = BubbleGeometry::new(1.7e-6).map_err(|e| e.to_string())?;
    let r = geometry.radius();
    let s0 = (form_factor(0.0, &geometry) / (4.0 / 3.0 * PI * r.powi(3)) - 1.0).abs();
    let root = support::bisect(|q| form_factor(q, &geometry), 4.0 / r, 4.7 / r, 200) * r;
    let x = 1e-3;
    let series = form_factor_shape_series(x);
    let agreement = (series - form_factor_shape_closed(x)).abs() / series;
    Ok(outcome(
        s0 < 1e-12 && (root - 4.493409).abs() < 1e-5 && agreement < 1e-10,
        format!("S(0) {s0:.1e}, first zero qR={root:.9}, series/closed at qR=1e-3 {agreement:.1e}"),
    ))
}

fn angular_fit() -> Result<Outcome, String> {
    let start = Instant::now();
    let geometry = BubbleGeometry::new(1.0).map_err(|e| e.to_string())?;
    let mut pass = true;
    let mut notes = Vec::new();
    let mut medians = Vec::new();
    for (i, kr) in [0.1, 1.0, 10.0, 100.0].into_iter().enumerate() {
        let k = Wavenumber::new(kr).map_err(|e| e.to_string())?;
        let samples = AngularSampler::new(k, &geometry).sample_many(1_000_000, 100 + i as u64);
        let oracle = support::AngularOracle::new(kr);
        let (stat, dof) = support::chi_square_equiprobable(&samples, &oracle, 50);
        let p = 1.0
            - ChiSquared::new(dof as f64)
                .map_err(|e| e.to_string())?
                .cdf(stat);
        pass &= p > 0.01;
        medians.push(support::median(&samples));
        notes.push(format!("kR={kr}: p={p:.3}"));
    }
    let falling = medians.windows(2).all(|w| w[1] < w[0]);
    let took = start.elapsed();
    Ok(outcome(
        pass && falling && took < Duration::from_secs(10),
        format!(
            "{}; medians {:?} falling={falling}; {:.2}s",
            notes.join(", "),
            medians
                .iter()
                .map(|m| format!("{m:.4}"))
                .collect::<Vec<_>>(),
            took.as_secs_f64()
        ),
    ))
}

fn determinism() -> Result<Outcome, String> {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let file = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let cases: [(&str, &[&str]); 6] = [
        ("spectrum", &["spectrum"]),
        ("formfactor", &["formfactor"]),
        (
            "angular",
            &["angular", "--samples", "500000", "--seed", "21"],
        ),
        (
            "simulate",
            &[
                "simulate",
                "--source",
                "thermal",
                "--nbar_a",
                "0.7",
                "--nbar_b",
                "1.4",
                "--eta_a",
                "0.9",
                "--flashes",
                "400000",
                "--seed",
                "5",
            ],
        ),
        ("temperature", &["temperature"]),
        ("discriminate", &["discriminate"]),
    ];
    // discriminate reads the events written by the simulate case
    let events = file("events.csv");
    let mut bad = Vec::new();
    for (name, args) in cases {
        let mut outputs = Vec::new();
        for threads in ["1", "2", "8", "8"] {
            let (out, csv) = (file("out.json"), file("table.csv"));
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--threads", threads, "--out", &out]);
            match name {
                "simulate" => full.extend(["--events", &events]),
                "discriminate" => full.extend(["--events", &events]),
                "temperature" => {}
                _ => full.extend(["--csv", &csv]),
            }
            let (o, _) = run_cli(&full);
            if !o.status.success() {
                return Err(format!("{name}: {}", String::from_utf8_lossy(&o.stderr)));
            }
            let side = match name {
                "simulate" => std::fs::read(&events),
                "temperature" | "discriminate" => Ok(Vec::new()),
                _ => std::fs::read(&csv),
            }
            .map_err(|e| e.to_string())?;
            outputs.push((std::fs::read(&out).map_err(|e| e.to_string())?, side));
        }
        if !outputs.windows(2).all(|w| w[0] == w[1]) {
            bad.push(name);
        }
    }
    Ok(outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "reports and tables byte-identical over 1, 2, 8, 8 threads for all six commands".into()
        } else {
            format!("differences in {bad:?}")
        },
    ))
}

fn temperature_ratio() -> Result<Outcome, String> {
    let profiles = [
        (1.0, 1.3, "1e-15"),
        (1.0, 1.0, "1e-15"),
        (1.3, 1.0, "1e-15"),
        (1.0, 2.0, "5e-16"),
        (2.0, 1.0, "2e-15"),
        (1.33, 1.5, "1e-14"),
        (1.5, 1.33, "3e-15"),
        (1.1, 1.9, "7e-16"),
        (2.5, 1.2, "1e-13"),
        (1.0, 3.0, "4e-15"),
    ];
    let mut ratios = Vec::new();
    let mut both = true;
    for (n_in, n_out, t0) in profiles {
        let (r, _) = report(&[
            "temperature",
            "--n_in",
            &float(n_in),
            "--n_out",
            &float(n_out),
            "--t0_s",
            t0,
        ])?;
        both &= r.results["temperature_closed_form"].is_f64()
            && r.results["temperature_composed"].is_f64();
        ratios.push(f(&r.results["ratio"]));
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    Ok(outcome(
        both && hi - lo < 1e-9 && (lo - 2.0).abs() < 1e-9,
        format!("composed / closed form ∈ [{lo:.15}, {hi:.15}] over 10 profiles"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        (
            "squeezed discriminant is identically zero",
            squeezed_discriminant,
        ),
        ("thermal discriminant matches 4", thermal_discriminant),
        ("lossy squeezed variance matches 0.32", lossy_variance),
        (
            "number-law identities and temperature round trip",
            states_identities,
        ),
        ("|β|² sudden, adiabatic and log-space limits", beta_limits),
        ("fine-tuning spread", fine_tuning),
        (
            "form factor volume, zero and small-argument series",
            form_factor_checks,
        ),
        ("angular χ² fit and concentration", angular_fit),
        ("determinism across thread counts", determinism),
        ("effective temperature ratio", temperature_ratio),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2}  {name}: {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
