//! One function per subcommand: resolve inputs, compute, assemble outputs.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde_json::{Map, Value};
use twophoton_core::bogolubov::{
    build_spectrum, effective_temperature_adiabatic, fine_tuning_residual, log_grid,
    RefractiveTransition, Wavenumber, REGIME_BOUNDARY_CK_TAU,
};
use twophoton_core::kinematics::{form_factor, planewave_validity, AngularSampler, BubbleGeometry};
use twophoton_core::montecarlo::{
    analyze_samples, run_ensemble, run_ensemble_with_events, CorrelationReport, DetectorConfig,
    PairSample, SourceConfig,
};
use twophoton_core::states::{ModeFrequency, SqueezeParameter};
use twophoton_core::Error;

use crate::config::{CommandKind, RunConfig};
use crate::csvout::{Cell, Table};
use crate::error::{rejected, CliError};
use crate::report::{num, nums, units_of, ReportDocument};

type Result<T> = std::result::Result<T, CliError>;

/// Everything a command produces, before anything is written.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub report: ReportDocument,
    pub csv: Option<String>,
    /// Per-flash event dump and where it should go.
    pub events: Option<(PathBuf, String)>,
}

pub fn execute(config: &RunConfig) -> Result<Artifacts> {
    match config.command {
        CommandKind::Spectrum => spectrum(config),
        CommandKind::Formfactor => formfactor(config),
        CommandKind::Angular => angular(config),
        CommandKind::Simulate => simulate(config),
        CommandKind::Temperature => temperature(config),
        CommandKind::Discriminate => discriminate(config),
    }
}

/// Echo of the resolved inputs, in the order they are inserted.
#[derive(Default)]
struct Echo(Map<String, Value>);

impl Echo {
    fn float(&mut self, key: &str, x: f64) -> f64 {
        self.0.insert(key.into(), num(x));
        x
    }

    fn count(&mut self, key: &str, n: u64) -> u64 {
        self.0.insert(key.into(), n.into());
        n
    }

    fn text(&mut self, key: &str, s: String) -> String {
        self.0.insert(key.into(), s.clone().into());
        s
    }
}

fn unit_label(natural: bool, si: &str, nat: &str) -> Value {
    if natural { nat } else { si }.into()
}

fn profile(c: &RunConfig, echo: &mut Echo) -> Result<RefractiveTransition> {
    let n_in = echo.float("n_in", c.float("n_in")?);
    let n_out = echo.float("n_out", c.float("n_out")?);
    let t0 = echo.float("t0_s", c.float("t0_s")?);
    RefractiveTransition::new(n_in, n_out, t0).map_err(rejected)
}

fn geometry(c: &RunConfig, echo: &mut Echo) -> Result<BubbleGeometry> {
    let r = echo.float("radius_m", c.float("radius_m")?);
    BubbleGeometry::new(r).map_err(|e| CliError::config("radius_m", e.to_string()))
}

fn detector(c: &RunConfig, echo: &mut Echo) -> Result<DetectorConfig> {
    let a = echo.float("eta_a", c.float("eta_a")?);
    let b = echo.float("eta_b", c.float("eta_b")?);
    DetectorConfig::new(a, b).map_err(rejected)
}

fn parse_windows(text: &str) -> Result<Vec<(f64, f64)>> {
    let bad = |why: &str| CliError::config("windows", format!("{why} in `{text}`"));
    text.split(',')
        .filter(|w| !w.trim().is_empty())
        .map(|w| {
            let (lo, hi) = w.split_once(':').ok_or_else(|| bad("expected lo:hi"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| bad("bad number"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad("bad number"))?;
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(bad("need 0 < lo < hi"));
            }
            Ok((lo, hi))
        })
        .collect()
}

fn spectrum(c: &RunConfig) -> Result<Artifacts> {
    let units = units_of(c);
    let mut echo = Echo::default();
    let profile = profile(c, &mut echo)?;
    let omega_min = echo.float(
        "omega_min",
        c.float_or("omega_min", profile.omega_out_at(1e-4))?,
    );
    let omega_max = echo.float(
        "omega_max",
        c.float_or("omega_max", profile.omega_out_at(30.0))?,
    );
    let points = echo.count("points", c.count("points")?);
    let windows_text = echo.text("windows", c.text("windows")?);

    if !(omega_min > 0.0 && omega_min.is_finite()) {
        return Err(CliError::config("omega_min", "must be finite and positive"));
    }
    if !(omega_max > omega_min && omega_max.is_finite()) {
        return Err(CliError::config(
            "omega_max",
            "must be finite and above omega_min",
        ));
    }
    if points < 2 {
        return Err(CliError::config("points", "need at least two grid points"));
    }
    let windows = parse_windows(&windows_text)?;
    let grid = log_grid(omega_min, omega_max, points as usize);
    let spectrum = build_spectrum(&profile, &grid, units).map_err(|e| match e {
        Error::InvalidGrid(m) => CliError::config("points", m),
        other => CliError::Domain(other),
    })?;

    let mut table = Table::new(&["omega_out", "beta_sq", "zeta", "T_k", "dN_domega_rel"]);
    for i in 0..spectrum.len() {
        table.row(&[
            Cell::F(spectrum.omegas[i].value()),
            Cell::F(spectrum.beta_sq[i]),
            Cell::F(spectrum.zetas[i].value()),
            Cell::F(spectrum.temps[i].kelvin()),
            Cell::F(spectrum.density_rel[i]),
        ]);
    }

    let mut tuning = Vec::new();
    for (lo, hi) in windows {
        let band = (profile.omega_out_at(lo), profile.omega_out_at(hi));
        let inside = grid.iter().filter(|&&w| w >= band.0 && w <= band.1).count();
        if inside < 3 {
            return Err(CliError::config(
                "windows",
                format!("ckτ window {lo}:{hi} holds {inside} grid points, need at least 3"),
            ));
        }
        let mut entry = Map::new();
        entry.insert("ck_tau".into(), nums(&[lo, hi]));
        entry.insert("omega".into(), nums(&[band.0, band.1]));
        entry.insert("points".into(), (inside as u64).into());
        match fine_tuning_residual(&spectrum, band) {
            Ok(r) => {
                entry.insert("mean_kappa".into(), num(r.mean_kappa));
                entry.insert(
                    "coefficient_of_variation".into(),
                    num(r.coefficient_of_variation),
                );
            }
            Err(Error::Degenerate(m)) => {
                entry.insert("degenerate".into(), m.into());
            }
            Err(e) => return Err(CliError::Domain(e)),
        }
        tuning.push(Value::Object(entry));
    }

    let peak = spectrum
        .density_rel
        .iter()
        .position(|&d| d == 1.0)
        .map(|i| num(spectrum.omegas[i].value()))
        .unwrap_or(Value::Null);
    let natural = c.natural_units;
    let mut results = Map::new();
    results.insert("tau_s".into(), num(profile.tau().seconds()));
    results.insert("sudden_limit".into(), num(profile.sudden_limit()));
    results.insert(
        "omega_regime_boundary".into(),
        num(profile.omega_out_at(REGIME_BOUNDARY_CK_TAU)),
    );
    results.insert("omega_density_peak".into(), peak);
    results.insert("points".into(), points.into());
    results.insert("fine_tuning".into(), Value::Array(tuning));
    results.insert(
        "column_units".into(),
        columns(&[
            ("omega_out", unit_label(natural, "rad/s", "E")),
            ("beta_sq", "1".into()),
            ("zeta", "1".into()),
            ("T_k", unit_label(natural, "K", "E")),
            ("dN_domega_rel", "1".into()),
        ]),
    );
    Ok(Artifacts {
        report: ReportDocument::new(c, echo.0, results),
        csv: Some(table.finish()),
        events: None,
    })
}

fn columns(entries: &[(&str, Value)]) -> Value {
    Value::Object(
        entries
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
    )
}

fn formfactor(c: &RunConfig) -> Result<Artifacts> {
    let mut echo = Echo::default();
    let geometry = geometry(c, &mut echo)?;
    let r = geometry.radius();
    let q_min = echo.float("q_min", c.float("q_min")?);
    let q_max = echo.float("q_max", c.float_or("q_max", 20.0 / r)?);
    let points = echo.count("points", c.count("points")?);
    if !(q_min >= 0.0 && q_min.is_finite()) {
        return Err(CliError::config("q_min", "must be finite and non-negative"));
    }
    if !(q_max > q_min && q_max.is_finite()) {
        return Err(CliError::config("q_max", "must be finite and above q_min"));
    }
    if points < 2 {
        return Err(CliError::config("points", "need at least two grid points"));
    }

    let s0 = form_factor(0.0, &geometry);
    let step = (q_max - q_min) / (points - 1) as f64;
    let qs: Vec<f64> = (0..points)
        .map(|i| {
            if i == points - 1 {
                q_max
            } else {
                q_min + step * i as f64
            }
        })
        .collect();
    let ss: Vec<f64> = qs.iter().map(|&q| form_factor(q, &geometry)).collect();
    let mut table = Table::new(&["q", "S", "S_sq_normalized"]);
    for (&q, &s) in qs.iter().zip(&ss) {
        table.row(&[Cell::F(q), Cell::F(s), Cell::F((s / s0) * (s / s0))]);
    }

    // first sign change of S on the grid
    let zero = (1..ss.len()).find(|&i| ss[i - 1] > 0.0 && ss[i] <= 0.0);
    let mut results = Map::new();
    results.insert("volume".into(), num(s0));
    results.insert(
        "first_zero_bracket".into(),
        zero.map(|i| nums(&[qs[i - 1], qs[i]]))
            .unwrap_or(Value::Null),
    );
    results.insert(
        "first_zero_bracket_qr".into(),
        zero.map(|i| nums(&[qs[i - 1] * r, qs[i] * r]))
            .unwrap_or(Value::Null),
    );
    let natural = c.natural_units;
    results.insert(
        "column_units".into(),
        columns(&[
            ("q", unit_label(natural, "1/m", "E")),
            ("S", unit_label(natural, "m^3", "E^-3")),
            ("S_sq_normalized", "1".into()),
        ]),
    );
    Ok(Artifacts {
        report: ReportDocument::new(c, echo.0, results),
        csv: Some(table.finish()),
        events: None,
    })
}

fn angular(c: &RunConfig) -> Result<Artifacts> {
    let units = units_of(c);
    let mut echo = Echo::default();
    let k = echo.float("k", c.float("k")?);
    let geometry = geometry(c, &mut echo)?;
    let samples = echo.count("samples", c.count("samples")?);
    let seed = echo.count("seed", c.count("seed")?);
    let bins = echo.count("bins", c.count("bins")?);
    let theta_max = echo.float("theta_max", c.float_or("theta_max", PI)?);
    let wavenumber = Wavenumber::new(k).map_err(|e| CliError::config("k", e.to_string()))?;
    if samples == 0 {
        return Err(CliError::config("samples", "need at least one sample"));
    }
    if bins == 0 {
        return Err(CliError::config("bins", "need at least one bin"));
    }
    if !(theta_max > 0.0 && theta_max <= PI) {
        return Err(CliError::config("theta_max", "must lie in (0, π]"));
    }

    let sampler = AngularSampler::new(wavenumber, &geometry);
    let mut draws = sampler.sample_many(samples as usize, seed);
    let width = theta_max / bins as f64;
    let mut counts = vec![0u64; bins as usize];
    let mut overflow = 0u64;
    for &t in &draws {
        if t > theta_max {
            overflow += 1;
        } else {
            counts[((t / width) as usize).min(bins as usize - 1)] += 1;
        }
    }
    let mut table = Table::new(&["theta_bin_center", "count", "density"]);
    for (i, &n) in counts.iter().enumerate() {
        table.row(&[
            Cell::F((i as f64 + 0.5) * width),
            Cell::U(n),
            Cell::F(n as f64 / (samples as f64 * width)),
        ]);
    }

    let mean = draws.iter().sum::<f64>() / samples as f64;
    let mid = (samples as usize - 1) / 2;
    let (_, median, _) = draws.select_nth_unstable_by(mid, f64::total_cmp);
    let median = *median;
    let omega = ModeFrequency::new(units.c * k).map_err(CliError::Domain)?;
    let validity = planewave_validity(omega, 1.0, &geometry, units)?;

    let mut results = Map::new();
    results.insert("kr".into(), num(sampler.kr()));
    results.insert("samples".into(), samples.into());
    results.insert("overflow".into(), overflow.into());
    results.insert("median_deviation".into(), num(median));
    results.insert("median_deviation_tabulated".into(), num(sampler.median()));
    results.insert("mean_deviation".into(), num(mean));
    results.insert("validity_ratio".into(), num(validity.ratio));
    results.insert("validity_threshold".into(), num(validity.threshold));
    results.insert("plane_wave_valid".into(), validity.is_valid().into());
    results.insert(
        "column_units".into(),
        columns(&[
            ("theta_bin_center", "rad".into()),
            ("count", "1".into()),
            ("density", "1/rad".into()),
        ]),
    );
    Ok(Artifacts {
        report: ReportDocument::new(c, echo.0, results),
        csv: Some(table.finish()),
        events: None,
    })
}

fn source(c: &RunConfig, echo: &mut Echo) -> Result<SourceConfig> {
    let kind = echo.text("source", c.text("source")?);
    let forbid = |keys: &[&str], kind: &str| -> Result<()> {
        match keys.iter().find(|k| c.is_set(k)) {
            Some(k) => Err(CliError::config(k, format!("not used by a {kind} source"))),
            None => Ok(()),
        }
    };
    match kind.as_str() {
        "squeezed" => {
            forbid(&["nbar_a", "nbar_b"], "squeezed")?;
            let zeta = echo.float("zeta", c.float("zeta")?);
            let zeta =
                SqueezeParameter::new(zeta).map_err(|e| CliError::config("zeta", e.to_string()))?;
            Ok(SourceConfig::squeezed(zeta))
        }
        "thermal" => {
            forbid(&["zeta"], "thermal")?;
            let a = echo.float("nbar_a", c.float("nbar_a")?);
            let b = echo.float("nbar_b", c.float("nbar_b")?);
            SourceConfig::thermal(a, b).map_err(rejected)
        }
        other => Err(CliError::config(
            "source",
            format!("expected `thermal` or `squeezed`, got `{other}`"),
        )),
    }
}

fn check_flashes(n: u64) -> Result<()> {
    if n < 2 {
        return Err(CliError::config("flashes", "need at least two flashes"));
    }
    Ok(())
}

fn correlation_results(r: &CorrelationReport, source: Option<&SourceConfig>) -> Map<String, Value> {
    let mut m = Map::new();
    if let Some(s) = source {
        m.insert("source".into(), s.kind().as_str().into());
    }
    m.insert("flashes".into(), r.flashes.into());
    m.insert("batches".into(), r.batches.into());
    m.insert("mean_a".into(), num(r.mean_a));
    m.insert("mean_b".into(), num(r.mean_b));
    m.insert("var_a".into(), num(r.var_a));
    m.insert("var_b".into(), num(r.var_b));
    m.insert("cov_ab".into(), num(r.cov_ab));
    m.insert("var_nab".into(), num(r.var_nab));
    m.insert("var_nab_stderr".into(), num(r.var_nab_stderr));
    m.insert("prediction_thermal".into(), num(r.prediction_thermal));
    m.insert("prediction_squeezed".into(), num(r.prediction_squeezed));
    m.insert(
        "prediction_squeezed_ideal".into(),
        num(r.prediction_squeezed_ideal),
    );
    m.insert("z_thermal".into(), num(r.z_thermal));
    m.insert("z_squeezed".into(), num(r.z_squeezed));
    m.insert("classification".into(), r.classification.as_str().into());
    m.insert("low_statistics".into(), r.low_statistics.into());
    m
}

fn events_csv(events: &[PairSample]) -> String {
    let mut table = Table::new(&["flash", "n_a", "n_b"]);
    for (i, e) in events.iter().enumerate() {
        table.row(&[Cell::U(i as u64), Cell::U(e.n_a), Cell::U(e.n_b)]);
    }
    table.finish()
}

fn simulate(c: &RunConfig) -> Result<Artifacts> {
    let mut echo = Echo::default();
    let source = source(c, &mut echo)?;
    let det = detector(c, &mut echo)?;
    let flashes = echo.count("flashes", c.count("flashes")?);
    let seed = echo.count("seed", c.count("seed")?);
    let events_path = c.optional_text("events").map(|p| echo.text("events", p));
    check_flashes(flashes)?;

    let (report, events) = match &events_path {
        Some(path) => {
            let (r, ev) = run_ensemble_with_events(&source, &det, flashes, seed)?;
            (r, Some((PathBuf::from(path), events_csv(&ev))))
        }
        None => (run_ensemble(&source, &det, flashes, seed)?, None),
    };
    Ok(Artifacts {
        report: ReportDocument::new(c, echo.0, correlation_results(&report, Some(&source))),
        csv: None,
        events,
    })
}

/// Parse an event file written by `simulate`.
pub fn read_events(text: &str) -> Result<Vec<PairSample>> {
    let bad = |m: String| CliError::config("events", m);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header != vec!["flash", "n_a", "n_b"] {
        return Err(bad(format!(
            "expected header flash,n_a,n_b, got {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| -> Result<u64> {
            record[i]
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}: `{}` is not a count", row + 1, &record[i])))
        };
        if field(0)? != row as u64 {
            return Err(bad(format!("row {}: flash index out of sequence", row + 1)));
        }
        out.push(PairSample {
            n_a: field(1)?,
            n_b: field(2)?,
        });
    }
    Ok(out)
}

fn discriminate(c: &RunConfig) -> Result<Artifacts> {
    let mut echo = Echo::default();
    let path = echo.text("events", c.text("events")?);
    let det = detector(c, &mut echo)?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::config("events", format!("{path}: {e}")))?;
    let samples = read_events(&text)?;
    if samples.len() < 2 {
        return Err(CliError::config("events", "need at least two flashes"));
    }
    let report = analyze_samples(&samples, &det)?;
    Ok(Artifacts {
        report: ReportDocument::new(c, echo.0, correlation_results(&report, None)),
        csv: None,
        events: None,
    })
}

fn temperature(c: &RunConfig) -> Result<Artifacts> {
    let units = units_of(c);
    let mut echo = Echo::default();
    let profile = profile(c, &mut echo)?;
    let t = effective_temperature_adiabatic(&profile, units)?;
    let mut results = Map::new();
    results.insert("tau_s".into(), num(profile.tau().seconds()));
    results.insert(
        "temperature_closed_form".into(),
        num(t.closed_form.kelvin()),
    );
    results.insert("temperature_composed".into(), num(t.composed.kelvin()));
    results.insert("ratio".into(), num(t.ratio()));
    results.insert("reference_omega".into(), num(t.reference_omega.value()));
    results.insert(
        "temperature_unit".into(),
        unit_label(c.natural_units, "K", "E"),
    );
    Ok(Artifacts {
        report: ReportDocument::new(c, echo.0, results),
        csv: None,
        events: None,
    })
}
