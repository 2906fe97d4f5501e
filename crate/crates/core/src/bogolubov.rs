//! Photon pair production by a homogeneous medium whose refractive index
//! switches from `n_in` to `n_out` over a timescale `t_0`.
//!
//! The comoving wavenumber `k` is conserved through the transition and each
//! epoch uses `ω = c k / n`. With that dispersion every argument of the
//! diagonal Bogolubov factor is a multiple of the dimensionless `c k τ`, so
//! most routines here take `ck_tau` directly and the dimensional wrappers
//! only convert.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::numeric::{ln_coth, ln_sinh, LOG_SPACE_THRESHOLD};
use crate::states::{
    effective_temperature, squeeze_from_temperature, EffectiveTemperature, ModeFrequency,
    SqueezeParameter, Temperature,
};
use crate::units::Units;

/// Before/after refractive indices and the switching timescale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefractiveTransition {
    n_in: f64,
    n_out: f64,
    t_0: f64,
}

impl RefractiveTransition {
    pub fn new(n_in: f64, n_out: f64, t_0: f64) -> Result<Self> {
        for (name, n) in [("n_in", n_in), ("n_out", n_out)] {
            if !n.is_finite() || n < 1.0 {
                return Err(invalid(name, n, "refractive index must be finite and >= 1"));
            }
        }
        if !(t_0.is_finite() && t_0 > 0.0) {
            return Err(invalid("t_0", t_0, "must be finite and positive"));
        }
        Ok(RefractiveTransition { n_in, n_out, t_0 })
    }

    pub fn n_in(&self) -> f64 {
        self.n_in
    }

    pub fn n_out(&self) -> f64 {
        self.n_out
    }

    pub fn t_0(&self) -> f64 {
        self.t_0
    }

    pub fn n_min(&self) -> f64 {
        self.n_in.min(self.n_out)
    }

    pub fn tau(&self) -> TimeScaleTau {
        tau(self)
    }

    /// Out-medium frequency of the mode with the given `c k τ`.
    pub fn omega_out_at(&self, ck_tau: f64) -> f64 {
        ck_tau / (self.tau().seconds() * self.n_out)
    }

    /// `c k τ` of the mode with out-medium frequency `omega_out`.
    pub fn ck_tau_at(&self, omega_out: f64) -> f64 {
        omega_out * self.n_out * self.tau().seconds()
    }

    /// Zero-frequency plateau (n_in − n_out)² / (4 n_in n_out).
    pub fn sudden_limit(&self) -> f64 {
        let d = self.n_in - self.n_out;
        d * d / (4.0 * self.n_in * self.n_out)
    }
}

/// τ = π t_0 / (n_in² + n_out²).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TimeScaleTau(f64);

impl TimeScaleTau {
    pub fn seconds(self) -> f64 {
        self.0
    }
}

pub fn tau(profile: &RefractiveTransition) -> TimeScaleTau {
    TimeScaleTau(
        std::f64::consts::PI * profile.t_0
            / (profile.n_in * profile.n_in + profile.n_out * profile.n_out),
    )
}

/// Comoving wavenumber, 1/m (or natural units).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavenumber(pub(crate) f64);

impl Wavenumber {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(invalid("k", k, "must be finite and positive"));
        }
        Ok(Wavenumber(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Sudden (phase-space-limited) versus adiabatic (Boltzmann) part of the
/// spectrum, split at `c k τ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Sudden,
    Adiabatic,
}

pub const REGIME_BOUNDARY_CK_TAU: f64 = 1.0;

pub fn regime(ck_tau: f64) -> Regime {
    if ck_tau < REGIME_BOUNDARY_CK_TAU {
        Regime::Sudden
    } else {
        Regime::Adiabatic
    }
}

fn diagonal_arguments(profile: &RefractiveTransition, ck_tau: f64) -> (f64, f64, f64) {
    (
        ck_tau * (profile.n_in - profile.n_out).abs(),
        2.0 * ck_tau * profile.n_in,
        2.0 * ck_tau * profile.n_out,
    )
}

/// sinh²(a) / (sinh b₁ sinh b₂) evaluated with plain `sinh`.
pub fn beta_squared_direct(profile: &RefractiveTransition, ck_tau: f64) -> f64 {
    let (a, b1, b2) = diagonal_arguments(profile, ck_tau);
    let s = a.sinh();
    s * s / (b1.sinh() * b2.sinh())
}

/// The same factor as `exp(2 ln sinh a − ln sinh b₁ − ln sinh b₂)`.
pub fn beta_squared_log(profile: &RefractiveTransition, ck_tau: f64) -> f64 {
    let (a, b1, b2) = diagonal_arguments(profile, ck_tau);
    if a == 0.0 {
        return 0.0;
    }
    (2.0 * ln_sinh(a) - ln_sinh(b1) - ln_sinh(b2)).exp()
}

/// Diagonal |β|² as a function of the dimensionless `c k τ`, with the
/// momentum delta function stripped.
pub fn beta_squared_at(profile: &RefractiveTransition, ck_tau: f64) -> f64 {
    debug_assert!(ck_tau > 0.0);
    if profile.n_in == profile.n_out {
        return 0.0;
    }
    let (_, b1, b2) = diagonal_arguments(profile, ck_tau);
    if b1.max(b2) > LOG_SPACE_THRESHOLD {
        beta_squared_log(profile, ck_tau)
    } else {
        beta_squared_direct(profile, ck_tau)
    }
}

/// Diagonal |β(k, −k)|² for a pair at comoving wavenumber `k`.
pub fn beta_squared_diagonal(profile: &RefractiveTransition, k: Wavenumber, units: Units) -> f64 {
    beta_squared_at(profile, units.c * k.value() * profile.tau().seconds())
}

/// Adiabatic Boltzmann factor exp(−4 min{n_in, n_out} n_out ω_out τ).
pub fn beta_squared_adiabatic(profile: &RefractiveTransition, omega_out: ModeFrequency) -> f64 {
    let exponent =
        -4.0 * profile.n_min() * profile.n_out * omega_out.value() * profile.tau().seconds();
    exponent.exp()
}

/// ζ with sinh²ζ = |β|².
pub fn squeeze_from_beta(beta_sq: f64) -> Result<SqueezeParameter> {
    if beta_sq.is_nan() || beta_sq < 0.0 {
        return Err(invalid("beta_sq", beta_sq, "must be non-negative"));
    }
    SqueezeParameter::new(beta_sq.sqrt().asinh())
}

/// The single effective temperature of the adiabatic tail, computed two
/// ways.
///
/// `closed_form` is
/// k_BT = ħ (n_in² + n_out²) / (8π t_0 n_out min{n_in, n_out}).
/// `composed` chains the Boltzmann factor through [`squeeze_from_beta`] and
/// [`effective_temperature`] at `reference_omega`, deep in the adiabatic
/// region. The two differ by a factor of two; both are reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticTemperature {
    pub closed_form: Temperature,
    pub composed: Temperature,
    pub reference_omega: ModeFrequency,
}

impl AdiabaticTemperature {
    /// composed / closed_form.
    pub fn ratio(&self) -> f64 {
        self.composed.kelvin() / self.closed_form.kelvin()
    }
}

/// Boltzmann exponent at which the composed route is evaluated.
const REFERENCE_BOLTZMANN_EXPONENT: f64 = 80.0;

pub fn effective_temperature_adiabatic(
    profile: &RefractiveTransition,
    units: Units,
) -> Result<AdiabaticTemperature> {
    let n_in2 = profile.n_in * profile.n_in;
    let n_out2 = profile.n_out * profile.n_out;
    let energy = units.hbar / (8.0 * std::f64::consts::PI * profile.t_0) * (n_in2 + n_out2)
        / (profile.n_out * profile.n_min());
    let closed_form = Temperature::new(energy / units.k_b)?;

    let omega = REFERENCE_BOLTZMANN_EXPONENT
        / (4.0 * profile.n_min() * profile.n_out * profile.tau().seconds());
    let reference_omega = ModeFrequency::new(omega)?;
    let zeta = squeeze_from_beta(beta_squared_adiabatic(profile, reference_omega))?;
    let composed = effective_temperature(reference_omega, zeta, units)?
        .finite()
        .ok_or(Error::Degenerate(
            "adiabatic Boltzmann factor underflowed to zero".into(),
        ))?;
    Ok(AdiabaticTemperature {
        closed_form,
        composed,
        reference_omega,
    })
}

/// Per-mode |β|², squeeze and effective temperature over an out-medium
/// frequency grid, plus the relative photon-number density ω²|β|².
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSpectrum {
    pub omegas: Vec<ModeFrequency>,
    pub beta_sq: Vec<f64>,
    pub zetas: Vec<SqueezeParameter>,
    pub temps: Vec<EffectiveTemperature>,
    /// ω²|β|² normalized to a maximum of one on the grid (all zero when the
    /// spectrum vanishes). The absolute scale depends on the quantization
    /// volume and is not modeled.
    pub density_rel: Vec<f64>,
}

impl BetaSpectrum {
    fn assemble(
        omegas: Vec<ModeFrequency>,
        zetas: Vec<SqueezeParameter>,
        units: Units,
    ) -> Result<Self> {
        let beta_sq: Vec<f64> = zetas
            .iter()
            .map(|z| crate::states::mean_occupation_squeezed(*z))
            .collect();
        let temps = omegas
            .par_iter()
            .zip(zetas.par_iter())
            .map(|(w, z)| effective_temperature(*w, *z, units))
            .collect::<Result<Vec<_>>>()?;
        let raw: Vec<f64> = omegas
            .iter()
            .zip(&beta_sq)
            .map(|(w, b)| w.value() * w.value() * b)
            .collect();
        let peak = raw.iter().cloned().fold(0.0, f64::max);
        let density_rel = if peak > 0.0 {
            raw.iter().map(|d| d / peak).collect()
        } else {
            vec![0.0; raw.len()]
        };
        Ok(BetaSpectrum {
            omegas,
            beta_sq,
            zetas,
            temps,
            density_rel,
        })
    }

    /// A perfectly fine-tuned spectrum: every mode squeezed as if it were
    /// thermal at the single temperature `t`.
    pub fn thermal(omega_grid: &[f64], t: Temperature, units: Units) -> Result<Self> {
        let omegas = validate_grid(omega_grid)?;
        let zetas = omegas
            .iter()
            .map(|w| squeeze_from_temperature(*w, t, units))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(omegas, zetas, units)
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

fn validate_grid(grid: &[f64]) -> Result<Vec<ModeFrequency>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("frequency grid is empty".into()));
    }
    if grid
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::InvalidGrid(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    grid.iter()
        .map(|&w| ModeFrequency::new(w))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::InvalidGrid(e.to_string()))
}

/// Evaluate the diagonal spectrum of `profile` on `omega_grid` (out-medium
/// angular frequencies). Each point is independent, so the parallel map is
/// bitwise identical to a serial one.
pub fn build_spectrum(
    profile: &RefractiveTransition,
    omega_grid: &[f64],
    units: Units,
) -> Result<BetaSpectrum> {
    let omegas = validate_grid(omega_grid)?;
    let zetas = omegas
        .par_iter()
        .map(|w| squeeze_from_beta(beta_squared_at(profile, profile.ck_tau_at(w.value()))))
        .collect::<Result<Vec<_>>>()?;
    BetaSpectrum::assemble(omegas, zetas, units)
}

/// Spread of κ_k = ln coth ζ_k / ω_k over a frequency window. A single
/// temperature for all modes requires κ_k to be constant.
#[derive(Debug, Clone, PartialEq)]
pub struct FineTuningReport {
    pub omegas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub mean_kappa: f64,
    /// Population standard deviation of κ divided by its mean.
    pub coefficient_of_variation: f64,
}

pub fn fine_tuning_residual(
    spectrum: &BetaSpectrum,
    window: (f64, f64),
) -> Result<FineTuningReport> {
    let (lo, hi) = window;
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidGrid(format!("empty window [{lo}, {hi}]")));
    }
    let mut omegas = Vec::new();
    let mut kappas = Vec::new();
    for (w, z) in spectrum.omegas.iter().zip(&spectrum.zetas) {
        let w = w.value();
        if w < lo || w > hi {
            continue;
        }
        if z.is_vacuum() {
            return Err(Error::Degenerate(format!(
                "zero squeeze at omega = {w} inside the fine-tuning window"
            )));
        }
        omegas.push(w);
        kappas.push(ln_coth(z.value()) / w);
    }
    if kappas.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "window [{lo}, {hi}] holds {} grid points, need at least 3",
            kappas.len()
        )));
    }
    let n = kappas.len() as f64;
    let mean_kappa = kappas.iter().sum::<f64>() / n;
    let var = kappas.iter().map(|k| (k - mean_kappa).powi(2)).sum::<f64>() / n;
    Ok(FineTuningReport {
        omegas,
        kappas,
        mean_kappa,
        coefficient_of_variation: var.sqrt() / mean_kappa,
    })
}

/// Logarithmically spaced grid of `points` values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi / lo).ln() / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        hi
                    } else {
                        lo * (step * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}
