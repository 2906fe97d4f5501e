//! Number-basis statistics of two-mode squeezed vacua and of genuinely
//! thermal light.
//!
//! Everything here works with closed-form photon-number laws rather than
//! operator matrices. Both source families are geometric in the photon
//! number, so a truncated table plus an analytic tail is exact.

use crate::error::{invalid, Error, Result};
use crate::numeric::{artanh_exp_neg, ln_coth, ln_tanh, sech_sq, sinh_sq};
use crate::units::Units;

/// Real, non-negative squeezing parameter of one back-to-back mode pair.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SqueezeParameter(f64);

impl SqueezeParameter {
    pub const VACUUM: SqueezeParameter = SqueezeParameter(0.0);

    pub fn new(zeta: f64) -> Result<Self> {
        if !zeta.is_finite() {
            return Err(invalid("zeta", zeta, "must be finite"));
        }
        if zeta < 0.0 {
            return Err(invalid("zeta", zeta, "must be non-negative"));
        }
        Ok(SqueezeParameter(zeta))
    }

    /// The squeeze whose mean occupation sinh²ζ equals `nbar`.
    pub fn from_mean_occupation(nbar: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(invalid("nbar", nbar, "must be finite and non-negative"));
        }
        SqueezeParameter::new(nbar.sqrt().asinh())
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_vacuum(self) -> bool {
        self.0 == 0.0
    }

    /// ln tanh²ζ, the log of the geometric ratio of the reduced law.
    /// Negative infinity for the vacuum.
    pub fn ln_geometric_ratio(self) -> f64 {
        if self.is_vacuum() {
            f64::NEG_INFINITY
        } else {
            2.0 * ln_tanh(self.0)
        }
    }
}

/// Angular frequency of a mode, rad/s (or natural units).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ModeFrequency(f64);

impl ModeFrequency {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(invalid("omega", omega, "must be finite and positive"));
        }
        Ok(ModeFrequency(omega))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Absolute temperature of a thermal source, kelvin (or natural units).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(kelvin: f64) -> Result<Self> {
        if !(kelvin.is_finite() && kelvin > 0.0) {
            return Err(invalid(
                "temperature",
                kelvin,
                "must be finite and positive",
            ));
        }
        Ok(Temperature(kelvin))
    }

    #[inline]
    pub fn kelvin(self) -> f64 {
        self.0
    }
}

/// Result of mapping a squeeze back to a temperature. The vacuum maps to
/// absolute zero, which is not a valid [`Temperature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectiveTemperature {
    Zero,
    Finite(Temperature),
}

impl EffectiveTemperature {
    /// Kelvin value with the zero-temperature case mapped to `0.0`.
    pub fn kelvin(self) -> f64 {
        match self {
            EffectiveTemperature::Zero => 0.0,
            EffectiveTemperature::Finite(t) => t.kelvin(),
        }
    }

    pub fn finite(self) -> Option<Temperature> {
        match self {
            EffectiveTemperature::Zero => None,
            EffectiveTemperature::Finite(t) => Some(t),
        }
    }
}

/// Truncated photon-number law `P(n) = (1 − r) rⁿ`, `n = 0..=n_max`, with the
/// mass of `n > n_max` kept separately as `tail_mass = r^{n_max+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDistribution {
    probs: Vec<f64>,
    tail_mass: f64,
    ratio: f64,
    // r / (1 − r), the mean of the untruncated law
    mean: f64,
}

impl NumberDistribution {
    fn geometric(ln_ratio: f64, one_minus_ratio: f64, mean: f64, n_max: usize) -> Self {
        if ln_ratio == f64::NEG_INFINITY {
            let mut probs = vec![0.0; n_max + 1];
            probs[0] = 1.0;
            return NumberDistribution {
                probs,
                tail_mass: 0.0,
                ratio: 0.0,
                mean: 0.0,
            };
        }
        let probs = (0..=n_max)
            .map(|n| one_minus_ratio * (n as f64 * ln_ratio).exp())
            .collect();
        NumberDistribution {
            probs,
            tail_mass: ((n_max + 1) as f64 * ln_ratio).exp(),
            ratio: ln_ratio.exp(),
            mean,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Geometric ratio `r` of successive probabilities.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Σ probs + tail_mass; one up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.tail_mass
    }

    pub fn truncated_mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Mean of the full law: the truncated sum plus the closed-form tail
    /// contribution Σ_{n≥m} n (1−r) rⁿ = r^m (m + μ) with m = n_max + 1.
    pub fn mean(&self) -> f64 {
        let m = (self.n_max() + 1) as f64;
        self.truncated_mean() + self.tail_mass * (m + self.mean)
    }

    /// Second raw moment of the full law. The tail is again closed form by
    /// memorylessness: n = m + K with K distributed like the whole law.
    pub fn second_moment(&self) -> f64 {
        let m = (self.n_max() + 1) as f64;
        let mu = self.mean;
        let k_sq = mu * (2.0 * mu + 1.0);
        let head: f64 = self
            .probs
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64) * (n as f64) * p)
            .sum();
        head + self.tail_mass * (m * m + 2.0 * m * mu + k_sq)
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.second_moment() - mean * mean
    }
}

/// Joint photon-number law of two detectors, dense over `0..=n_max` in
/// each index. Mass outside the square is in `tail_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    n_max: usize,
    probs: Vec<f64>,
    tail_mass: f64,
}

impl JointDistribution {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, n_a: usize, n_b: usize) -> f64 {
        if n_a > self.n_max || n_b > self.n_max {
            return 0.0;
        }
        self.probs[n_a * (self.n_max + 1) + n_b]
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let side = self.n_max + 1;
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (i / side, i % side, p))
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        let side = self.n_max + 1;
        self.probs
            .chunks(side)
            .map(|row| row.iter().sum())
            .collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        let side = self.n_max + 1;
        (0..side)
            .map(|b| (0..side).map(|a| self.probs[a * side + b]).sum())
            .collect()
    }

    /// Cov(N_a, N_b) over the truncated support, summed in centered form.
    pub fn covariance(&self) -> f64 {
        let (mean_a, mean_b) = self.iter().fold((0.0, 0.0), |(ma, mb), (a, b, p)| {
            (ma + a as f64 * p, mb + b as f64 * p)
        });
        self.iter()
            .map(|(a, b, p)| p * (a as f64 - mean_a) * (b as f64 - mean_b))
            .sum()
    }

    /// Var(N_a − N_b) over the truncated support, by direct enumeration.
    pub fn difference_variance(&self) -> f64 {
        let mean: f64 = self.iter().map(|(a, b, p)| p * (a as f64 - b as f64)).sum();
        self.iter()
            .map(|(a, b, p)| {
                let d = a as f64 - b as f64 - mean;
                p * d * d
            })
            .sum()
    }
}

/// Which physical hypothesis a prediction or sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Thermal,
    Squeezed,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Thermal => "thermal",
            SourceKind::Squeezed => "squeezed",
        }
    }
}

/// Analytic Var(N_a − N_b) for one source hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVariancePrediction {
    pub value: f64,
    pub source_kind: SourceKind,
}

/// ⟨N_a⟩ = sinh²ζ on the two-mode squeezed vacuum.
pub fn mean_occupation_squeezed(zeta: SqueezeParameter) -> f64 {
    sinh_sq(zeta.value())
}

/// Reduced single-mode law of the squeezed vacuum: P(n) = tanh²ⁿζ / cosh²ζ.
pub fn number_distribution_squeezed(zeta: SqueezeParameter, n_max: usize) -> NumberDistribution {
    NumberDistribution::geometric(
        zeta.ln_geometric_ratio(),
        sech_sq(zeta.value()),
        mean_occupation_squeezed(zeta),
        n_max,
    )
}

/// Joint law of the squeezed vacuum. Its Fock expansion only populates
/// n_a = n_b, each with the single-mode weight.
pub fn joint_number_distribution_squeezed(
    zeta: SqueezeParameter,
    n_max: usize,
) -> JointDistribution {
    let single = number_distribution_squeezed(zeta, n_max);
    let side = n_max + 1;
    let mut probs = vec![0.0; side * side];
    for (n, &p) in single.probs().iter().enumerate() {
        probs[n * side + n] = p;
    }
    JointDistribution {
        n_max,
        probs,
        tail_mass: single.tail_mass(),
    }
}

/// Product law of two independent thermal modes.
pub fn joint_number_distribution_thermal(
    nbar_a: f64,
    nbar_b: f64,
    n_max: usize,
) -> Result<JointDistribution> {
    let a = number_distribution_thermal(nbar_a, n_max)?;
    let b = number_distribution_thermal(nbar_b, n_max)?;
    let probs = a
        .probs()
        .iter()
        .flat_map(|pa| b.probs().iter().map(move |pb| pa * pb))
        .collect();
    let inside_a = 1.0 - a.tail_mass();
    let inside_b = 1.0 - b.tail_mass();
    Ok(JointDistribution {
        n_max,
        probs,
        tail_mass: 1.0 - inside_a * inside_b,
    })
}

/// Squeeze that reproduces a thermal mode at temperature `t` under the
/// thermofield identification tanh ζ = exp(−ħω / 2k_BT).
pub fn squeeze_from_temperature(
    omega: ModeFrequency,
    t: Temperature,
    units: Units,
) -> Result<SqueezeParameter> {
    let x = units.energy_ratio(omega.value(), t.kelvin());
    if !x.is_finite() {
        return Err(invalid("hbar*omega/(k_B*T)", x, "must be finite"));
    }
    // e^{-x/2} indistinguishable from one: ζ = ∞.
    if -(-0.5 * x).exp_m1() < f64::EPSILON {
        return Err(Error::Overflow("squeeze_from_temperature"));
    }
    SqueezeParameter::new(artanh_exp_neg(0.5 * x))
}

/// Effective temperature k_BT = ħω / (2 ln coth ζ) assigned to a mode of
/// frequency `omega` carrying squeeze `zeta`.
pub fn effective_temperature(
    omega: ModeFrequency,
    zeta: SqueezeParameter,
    units: Units,
) -> Result<EffectiveTemperature> {
    if zeta.is_vacuum() {
        return Ok(EffectiveTemperature::Zero);
    }
    let lc = ln_coth(zeta.value());
    let kelvin = units.hbar * omega.value() / (2.0 * units.k_b * lc);
    if !kelvin.is_finite() {
        return Err(Error::Overflow("effective_temperature"));
    }
    if kelvin == 0.0 {
        return Ok(EffectiveTemperature::Zero);
    }
    Temperature::new(kelvin).map(EffectiveTemperature::Finite)
}

/// Bose–Einstein occupation 1 / (e^{ħω/k_BT} − 1), evaluated as
/// e^{−x} / (1 − e^{−x}) so large x underflows gracefully.
pub fn thermal_mean_occupation(omega: ModeFrequency, t: Temperature, units: Units) -> f64 {
    let x = units.energy_ratio(omega.value(), t.kelvin());
    bose_einstein(x)
}

pub(crate) fn bose_einstein(x: f64) -> f64 {
    (-x).exp() / -(-x).exp_m1()
}

/// Bose–Einstein photon-number law with mean `nbar`:
/// P(n) = n̄ⁿ / (n̄ + 1)^{n+1}.
pub fn number_distribution_thermal(nbar: f64, n_max: usize) -> Result<NumberDistribution> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(invalid("nbar", nbar, "must be finite and non-negative"));
    }
    let ln_ratio = if nbar == 0.0 {
        f64::NEG_INFINITY
    } else {
        -(1.0 / nbar).ln_1p()
    };
    Ok(NumberDistribution::geometric(
        ln_ratio,
        1.0 / (nbar + 1.0),
        nbar,
        n_max,
    ))
}

/// Var(N_a − N_b) for independent thermal modes: n̄_a(n̄_a+1) + n̄_b(n̄_b+1).
pub fn pair_variance_thermal(nbar_a: f64, nbar_b: f64) -> Result<PairVariancePrediction> {
    for (name, v) in [("nbar_a", nbar_a), ("nbar_b", nbar_b)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(name, v, "must be finite and non-negative"));
        }
    }
    Ok(PairVariancePrediction {
        value: nbar_a * (nbar_a + 1.0) + nbar_b * (nbar_b + 1.0),
        source_kind: SourceKind::Thermal,
    })
}

/// Var(N_a − N_b) on a two-mode squeezed vacuum, which vanishes identically.
pub fn pair_variance_squeezed() -> PairVariancePrediction {
    PairVariancePrediction {
        value: 0.0,
        source_kind: SourceKind::Squeezed,
    }
}
