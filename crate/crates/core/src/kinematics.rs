//! Finite-bubble kinematics: the spherical form factor and the angular
//! distribution of photon pairs around exact back-to-back emission.

use rand::Rng;
use rayon::prelude::*;

use crate::bogolubov::{beta_squared_diagonal, RefractiveTransition, Wavenumber};
use crate::error::{invalid, Result};
use crate::states::ModeFrequency;
use crate::stream::{substream, CHUNK_SIZE};
use crate::units::Units;

/// Below this `qR` the form factor is evaluated from its Taylor series.
///
/// The closed form `sin x − x cos x` cancels to `x³/3`, leaving a relative
/// error of about `3ε/x²`; at `x = 0.1` that is below 1e-13 while the
/// five-term series is exact to rounding.
pub const SERIES_SWITCH: f64 = 0.1;

/// Spherical emission region of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleGeometry {
    radius: f64,
}

impl BubbleGeometry {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", radius, "must be finite and positive"));
        }
        Ok(BubbleGeometry { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// (4/3)πR³
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Momenta of the two photons of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumPair {
    k1: Vec3,
    k2: Vec3,
}

impl MomentumPair {
    pub fn new(k1: Vec3, k2: Vec3) -> Result<Self> {
        for (name, k) in [("|k1|", k1.norm()), ("|k2|", k2.norm())] {
            if !(k.is_finite() && k > 0.0) {
                return Err(invalid(name, k, "must be finite and positive"));
            }
        }
        Ok(MomentumPair { k1, k2 })
    }

    pub fn k1(&self) -> Vec3 {
        self.k1
    }

    pub fn k2(&self) -> Vec3 {
        self.k2
    }

    /// |k₁ + k₂|, the momentum mismatch from exact back-to-back emission.
    pub fn mismatch(&self) -> f64 {
        (self.k1 + self.k2).norm()
    }

    /// Angle between k₂ and −k₁.
    pub fn deviation_angle(&self) -> f64 {
        let back = -self.k1;
        back.cross(&self.k2).norm().atan2(back.dot(&self.k2))
    }
}

/// Deviation of the second photon from exact back-to-back emission.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularSample {
    pub deviation_angle: f64,
}

/// Five-term Taylor series of `3 (sin x − x cos x) / x³`.
pub fn form_factor_shape_series(x: f64) -> f64 {
    let x2 = x * x;
    1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15_120.0 + x2 * x2 * x2 * x2 / 1_330_560.0
}

/// `3 (sin x − x cos x) / x³` straight from the closed form.
pub fn form_factor_shape_closed(x: f64) -> f64 {
    3.0 * (x.sin() - x * x.cos()) / (x * x * x)
}

/// Dimensionless shape `s(x) = S(q, R) / S(0, R)` with `x = qR`.
pub fn form_factor_shape(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_SWITCH {
        form_factor_shape_series(x)
    } else {
        form_factor_shape_closed(x)
    }
}

/// S(q, R) = (4π/q³)[sin(qR) − qR cos(qR)], continuous at q = 0 where it
/// equals the bubble volume.
pub fn form_factor(q: f64, geometry: &BubbleGeometry) -> f64 {
    geometry.volume() * form_factor_shape(q * geometry.radius())
}

/// Pair weight F̂ · |S(|k₁+k₂| R)|², with the dynamical factor F̂ taken as
/// the diagonal |β|² at the mean momentum magnitude.
pub fn pair_weight(
    pair: &MomentumPair,
    profile: &RefractiveTransition,
    geometry: &BubbleGeometry,
    units: Units,
) -> f64 {
    let k_mean = 0.5 * (pair.k1.norm() + pair.k2.norm());
    let f = beta_squared_diagonal(profile, Wavenumber(k_mean), units);
    let s = form_factor(pair.mismatch(), geometry);
    f * s * s
}

// Uniform cells of the sampling table cover x ∈ [0, min(2kR, UNIFORM_SPAN)].
const UNIFORM_SPAN: f64 = 200.0;
const UNIFORM_CELLS: usize = 20_000;
const TAIL_RATIO: f64 = 1.01;

// 5-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Density of the mismatch x = |k₁+k₂|R for equal magnitudes, up to a
/// constant: the solid-angle element sin θ dθ becomes x dx / (kR)².
fn mismatch_density(x: f64) -> f64 {
    let s = form_factor_shape(x);
    x * s * s
}

// Period average 9(x² + 1) / (2x⁵) of the oscillating tail.
fn tail_density(x: f64) -> f64 {
    9.0 * (x * x + 1.0) / (2.0 * x.powi(5))
}

fn cell_density(lo: f64, hi: f64) -> (f64, f64) {
    if lo >= UNIFORM_SPAN {
        (tail_density(lo), tail_density(hi))
    } else {
        (mismatch_density(lo), mismatch_density(hi))
    }
}

fn cell_mass(lo: f64, hi: f64) -> f64 {
    if lo >= UNIFORM_SPAN {
        let anti = |x: f64| -9.0 / (4.0 * x * x) - 9.0 / (8.0 * x.powi(4));
        return anti(hi) - anti(lo);
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(t, w)| w * mismatch_density(mid + half * t))
        .sum::<f64>()
        * half
}

/// Tabulated inverse-CDF sampler for the deviation angle of a pair with
/// equal momenta `k`, distributed as |S(2k sin(θ/2) R)|² sin θ on [0, π].
#[derive(Debug, Clone)]
pub struct AngularSampler {
    kr: f64,
    edges: Vec<f64>,
    cdf: Vec<f64>,
    // density at the two ends of each cell; the density is taken linear
    // inside a cell
    ends: Vec<(f64, f64)>,
}

impl AngularSampler {
    pub fn new(k: Wavenumber, geometry: &BubbleGeometry) -> Self {
        let kr = k.value() * geometry.radius();
        let x_max = 2.0 * kr;
        let uniform_end = x_max.min(UNIFORM_SPAN);
        let mut edges: Vec<f64> = (0..=UNIFORM_CELLS)
            .map(|i| uniform_end * i as f64 / UNIFORM_CELLS as f64)
            .collect();
        let mut x = uniform_end;
        while x < x_max {
            x = (x * TAIL_RATIO).min(x_max);
            edges.push(x);
        }
        let masses: Vec<f64> = edges
            .par_windows(2)
            .map(|w| cell_mass(w[0], w[1]))
            .collect();
        let ends = edges.windows(2).map(|w| cell_density(w[0], w[1])).collect();
        let mut cdf = Vec::with_capacity(edges.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for m in masses {
            acc += m;
            cdf.push(acc);
        }
        AngularSampler {
            kr,
            edges,
            cdf,
            ends,
        }
    }

    pub fn kr(&self) -> f64 {
        self.kr
    }

    fn total(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    fn theta_from_mismatch(&self, x: f64) -> f64 {
        2.0 * (x / (2.0 * self.kr)).min(1.0).asin()
    }

    /// Draw one deviation angle.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AngularSample {
        let u: f64 = rng.random();
        self.quantile(u)
    }

    /// Inverse of [`cdf`](Self::cdf).
    pub fn quantile(&self, u: f64) -> AngularSample {
        let target = u * self.total();
        let i = self
            .cdf
            .partition_point(|&c| c <= target)
            .clamp(1, self.cdf.len() - 1)
            - 1;
        let mass = self.cdf[i + 1] - self.cdf[i];
        let g = if mass > 0.0 {
            ((target - self.cdf[i]) / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (r0, r1) = self.ends[i];
        let root = (r0 * r0 + g * (r1 - r0) * (r1 + r0)).max(0.0).sqrt();
        let frac = if r0 + root > 0.0 {
            (g * (r0 + r1) / (r0 + root)).clamp(0.0, 1.0)
        } else {
            g
        };
        let x = self.edges[i] + frac * (self.edges[i + 1] - self.edges[i]);
        AngularSample {
            deviation_angle: self.theta_from_mismatch(x),
        }
    }

    /// Tabulated probability that the deviation is at most `theta`.
    pub fn cdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= std::f64::consts::PI {
            return 1.0;
        }
        let x = 2.0 * self.kr * (0.5 * theta).sin();
        let i = self
            .edges
            .partition_point(|&e| e <= x)
            .clamp(1, self.edges.len() - 1)
            - 1;
        let f = ((x - self.edges[i]) / (self.edges[i + 1] - self.edges[i])).clamp(0.0, 1.0);
        let (r0, r1) = self.ends[i];
        let g = if r0 + r1 > 0.0 {
            (2.0 * r0 * f + (r1 - r0) * f * f) / (r0 + r1)
        } else {
            f
        };
        (self.cdf[i] + g * (self.cdf[i + 1] - self.cdf[i])) / self.total()
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).deviation_angle
    }

    /// Draw `count` angles reproducibly: chunk `c` of [`CHUNK_SIZE`] draws
    /// reads substream `c` of `seed`, whatever the thread count.
    pub fn sample_many(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut out = vec![0.0; count];
        out.par_chunks_mut(CHUNK_SIZE)
            .enumerate()
            .for_each(|(c, chunk)| {
                let mut rng = substream(seed, c as u64);
                for slot in chunk {
                    *slot = self.sample(&mut rng).deviation_angle;
                }
            });
        out
    }
}

/// One deviation angle for a pair of equal momenta `k`. Builds the sampling
/// table on every call; use [`AngularSampler`] for repeated draws.
pub fn sample_pair_direction<R: Rng + ?Sized>(
    k: Wavenumber,
    geometry: &BubbleGeometry,
    rng: &mut R,
) -> AngularSample {
    AngularSampler::new(k, geometry).sample(rng)
}

/// Plane-wave validity ratio ρ = ω n R / c. The plane-wave treatment needs
/// the in-medium wavelength well below the bubble size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveValidity {
    pub ratio: f64,
    pub threshold: f64,
}

impl PlaneWaveValidity {
    pub fn is_valid(&self) -> bool {
        self.ratio >= self.threshold
    }
}

pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 10.0;

pub fn planewave_validity(
    omega: ModeFrequency,
    n: f64,
    geometry: &BubbleGeometry,
    units: Units,
) -> Result<PlaneWaveValidity> {
    planewave_validity_with_threshold(omega, n, geometry, units, DEFAULT_VALIDITY_THRESHOLD)
}

pub fn planewave_validity_with_threshold(
    omega: ModeFrequency,
    n: f64,
    geometry: &BubbleGeometry,
    units: Units,
    threshold: f64,
) -> Result<PlaneWaveValidity> {
    if !n.is_finite() || n < 1.0 {
        return Err(invalid("n", n, "refractive index must be finite and >= 1"));
    }
    Ok(PlaneWaveValidity {
        ratio: omega.value() * n * geometry.radius() / units.c,
        threshold,
    })
}
