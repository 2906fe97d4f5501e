//! Independent reference computations used by the statistical and
//! acceptance tests. Nothing here calls into the library's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

/// 3 j₁(x) / x from a 12-term power series below 1 and the closed form
/// above.
pub fn shape(x: f64) -> f64 {
    if x < 1.0 {
        // Σ (-1)^k 3 x^{2k} / (2^k k! (2k+3)!!)
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            let kf = k as f64;
            term *= -x2 / (2.0 * kf * (2.0 * kf + 3.0));
            sum += term;
        }
        sum
    } else {
        3.0 * (x.sin() - x * x.cos()) / x.powi(3)
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    eps: f64,
    whole: f64,
    m: f64,
    fm: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, 0.5 * eps, left, lm, flm, depth - 1)
        + adaptive(f, m, fm, b, fb, 0.5 * eps, right, rm, frm, depth - 1)
}

/// Adaptive Simpson quadrature, pre-split into `pieces` panels so
/// oscillatory integrands are not under-sampled.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + h };
            let (flo, fhi) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(f, lo, flo, hi, fhi);
            adaptive(f, lo, flo, hi, fhi, eps / pieces as f64, whole, m, fm, 40)
        })
        .sum()
}

/// Bisection for a sign change of `f` in [lo, hi].
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change in [{lo}, {hi}]");
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Cumulative distribution of the back-to-back deviation angle for equal
/// momenta, by direct quadrature of |S(2k sin(θ/2) R)|² sin θ in θ.
pub struct AngularOracle {
    kr: f64,
    total: f64,
    // cumulative mass at the nodes of a fixed θ grid
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl AngularOracle {
    pub fn new(kr: f64) -> Self {
        let n = 4000;
        // resolve the peak width ~ 1/kR
        let scale = (4.0 / kr).min(PI);
        let mut nodes: Vec<f64> = (0..=n / 2)
            .map(|i| scale * i as f64 / (n / 2) as f64)
            .collect();
        if scale < PI {
            for i in 1..=n / 2 {
                nodes.push(scale + (PI - scale) * i as f64 / (n / 2) as f64);
            }
        }
        let mut cumulative = vec![0.0];
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            acc += integrate(&|t| Self::density_at(kr, t), w[0], w[1], 1e-13, 4);
            cumulative.push(acc);
        }
        AngularOracle {
            kr,
            total: acc,
            nodes,
            cumulative,
        }
    }

    fn density_at(kr: f64, theta: f64) -> f64 {
        let s = shape(2.0 * kr * (0.5 * theta).sin());
        s * s * theta.sin()
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= PI {
            return 1.0;
        }
        let i = self.nodes.partition_point(|&t| t <= theta) - 1;
        let part = integrate(
            &|t| Self::density_at(self.kr, t),
            self.nodes[i],
            theta,
            1e-14,
            2,
        );
        (self.cumulative[i] + part) / self.total
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cumulative.partition_point(|&c| c <= u * self.total);
        let hi = self.nodes[i.min(self.nodes.len() - 1)];
        let lo = self.nodes[i.saturating_sub(1)];
        bisect(|t| self.cdf(t) - u, lo, hi + 1e-15, 60)
    }
}

/// Pearson χ² of `samples` against `bins` equiprobable bins of the oracle.
/// Returns (statistic, degrees of freedom).
pub fn chi_square_equiprobable(
    samples: &[f64],
    oracle: &AngularOracle,
    bins: usize,
) -> (f64, usize) {
    let mut edges: Vec<f64> = (1..bins)
        .map(|i| oracle.quantile(i as f64 / bins as f64))
        .collect();
    edges.insert(0, 0.0);
    edges.push(PI + 1e-12);
    let mut counts = vec![0u64; bins];
    for &t in samples {
        let b = edges.partition_point(|&e| e <= t).clamp(1, bins) - 1;
        counts[b] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let stat = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    (stat, bins - 1)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and
/// the oracle, evaluated on `grid` points.
pub fn ks_distance(samples: &mut [f64], oracle: &AngularOracle, grid: usize) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    (1..grid)
        .map(|i| {
            let t = PI * i as f64 / grid as f64;
            let emp = samples.partition_point(|&s| s <= t) as f64 / n;
            (emp - oracle.cdf(t)).abs()
        })
        .fold(0.0, f64::max)
}

fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    let mut ln_c = 0.0;
    for i in 0..k {
        ln_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    let q = 1.0 - p;
    (ln_c + k as f64 * p.ln() + (n - k) as f64 * q.ln()).exp()
}

/// Var(a′ − b′) for squeezed pairs with geometric ratio `t_sq` thinned by
/// (η_a, η_b), by explicit enumeration over n ≤ `n_max`.
pub fn lossy_squeezed_variance_enumerated(t_sq: f64, eta_a: f64, eta_b: f64, n_max: u64) -> f64 {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for n in 0..=n_max {
        let pn = (1.0 - t_sq) * t_sq.powi(n as i32);
        for a in 0..=n {
            let pa = binomial_pmf(n, a, eta_a);
            for b in 0..=n {
                let w = pn * pa * binomial_pmf(n, b, eta_b);
                let d = a as f64 - b as f64;
                m1 += w * d;
                m2 += w * d * d;
            }
        }
    }
    m2 - m1 * m1
}

/// Median of a slice (sorts a copy).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    *m
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
