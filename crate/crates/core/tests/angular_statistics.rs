mod support;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use support::AngularOracle;
use twophoton_core::bogolubov::Wavenumber;
use twophoton_core::kinematics::*;

fn sampler(kr: f64) -> AngularSampler {
    let geometry = BubbleGeometry::new(1.0).unwrap();
    AngularSampler::new(Wavenumber::new(kr).unwrap(), &geometry)
}

#[test]
fn histograms_fit_quadrature_density() {
    for (i, kr) in [0.1, 1.0, 10.0, 100.0].into_iter().enumerate() {
        let samples = sampler(kr).sample_many(1_000_000, 11 + i as u64);
        let oracle = AngularOracle::new(kr);
        let (stat, dof) = support::chi_square_equiprobable(&samples, &oracle, 50);
        let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
        assert!(p > 0.01, "kR={kr}: chi2={stat} p={p}");
    }
}

#[test]
fn empirical_cdf_within_ks_bound() {
    let mut samples = sampler(1.0).sample_many(1_000_000, 5);
    let oracle = AngularOracle::new(1.0);
    let d = support::ks_distance(&mut samples, &oracle, 400);
    assert!(d < 0.002, "KS distance {d}");
}

#[test]
fn tabulated_cdf_tracks_oracle() {
    for kr in [0.1, 1.0, 10.0, 100.0] {
        let s = sampler(kr);
        let oracle = AngularOracle::new(kr);
        for i in 1..40 {
            let theta = std::f64::consts::PI * (i as f64 / 40.0).powi(3);
            assert!(
                (s.cdf(theta) - oracle.cdf(theta)).abs() < 1e-6,
                "kR={kr} theta={theta}"
            );
        }
    }
}

#[test]
fn large_bubble_concentrates_pairs() {
    assert!(sampler(1e4).median() < 1e-3);
}

#[test]
fn small_bubble_is_isotropic() {
    let samples = sampler(1e-3).sample_many(200_000, 3);
    let m = support::median(&samples);
    // sd of the median of a sin θ law is ~ 1/(2√n · f(π/2)) with f = 1/2
    assert!((m - std::f64::consts::FRAC_PI_2).abs() < 4.0 / (200_000f64).sqrt());
}

#[test]
fn sampled_medians_fall_with_bubble_size() {
    let medians: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|&kr| support::median(&sampler(kr).sample_many(100_000, 9)))
        .collect();
    assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");
}

#[test]
fn first_zero_by_independent_bisection() {
    let geometry = BubbleGeometry::new(2.0).unwrap();
    let root = support::bisect(|q| form_factor(q, &geometry), 4.0 / 2.0, 4.7 / 2.0, 80) * 2.0;
    let reference = support::bisect(|x: f64| x.tan() - x, 4.3, 4.6, 80);
    assert!((root - reference).abs() < 1e-9);
    assert!((root - 4.493409).abs() < 1e-5);
}

#[test]
fn shape_matches_independent_bessel_evaluation() {
    for i in 0..2000 {
        let x = 1e-4 * 1e6f64.powf(i as f64 / 1999.0);
        let a = form_factor_shape(x);
        let b = support::shape(x);
        let tol = if x < 1.0 {
            1e-13
        } else {
            1e-12 + 4.0 * f64::EPSILON / (x * x) * x
        };
        assert!((a - b).abs() <= tol.max(1e-13), "x={x}: {a} vs {b}");
    }
}
