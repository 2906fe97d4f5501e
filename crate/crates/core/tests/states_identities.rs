use proptest::prelude::*;
use twophoton_core::states::*;
use twophoton_core::Units;

fn zeta_grid() -> impl Iterator<Item = SqueezeParameter> {
    (0..100).map(|i| SqueezeParameter::new(5.0 * i as f64 / 99.0).unwrap())
}

#[test]
fn squeezed_law_normalized_with_thermal_moments_on_grid() {
    for zeta in zeta_grid() {
        let d = number_distribution_squeezed(zeta, 200);
        assert!(
            (d.total_mass() - 1.0).abs() < 1e-12,
            "zeta={}",
            zeta.value()
        );
        let n = mean_occupation_squeezed(zeta);
        assert!(
            (d.mean() - n).abs() <= 1e-10 * n.max(1.0),
            "zeta={}",
            zeta.value()
        );
        let v = n * (n + 1.0);
        assert!(
            (d.variance() - v).abs() <= 1e-10 * v.max(1.0),
            "zeta={}",
            zeta.value()
        );
    }
}

#[test]
fn thermal_law_normalized_on_grid() {
    for zeta in zeta_grid() {
        let nbar = mean_occupation_squeezed(zeta);
        let d = number_distribution_thermal(nbar, 200).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        assert!((d.mean() - nbar).abs() <= 1e-10 * nbar.max(1.0));
    }
}

#[test]
fn thermal_variance_against_closed_form() {
    for nbar in [0.1, 1.0, 10.0] {
        let d = number_distribution_thermal(nbar, 30).unwrap();
        assert!((d.variance() - nbar * (nbar + 1.0)).abs() < 1e-10 * nbar * (nbar + 1.0));
    }
}

#[test]
fn temperature_round_trip_over_energy_ratio_range() {
    let omega = ModeFrequency::new(1.0).unwrap();
    for i in 0..400 {
        let x = 0.1 * 1000f64.powf(i as f64 / 399.0);
        let t = Temperature::new(1.0 / x).unwrap();
        let zeta = squeeze_from_temperature(omega, t, Units::NATURAL).unwrap();
        let back = effective_temperature(omega, zeta, Units::NATURAL)
            .unwrap()
            .kelvin();
        assert!((back - t.kelvin()).abs() <= 1e-12 * t.kelvin(), "x={x}");
    }
}

#[test]
fn squeezed_joint_law_has_no_difference_variance() {
    let zeta = SqueezeParameter::new(1.0).unwrap();
    let joint = joint_number_distribution_squeezed(zeta, 200);
    // brute-force sum over every cell
    let (mut m1, mut m2) = (0.0, 0.0);
    for a in 0..=200 {
        for b in 0..=200 {
            let p = joint.get(a, b);
            let d = a as f64 - b as f64;
            m1 += p * d;
            m2 += p * d * d;
        }
    }
    assert_eq!(m2 - m1 * m1, 0.0);
    assert_eq!(joint.difference_variance(), 0.0);
}

#[test]
fn thermal_joint_law_factorizes() {
    let joint = joint_number_distribution_thermal(1.0, 0.5, 60).unwrap();
    assert!(joint.covariance().abs() < 1e-14);
}

proptest! {
    #[test]
    fn joint_marginals_match_single_mode_law(z in 0.0f64..4.0, n_max in 0usize..80) {
        let zeta = SqueezeParameter::new(z).unwrap();
        let joint = joint_number_distribution_squeezed(zeta, n_max);
        let single = number_distribution_squeezed(zeta, n_max);
        for (a, b) in joint.marginal_a().iter().zip(single.probs()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
        for (a, b) in joint.marginal_b().iter().zip(single.probs()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn squeezing_grows_with_temperature(x in 0.05f64..50.0, bump in 1.001f64..3.0) {
        let omega = ModeFrequency::new(1.0).unwrap();
        let cold = squeeze_from_temperature(omega, Temperature::new(1.0 / x).unwrap(), Units::NATURAL).unwrap();
        let hot = squeeze_from_temperature(omega, Temperature::new(bump / x).unwrap(), Units::NATURAL).unwrap();
        prop_assert!(hot.value() > cold.value());
    }

    #[test]
    fn thermal_occupation_matches_squeezed_route(x in 0.01f64..50.0) {
        let omega = ModeFrequency::new(x).unwrap();
        let t = Temperature::new(1.0).unwrap();
        let direct = thermal_mean_occupation(omega, t, Units::NATURAL);
        let via = mean_occupation_squeezed(squeeze_from_temperature(omega, t, Units::NATURAL).unwrap());
        prop_assert!((direct - via).abs() <= 1e-12 * direct);
    }

    #[test]
    fn effective_temperature_is_linear_in_frequency(z in 0.01f64..5.0, w in 0.1f64..1e3) {
        let zeta = SqueezeParameter::new(z).unwrap();
        let t1 = effective_temperature(ModeFrequency::new(w).unwrap(), zeta, Units::SI).unwrap().kelvin();
        let t2 = effective_temperature(ModeFrequency::new(2.0 * w).unwrap(), zeta, Units::SI).unwrap().kelvin();
        prop_assert!((t2 / t1 - 2.0).abs() < 1e-13);
    }
}
