use std::f64::consts::PI;

use proptest::prelude::*;

use gradshift::gates;
use gradshift::rules::{closed_s1, closed_s2, triangulation_s1};
use gradshift::sampling::{
    analytic_variance, derive_seed, empirical_variance, estimate_derivative, sample_expectation, GridFamily,
    GridPreset, SigmaModel,
};
use gradshift::sim::{random_hermitian, random_unitary};
use gradshift::{Circuit, CircuitSpec};

fn fsim_circuit() -> Circuit {
    CircuitSpec::new(gates::fsim_theta_generator(), gates::lookup("pauli:ZI").unwrap())
        .unwrap()
        .with_pre(random_unitary(4, 11))
        .unwrap()
        .with_post(random_unitary(4, 12))
        .unwrap()
        .prepare()
        .unwrap()
}

#[test]
fn estimates_are_unbiased_over_seeds() {
    let circuit = fsim_circuit();
    let rule = closed_s2([2.0, 4.0], [0.8 * PI, 0.29 * PI]).unwrap();
    let x = 0.4;
    let shots = 2000;
    let values: Vec<f64> =
        (0..100).map(|s| estimate_derivative(&circuit, x, &rule, shots, derive_seed(99, s)).unwrap().value).collect();
    let mean = values.iter().sum::<f64>() / 100.0;
    let var = analytic_variance(&rule, &SigmaModel::Exact { circuit: &circuit, x }, shots).unwrap();
    let se = (var / 100.0).sqrt();
    let exact = circuit.exact_derivative(x).unwrap();
    assert!((mean - exact).abs() < 4.0 * se, "mean {mean}, exact {exact}, se {se}");
}

#[test]
fn empirical_variance_matches_analytic() {
    let circuit = fsim_circuit();
    let rule = closed_s2([2.0, 4.0], [0.8 * PI, 0.29 * PI]).unwrap();
    let stats = empirical_variance(&circuit, 1.1, &rule, 500, 2000, 5).unwrap();
    let ratio = stats.variance / stats.analytic_variance;
    assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn sampled_expectation_converges() {
    let circuit = fsim_circuit();
    let exact = circuit.expectation(0.9).unwrap();
    let sampled = sample_expectation(&circuit, 0.9, 1_000_000, 3).unwrap();
    let sd = (circuit.shot_variance(0.9) / 1e6).sqrt();
    assert!((sampled - exact).abs() < 5.0 * sd);
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let circuit = fsim_circuit();
    let rule = closed_s2([2.0, 4.0], [0.5 * PI, 0.25 * PI]).unwrap();
    let a = estimate_derivative(&circuit, 0.2, &rule, 321, 8).unwrap();
    let b = estimate_derivative(&circuit, 0.2, &rule, 321, 8).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed, 8);
    assert_eq!(a.per_term_estimates.len(), 4);
    assert!((a.recompute() - a.value).abs() < 1e-15);
}

#[test]
fn constant_model_with_unit_sigma_is_weight_square_sum() {
    let rule = closed_s1(2.0, PI / 2.0).unwrap();
    assert!((analytic_variance(&rule, &SigmaModel::Constant(1.0), 1).unwrap() - 0.5).abs() < 1e-12);
    assert!((analytic_variance(&rule, &SigmaModel::Constant(2.0), 10).unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn exact_sigma_model_for_pauli_cost() {
    // f(x) = cos x, so the single-shot variance at x + δ is sin²(x + δ).
    let circuit = CircuitSpec::new(gates::lookup("pauli:X").unwrap(), gates::lookup("pauli:Z").unwrap())
        .unwrap()
        .prepare()
        .unwrap();
    let rule = closed_s1(2.0, PI / 2.0).unwrap();
    let x = 0.3;
    let got = analytic_variance(&rule, &SigmaModel::Exact { circuit: &circuit, x }, 1).unwrap();
    let expected = 0.25 * ((x + PI / 2.0).sin().powi(2) + (x - PI / 2.0).sin().powi(2));
    assert!((got - expected).abs() < 1e-12);
}

#[test]
fn single_gap_landscape_closed_form() {
    let family = GridFamily::SymmetricS1 { gap: 2.0 };
    for k in 1..100 {
        let delta = k as f64 * PI / 100.0;
        let expected = 1.0 / (2.0 * delta.sin().powi(2));
        assert!((family.cell_variance(delta, 0.0) - expected).abs() < 1e-12 * expected.max(1.0));
    }
    assert!(family.cell_variance(PI, 0.0).is_infinite());
}

#[test]
fn presets_reproduce_landscape_minima() {
    let g = GridPreset::Fig2a.grid(201).unwrap();
    assert!((g.min() - 0.5).abs() < 1e-12);
    assert!((g.argmin()[0] - PI / 2.0).abs() <= g.axes[0].step());

    let g = GridPreset::Fig3.grid(201).unwrap();
    let argmin = g.argmin();
    assert!((g.min() - 1.40).abs() < 0.01);
    assert!((argmin[0] / PI - 0.80).abs() <= 0.01 && (argmin[1] / PI - 0.29).abs() <= 0.01, "{argmin:?}");
}

#[test]
fn qutrit_landscape_is_the_fsim_landscape_stretched() {
    // Gaps (1, 2) are (2, 4) halved, so every shift doubles and the variance quarters.
    let fsim = GridFamily::SymmetricS2 { gaps: [2.0, 4.0] };
    let qutrit = GridFamily::SymmetricS2 { gaps: [1.0, 2.0] };
    for &(a, b) in &[(0.805 * PI, 0.29 * PI), (0.3, 1.2), (2.0, 0.4)] {
        let v = fsim.cell_variance(a, b);
        assert!((qutrit.cell_variance(2.0 * a, 2.0 * b) - v / 4.0).abs() < 1e-12 * v);
    }
    let at_fsim_optimum = qutrit.cell_variance(0.80 * PI, 0.29 * PI);
    let at_scaled_optimum = qutrit.cell_variance(1.61 * PI, 0.58 * PI);
    assert!(at_fsim_optimum > 2.0 * at_scaled_optimum, "{at_fsim_optimum} vs {at_scaled_optimum}");
}

#[test]
fn triangulation_landscape_degenerates_on_coinciding_shifts() {
    let family = GridFamily::TriangulationS1 { gap: 2.0, reference: 0.0 };
    assert!(family.cell_variance(0.7, 0.7).is_infinite());
    assert!(family.cell_variance(0.0, 1.0).is_infinite());
    assert!((family.cell_variance(PI / 2.0, -PI / 2.0) - 0.5).abs() < 1e-12);
}

proptest! {
    #[test]
    fn triangulation_weights_sum_to_zero(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64) {
        prop_assume!((a - b).abs() > 0.1 && (b - c).abs() > 0.1 && (a - c).abs() > 0.1);
        if let Ok(rule) = triangulation_s1(2.0, [a, b, c]) {
            let scale: f64 = rule.terms.iter().map(|t| t.weight.abs()).sum();
            prop_assert!(rule.terms.iter().map(|t| t.weight).sum::<f64>().abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn estimate_variance_scales_inversely_with_shots(shots in 1u64..100_000) {
        let circuit = fsim_circuit();
        let rule = closed_s2([2.0, 4.0], [0.8 * PI, 0.29 * PI]).unwrap();
        let model = SigmaModel::Exact { circuit: &circuit, x: 0.1 };
        let one = analytic_variance(&rule, &model, 1).unwrap();
        let many = analytic_variance(&rule, &model, shots).unwrap();
        prop_assert!((many * shots as f64 - one).abs() <= 1e-12 * one);
    }

    #[test]
    fn estimates_stay_in_the_weight_envelope(seed in any::<u64>(), x in -PI..PI) {
        let circuit = CircuitSpec::new(gates::lookup("qutrit:1").unwrap(), random_hermitian(3, 4))
            .unwrap()
            .prepare()
            .unwrap();
        let rule = closed_s2([1.0, 2.0], [1.61 * PI, 0.58 * PI]).unwrap();
        let bound: f64 = circuit.cost_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let est = estimate_derivative(&circuit, x, &rule, 50, seed).unwrap();
        let envelope: f64 = rule.terms.iter().map(|t| t.weight.abs()).sum::<f64>() * bound;
        prop_assert!(est.value.abs() <= envelope + 1e-12);
    }
}
