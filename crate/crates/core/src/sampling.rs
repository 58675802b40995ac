//! Finite-shot estimation and shot-noise variance.
//!
//! Shots are drawn from the exact multinomial over the cost eigenbasis.
//! Variances are reported per shot: divide by `N_shots` for the estimator
//! variance, or pass `shots` where a function takes it.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{closed_s1, closed_s2, triangulation_s1, ShiftRule};
use crate::sim::Circuit;

/// Grid cells above this variance (σ₀²/N_shots units) are masked in CSV output.
pub const MASK_THRESHOLD: f64 = 8.0;
/// Cells within this distance of the grid minimum are listed as minimizers.
pub const MINIMIZER_TOL: f64 = 1e-9;

/// Splits a master seed into independent per-index seeds (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multinomial counts for `shots` draws from `probs`, via sequential binomials.
fn multinomial(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let n = Binomial::new(remaining, q).map(|b| b.sample(rng)).unwrap_or(0);
        counts[k] = n;
        remaining -= n;
        mass -= p;
    }
    counts
}

fn sample_mean(eigenvalues: &[f64], probs: &[f64], shots: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = multinomial(probs, shots, &mut rng);
    counts.iter().zip(eigenvalues).map(|(&n, l)| n as f64 * l).sum::<f64>() / shots as f64
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    Ok(())
}

/// Mean of `shots` projective measurements of the cost at `x`.
pub fn sample_expectation(circuit: &Circuit, x: f64, shots: u64, seed: u64) -> Result<f64> {
    check_shots(shots)?;
    Ok(sample_mean(circuit.cost_eigenvalues(), &circuit.outcome_probabilities(x), shots, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub shift: f64,
    pub weight: f64,
    pub estimate: f64,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    /// `chain_factor · Σ weight_i · estimate_i`.
    pub value: f64,
    pub chain_factor: f64,
    pub per_term_estimates: Vec<TermEstimate>,
    /// Estimator variance from the exact per-shift outcome distributions.
    pub analytic_variance: f64,
    pub seed: u64,
    pub shots_per_term: u64,
}

impl DerivativeEstimate {
    /// Recomputes `value` from the stored per-term fields.
    pub fn recompute(&self) -> f64 {
        self.chain_factor * self.per_term_estimates.iter().map(|t| t.weight * t.estimate).sum::<f64>()
    }
}

/// Per-term outcome distributions at a fixed point, reused across repetitions.
struct TermSampler<'a> {
    circuit: &'a Circuit,
    rule: ShiftRule,
    probs: Vec<Vec<f64>>,
    analytic_variance: f64,
    shots: u64,
}

impl<'a> TermSampler<'a> {
    fn new(circuit: &'a Circuit, x: f64, rule: &ShiftRule, shots: u64) -> Result<Self> {
        circuit.check_gaps(rule)?;
        Self::unchecked(circuit, x, rule, shots)
    }

    fn unchecked(circuit: &'a Circuit, x: f64, rule: &ShiftRule, shots: u64) -> Result<Self> {
        check_shots(shots)?;
        let rule = rule.at_point(x)?;
        let probs: Vec<Vec<f64>> = rule.terms.iter().map(|t| circuit.outcome_probabilities(x + t.shift)).collect();
        let analytic_variance = analytic_variance(&rule, &SigmaModel::Exact { circuit, x }, shots)?;
        Ok(Self { circuit, rule, probs, analytic_variance, shots })
    }

    fn estimate(&self, seed: u64) -> DerivativeEstimate {
        let per_term_estimates: Vec<TermEstimate> = self
            .rule
            .terms
            .iter()
            .zip(&self.probs)
            .enumerate()
            .map(|(i, (t, p))| TermEstimate {
                shift: t.shift,
                weight: t.weight,
                estimate: sample_mean(self.circuit.cost_eigenvalues(), p, self.shots, derive_seed(seed, i as u64)),
                shots: self.shots,
            })
            .collect();
        let mut est = DerivativeEstimate {
            value: 0.0,
            chain_factor: self.rule.chain_factor,
            per_term_estimates,
            analytic_variance: self.analytic_variance,
            seed,
            shots_per_term: self.shots,
        };
        est.value = est.recompute();
        est
    }
}

/// Samples every rule term independently with seeds derived from `seed` and
/// the term index.
pub fn estimate_derivative(
    circuit: &Circuit,
    x: f64,
    rule: &ShiftRule,
    shots_per_term: u64,
    seed: u64,
) -> Result<DerivativeEstimate> {
    Ok(TermSampler::new(circuit, x, rule, shots_per_term)?.estimate(seed))
}

/// As [`estimate_derivative`] without the gap check.
pub fn estimate_derivative_unchecked(
    circuit: &Circuit,
    x: f64,
    rule: &ShiftRule,
    shots_per_term: u64,
    seed: u64,
) -> Result<DerivativeEstimate> {
    Ok(TermSampler::unchecked(circuit, x, rule, shots_per_term)?.estimate(seed))
}

/// Single-shot variance model.
#[derive(Debug, Clone, Copy)]
pub enum SigmaModel<'a> {
    /// The same `σ₀²` at every shift.
    Constant(f64),
    /// `⟨C²⟩ - ⟨C⟩²` of the circuit at each shifted point `x + δ`.
    Exact { circuit: &'a Circuit, x: f64 },
}

/// `chain² · Σ w_i² σ²_i / shots`. Point-dependent rules are resolved at the
/// model's point, or used as built for the constant model.
pub fn analytic_variance(rule: &ShiftRule, model: &SigmaModel<'_>, shots: u64) -> Result<f64> {
    check_shots(shots)?;
    let sum: f64 = match *model {
        SigmaModel::Constant(sigma2) => rule.terms.iter().map(|t| t.weight * t.weight * sigma2).sum(),
        SigmaModel::Exact { circuit, x } => {
            let rule = rule.at_point(x)?;
            rule.terms
                .iter()
                .filter(|t| t.weight != 0.0)
                .map(|t| t.weight * t.weight * circuit.shot_variance(x + t.shift))
                .sum()
        }
    };
    Ok(rule.chain_factor * rule.chain_factor * sum / shots as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub mean: f64,
    pub variance: f64,
    pub analytic_variance: f64,
    pub repetitions: u64,
}

/// Sample mean and unbiased sample variance of [`estimate_derivative`] over
/// `repetitions` runs seeded by `derive_seed(seed, r)`.
pub fn empirical_variance(
    circuit: &Circuit,
    x: f64,
    rule: &ShiftRule,
    shots: u64,
    repetitions: u64,
    seed: u64,
) -> Result<EmpiricalStats> {
    if repetitions < 2 {
        return Err(Error::InvalidArgument("at least two repetitions are needed for a variance".into()));
    }
    let sampler = TermSampler::new(circuit, x, rule, shots)?;
    let values: Vec<f64> = (0..repetitions).map(|r| sampler.estimate(derive_seed(seed, r)).value).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(EmpiricalStats { mean, variance, analytic_variance: sampler.analytic_variance, repetitions })
}

/// Rule family scanned by a variance grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GridFamily {
    /// `±δ` single-gap rule; one axis.
    SymmetricS1 { gap: f64 },
    /// Three distinct shifts `(δ₁, δ₂, reference)`; two axes.
    TriangulationS1 { gap: f64, reference: f64 },
    /// Two-gap symmetric rule over `(δ₁, δ₂)`; two axes.
    SymmetricS2 { gaps: [f64; 2] },
}

impl GridFamily {
    pub fn dimensions(&self) -> usize {
        match self {
            GridFamily::SymmetricS1 { .. } => 1,
            _ => 2,
        }
    }

    pub fn gaps(&self) -> Vec<f64> {
        match *self {
            GridFamily::SymmetricS1 { gap } | GridFamily::TriangulationS1 { gap, .. } => vec![gap],
            GridFamily::SymmetricS2 { gaps } => gaps.to_vec(),
        }
    }

    /// Constant-σ variance (`σ₀² = 1`, one shot) of the rule at a grid cell,
    /// infinite when the stencil is singular.
    pub fn cell_variance(&self, d1: f64, d2: f64) -> f64 {
        let rule = match *self {
            GridFamily::SymmetricS1 { gap } => closed_s1(gap, d1),
            GridFamily::TriangulationS1 { gap, reference } => triangulation_s1(gap, [d1, d2, reference]),
            GridFamily::SymmetricS2 { gaps } => closed_s2(gaps, [d1, d2]),
        };
        rule.map_or(f64::INFINITY, |r| r.terms.iter().map(|t| t.weight * t.weight).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        if points < 2 || start >= end || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid axis needs start < end and at least 2 points, got [{start}, {end}] with {points}"
            )));
        }
        Ok(Self { start, end, points })
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.start + i as f64 * self.step()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridPreset {
    Fig2a,
    Fig2b,
    Fig3,
}

impl std::str::FromStr for GridPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig2a" => Ok(GridPreset::Fig2a),
            "fig2b" => Ok(GridPreset::Fig2b),
            "fig3" => Ok(GridPreset::Fig3),
            _ => Err(Error::Parse(format!("unknown grid preset {s:?} (expected fig2a, fig2b or fig3)"))),
        }
    }
}

impl GridPreset {
    pub fn family(self) -> GridFamily {
        match self {
            GridPreset::Fig2a => GridFamily::SymmetricS1 { gap: 2.0 },
            GridPreset::Fig2b => GridFamily::TriangulationS1 { gap: 2.0, reference: 0.0 },
            GridPreset::Fig3 => GridFamily::SymmetricS2 { gaps: [2.0, 4.0] },
        }
    }

    pub fn axes(self, points: usize) -> Vec<GridAxis> {
        let axis = |a, b| GridAxis { start: a, end: b, points };
        match self {
            GridPreset::Fig2a => vec![axis(0.0, 2.0 * PI)],
            GridPreset::Fig2b => vec![axis(-2.0 * PI, 2.0 * PI); 2],
            GridPreset::Fig3 => vec![axis(0.0, PI); 2],
        }
    }

    pub fn grid(self, points: usize) -> Result<VarianceGrid> {
        variance_grid(self.family(), &self.axes(points))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceGrid {
    pub family: GridFamily,
    pub axes: Vec<GridAxis>,
    /// Row-major over the axes; infinite where the stencil is singular.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    #[serde(flatten)]
    pub family: GridFamily,
    pub axes: Vec<GridAxis>,
    pub min: f64,
    pub argmin: Vec<f64>,
    pub minimizers: Vec<Vec<f64>>,
    pub mask_threshold: f64,
    pub masked_cells: usize,
    pub singular_cells: usize,
}

/// Constant-σ variance over a 1-D or 2-D shift grid.
pub fn variance_grid(family: GridFamily, axes: &[GridAxis]) -> Result<VarianceGrid> {
    if axes.len() != family.dimensions() {
        return Err(Error::InvalidArgument(format!(
            "{} axes given for a {}-dimensional grid",
            axes.len(),
            family.dimensions()
        )));
    }
    for a in axes {
        GridAxis::new(a.start, a.end, a.points)?;
    }
    let first = axes[0].values();
    let values = match axes.get(1) {
        None => first.iter().map(|&d| family.cell_variance(d, 0.0)).collect(),
        Some(second) => {
            let second = second.values();
            first.iter().flat_map(|&a| second.iter().map(move |&b| family.cell_variance(a, b))).collect()
        }
    };
    Ok(VarianceGrid { family, axes: axes.to_vec(), values })
}

impl VarianceGrid {
    /// Shift coordinates of the cell at flat index `i`.
    pub fn coordinates(&self, i: usize) -> Vec<f64> {
        match self.axes.len() {
            1 => vec![self.axes[0].values()[i]],
            _ => {
                let n2 = self.axes[1].points;
                vec![self.axes[0].values()[i / n2], self.axes[1].values()[i % n2]]
            }
        }
    }

    pub fn value_at(&self, index: &[usize]) -> f64 {
        match index {
            [i] => self.values[*i],
            [i, j] => self.values[i * self.axes[1].points + j],
            _ => f64::NAN,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First cell attaining the minimum, in row-major order.
    pub fn argmin(&self) -> Vec<f64> {
        let min = self.min();
        let i = self.values.iter().position(|&v| v == min).unwrap_or(0);
        self.coordinates(i)
    }

    /// All cells within [`MINIMIZER_TOL`] of the minimum.
    pub fn minimizers(&self) -> Vec<Vec<f64>> {
        let min = self.min();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v - min <= MINIMIZER_TOL)
            .map(|(i, _)| self.coordinates(i))
            .collect()
    }

    pub fn summary(&self) -> GridSummary {
        GridSummary {
            family: self.family,
            axes: self.axes.clone(),
            min: self.min(),
            argmin: self.argmin(),
            minimizers: self.minimizers(),
            mask_threshold: MASK_THRESHOLD,
            masked_cells: self.values.iter().filter(|v| v.is_nan() || **v > MASK_THRESHOLD).count(),
            singular_cells: self.values.iter().filter(|v| v.is_infinite()).count(),
        }
    }

    /// CSV with one row per cell; values above [`MASK_THRESHOLD`] are `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(if self.axes.len() == 1 { "delta,variance\n" } else { "delta1,delta2,variance\n" });
        for (i, v) in self.values.iter().enumerate() {
            for c in self.coordinates(i) {
                let _ = write!(out, "{c:.16e},");
            }
            if *v <= MASK_THRESHOLD {
                let _ = writeln!(out, "{v:.16e}");
            } else {
                out.push_str("inf\n");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::pauli_string;
    use crate::linalg::CMatrix;
    use crate::sim::CircuitSpec;
    use crate::spectral::HermitianOperator;
    use num_complex::Complex64;

    fn cos_circuit() -> Circuit {
        let h = 1.0 / 2f64.sqrt();
        let had = CMatrix::from_rows(&[
            vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ])
        .unwrap();
        CircuitSpec::new(pauli_string("Z", 1.0).unwrap(), pauli_string("X", 1.0).unwrap())
            .unwrap()
            .with_pre(had)
            .unwrap()
            .prepare()
            .unwrap()
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(0, 0), derive_seed(1, 0));
        assert_eq!(derive_seed(3, 4), derive_seed(3, 4));
    }

    #[test]
    fn multinomial_conserves_shots() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for shots in [1, 7, 1000] {
            let counts = multinomial(&[0.1, 0.0, 0.6, 0.3], shots, &mut rng);
            assert_eq!(counts.iter().sum::<u64>(), shots);
            assert_eq!(counts[1], 0);
        }
    }

    #[test]
    fn certain_outcome_is_exact() {
        let c = cos_circuit();
        for seed in 0..20 {
            assert_eq!(sample_expectation(&c, 0.0, 1000, seed).unwrap(), 1.0);
        }
        let z = pauli_string("Z", 1.0).unwrap();
        let flat = CircuitSpec::new(z, HermitianOperator::identity(2).scaled(0.7)).unwrap().prepare().unwrap();
        assert!((sample_expectation(&flat, 0.3, 17, 5).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = cos_circuit();
        let a = sample_expectation(&c, 1.1, 500, 42).unwrap();
        assert_eq!(a, sample_expectation(&c, 1.1, 500, 42).unwrap());
        assert!(sample_expectation(&c, 1.1, 0, 42).is_err());
    }

    #[test]
    fn psr_constant_sigma_variance() {
        for delta in [PI / 2.0, PI / 3.0, 0.4] {
            let rule = closed_s1(2.0, delta).unwrap();
            let v = analytic_variance(&rule, &SigmaModel::Constant(1.0), 1).unwrap();
            let expected = 4.0 / (8.0 * delta.sin().powi(2));
            assert!((v - expected).abs() < 1e-12);
        }
        let rule = closed_s1(2.0, PI / 2.0).unwrap();
        assert!((analytic_variance(&rule, &SigmaModel::Constant(1.0), 1).unwrap() - 0.5).abs() < 1e-15);
        let chained = crate::rules::apply_chain(&rule, 3.0);
        assert!((analytic_variance(&chained, &SigmaModel::Constant(1.0), 1).unwrap() - 4.5).abs() < 1e-14);
    }

    #[test]
    fn estimate_value_reproducible_from_fields() {
        let c = cos_circuit();
        let rule = closed_s1(2.0, PI / 2.0).unwrap();
        let e = estimate_derivative(&c, 0.8, &rule, 1000, 3).unwrap();
        assert_eq!(e.value, e.recompute());
        assert_eq!(e.per_term_estimates.len(), 2);
        assert_eq!(e, estimate_derivative(&c, 0.8, &rule, 1000, 3).unwrap());
        // σ²(x) = 1 - cos²(x) for X measured on the cosine circuit
        let expected = 0.25 * ((0.8 + PI / 2.0).sin().powi(2) + (0.8 - PI / 2.0).sin().powi(2)) / 1000.0;
        assert!((e.analytic_variance - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_term_changes_nothing() {
        let c = cos_circuit();
        let tri = triangulation_s1(2.0, [PI / 2.0, -PI / 2.0, 0.0]).unwrap();
        let mut trimmed = tri.clone();
        trimmed.terms.truncate(2);
        trimmed.terms[0].weight = 0.5;
        trimmed.terms[1].weight = -0.5;
        let a = analytic_variance(&tri, &SigmaModel::Exact { circuit: &c, x: 0.4 }, 100).unwrap();
        let b = analytic_variance(&trimmed, &SigmaModel::Exact { circuit: &c, x: 0.4 }, 100).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn fig2a_grid() {
        let g = GridPreset::Fig2a.grid(201).unwrap();
        assert!((g.min() - 0.5).abs() < 1e-12);
        assert!((g.argmin()[0] - PI / 2.0).abs() < 1e-12);
        assert!(g.values[0].is_infinite());
        // symmetry δ → -δ
        for d in [0.3, 1.2, 2.9] {
            let f = g.family;
            assert!((f.cell_variance(d, 0.0) - f.cell_variance(-d, 0.0)).abs() < 1e-12);
        }
        let f = g.family;
        assert!(f.cell_variance(0.01, 0.0) > 100.0 * f.cell_variance(PI / 2.0, 0.0));
    }

    #[test]
    fn fig2b_minima() {
        let g = GridPreset::Fig2b.grid(201).unwrap();
        assert!((g.min() - 0.5).abs() < 1e-12);
        let minimizers = g.minimizers();
        assert_eq!(minimizers.len(), 8);
        for m in &minimizers {
            for c in m {
                let r = (c.abs() / (PI / 2.0)).round();
                assert!(r == 1.0 || r == 3.0, "{m:?}");
            }
        }
    }

    #[test]
    fn fig3_optimum() {
        let g = GridPreset::Fig3.grid(201).unwrap();
        assert!((g.min() - 1.40).abs() < 0.02, "{}", g.min());
        let mut a = g.argmin();
        a.sort_by(|x, y| y.total_cmp(x));
        assert!((a[0] / PI - 0.80).abs() < 0.02 && (a[1] / PI - 0.29).abs() < 0.02, "{a:?}");
    }

    #[test]
    fn csv_masks_large_values() {
        let g = variance_grid(GridFamily::SymmetricS1 { gap: 2.0 }, &[GridAxis::new(0.0, PI, 5).unwrap()]).unwrap();
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "delta,variance");
        assert!(lines[1].ends_with(",inf"));
        assert_eq!(lines.len(), 6);
        let s = g.summary();
        assert_eq!(s.singular_cells, 2);
        assert!(
            variance_grid(GridFamily::SymmetricS2 { gaps: [2.0, 4.0] }, &[GridAxis::new(0.0, PI, 5).unwrap()]).is_err()
        );
    }
}
