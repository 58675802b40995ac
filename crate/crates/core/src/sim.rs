//! Dense statevector simulation of `f(x) = ⟨ψ|U(x)† W† C W U(x)|ψ⟩` with
//! `U(x) = exp(-i x G / 2)` and `ψ = V|ψ₀⟩`, plus derivative oracles.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{norm2, vdot, CMatrix, ZERO};
use crate::rules::ShiftRule;
use crate::spectral::{diagonalize, unique_gaps, HermitianOperator, Spectrum};

/// Normalization and unitarity tolerance for circuit inputs.
pub const STATE_TOL: f64 = 1e-10;
/// Imaginary residue above which an expectation is an internal error.
pub const IMAGINARY_TOL: f64 = 1e-10;
/// Relative tolerance when matching generator gaps against rule gaps.
pub const GAP_MATCH_TOL: f64 = 1e-9;
/// Commutator bound for spectator generators.
const COMMUTE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch("state vector is empty".into()));
        }
        let norm = norm2(&amplitudes);
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.amplitudes)
    }

    pub fn apply(&mut self, unitary: &CMatrix) -> Result<()> {
        if unitary.cols() != self.dim() || unitary.rows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} unitary applied to dimension {} state",
                unitary.rows(),
                unitary.cols(),
                self.dim()
            )));
        }
        self.amplitudes = unitary.matvec(&self.amplitudes);
        Ok(())
    }
}

/// Fixed commuting generator applied alongside the differentiated one,
/// e.g. the φ part of an fSim gate while differentiating θ.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectator {
    pub generator: HermitianOperator,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub initial_state: StateVector,
    pub pre: CMatrix,
    pub generator: HermitianOperator,
    pub spectator: Option<Spectator>,
    pub post: CMatrix,
    pub cost: HermitianOperator,
    pub dphi_dx: f64,
}

impl CircuitSpec {
    /// Circuit with `V = W = I`, initial state `|0⟩` and unit chain factor.
    pub fn new(generator: HermitianOperator, cost: HermitianOperator) -> Result<Self> {
        let dim = generator.dim();
        if cost.dim() != dim {
            return Err(Error::DimensionMismatch(format!("generator is {dim}-dimensional, cost is {}", cost.dim())));
        }
        Ok(Self {
            initial_state: StateVector::basis(dim, 0)?,
            pre: CMatrix::identity(dim),
            generator,
            spectator: None,
            post: CMatrix::identity(dim),
            cost,
            dphi_dx: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn with_pre(mut self, pre: CMatrix) -> Result<Self> {
        self.pre = checked_unitary(pre, self.dim(), "pre")?;
        Ok(self)
    }

    pub fn with_post(mut self, post: CMatrix) -> Result<Self> {
        self.post = checked_unitary(post, self.dim(), "post")?;
        Ok(self)
    }

    pub fn with_initial_state(mut self, state: StateVector) -> Result<Self> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has dimension {}, circuit has {}",
                state.dim(),
                self.dim()
            )));
        }
        self.initial_state = state;
        Ok(self)
    }

    pub fn with_spectator(mut self, generator: HermitianOperator, angle: f64) -> Result<Self> {
        if generator.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "spectator generator has dimension {}, circuit has {}",
                generator.dim(),
                self.dim()
            )));
        }
        let comm = self.generator.matrix().commutator(generator.matrix()).max_abs();
        if comm > COMMUTE_TOL * generator.matrix().max_abs().max(1.0) * self.generator.matrix().max_abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "spectator generator does not commute with the differentiated generator (‖[G, G']‖ = {comm:.3e})"
            )));
        }
        self.spectator = Some(Spectator { generator, angle });
        Ok(self)
    }

    pub fn with_chain(mut self, dphi_dx: f64) -> Result<Self> {
        if !dphi_dx.is_finite() {
            return Err(Error::InvalidArgument(format!("dphi_dx must be finite, got {dphi_dx}")));
        }
        self.dphi_dx = dphi_dx;
        Ok(self)
    }

    pub fn prepare(&self) -> Result<Circuit> {
        Circuit::new(self.clone())
    }
}

fn checked_unitary(m: CMatrix, dim: usize, what: &str) -> Result<CMatrix> {
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{what} circuit is {}x{}, expected {dim}x{dim}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.unitarity_defect();
    if defect > STATE_TOL {
        return Err(Error::InvalidArgument(format!("{what} circuit is not unitary (defect {defect:.3e})")));
    }
    Ok(m)
}

/// `exp(-i x G / 2)` from a spectral decomposition.
pub fn generator_unitary(spectrum: &Spectrum, x: f64) -> CMatrix {
    spectrum.map_eigenvalues(|l| Complex64::from_polar(1.0, -x * l / 2.0))
}

/// A circuit with everything independent of `x` precomputed in the
/// generator's eigenbasis.
#[derive(Debug, Clone)]
pub struct Circuit {
    spec: CircuitSpec,
    generator_spectrum: Spectrum,
    generator_gaps: Vec<f64>,
    /// `E† V ψ₀`, the prepared state in the generator eigenbasis.
    amplitudes: Vec<Complex64>,
    /// `E† W† C W E`.
    dressed_cost: CMatrix,
    cost_eigenvalues: Vec<f64>,
    /// `F† W E`, mapping generator-eigenbasis amplitudes to cost-eigenbasis ones.
    measurement: CMatrix,
    cost_scale: f64,
}

impl Circuit {
    pub fn new(spec: CircuitSpec) -> Result<Self> {
        let dim = spec.dim();
        if spec.cost.dim() != dim
            || spec.pre.rows() != dim
            || spec.post.rows() != dim
            || spec.initial_state.dim() != dim
        {
            return Err(Error::DimensionMismatch(format!("circuit components disagree on dimension {dim}")));
        }
        let generator_spectrum = diagonalize(&spec.generator)?;
        let generator_gaps = match unique_gaps(&generator_spectrum, generator_spectrum.default_gap_tolerance()) {
            Ok(g) => g.gaps,
            Err(Error::EmptyGapSet) => Vec::new(),
            Err(e) => return Err(e),
        };
        let mut pre = spec.pre.clone();
        if let Some(s) = &spec.spectator {
            let spectrum = diagonalize(&s.generator)?;
            pre = generator_unitary(&spectrum, s.angle).matmul(&pre);
        }
        let e = &generator_spectrum.eigenvectors;
        let psi = pre.matvec(spec.initial_state.amplitudes());
        let amplitudes = e.adjoint().matvec(&psi);
        let we = spec.post.matmul(e);
        let dressed_cost = we.adjoint().matmul(spec.cost.matrix()).matmul(&we);
        let cost_spectrum = diagonalize(&spec.cost)?;
        let measurement = cost_spectrum.eigenvectors.adjoint().matmul(&we);
        let cost_scale = spec.cost.matrix().max_abs().max(1.0);
        Ok(Self {
            spec,
            generator_spectrum,
            generator_gaps,
            amplitudes,
            dressed_cost,
            cost_eigenvalues: cost_spectrum.eigenvalues,
            measurement,
            cost_scale,
        })
    }

    pub fn spec(&self) -> &CircuitSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn dphi_dx(&self) -> f64 {
        self.spec.dphi_dx
    }

    pub fn generator_spectrum(&self) -> &Spectrum {
        &self.generator_spectrum
    }

    /// Unique gaps of the differentiated generator; empty when it is a
    /// multiple of the identity.
    pub fn generator_gaps(&self) -> &[f64] {
        &self.generator_gaps
    }

    pub fn cost_eigenvalues(&self) -> &[f64] {
        &self.cost_eigenvalues
    }

    fn evolved(&self, x: f64) -> Vec<Complex64> {
        self.amplitudes
            .iter()
            .zip(&self.generator_spectrum.eigenvalues)
            .map(|(a, l)| a * Complex64::from_polar(1.0, -x * l / 2.0))
            .collect()
    }

    fn real_part(&self, z: Complex64, what: &str) -> Result<f64> {
        if z.im.abs() > IMAGINARY_TOL * self.cost_scale {
            return Err(Error::Internal(format!("{what} has imaginary residue {:.3e}", z.im)));
        }
        Ok(z.re)
    }

    /// State `W U(x) V ψ₀` in the computational basis.
    pub fn state(&self, x: f64) -> StateVector {
        let b = self.evolved(x);
        let v = self.generator_spectrum.eigenvectors.matvec(&b);
        StateVector { amplitudes: self.spec.post.matvec(&v) }
    }

    pub fn expectation(&self, x: f64) -> Result<f64> {
        let b = self.evolved(x);
        let z = vdot(&b, &self.dressed_cost.matvec(&b));
        self.real_part(z, "expectation")
    }

    /// `(i/2)⟨ψ|U†[G, C̃]U|ψ⟩ · dphi_dx`, evaluated in the generator eigenbasis.
    pub fn exact_derivative(&self, x: f64) -> Result<f64> {
        let b = self.evolved(x);
        let lam = &self.generator_spectrum.eigenvalues;
        let c = &self.dressed_cost;
        let mut acc = ZERO;
        for j in 0..b.len() {
            let mut row = ZERO;
            for k in 0..b.len() {
                if lam[j] != lam[k] {
                    row += c[(j, k)] * b[k] * (lam[j] - lam[k]);
                }
            }
            acc += b[j].conj() * row;
        }
        let z = acc * Complex64::new(0.0, 0.5);
        Ok(self.real_part(z, "derivative")? * self.spec.dphi_dx)
    }

    /// Central difference `[f(x+h) - f(x-h)] / 2h`, times `dphi_dx`.
    pub fn fd_derivative(&self, x: f64, h: f64) -> Result<f64> {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
        }
        Ok((self.expectation(x + h)? - self.expectation(x - h)?) / (2.0 * h) * self.spec.dphi_dx)
    }

    /// Outcome probabilities in the cost eigenbasis, ordered like
    /// [`Circuit::cost_eigenvalues`].
    pub fn outcome_probabilities(&self, x: f64) -> Vec<f64> {
        let amps = self.measurement.matvec(&self.evolved(x));
        amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Single-shot variance `⟨C²⟩ - ⟨C⟩²` at `x`.
    pub fn shot_variance(&self, x: f64) -> f64 {
        let p = self.outcome_probabilities(x);
        let mean: f64 = p.iter().zip(&self.cost_eigenvalues).map(|(p, l)| p * l).sum();
        let second: f64 = p.iter().zip(&self.cost_eigenvalues).map(|(p, l)| p * l * l).sum();
        (second - mean * mean).max(0.0)
    }

    /// Generator gaps missing from `rule`.
    pub fn uncovered_gaps(&self, rule: &ShiftRule) -> Vec<f64> {
        rule.uncovered_gaps(&self.generator_gaps, GAP_MATCH_TOL)
    }

    pub fn check_gaps(&self, rule: &ShiftRule) -> Result<()> {
        let missing = self.uncovered_gaps(rule);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::GapMismatch { missing })
        }
    }

    /// `chain_factor · Σ w_i f(x + δ_i)`; fails when the rule does not cover
    /// the generator's gaps.
    pub fn evaluate_rule(&self, x: f64, rule: &ShiftRule) -> Result<f64> {
        self.check_gaps(rule)?;
        self.evaluate_rule_unchecked(x, rule)
    }

    /// As [`Circuit::evaluate_rule`] without the gap check.
    pub fn evaluate_rule_unchecked(&self, x: f64, rule: &ShiftRule) -> Result<f64> {
        let rule = rule.at_point(x)?;
        let mut sum = 0.0;
        for t in &rule.terms {
            sum += t.weight * self.expectation(x + t.shift)?;
        }
        Ok(rule.chain_factor * sum)
    }
}

pub fn expectation(circuit: &CircuitSpec, x: f64) -> Result<f64> {
    circuit.prepare()?.expectation(x)
}

pub fn exact_derivative(circuit: &CircuitSpec, x: f64) -> Result<f64> {
    circuit.prepare()?.exact_derivative(x)
}

pub fn fd_derivative(circuit: &CircuitSpec, x: f64, h: f64) -> Result<f64> {
    circuit.prepare()?.fd_derivative(x, h)
}

pub fn evaluate_rule(circuit: &CircuitSpec, x: f64, rule: &ShiftRule) -> Result<f64> {
    circuit.prepare()?.evaluate_rule(x, rule)
}

fn gaussian_matrix(dim: usize, rng: &mut ChaCha8Rng, real: bool) -> Vec<Vec<Complex64>> {
    (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = if real { 0.0 } else { StandardNormal.sample(rng) };
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect()
}

/// Orthonormalizes the columns (stored as rows of `cols`) by modified
/// Gram-Schmidt and returns them as matrix columns.
fn gram_schmidt(mut cols: Vec<Vec<Complex64>>) -> CMatrix {
    let dim = cols.len();
    for j in 0..dim {
        for i in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj = vdot(&done[i], &rest[0]);
            for (v, q) in rest[0].iter_mut().zip(&done[i]) {
                *v -= proj * q;
            }
        }
        let n = norm2(&cols[j]);
        cols[j].iter_mut().for_each(|v| *v /= n);
    }
    CMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

/// Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gram_schmidt(gaussian_matrix(dim, &mut rng, false))
}

/// Real orthogonal matrix from the QR decomposition of a real Gaussian matrix.
pub fn random_orthogonal(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gram_schmidt(gaussian_matrix(dim, &mut rng, true))
}

/// Random Hermitian matrix `(A + A†) / 2` with Gaussian entries.
pub fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_rows(&gaussian_matrix(dim, &mut rng, false)).expect("square by construction");
    let h = a.add(&a.adjoint()).scale_real(0.5);
    HermitianOperator::new(h).expect("Hermitian by construction")
}

/// Random real symmetric matrix.
pub fn random_real_symmetric(dim: usize, seed: u64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_rows(&gaussian_matrix(dim, &mut rng, true)).expect("square by construction");
    let h = a.add(&a.adjoint()).scale_real(0.5);
    HermitianOperator::new(h).expect("symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{self, pauli_string};
    use crate::rules::closed_s1;
    use std::f64::consts::PI;

    fn hadamard() -> CMatrix {
        let h = 1.0 / 2f64.sqrt();
        CMatrix::from_rows(&[
            vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ])
        .unwrap()
    }

    fn cos_circuit() -> Circuit {
        CircuitSpec::new(pauli_string("Z", 1.0).unwrap(), pauli_string("X", 1.0).unwrap())
            .unwrap()
            .with_pre(hadamard())
            .unwrap()
            .prepare()
            .unwrap()
    }

    #[test]
    fn z_eigenstate_is_constant() {
        let z = pauli_string("Z", 1.0).unwrap();
        let c = CircuitSpec::new(z.clone(), z).unwrap().prepare().unwrap();
        for x in [0.0, 0.4, 2.0, -7.0] {
            assert!((c.expectation(x).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(c.exact_derivative(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn hadamard_circuit_is_cosine() {
        let c = cos_circuit();
        for k in 0..20 {
            let x = -3.0 + 0.31 * k as f64;
            assert!((c.expectation(x).unwrap() - x.cos()).abs() < 1e-12);
            assert!((c.exact_derivative(x).unwrap() + x.sin()).abs() < 1e-10);
        }
        assert!(c.fd_derivative(0.0, 1e-5).unwrap().abs() < 1e-10);
        assert!((c.fd_derivative(PI / 2.0, 1e-5).unwrap() + 1.0).abs() < 1e-9);
        assert!(c.fd_derivative(0.0, 0.0).is_err());
    }

    #[test]
    fn psr_on_cosine() {
        let c = cos_circuit();
        let rule = closed_s1(2.0, PI / 2.0).unwrap();
        for x in [0.0, 1.0, -2.5] {
            assert!((c.evaluate_rule(x, &rule).unwrap() + x.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_generator_has_zero_derivative() {
        let g = HermitianOperator::identity(4).scaled(3.0);
        let spec = CircuitSpec::new(g, random_hermitian(4, 1)).unwrap().with_pre(random_unitary(4, 2)).unwrap();
        let c = spec.prepare().unwrap();
        assert!(c.generator_gaps().is_empty());
        assert_eq!(c.exact_derivative(0.7).unwrap(), 0.0);
    }

    #[test]
    fn gap_mismatch_is_reported() {
        let c = cos_circuit();
        let rule = closed_s1(4.0, PI / 4.0).unwrap();
        assert_eq!(c.evaluate_rule(0.3, &rule).unwrap_err(), Error::GapMismatch { missing: vec![2.0] });
        assert!(c.evaluate_rule_unchecked(0.3, &rule).is_ok());
    }

    #[test]
    fn random_unitaries_are_unitary() {
        for d in [2, 3, 8, 17] {
            assert!(random_unitary(d, d as u64).unitarity_defect() < 1e-12);
            let o = random_orthogonal(d, 5);
            assert!(o.unitarity_defect() < 1e-12 && o.is_real(0.0));
        }
        assert_eq!(random_unitary(4, 9), random_unitary(4, 9));
        assert_ne!(random_unitary(4, 9), random_unitary(4, 10));
    }

    #[test]
    fn evolution_preserves_norm() {
        let spec = CircuitSpec::new(random_hermitian(8, 3), random_hermitian(8, 4))
            .unwrap()
            .with_pre(random_unitary(8, 5))
            .unwrap();
        let c = spec.prepare().unwrap();
        for x in [-1000.0, -3.0, 0.0, 12.5, 1000.0] {
            assert!((c.state(x).norm() - 1.0).abs() < 1e-10);
            let p: f64 = c.outcome_probabilities(x).iter().sum();
            assert!((p - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spectator_must_commute() {
        let theta = gates::fsim_theta_generator();
        let phi = gates::fsim_phi_generator();
        let cost = pauli_string("ZI", 1.0).unwrap();
        assert!(CircuitSpec::new(theta.clone(), cost.clone()).unwrap().with_spectator(phi, 0.4).is_ok());
        let bad = pauli_string("ZI", 1.0).unwrap();
        assert!(CircuitSpec::new(theta, cost).unwrap().with_spectator(bad, 0.4).is_err());
    }

    #[test]
    fn builder_validates_inputs() {
        let z = pauli_string("Z", 1.0).unwrap();
        let spec = CircuitSpec::new(z.clone(), z.clone()).unwrap();
        assert!(spec.clone().with_pre(CMatrix::identity(4)).is_err());
        let not_unitary = CMatrix::identity(2).scale_real(2.0);
        assert!(spec.clone().with_post(not_unitary).is_err());
        assert!(spec.clone().with_chain(f64::NAN).is_err());
        assert!(CircuitSpec::new(z, pauli_string("ZZ", 1.0).unwrap()).is_err());
        assert!(StateVector::new(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn chain_factor_scales_oracles() {
        let c = cos_circuit();
        let scaled = c.spec().clone().with_chain(2.0).unwrap().prepare().unwrap();
        let x = 0.9;
        assert!((scaled.exact_derivative(x).unwrap() - 2.0 * c.exact_derivative(x).unwrap()).abs() < 1e-14);
        assert!((scaled.fd_derivative(x, 1e-4).unwrap() - 2.0 * c.fd_derivative(x, 1e-4).unwrap()).abs() < 1e-12);
    }
}
