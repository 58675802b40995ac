//! Hermitian eigendecomposition and spectral-gap extraction.
//!
//! Every differentiation rule in this crate is driven by the set of unique
//! positive eigenvalue differences of the generator. [`diagonalize`] runs a
//! cyclic complex Jacobi eigensolver; [`unique_gaps`] filters and merges the
//! pairwise differences of the resulting spectrum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates;
use crate::linalg::CMatrix;

/// Relative Hermiticity tolerance applied on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Jacobi sweep cap.
pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius target, relative to `‖G‖_F`.
pub const OFF_DIAGONAL_TARGET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub string: String,
}

/// A dense Hermitian operator, optionally remembering the Pauli sum it was
/// built from.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    pauli_terms: Option<Vec<PauliTerm>>,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "operator must be non-empty and square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL * matrix.max_abs() {
            return Err(Error::NonHermitianInput { defect });
        }
        Ok(Self { matrix, pauli_terms: None })
    }

    /// Densifies a Pauli sum. All strings must act on the same qubit count.
    pub fn from_pauli_terms(terms: Vec<PauliTerm>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidArgument("empty Pauli sum".into()))?;
        let n = first.string.chars().count();
        let mut acc: Option<CMatrix> = None;
        for t in &terms {
            if t.string.chars().count() != n {
                return Err(Error::DimensionMismatch(format!(
                    "Pauli string {:?} has length {}, expected {n}",
                    t.string,
                    t.string.chars().count()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient on {:?}", t.string)));
            }
            let m = gates::pauli_string_matrix(&t.string)?.scale_real(t.coeff);
            acc = Some(match acc {
                None => m,
                Some(a) => a.add(&m),
            });
        }
        let mut op = Self::new(acc.expect("non-empty"))?;
        op.pauli_terms = Some(terms);
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim), pauli_terms: None }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn pauli_terms(&self) -> Option<&[PauliTerm]> {
        self.pauli_terms.as_deref()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(factor),
            pauli_terms: self
                .pauli_terms
                .as_ref()
                .map(|ts| ts.iter().map(|t| PauliTerm { coeff: t.coeff * factor, string: t.string.clone() }).collect()),
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self { matrix: self.matrix.add(&CMatrix::identity(self.dim()).scale_real(c)), pauli_terms: None }
    }

    /// Sum of two operators of equal dimension.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.dim(), other.dim())));
        }
        let terms = match (&self.pauli_terms, &other.pauli_terms) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Ok(Self { matrix: self.matrix.add(&other.matrix), pauli_terms: terms })
    }
}

/// Eigenvalues sorted non-increasing, eigenvectors as matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(λ) U†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d: Vec<Complex64> = self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)).collect();
        self.eigenvectors.matmul(&CMatrix::diagonal(&d)).matmul(&self.eigenvectors.adjoint())
    }

    /// `U f(diag(λ)) U†` for a scalar function applied on the eigenvalues.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let u = &self.eigenvectors;
        let d: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let ud = CMatrix::from_fn(u.rows(), u.cols(), |i, j| u[(i, j)] * d[j]);
        ud.matmul(&u.adjoint())
    }

    pub fn spread(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(hi), Some(lo)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Default gap tolerance `1e-9 * max(1, spread)`.
    pub fn default_gap_tolerance(&self) -> f64 {
        1e-9 * self.spread().max(1.0)
    }
}

/// Unique positive spectral gaps, ascending, with pair multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSet {
    pub gaps: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub source_dim: usize,
}

impl GapSet {
    /// Builds a gap set directly from known gap values (multiplicity 1 each).
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyGapSet);
        }
        if values.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(Error::InvalidArgument(format!("gaps must be positive and finite: {values:?}")));
        }
        let mut gaps = values.to_vec();
        gaps.sort_by(f64::total_cmp);
        if gaps.windows(2).any(|w| w[1] - w[0] <= 1e-12 * w[1].max(1.0)) {
            return Err(Error::InvalidArgument(format!("gaps must be pairwise distinct: {values:?}")));
        }
        Ok(Self { multiplicities: vec![1; gaps.len()], gaps, source_dim: 0 })
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.last().copied().unwrap_or(0.0)
    }

    /// `d(d-1)/2`, the largest possible gap count for the source dimension.
    pub fn max_count(&self) -> usize {
        self.source_dim * self.source_dim.saturating_sub(1) / 2
    }
}

/// Cyclic complex Jacobi eigendecomposition.
pub fn diagonalize(op: &HermitianOperator) -> Result<Spectrum> {
    let m = op.matrix();
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL * m.max_abs() {
        return Err(Error::NonHermitianInput { defect });
    }
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize exactly so that rotations stay consistent
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let target = OFF_DIAGONAL_TARGET * a.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep the solver's column order
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with the unitary `J = [[c, s e^{iφ}], [-s e^{-iφ}, c]]`
/// acting on rows/columns `p, q`; accumulates `v ← v J`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let z = a[(p, q)];
    let r = z.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // skip elements already negligible against both diagonal entries
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = z / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let jpp = Complex64::new(c, 0.0);
    let jpq = phase * s;
    let jqp = -phase.conj() * s;
    let jqq = Complex64::new(c, 0.0);

    let n = a.rows();
    // A ← A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    // A ← J† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, p)] = Complex64::new(app - t * r, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * r, 0.0);
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Unique positive gaps of a spectrum. Eigenvalues within `gap_tolerance`
/// of each other count as one level; differences between levels within
/// `gap_tolerance` of each other (single linkage) are merged to their mean.
/// Multiplicities count the level pairs realizing each gap.
pub fn unique_gaps(spectrum: &Spectrum, gap_tolerance: f64) -> Result<GapSet> {
    if gap_tolerance.is_nan() || gap_tolerance <= 0.0 {
        return Err(Error::InvalidArgument(format!("gap tolerance must be positive, got {gap_tolerance}")));
    }
    let lam = &spectrum.eigenvalues;
    let levels = distinct_levels(lam, gap_tolerance);
    let mut diffs: Vec<f64> = Vec::with_capacity(levels.len() * levels.len().saturating_sub(1) / 2);
    for j in 0..levels.len() {
        for jp in j + 1..levels.len() {
            diffs.push((levels[j] - levels[jp]).abs());
        }
    }
    if diffs.is_empty() {
        return Err(Error::EmptyGapSet);
    }
    diffs.sort_by(f64::total_cmp);

    let mut gaps = Vec::new();
    let mut multiplicities = Vec::new();
    let mut cluster: Vec<f64> = vec![diffs[0]];
    for &d in &diffs[1..] {
        if d - cluster.last().copied().unwrap_or(d) <= gap_tolerance {
            cluster.push(d);
        } else {
            gaps.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            multiplicities.push(cluster.len());
            cluster = vec![d];
        }
    }
    gaps.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    multiplicities.push(cluster.len());

    Ok(GapSet { gaps, multiplicities, source_dim: lam.len() })
}

fn distinct_levels(eigenvalues: &[f64], tol: f64) -> Vec<f64> {
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut levels = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    for v in sorted {
        if cluster.last().is_some_and(|&last| v - last > tol) {
            levels.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            cluster.clear();
        }
        cluster.push(v);
    }
    if !cluster.is_empty() {
        levels.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    }
    levels
}

/// Diagonalizes and extracts gaps with the default relative tolerance.
pub fn gaps_of(op: &HermitianOperator) -> Result<GapSet> {
    let spectrum = diagonalize(op)?;
    let tol = spectrum.default_gap_tolerance();
    unique_gaps(&spectrum, tol)
}

/// Spectrum and gap summary of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub gaps: Vec<f64>,
    pub multiplicities: Vec<usize>,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "S_max")]
    pub s_max: usize,
}

/// Like [`gaps_of`], but a fully degenerate spectrum yields empty gaps
/// instead of an error.
pub fn analyze(op: &HermitianOperator) -> Result<Analysis> {
    let spectrum = diagonalize(op)?;
    let (gaps, multiplicities) = match unique_gaps(&spectrum, spectrum.default_gap_tolerance()) {
        Ok(g) => (g.gaps, g.multiplicities),
        Err(Error::EmptyGapSet) => (Vec::new(), Vec::new()),
        Err(e) => return Err(e),
    };
    let dim = op.dim();
    Ok(Analysis {
        dim,
        s: gaps.len(),
        s_max: dim * (dim - 1) / 2,
        eigenvalues: spectrum.eigenvalues,
        gaps,
        multiplicities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    fn spectrum_of(values: &[f64]) -> Spectrum {
        let d: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        diagonalize(&HermitianOperator::new(CMatrix::diagonal(&d)).unwrap()).unwrap()
    }

    #[test]
    fn pauli_z_is_already_diagonal() {
        let z = HermitianOperator::new(CMatrix::diagonal(&[ONE, -ONE])).unwrap();
        let s = diagonalize(&z).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, -1.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap();
        assert!(matches!(HermitianOperator::new(m), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn gaps_of_two_level_spectrum() {
        let g = unique_gaps(&spectrum_of(&[1.0, -1.0]), 1e-9).unwrap();
        assert_eq!(g.gaps, vec![2.0]);
        assert_eq!(g.multiplicities, vec![1]);
    }

    #[test]
    fn gaps_of_fsim_theta_spectrum() {
        let g = unique_gaps(&spectrum_of(&[2.0, 0.0, 0.0, -2.0]), 1e-9).unwrap();
        assert_eq!(g.gaps, vec![2.0, 4.0]);
        assert_eq!(g.multiplicities, vec![2, 1]);
        assert_eq!(g.max_count(), 6);
    }

    #[test]
    fn gaps_of_cross_resonance_spectrum() {
        // Z1 - 0.5 Z1X2 + X2 has eigenvalues {3/2, 1/2, 1/2, -5/2}
        let g = unique_gaps(&spectrum_of(&[1.5, 0.5, 0.5, -2.5]), 1e-9).unwrap();
        assert_eq!(g.gaps, vec![1.0, 3.0, 4.0]);
        // the ladder [-3/2, -1/2, 1/2, 5/2] also contains the difference 2
        let g = unique_gaps(&spectrum_of(&[-1.5, -0.5, 0.5, 2.5]), 1e-9).unwrap();
        assert_eq!(g.gaps, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn degenerate_spectrum_has_no_gaps() {
        assert_eq!(unique_gaps(&spectrum_of(&[0.7; 5]), 1e-9), Err(Error::EmptyGapSet));
    }

    #[test]
    fn near_duplicate_gaps_merge_to_mean() {
        let g = unique_gaps(&spectrum_of(&[1.0 + 1e-11, 0.0, -1.0]), 1e-9).unwrap();
        assert_eq!(g.gaps.len(), 2);
        assert!((g.gaps[0] - (1.0 + 0.5e-11)).abs() < 1e-15);
        assert_eq!(g.multiplicities, vec![2, 1]);
    }

    #[test]
    fn near_degenerate_eigenvalues_form_one_level() {
        let g = unique_gaps(&spectrum_of(&[1.0, 1e-11, -1e-11, -1.0]), 1e-9).unwrap();
        assert_eq!(g.multiplicities, vec![2, 1]);
        assert!((g.gaps[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(unique_gaps(&spectrum_of(&[1.0, -1.0]), 0.0).is_err());
    }

    #[test]
    fn complex_two_by_two() {
        // [[1, i],[-i, 1]] has eigenvalues 2 and 0
        let m =
            CMatrix::from_rows(&[vec![ONE, Complex64::new(0.0, 1.0)], vec![Complex64::new(0.0, -1.0), ONE]]).unwrap();
        let s = diagonalize(&HermitianOperator::new(m.clone()).unwrap()).unwrap();
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!(s.eigenvalues[1].abs() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-14);
        assert!(s.eigenvectors.unitarity_defect() < 1e-14);
    }
}
