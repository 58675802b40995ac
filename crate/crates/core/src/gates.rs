//! Catalog of generators: Pauli strings, the product feature map, fSim,
//! cross-resonance and qutrit rotations.
//!
//! Qubit 1 is the leftmost tensor factor (most significant basis index).
//! Every generator follows the convention `U(x) = exp(-i x G / 2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};
use crate::spectral::{self, HermitianOperator, PauliTerm};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn single_pauli(ch: char) -> Result<CMatrix> {
    let rows = match ch {
        'I' => [[ONE, ZERO], [ZERO, ONE]],
        'X' => [[ZERO, ONE], [ONE, ZERO]],
        'Y' => [[ZERO, -I], [I, ZERO]],
        'Z' => [[ONE, ZERO], [ZERO, -ONE]],
        other => return Err(Error::InvalidPauliCharacter(other)),
    };
    CMatrix::from_rows(&rows.map(|r| r.to_vec()))
}

/// Dense Kronecker product of a Pauli string, without a coefficient.
pub fn pauli_string_matrix(spec: &str) -> Result<CMatrix> {
    let mut chars = spec.chars();
    let first = chars.next().ok_or_else(|| Error::InvalidArgument("empty Pauli string".into()))?;
    let mut m = single_pauli(first)?;
    for ch in chars {
        m = m.kron(&single_pauli(ch)?);
    }
    Ok(m)
}

pub fn pauli_string(spec: &str, coeff: f64) -> Result<HermitianOperator> {
    HermitianOperator::from_pauli_terms(vec![PauliTerm { coeff, string: spec.to_string() }])
}

/// Parses `"XX+YY"`, `"0.5*ZI-ZZ"` style Pauli sums.
pub fn parse_pauli_sum(expr: &str) -> Result<HermitianOperator> {
    let mut terms = Vec::new();
    let mut rest = expr.trim();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'+' => (1.0, &rest[1..]),
            b'-' => (-1.0, &rest[1..]),
            _ => (1.0, rest),
        };
        let end = body
            .char_indices()
            .find(|&(i, ch)| (ch == '+' || ch == '-') && i > 0 && !body[..i].ends_with(['e', 'E']))
            .map(|(i, _)| i);
        let (term, tail) = match end {
            Some(i) => (&body[..i], &body[i..]),
            None => (body, ""),
        };
        let (coeff, string) = match term.split_once('*') {
            Some((c, s)) => {
                (c.trim().parse::<f64>().map_err(|e| Error::Parse(format!("Pauli coefficient {c:?}: {e}")))?, s.trim())
            }
            None => (1.0, term.trim()),
        };
        terms.push(PauliTerm { coeff: sign * coeff, string: string.to_string() });
        rest = tail.trim();
    }
    HermitianOperator::from_pauli_terms(terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Parse(format!("unknown axis {other:?}"))),
        }
    }
}

/// A differentiable parameter of a gate with its generator and golden gaps.
#[derive(Debug, Clone)]
pub struct GateParameter {
    pub name: String,
    pub value: f64,
    pub generator: HermitianOperator,
    /// `None` when no closed-form gap set is known (generic couplings).
    pub expected_gaps: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct GateDescriptor {
    pub name: String,
    pub dim: usize,
    pub parameters: Vec<GateParameter>,
}

impl GateDescriptor {
    fn single(name: &str, generator: HermitianOperator, expected_gaps: Option<Vec<f64>>) -> Self {
        Self {
            name: name.to_string(),
            dim: generator.dim(),
            parameters: vec![GateParameter { name: "x".into(), value: 0.0, generator, expected_gaps }],
        }
    }

    pub fn parameter(&self, name: &str) -> Option<&GateParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// `exp(-i Σ_k value_k G_k / 2)`, exponentiated as one combined generator.
    pub fn unitary(&self) -> Result<CMatrix> {
        let mut total = HermitianOperator::new(CMatrix::zeros(self.dim, self.dim))?;
        for p in &self.parameters {
            total = total.plus(&p.generator.scaled(p.value))?;
        }
        let spectrum = spectral::diagonalize(&total)?;
        Ok(spectrum.map_eigenvalues(|l| Complex64::from_polar(1.0, -l / 2.0)))
    }

    /// Compares numerically computed gaps against the golden values for every
    /// parameter that has them.
    pub fn self_check(&self, tol: f64) -> Result<()> {
        for p in &self.parameters {
            let Some(expected) = &p.expected_gaps else { continue };
            let got = spectral::gaps_of(&p.generator)?;
            let ok =
                got.gaps.len() == expected.len() && got.gaps.iter().zip(expected).all(|(a, b)| (a - b).abs() <= tol);
            if !ok {
                return Err(Error::Internal(format!(
                    "{}:{} gaps {:?} differ from expected {:?}",
                    self.name, p.name, got.gaps, expected
                )));
            }
        }
        Ok(())
    }
}

/// Generator `Σ_j P_{α,j}` of a product of identical single-qubit rotations.
pub fn product_feature_map(qubits: usize, axis: Axis) -> Result<GateDescriptor> {
    if !(1..=10).contains(&qubits) {
        return Err(Error::InvalidArgument(format!("feature map needs 1..=10 qubits, got {qubits}")));
    }
    let terms = (0..qubits)
        .map(|j| {
            let s: String = (0..qubits).map(|k| if k == j { axis.letter() } else { 'I' }).collect();
            PauliTerm { coeff: 1.0, string: s }
        })
        .collect();
    let g = HermitianOperator::from_pauli_terms(terms)?;
    let gaps = (1..=qubits).map(|k| 2.0 * k as f64).collect();
    Ok(GateDescriptor::single(&format!("feature_map:{}:{qubits}", axis.letter().to_ascii_lowercase()), g, Some(gaps)))
}

/// `X1X2 + Y1Y2`.
pub fn fsim_theta_generator() -> HermitianOperator {
    parse_pauli_sum("XX+YY").expect("static Pauli sum")
}

/// `(I - Z1 - Z2 + Z1Z2) / 2`, the projector onto |11⟩ scaled by 2.
pub fn fsim_phi_generator() -> HermitianOperator {
    parse_pauli_sum("0.5*II-0.5*ZI-0.5*IZ+0.5*ZZ").expect("static Pauli sum")
}

pub fn fsim(theta: f64, phi: f64) -> GateDescriptor {
    GateDescriptor {
        name: "fsim".into(),
        dim: 4,
        parameters: vec![
            GateParameter {
                name: "theta".into(),
                value: theta,
                generator: fsim_theta_generator(),
                expected_gaps: Some(vec![2.0, 4.0]),
            },
            GateParameter {
                name: "phi".into(),
                value: phi,
                generator: fsim_phi_generator(),
                expected_gaps: Some(vec![2.0]),
            },
        ],
    }
}

/// `γ1 Z1 + γ2 Z1X2 + γ3 X2 + γ4 Z2 + γ5 Z1Z2`.
pub fn cross_resonance(gammas: &[f64]) -> Result<GateDescriptor> {
    if gammas.len() != 5 {
        return Err(Error::InvalidArgument(format!("cross-resonance needs 5 couplings, got {}", gammas.len())));
    }
    let strings = ["ZI", "ZX", "IX", "IZ", "ZZ"];
    let terms: Vec<PauliTerm> = strings
        .iter()
        .zip(gammas)
        .filter(|(_, g)| **g != 0.0)
        .map(|(s, g)| PauliTerm { coeff: *g, string: (*s).to_string() })
        .collect();
    let g = if terms.is_empty() {
        HermitianOperator::new(CMatrix::zeros(4, 4))?
    } else {
        HermitianOperator::from_pauli_terms(terms)?
    };
    let list = gammas.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",");
    Ok(GateDescriptor::single(&format!("cr:{list}"), g, None))
}

/// The two printed SU(3) generators, both with spectrum {1, 0, -1}.
pub fn qutrit_generators() -> Vec<GateDescriptor> {
    let g1 = CMatrix::from_rows(&[vec![ZERO, ONE, ZERO], vec![ONE, ZERO, ZERO], vec![ZERO, ZERO, ZERO]])
        .expect("static matrix");
    let g2 = CMatrix::diagonal(&[ONE, -ONE, ZERO]);
    vec![
        GateDescriptor::single("qutrit:1", HermitianOperator::new(g1).expect("hermitian"), Some(vec![1.0, 2.0])),
        GateDescriptor::single("qutrit:2", HermitianOperator::new(g2).expect("hermitian"), Some(vec![1.0, 2.0])),
    ]
}

/// Resolves a catalog name to a single generator.
///
/// Names: `pauli:<sum>`, `feature_map:<axis>:<N>`, `fsim:theta`, `fsim:phi`,
/// `cr:<g1,g2,g3,g4,g5>`, `qutrit:1`, `qutrit:2`.
pub fn lookup(name: &str) -> Result<HermitianOperator> {
    let (kind, arg) = name.split_once(':').unwrap_or((name, ""));
    match kind {
        "pauli" => parse_pauli_sum(arg),
        "feature_map" => {
            let (axis, n) = arg
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected feature_map:<axis>:<N>, got {name:?}")))?;
            let n: usize = n.parse().map_err(|e| Error::Parse(format!("qubit count {n:?}: {e}")))?;
            Ok(product_feature_map(n, axis.parse()?)?.parameters.remove(0).generator)
        }
        "fsim" => match arg {
            "theta" => Ok(fsim_theta_generator()),
            "phi" => Ok(fsim_phi_generator()),
            other => Err(Error::Parse(format!("fsim parameter must be theta or phi, got {other:?}"))),
        },
        "cr" => {
            let gammas = arg
                .split(',')
                .map(|g| g.trim().parse::<f64>().map_err(|e| Error::Parse(format!("coupling {g:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            Ok(cross_resonance(&gammas)?.parameters.remove(0).generator)
        }
        "qutrit" => {
            let idx: usize = arg.parse().map_err(|_| Error::Parse(format!("qutrit index {arg:?}")))?;
            qutrit_generators()
                .into_iter()
                .nth(idx.wrapping_sub(1))
                .map(|mut d| d.parameters.remove(0).generator)
                .ok_or_else(|| Error::Parse(format!("qutrit generator {idx} not in catalog (1 or 2)")))
        }
        _ => Err(Error::Parse(format!("unknown catalog entry {name:?}"))),
    }
}
