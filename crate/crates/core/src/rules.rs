//! Shift rules: tables of `(shift, weight)` pairs with
//! `df/dx = chain_factor * Σ_i w_i f(x + δ_i)`.
//!
//! The function of a parameter with generator gaps `{Δ_s}` is a trigonometric
//! polynomial
//!
//! ```text
//! f(x + δ) = c0 + Σ_s 2 [cos((x+δ)Δ_s/2) Re O_s - sin((x+δ)Δ_s/2) Im O_s]
//! ```
//!
//! so any `2S + 1` distinct samples determine the derivative. Symmetric
//! `±δ` pairs only see the odd part, which leaves an `S × S` sine system that
//! does not depend on `x`. Distinct-shift (triangulation) and real-structure
//! rules are solved at an evaluation point and record it.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::spectral::GapSet;

/// Condition number above which a solved system is rejected.
pub const REJECT_CONDITION: f64 = 1e8;
/// Condition number above which a solved system is reported as a warning.
pub const WARN_CONDITION: f64 = 1e6;
/// Closed-form denominators at or below this magnitude are singular.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// Upper bound on the entries of every shift system (`4 sin · sin`).
const SYSTEM_SCALE: f64 = 4.0;

const DEFAULT_SHIFT_ATTEMPTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleMethod {
    #[serde(rename = "symmetric-general")]
    SymmetricGeneral,
    #[serde(rename = "closed-S1")]
    ClosedS1,
    #[serde(rename = "triangulation-S1")]
    TriangulationS1,
    #[serde(rename = "closed-S2")]
    ClosedS2,
    #[serde(rename = "closed-S3")]
    ClosedS3,
    #[serde(rename = "triangulation-general")]
    TriangulationGeneral,
    #[serde(rename = "real-symmetric")]
    RealSymmetric,
}

impl RuleMethod {
    pub const ALL: [RuleMethod; 7] = [
        RuleMethod::SymmetricGeneral,
        RuleMethod::ClosedS1,
        RuleMethod::TriangulationS1,
        RuleMethod::ClosedS2,
        RuleMethod::ClosedS3,
        RuleMethod::TriangulationGeneral,
        RuleMethod::RealSymmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleMethod::SymmetricGeneral => "symmetric-general",
            RuleMethod::ClosedS1 => "closed-S1",
            RuleMethod::TriangulationS1 => "triangulation-S1",
            RuleMethod::ClosedS2 => "closed-S2",
            RuleMethod::ClosedS3 => "closed-S3",
            RuleMethod::TriangulationGeneral => "triangulation-general",
            RuleMethod::RealSymmetric => "real-symmetric",
        }
    }

    /// Whether weights are solved at a specific evaluation point.
    pub fn is_point_dependent(self) -> bool {
        matches!(self, RuleMethod::TriangulationGeneral | RuleMethod::RealSymmetric)
    }

    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            RuleMethod::SymmetricGeneral | RuleMethod::ClosedS1 | RuleMethod::ClosedS2 | RuleMethod::ClosedS3
        )
    }
}

impl fmt::Display for RuleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RuleMethod {
    type Err = Error;

    /// Case-insensitive; accepts `symmetric` and `triangulation` as short forms.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let m = match lower.as_str() {
            "symmetric" | "symmetric-general" => RuleMethod::SymmetricGeneral,
            "closed-s1" | "psr" => RuleMethod::ClosedS1,
            "triangulation-s1" => RuleMethod::TriangulationS1,
            "closed-s2" => RuleMethod::ClosedS2,
            "closed-s3" => RuleMethod::ClosedS3,
            "triangulation" | "triangulation-general" => RuleMethod::TriangulationGeneral,
            "real-symmetric" => RuleMethod::RealSymmetric,
            _ => return Err(Error::Parse(format!("unknown rule method {s:?}"))),
        };
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftTerm {
    pub shift: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRule {
    pub method: RuleMethod,
    pub gaps: Vec<f64>,
    pub terms: Vec<ShiftTerm>,
    pub condition_number: f64,
    #[serde(default = "one")]
    pub chain_factor: f64,
    /// Point the weights were solved at, for point-dependent methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation_point: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl ShiftRule {
    fn closed(method: RuleMethod, gaps: Vec<f64>, terms: Vec<ShiftTerm>, condition_number: f64) -> Self {
        Self { method, gaps, terms, condition_number, chain_factor: 1.0, evaluation_point: None }
    }

    pub fn shifts(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.shift).collect()
    }

    /// Weights including the chain factor.
    pub fn effective_weights(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.weight * self.chain_factor).collect()
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition_number > WARN_CONDITION
    }

    /// Returns a rule valid at `x`: point-independent rules are returned as
    /// is, point-dependent ones are re-solved unless already built at `x`.
    pub fn at_point(&self, x: f64) -> Result<ShiftRule> {
        if !self.method.is_point_dependent() || self.evaluation_point == Some(x) {
            return Ok(self.clone());
        }
        let gaps = GapSet::from_values(&self.gaps)?;
        let mut rebuilt = match self.method {
            RuleMethod::TriangulationGeneral => triangulation_general(&gaps, &self.shifts(), x)?,
            RuleMethod::RealSymmetric => real_symmetric_rule(&gaps, &self.shifts(), x)?,
            _ => unreachable!("point-independent methods returned above"),
        };
        rebuilt.chain_factor = self.chain_factor;
        Ok(rebuilt)
    }

    /// `chain_factor * Σ w_i f(x + δ_i)` for an arbitrary function.
    pub fn apply(&self, x: f64, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let rule = self.at_point(x)?;
        let sum: f64 = rule.terms.iter().map(|t| t.weight * f(x + t.shift)).sum();
        Ok(rule.chain_factor * sum)
    }

    /// Gaps of `generator_gaps` that no rule gap matches within `tol`.
    pub fn uncovered_gaps(&self, generator_gaps: &[f64], tol: f64) -> Vec<f64> {
        generator_gaps
            .iter()
            .copied()
            .filter(|g| !self.gaps.iter().any(|r| (r - g).abs() <= tol * g.abs().max(1.0)))
            .collect()
    }
}

/// The symmetric sine system `M[l][s] = 4 sin(δ_l Δ_s / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSystem {
    pub matrix: Vec<Vec<f64>>,
    pub shifts: Vec<f64>,
    pub gaps: Vec<f64>,
}

impl SineSystem {
    pub fn new(gaps: &[f64], shifts: &[f64]) -> Result<Self> {
        if gaps.len() != shifts.len() {
            return Err(Error::InvalidArgument(format!(
                "{} shifts given for {} gaps; the symmetric system is square",
                shifts.len(),
                gaps.len()
            )));
        }
        let matrix = shifts.iter().map(|d| gaps.iter().map(|g| SYSTEM_SCALE * (d * g / 2.0).sin()).collect()).collect();
        Ok(Self { matrix, shifts: shifts.to_vec(), gaps: gaps.to_vec() })
    }

    pub fn factor(&self) -> Result<Lu> {
        Lu::factor(&self.matrix, SYSTEM_SCALE).map_err(|e| self.describe_singular(e))
    }

    pub fn condition_number(&self) -> f64 {
        self.factor().map_or(f64::INFINITY, |lu| lu.condition_number())
    }

    pub fn determinant(&self) -> f64 {
        self.factor().map_or(0.0, |lu| lu.determinant())
    }

    fn describe_singular(&self, cause: Error) -> Error {
        let mut pattern = Vec::new();
        for (l, d) in self.shifts.iter().enumerate() {
            for (s, g) in self.gaps.iter().enumerate() {
                if (d * g / 2.0).sin().abs() <= DENOMINATOR_FLOOR {
                    pattern.push(format!("sin(δ{}·Δ{}/2)=0 (δ={d}, Δ={g})", l + 1, s + 1));
                }
            }
        }
        let detail = match cause {
            Error::SingularSystem(msg) => msg,
            other => other.to_string(),
        };
        Error::SingularSystem(format!(
            "shifts {:?} against gaps {:?}: {detail}{}{}",
            self.shifts,
            self.gaps,
            if pattern.is_empty() { "" } else { "; " },
            pattern.join(", ")
        ))
    }
}

/// Default symmetric shifts `δ_l = (2l-1)π / (2 Δ_max)`, halved until every
/// phase `δ_l Δ_s / 2` is below π, then the largest shift is stretched by 5%
/// until the sine system's condition number drops below [`WARN_CONDITION`].
pub fn default_shifts(gaps: &GapSet) -> Result<Vec<f64>> {
    let count = gaps.len();
    if count == 0 {
        return Err(Error::EmptyGapSet);
    }
    let dmax = gaps.max_gap();
    let mut shifts: Vec<f64> = (1..=count).map(|l| (2 * l - 1) as f64 * PI / (2.0 * dmax)).collect();
    while shifts.iter().any(|d| d * dmax / 2.0 >= PI) {
        shifts.iter_mut().for_each(|d| *d /= 2.0);
    }
    for _ in 0..DEFAULT_SHIFT_ATTEMPTS {
        let system = SineSystem::new(&gaps.gaps, &shifts)?;
        if system.condition_number() < WARN_CONDITION {
            return Ok(shifts);
        }
        if let Some(last) = shifts.last_mut() {
            *last *= 1.05;
        }
    }
    Err(Error::ShiftSelectionFailure { attempts: DEFAULT_SHIFT_ATTEMPTS })
}

/// General symmetric rule from the inverted sine system:
/// `w_l = Σ_s Δ_s (M⁻¹)_{s l}` on `f(x+δ_l)` and `-w_l` on `f(x-δ_l)`.
pub fn symmetric_rule(gaps: &GapSet, shifts: &[f64]) -> Result<ShiftRule> {
    let system = SineSystem::new(&gaps.gaps, shifts)?;
    let lu = system.factor()?;
    let condition_number = lu.condition_number();
    if condition_number.is_nan() || condition_number > REJECT_CONDITION {
        return Err(system.describe_singular(Error::SingularSystem(format!(
            "condition number {condition_number:.3e} exceeds {REJECT_CONDITION:.0e}"
        ))));
    }
    let weights = lu.solve_transpose(&gaps.gaps);
    let terms = shifts
        .iter()
        .zip(&weights)
        .flat_map(|(&d, &w)| [ShiftTerm { shift: d, weight: w }, ShiftTerm { shift: -d, weight: -w }])
        .collect();
    Ok(ShiftRule {
        method: RuleMethod::SymmetricGeneral,
        gaps: gaps.gaps.clone(),
        terms,
        condition_number,
        chain_factor: 1.0,
        evaluation_point: None,
    })
}

fn half_sin(shift: f64, gap: f64) -> f64 {
    (shift * gap / 2.0).sin()
}

fn antisymmetric_terms(pairs: &[(f64, f64)]) -> Vec<ShiftTerm> {
    pairs.iter().flat_map(|&(d, w)| [ShiftTerm { shift: d, weight: w }, ShiftTerm { shift: -d, weight: -w }]).collect()
}

/// Single-gap symmetric rule, weights `±Δ / (4 sin(δΔ/2))`.
pub fn closed_s1(gap: f64, shift: f64) -> Result<ShiftRule> {
    let s = half_sin(shift, gap);
    if s.abs() <= DENOMINATOR_FLOOR {
        return Err(Error::SingularShift { shift, gap });
    }
    let w = gap / (4.0 * s);
    let cond = sine_condition(&[gap], &[shift]).ok_or(Error::SingularShift { shift, gap })?;
    Ok(ShiftRule::closed(RuleMethod::ClosedS1, vec![gap], antisymmetric_terms(&[(shift, w)]), cond))
}

/// Single-gap rule on three distinct shifts.
pub fn triangulation_s1(gap: f64, shifts: [f64; 3]) -> Result<ShiftRule> {
    let [d1, d2, d3] = shifts;
    let quarter = |a: f64, b: f64| ((a - b) * gap / 4.0).sin();
    for (a, b) in [(d1, d2), (d2, d3), (d1, d3)] {
        if quarter(a, b).abs() <= DENOMINATOR_FLOOR {
            return Err(Error::DegenerateStencil(a, b));
        }
    }
    let product = quarter(d2, d1) * quarter(d2, d3) * quarter(d3, d1);
    let c = |d: f64| (d * gap / 2.0).cos();
    let scale = gap / (8.0 * product);
    let weights = [scale * (c(d2) - c(d3)), scale * (c(d3) - c(d1)), scale * (c(d1) - c(d2))];
    let terms = shifts.iter().zip(weights).map(|(&shift, weight)| ShiftTerm { shift, weight }).collect();
    let cond = Lu::factor(&difference_rows(&[gap], &shifts, 0.0), SYSTEM_SCALE)
        .map(|lu| lu.condition_number())
        .ok()
        .filter(|c| c.is_finite())
        .ok_or(Error::DegenerateStencil(d1, d2))?;
    Ok(ShiftRule::closed(RuleMethod::TriangulationS1, vec![gap], terms, cond))
}

/// Two-gap symmetric rule with closed-form coefficients `α₁, α₂`.
pub fn closed_s2(gaps: [f64; 2], shifts: [f64; 2]) -> Result<ShiftRule> {
    let [g1, g2] = gaps;
    let [d1, d2] = shifts;
    let denom = half_sin(d1, g1) * half_sin(d2, g2) - half_sin(d1, g2) * half_sin(d2, g1);
    if denom.abs() <= DENOMINATOR_FLOOR {
        return Err(Error::SingularShiftPair(d1, d2));
    }
    let alpha1 = (g1 * half_sin(d2, g2) - g2 * half_sin(d2, g1)) / (4.0 * denom);
    let alpha2 = (g2 * half_sin(d1, g1) - g1 * half_sin(d1, g2)) / (4.0 * denom);
    let cond = sine_condition(&gaps, &shifts).ok_or(Error::SingularShiftPair(d1, d2))?;
    Ok(ShiftRule::closed(RuleMethod::ClosedS2, vec![g1, g2], antisymmetric_terms(&[(d1, alpha1), (d2, alpha2)]), cond))
}

/// Three-gap symmetric rule, weights `ν_l / (4 𝒱)`.
pub fn closed_s3(gaps: [f64; 3], shifts: [f64; 3]) -> Result<ShiftRule> {
    let [g1, g2, g3] = gaps;
    let [d1, d2, d3] = shifts;
    let s = |d: f64, g: f64| half_sin(d, g);

    let nu1 = g3 * (s(d2, g2) * s(d3, g1) - s(d2, g1) * s(d3, g2))
        + g2 * (s(d2, g1) * s(d3, g3) - s(d2, g3) * s(d3, g1))
        + g1 * (s(d2, g3) * s(d3, g2) - s(d2, g2) * s(d3, g3));
    let nu2 = g3 * (s(d1, g1) * s(d3, g2) - s(d1, g2) * s(d3, g1))
        + g2 * (s(d1, g3) * s(d3, g1) - s(d1, g1) * s(d3, g3))
        + g1 * (s(d1, g2) * s(d3, g3) - s(d1, g3) * s(d3, g2));
    let nu3 = g3 * (s(d1, g2) * s(d2, g1) - s(d1, g1) * s(d2, g2))
        + g2 * (s(d1, g1) * s(d2, g3) - s(d1, g3) * s(d2, g1))
        + g1 * (s(d1, g3) * s(d2, g2) - s(d1, g2) * s(d2, g3));
    let v = s(d1, g3) * s(d2, g2) * s(d3, g1) - s(d1, g3) * s(d2, g1) * s(d3, g2) + s(d1, g2) * s(d2, g1) * s(d3, g3)
        - s(d1, g2) * s(d2, g3) * s(d3, g1)
        + s(d1, g1) * s(d2, g3) * s(d3, g2)
        - s(d1, g1) * s(d2, g2) * s(d3, g3);
    if v.abs() <= DENOMINATOR_FLOOR {
        return Err(Error::SingularStencil(shifts.to_vec()));
    }
    let w = |nu: f64| nu / (4.0 * v);
    let cond = sine_condition(&gaps, &shifts).ok_or_else(|| Error::SingularStencil(shifts.to_vec()))?;
    Ok(ShiftRule::closed(
        RuleMethod::ClosedS3,
        vec![g1, g2, g3],
        antisymmetric_terms(&[(d1, w(nu1)), (d2, w(nu2)), (d3, w(nu3))]),
        cond,
    ))
}

/// Condition number of the symmetric sine system, `None` if it is singular.
fn sine_condition(gaps: &[f64], shifts: &[f64]) -> Option<f64> {
    SineSystem::new(gaps, shifts).ok().map(|s| s.condition_number()).filter(|c| c.is_finite())
}

/// Rows `f(x+δ_ℓ) - f(x+δ_ref)` of the triangulation system in the unknowns
/// `Re O_s`, then `Im O_s`.
fn difference_rows(gaps: &[f64], shifts: &[f64], x: f64) -> Vec<Vec<f64>> {
    let r = reference_index(shifts);
    let dr = shifts[r];
    shifts
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != r)
        .map(|(_, &dl)| {
            let amp: Vec<f64> = gaps.iter().map(|g| 4.0 * ((dr - dl) * g / 4.0).sin()).collect();
            let phase: Vec<f64> = gaps.iter().map(|g| (2.0 * x + dr + dl) * g / 4.0).collect();
            let mut row = Vec::with_capacity(2 * gaps.len());
            row.extend(amp.iter().zip(&phase).map(|(a, p)| a * p.sin()));
            row.extend(amp.iter().zip(&phase).map(|(a, p)| a * p.cos()));
            row
        })
        .collect()
}

fn reference_index(shifts: &[f64]) -> usize {
    shifts.iter().position(|d| *d == 0.0).unwrap_or(0)
}

fn check_distinct(shifts: &[f64]) -> Result<()> {
    for (i, a) in shifts.iter().enumerate() {
        for b in &shifts[i + 1..] {
            if (a - b).abs() <= DENOMINATOR_FLOOR * a.abs().max(1.0) {
                return Err(Error::DegenerateStencil(*a, *b));
            }
        }
    }
    Ok(())
}

/// Solves `Aᵀ v = g` for the difference system against the reference shift
/// and spreads `v` back onto the individual shifts (the reference gets
/// `-Σ v`, so weights sum to zero).
fn solve_difference_system(
    method: RuleMethod,
    gaps: &GapSet,
    shifts: &[f64],
    x: f64,
    rows: Vec<Vec<f64>>,
    target: Vec<f64>,
) -> Result<ShiftRule> {
    let describe = |detail: String| {
        Error::SingularSystem(format!("{method} at x={x} with shifts {shifts:?}, gaps {:?}: {detail}", gaps.gaps))
    };
    let lu = Lu::factor(&rows, SYSTEM_SCALE).map_err(|e| describe(e.to_string()))?;
    let condition_number = lu.condition_number();
    if condition_number.is_nan() || condition_number > REJECT_CONDITION {
        return Err(describe(format!("condition number {condition_number:.3e} exceeds {REJECT_CONDITION:.0e}")));
    }
    let v = lu.solve_transpose(&target);
    let r = reference_index(shifts);
    let mut weights = Vec::with_capacity(shifts.len());
    let mut row = 0;
    for l in 0..shifts.len() {
        if l == r {
            weights.push(-v.iter().sum::<f64>());
        } else {
            weights.push(v[row]);
            row += 1;
        }
    }
    let terms = shifts.iter().zip(weights).map(|(&shift, weight)| ShiftTerm { shift, weight }).collect();
    Ok(ShiftRule {
        method,
        gaps: gaps.gaps.clone(),
        terms,
        condition_number,
        chain_factor: 1.0,
        evaluation_point: Some(x),
    })
}

/// Distinct-shift rule on `2S + 1` stencils, solved at `x`. Unknowns are
/// `Re O_s` and `Im O_s`; rows are `f(x+δ_ℓ) - f(x+δ_ref)`.
pub fn triangulation_general(gaps: &GapSet, shifts: &[f64], x: f64) -> Result<ShiftRule> {
    let count = gaps.len();
    let needed = 2 * count + 1;
    if shifts.len() < needed {
        return Err(Error::InsufficientStencils { needed, given: shifts.len() });
    }
    if shifts.len() > needed {
        return Err(Error::InvalidArgument(format!("expected exactly {needed} shifts, got {}", shifts.len())));
    }
    check_distinct(shifts)?;
    let rows = difference_rows(&gaps.gaps, shifts, x);
    let mut target: Vec<f64> = gaps.gaps.iter().map(|g| -g * (x * g / 2.0).sin()).collect();
    target.extend(gaps.gaps.iter().map(|g| -g * (x * g / 2.0).cos()));
    solve_difference_system(RuleMethod::TriangulationGeneral, gaps, shifts, x, rows, target)
}

/// Rule on `S + 1` stencils for circuits whose matrix elements `O_s` are real
/// (real amplitudes, real cost, generator diagonal in a real basis). Solved
/// at `x`; no exactness contract when the hypothesis fails.
pub fn real_symmetric_rule(gaps: &GapSet, shifts: &[f64], x: f64) -> Result<ShiftRule> {
    let count = gaps.len();
    let needed = count + 1;
    if shifts.len() < needed {
        return Err(Error::InsufficientStencils { needed, given: shifts.len() });
    }
    if shifts.len() > needed {
        return Err(Error::InvalidArgument(format!("expected exactly {needed} shifts, got {}", shifts.len())));
    }
    check_distinct(shifts)?;
    let r = reference_index(shifts);
    let dr = shifts[r];
    let rows = shifts
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != r)
        .map(|(_, &dl)| {
            gaps.gaps
                .iter()
                .map(|g| 4.0 * ((dr - dl) * g / 4.0).sin() * ((2.0 * x + dr + dl) * g / 4.0).sin())
                .collect()
        })
        .collect();
    let target = gaps.gaps.iter().map(|g| -g * (x * g / 2.0).sin()).collect();
    solve_difference_system(RuleMethod::RealSymmetric, gaps, shifts, x, rows, target)
}

/// Multiplies the chain factor by `dphi_dx`; weights are left untouched.
pub fn apply_chain(rule: &ShiftRule, dphi_dx: f64) -> ShiftRule {
    ShiftRule { chain_factor: rule.chain_factor * dphi_dx, ..rule.clone() }
}

fn fixed<const N: usize>(values: &[f64], what: &str) -> Result<[f64; N]> {
    values
        .try_into()
        .map_err(|_| Error::InvalidArgument(format!("{what} needs exactly {N} values, got {}", values.len())))
}

/// Builds a rule of any family, filling in default shifts when none are given.
/// `x` is required only by point-dependent methods.
pub fn build_rule(method: RuleMethod, gaps: &GapSet, shifts: Option<&[f64]>, x: Option<f64>) -> Result<ShiftRule> {
    let point = || x.ok_or_else(|| Error::InvalidArgument(format!("{method} rules are solved at a point; pass x")));
    let owned;
    let shifts = match shifts {
        Some(s) => s,
        None => {
            let at = if method == RuleMethod::RealSymmetric { Some(point()?) } else { x };
            owned = default_stencil(method, gaps, at)?;
            &owned
        }
    };
    match method {
        RuleMethod::SymmetricGeneral => symmetric_rule(gaps, shifts),
        RuleMethod::ClosedS1 => {
            closed_s1(fixed::<1>(&gaps.gaps, "closed-S1 gaps")?[0], fixed::<1>(shifts, "closed-S1 shifts")?[0])
        }
        RuleMethod::TriangulationS1 => triangulation_s1(
            fixed::<1>(&gaps.gaps, "triangulation-S1 gaps")?[0],
            fixed(shifts, "triangulation-S1 shifts")?,
        ),
        RuleMethod::ClosedS2 => closed_s2(fixed(&gaps.gaps, "closed-S2 gaps")?, fixed(shifts, "closed-S2 shifts")?),
        RuleMethod::ClosedS3 => closed_s3(fixed(&gaps.gaps, "closed-S3 gaps")?, fixed(shifts, "closed-S3 shifts")?),
        RuleMethod::TriangulationGeneral => triangulation_general(gaps, shifts, point()?),
        RuleMethod::RealSymmetric => real_symmetric_rule(gaps, shifts, point()?),
    }
}

/// Default stencil per family: symmetric families use [`default_shifts`],
/// triangulation adds `0` and the negatives, real-symmetric uses
/// [`real_symmetric_stencil`] and therefore needs `x`.
pub fn default_stencil(method: RuleMethod, gaps: &GapSet, x: Option<f64>) -> Result<Vec<f64>> {
    if method == RuleMethod::RealSymmetric {
        let x = x.ok_or_else(|| Error::InvalidArgument("real-symmetric default stencil depends on x".into()))?;
        return Ok(real_symmetric_stencil(gaps, x));
    }
    let base = default_shifts(gaps)?;
    Ok(match method {
        RuleMethod::TriangulationS1 | RuleMethod::TriangulationGeneral => {
            let mut s = vec![0.0];
            for d in &base {
                s.push(*d);
                s.push(-d);
            }
            if method == RuleMethod::TriangulationS1 {
                s.rotate_left(1);
            }
            s
        }
        _ => base,
    })
}

/// Shifts placing the `S + 1` evaluations at the absolute points
/// `t_k = 2kπ / Δ_max`, `k = 0..=S`.
///
/// Under the real-structure hypothesis `f` is an even cosine series in the
/// absolute parameter, so two points mirrored about zero carry the same
/// information and any stencil fixed relative to `x` is singular somewhere.
/// Fixed absolute nodes keep the reduced system independent of `x`.
pub fn real_symmetric_stencil(gaps: &GapSet, x: f64) -> Vec<f64> {
    let dmax = gaps.max_gap();
    (0..=gaps.len()).map(|k| 2.0 * k as f64 * PI / dmax - x).collect()
}
