//! Self-verification suite: every rule family against the exact commutator
//! derivative, the variance landscapes, sampling statistics and eigensolver
//! residuals. Shared by `gradshift verify` and the acceptance tests.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, pauli_string};
use crate::rules::{
    closed_s1, closed_s2, closed_s3, default_shifts, real_symmetric_rule, real_symmetric_stencil, symmetric_rule,
    triangulation_general, triangulation_s1, ShiftRule,
};
use crate::sampling::{derive_seed, empirical_variance, variance_grid, GridAxis, GridFamily, GridPreset};
use crate::sim::{random_hermitian, random_orthogonal, random_real_symmetric, random_unitary, Circuit, CircuitSpec};
use crate::spectral::{diagonalize, gaps_of, GapSet, HermitianOperator};

/// Deliberate corruptions used to show that the suite detects broken rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Negates the first coefficient of every two-gap closed-form rule.
    FlipClosedS2Sign,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub mutation: Option<Mutation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Wall-clock time; not serialized so reports stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub struct CheckInfo {
    pub id: u32,
    pub name: &'static str,
    pub tags: &'static [&'static str],
}

pub const CHECKS: [CheckInfo; 10] = [
    CheckInfo { id: 1, name: "psr-recovery", tags: &["exactness", "psr"] },
    CheckInfo { id: 2, name: "fsim-theta", tags: &["exactness", "fsim", "closed-form"] },
    CheckInfo { id: 3, name: "fsim-phi", tags: &["exactness", "fsim"] },
    CheckInfo { id: 4, name: "cross-resonance-s3", tags: &["exactness", "closed-form", "spectral"] },
    CheckInfo { id: 5, name: "triangulation-s1", tags: &["exactness", "triangulation"] },
    CheckInfo { id: 6, name: "feature-map-reduction", tags: &["exactness", "feature-map"] },
    CheckInfo { id: 7, name: "variance-landscapes", tags: &["variance", "grid"] },
    CheckInfo { id: 8, name: "sampling-consistency", tags: &["variance", "sampling"] },
    CheckInfo { id: 9, name: "qutrit", tags: &["exactness", "variance", "closed-form"] },
    CheckInfo { id: 10, name: "eigensolver", tags: &["spectral"] },
];

impl CheckInfo {
    /// Matches the id, a substring of the name, or a tag.
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.trim().to_ascii_lowercase();
        f.is_empty() || f == self.id.to_string() || self.name.contains(&f) || self.tags.iter().any(|t| *t == f)
    }
}

/// Runs every check selected by `filter` (all when `None`).
pub fn run_all(filter: Option<&str>, options: &VerifyOptions) -> VerifyReport {
    let checks: Vec<CheckResult> =
        CHECKS.iter().filter(|c| filter.is_none_or(|f| c.matches(f))).map(|c| run_check(c.id, options)).collect();
    VerifyReport { passed: checks.iter().all(|c| c.passed), checks }
}

pub fn run_check(id: u32, options: &VerifyOptions) -> CheckResult {
    let info = CHECKS.iter().find(|c| c.id == id);
    let name = info.map_or("unknown", |c| c.name).to_string();
    let start = Instant::now();
    let ctx = Ctx { seed: derive_seed(options.seed, u64::from(id)), mutation: options.mutation };
    let outcome = match id {
        1 => psr_recovery(&ctx),
        2 => fsim_theta(&ctx),
        3 => fsim_phi(&ctx),
        4 => cross_resonance(&ctx),
        5 => triangulation(&ctx),
        6 => feature_map(&ctx),
        7 => variance_landscapes(),
        8 => sampling_consistency(&ctx),
        9 => qutrit(&ctx),
        10 => eigensolver(&ctx),
        _ => Err(Error::InvalidArgument(format!("no check with id {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(Outcome { failures, notes }) if failures.is_empty() => (true, notes.join("; ")),
        Ok(Outcome { failures, .. }) => (false, failures.join("; ")),
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

struct Ctx {
    seed: u64,
    mutation: Option<Mutation>,
}

impl Ctx {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, stream))
    }

    fn sub_seed(&self, index: u64) -> u64 {
        derive_seed(self.seed ^ 0x5EED, index)
    }

    fn closed_s2(&self, gaps: [f64; 2], shifts: [f64; 2]) -> Result<ShiftRule> {
        let mut rule = closed_s2(gaps, shifts)?;
        if self.mutation == Some(Mutation::FlipClosedS2Sign) {
            for t in rule.terms.iter_mut().take(2) {
                t.weight = -t.weight;
            }
        }
        Ok(rule)
    }
}

#[derive(Default)]
struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    /// Records `max |err|` against `tol` for a named sweep.
    fn bound(&mut self, what: &str, max_err: f64, tol: f64) {
        if max_err <= tol {
            self.notes.push(format!("{what}: max error {max_err:.2e} <= {tol:.0e}"));
        } else {
            self.failures.push(format!("{what}: max error {max_err:.3e} exceeds {tol:.0e}"));
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

fn max_weight_diff(a: &ShiftRule, b: &ShiftRule) -> f64 {
    if a.terms.len() != b.terms.len() {
        return f64::INFINITY;
    }
    a.terms
        .iter()
        .zip(&b.terms)
        .map(|(p, q)| if p.shift == q.shift { (p.weight - q.weight).abs() } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

fn gaps_close(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= tol)
}

/// `V`, `W` Haar-random, cost random Hermitian, initial `|0⟩`.
fn random_circuit(generator: HermitianOperator, seed: u64) -> Result<CircuitSpec> {
    let d = generator.dim();
    CircuitSpec::new(generator, random_hermitian(d, derive_seed(seed, 2)))?
        .with_pre(random_unitary(d, derive_seed(seed, 0)))?
        .with_post(random_unitary(d, derive_seed(seed, 1)))
}

/// Real orthogonal `V`, `W` and real symmetric cost: all matrix elements real.
fn real_circuit(generator: HermitianOperator, seed: u64) -> Result<CircuitSpec> {
    let d = generator.dim();
    CircuitSpec::new(generator, random_real_symmetric(d, derive_seed(seed, 2)))?
        .with_pre(random_orthogonal(d, derive_seed(seed, 0)))?
        .with_post(random_orthogonal(d, derive_seed(seed, 1)))
}

/// Largest `|rule - exact|` over `count` circuits at random points.
fn sweep(
    count: u64,
    rng: &mut ChaCha8Rng,
    mut circuit: impl FnMut(u64, &mut ChaCha8Rng) -> Result<Circuit>,
    mut rule_at: impl FnMut(f64) -> Result<ShiftRule>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let c = circuit(i, rng)?;
        let x = rng.random_range(-PI..PI);
        let rule = rule_at(x)?;
        let err = (c.evaluate_rule(x, &rule)? - c.exact_derivative(x)?).abs();
        worst = worst.max(err);
    }
    Ok(worst)
}

fn z_on(qubit: usize, qubits: usize) -> Result<HermitianOperator> {
    let s: String = (0..qubits).map(|q| if q == qubit { 'Z' } else { 'I' }).collect();
    pauli_string(&s, 1.0)
}

fn psr_recovery(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let rule = symmetric_rule(&GapSet::from_values(&[2.0])?, &[PI / 2.0])?;
    let w: Vec<f64> = rule.terms.iter().map(|t| t.weight).collect();
    out.require(w == [0.5, -0.5], format!("PSR weights {w:?}, expected [0.5, -0.5]"));
    out.require(gaps_of(&pauli_string("Z", 1.0)?)?.gaps == [2.0], "gaps(Z) != [2]");
    let mut rng = ctx.rng(0);
    let worst = sweep(
        200,
        &mut rng,
        |i, rng| {
            let qubits = 1 + (i % 3) as usize;
            let target = rng.random_range(0..qubits);
            random_circuit(z_on(target, qubits)?, ctx.sub_seed(i))?.prepare()
        },
        |_| Ok(rule.clone()),
    )?;
    out.bound("200 random 1-3 qubit circuits", worst, 1e-10);
    Ok(out)
}

fn fsim_circuit(ctx: &Ctx, i: u64, rng: &mut ChaCha8Rng, differentiate_theta: bool) -> Result<Circuit> {
    let (g, spectator) = if differentiate_theta {
        (gates::fsim_theta_generator(), gates::fsim_phi_generator())
    } else {
        (gates::fsim_phi_generator(), gates::fsim_theta_generator())
    };
    let other_angle = rng.random_range(-PI..PI);
    random_circuit(g, ctx.sub_seed(i))?.with_spectator(spectator, other_angle)?.prepare()
}

fn fsim_theta(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let gaps = gaps_of(&gates::fsim_theta_generator())?;
    out.require(gaps_close(&gaps.gaps, &[2.0, 4.0], 1e-9), format!("fSim θ gaps {:?}", gaps.gaps));
    let shifts = default_shifts(&gaps)?;
    let mut agreement: f64 = 0.0;
    for s in [[shifts[0], shifts[1]], [PI / 8.0, 3.0 * PI / 8.0], [0.80 * PI, 0.29 * PI]] {
        agreement = agreement.max(max_weight_diff(&ctx.closed_s2([2.0, 4.0], s)?, &symmetric_rule(&gaps, &s)?));
    }
    out.bound("closed-S2 vs symmetric solver weights", agreement, 1e-12);
    let rule = ctx.closed_s2([2.0, 4.0], [0.80 * PI, 0.29 * PI])?;
    let mut rng = ctx.rng(0);
    let worst = sweep(100, &mut rng, |i, rng| fsim_circuit(ctx, i, rng, true), |_| Ok(rule.clone()))?;
    out.bound("100 random fSim circuits", worst, 1e-9);
    Ok(out)
}

fn fsim_phi(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let gaps = gaps_of(&gates::fsim_phi_generator())?;
    out.require(gaps_close(&gaps.gaps, &[2.0], 1e-9), format!("fSim φ gaps {:?}", gaps.gaps));
    let rule = closed_s1(2.0, PI / 2.0)?;
    out.require(rule.terms.len() == 2, "φ rule is not two-term");
    let mut rng = ctx.rng(0);
    let worst = sweep(100, &mut rng, |i, rng| fsim_circuit(ctx, i, rng, false), |_| Ok(rule.clone()))?;
    out.bound("two-evaluation rule on 100 random fSim circuits", worst, 1e-9);
    Ok(out)
}

fn cross_resonance(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let g = gates::lookup("cr:1,-0.5,1,0,0")?;
    let gaps = gaps_of(&g)?;
    out.require(gaps_close(&gaps.gaps, &[1.0, 3.0, 4.0], 1e-9), format!("CR gaps {:?}, expected [1, 3, 4]", gaps.gaps));
    let gap_arr = [1.0, 3.0, 4.0];
    let stencils = [default_shifts(&gaps)?, vec![PI / 5.0, 2.0 * PI / 5.0, 3.0 * PI / 5.0]];
    let mut agreement: f64 = 0.0;
    for s in &stencils {
        let closed = closed_s3(gap_arr, [s[0], s[1], s[2]])?;
        agreement = agreement.max(max_weight_diff(&closed, &symmetric_rule(&gaps, s)?));
    }
    out.bound("closed-S3 vs symmetric solver weights", agreement, 1e-12);
    let s = &stencils[0];
    let rule = closed_s3(gap_arr, [s[0], s[1], s[2]])?;
    let mut rng = ctx.rng(0);
    let worst =
        sweep(100, &mut rng, |i, _| random_circuit(g.clone(), ctx.sub_seed(i))?.prepare(), |_| Ok(rule.clone()))?;
    out.bound("100 random CR circuits", worst, 1e-9);
    Ok(out)
}

fn triangulation(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let z = pauli_string("Z", 1.0)?;
    let mut rng = ctx.rng(0);
    for (k, stencil) in
        [[PI / 2.0, 3.0 * PI / 2.0, 0.0], [PI / 2.0, -PI / 2.0, 0.0], [0.4, -1.1, 0.0]].iter().enumerate()
    {
        let rule = triangulation_s1(2.0, *stencil)?;
        let worst = sweep(
            50,
            &mut rng,
            |i, _| random_circuit(z.clone(), ctx.sub_seed(100 * k as u64 + i))?.prepare(),
            |_| Ok(rule.clone()),
        )?;
        out.bound(&format!("three-shift rule {stencil:.3?}"), worst, 1e-9);
    }
    let g1 = GapSet::from_values(&[2.0])?;
    match triangulation_general(&g1, &[PI / 2.0, -PI / 2.0], 0.3) {
        Err(Error::InsufficientStencils { needed: 3, given: 2 }) => {
            out.note("2S stencils rejected with InsufficientStencils")
        }
        other => out.require(false, format!("2S stencils gave {other:?}, expected InsufficientStencils")),
    }
    let g2 = GapSet::from_values(&[2.0, 4.0])?;
    out.require(
        matches!(triangulation_general(&g2, &[0.1, 0.5, -0.7, 1.3], 0.3), Err(Error::InsufficientStencils { .. })),
        "S=2 with 4 stencils was not rejected",
    );
    Ok(out)
}

fn feature_map(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut rng = ctx.rng(0);
    for n in 2..=4usize {
        let g = gates::lookup(&format!("feature_map:z:{n}"))?;
        let gaps = gaps_of(&g)?;
        let expected: Vec<f64> = (1..=n).map(|k| 2.0 * k as f64).collect();
        out.require(gaps_close(&gaps.gaps, &expected, 1e-9), format!("N={n} gaps {:?}", gaps.gaps));
        let symmetric = symmetric_rule(&gaps, &default_shifts(&gaps)?)?;
        out.require(
            symmetric.terms.len() == 2 * n,
            format!("N={n} symmetric rule has {} terms", symmetric.terms.len()),
        );
        let mut worst_exact: f64 = 0.0;
        let mut worst_cross: f64 = 0.0;
        for i in 0..30 {
            let c = real_circuit(g.clone(), ctx.sub_seed(100 * n as u64 + i))?.prepare()?;
            let x = rng.random_range(-PI..PI);
            let rule = real_symmetric_rule(&gaps, &real_symmetric_stencil(&gaps, x), x)?;
            out.require(rule.terms.len() == n + 1, format!("N={n} reduced rule has {} terms", rule.terms.len()));
            let reduced = c.evaluate_rule(x, &rule)?;
            let full = c.evaluate_rule(x, &symmetric)?;
            worst_exact = worst_exact.max((reduced - c.exact_derivative(x)?).abs());
            worst_cross = worst_cross.max((reduced - full).abs());
        }
        out.bound(&format!("N={n} {}-evaluation rule vs exact", n + 1), worst_exact, 1e-9);
        out.bound(&format!("N={n} vs {}-evaluation symmetric rule", 2 * n), worst_cross, 1e-9);
    }
    // complex amplitudes violate the hypothesis; the discrepancy must show
    let g = gates::lookup("feature_map:z:2")?;
    let gaps = gaps_of(&g)?;
    let c = random_circuit(g, ctx.sub_seed(999))?.prepare()?;
    let x = 0.7;
    let rule = real_symmetric_rule(&gaps, &real_symmetric_stencil(&gaps, x), x)?;
    let err = (c.evaluate_rule(x, &rule)? - c.exact_derivative(x)?).abs();
    out.require(err > 1e-6, format!("complex circuit discrepancy {err:.2e} not detected"));
    out.note(format!("complex-amplitude circuit flagged (error {err:.2e})"));
    Ok(out)
}

fn variance_landscapes() -> Result<Outcome> {
    let mut out = Outcome::default();
    let points = 201;

    let a = GridPreset::Fig2a.grid(points)?;
    let step = a.axes[0].step();
    out.require((a.min() - 0.5).abs() <= 1e-3, format!("Fig. 2(a) min {:.6}", a.min()));
    out.require((a.argmin()[0] - PI / 2.0).abs() <= 0.01 * PI, format!("Fig. 2(a) argmin {:.4}π", a.argmin()[0] / PI));
    out.note(format!("2(a): min {:.6} at {:.4}π (step {:.4}π)", a.min(), a.argmin()[0] / PI, step / PI));

    let b = GridPreset::Fig2b.grid(points)?;
    let step = b.axes[0].step();
    out.require((b.min() - 0.5).abs() <= 1e-3, format!("Fig. 2(b) min {:.6}", b.min()));
    let minimizers = b.minimizers();
    let on_lattice = |v: f64| [0.5, 1.5].iter().any(|m| (v.abs() - m * PI).abs() <= step);
    out.require(
        minimizers.iter().all(|m| m.iter().all(|&v| on_lattice(v))),
        format!("Fig. 2(b) minimizer off the ±π/2, ±3π/2 lattice: {minimizers:?}"),
    );
    let combos: [f64; 4] = [-1.5, -0.5, 0.5, 1.5];
    let mut missing = Vec::new();
    for &p in &combos {
        for &q in &combos {
            let degenerate = ((p - q) / 2.0).fract() == 0.0;
            let hit = minimizers.iter().any(|m| (m[0] - p * PI).abs() <= step && (m[1] - q * PI).abs() <= step);
            if !degenerate && !hit {
                missing.push((p, q));
            }
        }
    }
    out.require(missing.is_empty(), format!("Fig. 2(b) combinations without a minimum: {missing:?}"));
    out.note(format!("2(b): min {:.6} at {} combinations of ±π/2, ±3π/2", b.min(), minimizers.len()));

    let c = GridPreset::Fig3.grid(points)?;
    let mut arg = c.argmin();
    arg.sort_by(|x, y| y.total_cmp(x));
    out.require(
        (arg[0] / PI - 0.80).abs() <= 0.02 && (arg[1] / PI - 0.29).abs() <= 0.02,
        format!("Fig. 3 argmin ({:.4}π, {:.4}π)", arg[0] / PI, arg[1] / PI),
    );
    out.require((c.min() - 1.40).abs() <= 0.02, format!("Fig. 3 min {:.6}", c.min()));
    out.note(format!("3: min {:.5} at ({:.3}π, {:.3}π)", c.min(), arg[0] / PI, arg[1] / PI));
    Ok(out)
}

fn sampling_consistency(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let reps = 10_000;
    let shots = 1000;
    let mut rng = ctx.rng(0);
    let psr_circuit = random_circuit(pauli_string("Z", 1.0)?, ctx.sub_seed(0))?.prepare()?;
    let fsim = fsim_circuit(ctx, 1, &mut rng, true)?;
    let cases = [
        ("PSR", psr_circuit, closed_s1(2.0, PI / 2.0)?),
        ("fSim closed-S2", fsim, ctx.closed_s2([2.0, 4.0], [0.80 * PI, 0.29 * PI])?),
    ];
    for (k, (label, circuit, rule)) in cases.iter().enumerate() {
        let x = rng.random_range(-PI..PI);
        let stats = empirical_variance(circuit, x, rule, shots, reps, ctx.sub_seed(10 + k as u64))?;
        let ratio = stats.variance / stats.analytic_variance;
        out.require((0.9..=1.1).contains(&ratio), format!("{label}: empirical/analytic variance ratio {ratio:.4}"));
        let exact = circuit.exact_derivative(x)?;
        let se = (stats.analytic_variance / reps as f64).sqrt();
        let z = (stats.mean - exact).abs() / se;
        out.require(z < 4.0, format!("{label}: mean off by {z:.2} standard errors"));
        out.note(format!("{label}: variance ratio {ratio:.4}, mean within {z:.2} SE"));
    }
    Ok(out)
}

fn qutrit(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut rng = ctx.rng(0);
    for (k, name) in ["qutrit:1", "qutrit:2"].iter().enumerate() {
        let g = gates::lookup(name)?;
        let gaps = gaps_of(&g)?;
        out.require(gaps_close(&gaps.gaps, &[1.0, 2.0], 1e-9), format!("{name} gaps {:?}", gaps.gaps));
        let d = default_shifts(&gaps)?;
        for shifts in [[d[0], d[1]], [1.60 * PI, 0.58 * PI]] {
            let rule = ctx.closed_s2([1.0, 2.0], shifts)?;
            let worst = sweep(
                50,
                &mut rng,
                |i, _| random_circuit(g.clone(), ctx.sub_seed(1000 * k as u64 + i))?.prepare(),
                |_| Ok(rule.clone()),
            )?;
            out.bound(&format!("{name} S=2 rule at ({:.3}π, {:.3}π)", shifts[0] / PI, shifts[1] / PI), worst, 1e-9);
        }
    }
    // The qutrit landscape is the fSim one with shifts scaled by Δmax ratio 4/2.
    let axis = GridAxis::new(0.0, 2.0 * PI, 201)?;
    let grid = variance_grid(GridFamily::SymmetricS2 { gaps: [1.0, 2.0] }, &[axis, axis])?;
    let mut arg = grid.argmin();
    arg.sort_by(|x, y| y.total_cmp(x));
    let scaled = [arg[0] / 2.0, arg[1] / 2.0];
    out.require(
        (scaled[0] / PI - 0.80).abs() <= 0.02 && (scaled[1] / PI - 0.29).abs() <= 0.02,
        format!("qutrit argmin ({:.4}π, {:.4}π) does not rescale to (0.80π, 0.29π)", arg[0] / PI, arg[1] / PI),
    );
    out.require(
        (grid.min() - 1.40 / 4.0).abs() <= 0.02 / 4.0,
        format!("qutrit min {:.5}, expected 1.40/4", grid.min()),
    );
    out.note(format!(
        "qutrit argmin ({:.3}π, {:.3}π) = 2 × ({:.3}π, {:.3}π), min {:.5}",
        arg[0] / PI,
        arg[1] / PI,
        scaled[0] / PI,
        scaled[1] / PI,
        grid.min()
    ));
    Ok(out)
}

fn eigensolver(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let dim = 2 + (i % 63) as usize;
        let g = random_hermitian(dim, ctx.sub_seed(i));
        let spectrum = diagonalize(&g)?;
        let norm = g.matrix().frobenius_norm();
        for (k, &lambda) in spectrum.eigenvalues.iter().enumerate() {
            let v = spectrum.eigenvectors.column(k);
            let gv = g.matrix().matvec(&v);
            let r: f64 = gv.iter().zip(&v).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(r / norm);
        }
    }
    out.bound("1000 random Hermitian matrices, dims 2-64, ‖Gv-λv‖/‖G‖_F", worst, 1e-10);
    Ok(out)
}
