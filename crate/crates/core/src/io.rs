//! JSON schemas for generators and circuits, π-literal parsing, and
//! round-trip float output.

use std::f64::consts::PI;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::gates;
use crate::linalg::CMatrix;
use crate::sim::{generator_unitary, random_orthogonal, random_unitary, CircuitSpec, StateVector};
use crate::spectral::{diagonalize, HermitianOperator, PauliTerm};

/// Parses a real number or a π multiple: `1.5`, `pi`, `-pi/2`, `0.8pi`,
/// `3pi/4`, `0.29*pi`, `π/3`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.trim().replace('π', "pi").chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse angle {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d.parse::<f64>().map_err(|_| bad())?)),
        None => (s.as_str(), None),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match den {
        Some(0.0) => return Err(bad()),
        Some(d) => value / d,
        None => value,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Comma-separated angles, optionally wrapped in brackets.
pub fn parse_angle_list(text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(parse_angle).collect()
}

/// A number or a π-literal string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Number(f64),
    Text(String),
}

impl Angle {
    pub fn value(&self) -> Result<f64> {
        match self {
            Angle::Number(v) => Ok(*v),
            Angle::Text(s) => parse_angle(s),
        }
    }
}

/// Matrix entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(r) => Complex64::new(r, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

fn matrix_from_entries(entries: &[Vec<Entry>], dim: Option<usize>) -> Result<CMatrix> {
    let rows: Vec<Vec<Complex64>> = entries.iter().map(|r| r.iter().map(|e| e.value()).collect()).collect();
    let m = CMatrix::from_rows(&rows)?;
    if let Some(d) = dim {
        if m.rows() != d || m.cols() != d {
            return Err(Error::DimensionMismatch(format!("declared dim {d}, matrix is {}x{}", m.rows(), m.cols())));
        }
    }
    Ok(m)
}

/// Generator or cost operator: a catalog name, dense entries, or a Pauli sum.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OperatorSource {
    Catalog(String),
    Dense {
        #[serde(default)]
        dim: Option<usize>,
        entries: Vec<Vec<Entry>>,
    },
    Paulis {
        paulis: Vec<PauliTerm>,
    },
}

impl OperatorSource {
    pub fn build(&self) -> Result<HermitianOperator> {
        match self {
            OperatorSource::Catalog(name) => gates::lookup(name),
            OperatorSource::Dense { dim, entries } => HermitianOperator::new(matrix_from_entries(entries, *dim)?),
            OperatorSource::Paulis { paulis } => HermitianOperator::from_pauli_terms(paulis.clone()),
        }
    }
}

/// Unitary: `"identity"`, `"haar:<seed>"`, `"orthogonal:<seed>"`, dense
/// entries, `exp(-i·angle·G/2)`, or a sequence applied first to last.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum UnitarySource {
    Named(String),
    Dense { entries: Vec<Vec<Entry>> },
    Rotation { generator: OperatorSource, angle: Angle },
    Sequence { sequence: Vec<UnitarySource> },
}

impl UnitarySource {
    pub fn build(&self, dim: usize) -> Result<CMatrix> {
        match self {
            UnitarySource::Named(name) => {
                let (kind, arg) = name.split_once(':').unwrap_or((name, ""));
                let seed = || arg.parse::<u64>().map_err(|_| Error::Parse(format!("seed in {name:?}")));
                match kind {
                    "identity" => Ok(CMatrix::identity(dim)),
                    "haar" => Ok(random_unitary(dim, seed()?)),
                    "orthogonal" => Ok(random_orthogonal(dim, seed()?)),
                    _ => Err(Error::Parse(format!(
                        "unknown unitary {name:?} (identity, haar:<seed>, orthogonal:<seed>)"
                    ))),
                }
            }
            UnitarySource::Dense { entries } => matrix_from_entries(entries, Some(dim)),
            UnitarySource::Rotation { generator, angle } => {
                let g = generator.build()?;
                if g.dim() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "rotation generator has dimension {}, circuit {dim}",
                        g.dim()
                    )));
                }
                Ok(generator_unitary(&diagonalize(&g)?, angle.value()?))
            }
            UnitarySource::Sequence { sequence } => {
                let mut acc = CMatrix::identity(dim);
                for u in sequence {
                    acc = u.build(dim)?.matmul(&acc);
                }
                Ok(acc)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectatorSource {
    pub generator: OperatorSource,
    pub angle: Angle,
}

/// On-disk circuit description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub initial_state: Option<Vec<Entry>>,
    #[serde(default)]
    pub pre: Option<UnitarySource>,
    pub generator: OperatorSource,
    #[serde(default)]
    pub spectator: Option<SpectatorSource>,
    #[serde(default)]
    pub post: Option<UnitarySource>,
    pub cost: OperatorSource,
    #[serde(default)]
    pub dphi_dx: Option<f64>,
}

impl CircuitFile {
    pub fn build(&self) -> Result<CircuitSpec> {
        let generator = self.generator.build()?;
        let dim = generator.dim();
        if let Some(d) = self.dim {
            if d != dim {
                return Err(Error::DimensionMismatch(format!("declared dim {d}, generator has dimension {dim}")));
            }
        }
        let mut spec = CircuitSpec::new(generator, self.cost.build()?)?;
        if let Some(state) = &self.initial_state {
            spec = spec.with_initial_state(StateVector::new(state.iter().map(|e| e.value()).collect())?)?;
        }
        if let Some(pre) = &self.pre {
            spec = spec.with_pre(pre.build(dim)?)?;
        }
        if let Some(post) = &self.post {
            spec = spec.with_post(post.build(dim)?)?;
        }
        if let Some(s) = &self.spectator {
            spec = spec.with_spectator(s.generator.build()?, s.angle.value()?)?;
        }
        if let Some(k) = self.dphi_dx {
            spec = spec.with_chain(k)?;
        }
        Ok(spec)
    }
}

pub fn circuit_from_json(text: &str) -> Result<CircuitSpec> {
    serde_json::from_str::<CircuitFile>(text)?.build()
}

pub fn operator_from_json(text: &str) -> Result<HermitianOperator> {
    serde_json::from_str::<OperatorSource>(text)?.build()
}

/// Resolves a generator argument: inline JSON, a JSON file path, or a
/// catalog name.
pub fn resolve_operator(arg: &str) -> Result<HermitianOperator> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('"') {
        return operator_from_json(trimmed);
    }
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{arg}: {e}")))?;
        return operator_from_json(&text).map_err(|e| prefix(arg, e));
    }
    gates::lookup(arg)
}

pub fn read_circuit(path: &Path) -> Result<CircuitSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    circuit_from_json(&text).map_err(|e| prefix(&path.display().to_string(), e))
}

fn prefix(origin: &str, e: Error) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{origin}: {msg}")),
        other => other,
    }
}

/// Pretty JSON formatter that writes every float with 17 significant digits.
pub struct ExactFloatFormatter(PrettyFormatter<'static>);

impl ExactFloatFormatter {
    pub fn new() -> Self {
        Self(PrettyFormatter::new())
    }
}

impl Default for ExactFloatFormatter {
    fn default() -> Self {
        Self::new()
    }
}

macro_rules! delegate {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl Formatter for ExactFloatFormatter {
    delegate!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        end_object_key,
        begin_object_value,
        end_object_value
    );

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", f64::from(value))
    }
}

/// Serializes with [`ExactFloatFormatter`]; non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloatFormatter::new());
    value.serialize(&mut ser).map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
}
