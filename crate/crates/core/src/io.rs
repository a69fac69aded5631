//! Interchange documents for matrices, functions, measures and reports.
//!
//! Every float is written with 17 significant digits, which round-trips
//! `f64` exactly. Indices in files are 1-based.

use crate::dissipative::DissipativePath;
use crate::error::{Error, Result};
use crate::functions::{RationalSum, ScalarFunction, TrigSum};
use crate::generators::Instance;
use crate::ideals::SingularValueSeq;
use crate::linalg::{hermitian_residual, CMatrix, HermitianMatrix, Tolerances, C64};
use crate::perturb::PerturbationPath;
use crate::report::{BoundCheck, VerificationReport};
use crate::ssm::{Atom, AtomicMeasure, ProductSimplexMeasure, SimplexComponent};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io::{self, Read, Write};
use std::path::Path;

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON with every float at 17 significant digits; non-finite
/// floats become `null`.
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    Ok(std::fs::write(path, to_json(value)?)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let rows = |part: fn(&C64) -> f64| (0..n).map(|r| (0..n).map(|c| part(&m[(r, c)])).collect()).collect();
        Self { dim: n, re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        for rows in [&self.re, &self.im] {
            if rows.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: rows.len() });
            }
            if let Some(r) = rows.iter().find(|r| r.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
        }
        Ok(CMatrix::from_fn(n, n, |r, c| C64::new(self.re[r][c], self.im[r][c])))
    }
}

pub fn tuple_to_docs(mats: &[CMatrix]) -> Vec<MatrixDoc> {
    mats.iter().map(MatrixDoc::from_matrix).collect()
}

pub fn docs_to_tuple(docs: &[MatrixDoc]) -> Result<Vec<CMatrix>> {
    docs.iter().map(MatrixDoc::to_matrix).collect()
}

/// Base tuple and direction tuple of a linear path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDoc {
    pub base: Vec<MatrixDoc>,
    pub direction: Vec<MatrixDoc>,
}

impl PathDoc {
    /// Hermitian path when every matrix is Hermitian, dissipative otherwise.
    pub fn to_instance(&self) -> Result<Instance> {
        let base = docs_to_tuple(&self.base)?;
        let direction = docs_to_tuple(&self.direction)?;
        let tol = Tolerances::default();
        if base.iter().chain(&direction).all(|m| hermitian_residual(m) <= tol.herm) {
            let h = |v: Vec<_>| v.into_iter().map(|m| HermitianMatrix::new(m, tol.herm)).collect::<Result<Vec<_>>>();
            Ok(Instance::Hermitian(PerturbationPath::new(h(base)?, h(direction)?, tol)?))
        } else {
            Ok(Instance::Dissipative(DissipativePath::new(base, direction, tol)?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTermDoc {
    pub freq: Vec<f64>,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTermDoc {
    pub pole: [f64; 2],
    pub powers: Vec<u32>,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FunctionDoc {
    Trig { arity: usize, terms: Vec<TrigTermDoc> },
    Rational { arity: usize, terms: Vec<RationalTermDoc> },
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl FunctionDoc {
    pub fn from_function(f: &ScalarFunction) -> Self {
        match f {
            ScalarFunction::Trig(t) => Self::Trig {
                arity: t.arity(),
                terms: t.terms().iter().map(|x| TrigTermDoc { freq: x.freq.clone(), coeff: pair(x.coeff) }).collect(),
            },
            ScalarFunction::Rational(r) => Self::Rational {
                arity: r.arity(),
                terms: r
                    .terms()
                    .iter()
                    .map(|x| RationalTermDoc { pole: pair(x.pole), powers: x.powers.clone(), coeff: pair(x.coeff) })
                    .collect(),
            },
        }
    }

    pub fn to_function(&self) -> Result<ScalarFunction> {
        Ok(match self {
            Self::Trig { arity, terms } => ScalarFunction::Trig(TrigSum::new(
                *arity,
                terms.iter().map(|t| (t.freq.clone(), complex(t.coeff))).collect(),
            )?),
            Self::Rational { arity, terms } => ScalarFunction::Rational(RationalSum::new(
                *arity,
                terms.iter().map(|t| (complex(t.pole), t.powers.clone(), complex(t.coeff))).collect(),
            )?),
        })
    }
}

pub fn measure_header(arity: usize) -> Vec<String> {
    (1..=arity).map(|j| format!("lambda_{j}")).chain(["re_weight".into(), "im_weight".into()]).collect()
}

pub fn write_measure_csv<W: Write>(writer: W, measure: &AtomicMeasure) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(measure_header(measure.arity()))?;
    for atom in measure.atoms() {
        let row: Vec<String> =
            atom.point.iter().chain([&atom.weight.re, &atom.weight.im]).map(|&x| fmt_f64(x)).collect();
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measure_csv<R: Read>(reader: R) -> Result<AtomicMeasure> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    let width = header.len();
    if width < 2 {
        return Err(Error::Parse("measure header needs weight columns".into()));
    }
    let arity = width - 2;
    if header.iter().collect::<Vec<_>>() != measure_header(arity) {
        return Err(Error::Parse(format!("unexpected measure header {header:?}")));
    }
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    let mut atoms = Vec::new();
    for record in r.records() {
        let record = record?;
        let values: Vec<f64> = record.iter().map(parse).collect::<Result<_>>()?;
        atoms.push(Atom { point: values[..arity].to_vec(), weight: C64::new(values[arity], values[arity + 1]) });
    }
    AtomicMeasure::new(arity, atoms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDoc {
    pub spectator: Vec<f64>,
    pub active: [usize; 2],
    pub nodes: Vec<f64>,
    pub weight: [f64; 2],
}

/// Sidecar document of a second-order measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexMeasureDoc {
    pub arity: usize,
    pub pair: [usize; 2],
    pub total_variation: f64,
    pub components: Vec<ComponentDoc>,
}

impl SimplexMeasureDoc {
    pub fn from_measure(m: &ProductSimplexMeasure) -> Self {
        let (i, j) = m.pair();
        Self {
            arity: m.arity(),
            pair: [i + 1, j + 1],
            total_variation: m.total_variation(),
            components: m
                .components()
                .iter()
                .map(|c| ComponentDoc {
                    spectator: c.spectator.clone(),
                    active: [c.active.0 + 1, c.active.1 + 1],
                    nodes: c.nodes.clone(),
                    weight: pair(c.weight),
                })
                .collect(),
        }
    }

    pub fn to_measure(&self) -> Result<ProductSimplexMeasure> {
        if self.pair[0] == 0 || self.pair[0] > self.pair[1] || self.pair[1] > self.arity {
            return Err(Error::Parse(format!("invalid pair {:?}", self.pair)));
        }
        let p = (self.pair[0] - 1, self.pair[1] - 1);
        let components = self
            .components
            .iter()
            .map(|c| SimplexComponent {
                weight: complex(c.weight),
                spectator: c.spectator.clone(),
                active: (c.active[0].saturating_sub(1), c.active[1].saturating_sub(1)),
                nodes: c.nodes.clone(),
            })
            .collect();
        Ok(ProductSimplexMeasure::new(self.arity, p, components))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckDoc {
    pub name: String,
    pub bound: f64,
    pub attained: f64,
    pub slack: f64,
    pub pass: bool,
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub identity: String,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub bound_checks: Vec<BoundCheckDoc>,
}

impl ReportDoc {
    pub fn from_report(r: &VerificationReport) -> Self {
        Self {
            identity: r.identity.clone(),
            lhs: pair(r.lhs),
            rhs: pair(r.rhs),
            abs_residual: r.abs_residual,
            rel_residual: r.rel_residual,
            tolerance: r.tolerance,
            pass: r.passed(),
            bound_checks: r.bound_checks.iter().map(BoundCheckDoc::from_check).collect(),
        }
    }
}

impl BoundCheckDoc {
    pub fn from_check(c: &BoundCheck) -> Self {
        Self {
            name: c.name.clone(),
            bound: c.bound,
            attained: c.attained,
            slack: c.bound - c.attained,
            pass: c.pass,
            asserted: c.asserted,
        }
    }
}

/// One decimal per line; blank lines and `#` comments are skipped.
pub fn parse_sequence(text: &str) -> Result<SingularValueSeq> {
    let values = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<f64>().map_err(|e| Error::Parse(format!("{l:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    SingularValueSeq::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_unitary;
    use crate::rng::SplitMix64;

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let m = random_unitary(5, &mut SplitMix64::new(3));
        let text = to_json(&MatrixDoc::from_matrix(&m)).unwrap();
        let back = from_json::<MatrixDoc>(&text).unwrap().to_matrix().unwrap();
        assert_eq!(m, back);
        assert!(text.contains("e-1") || text.contains("e0"));
    }

    #[test]
    fn function_round_trip() {
        let f = crate::generators::random_rational(2, 4, false, &mut SplitMix64::new(9)).unwrap();
        let text = to_json(&FunctionDoc::from_function(&f)).unwrap();
        assert!(text.contains("\"class\": \"rational\""));
        let g = from_json::<FunctionDoc>(&text).unwrap().to_function().unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn empty_measure_is_header_only() {
        let mut out = Vec::new();
        write_measure_csv(&mut out, &AtomicMeasure::empty(2)).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "lambda_1,lambda_2,re_weight,im_weight\n");
    }

    #[test]
    fn measure_csv_round_trip() {
        let m = AtomicMeasure::new(
            2,
            vec![
                Atom { point: vec![0.1, -0.2], weight: C64::new(0.3, 1e-17) },
                Atom { point: vec![-1.0 / 3.0, 2.0], weight: C64::new(-0.7, 0.0) },
            ],
        )
        .unwrap();
        let mut out = Vec::new();
        write_measure_csv(&mut out, &m).unwrap();
        let back = read_measure_csv(out.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn sequence_parsing() {
        let s = parse_sequence("# s\n3\n2.5\n\n1e-3\n").unwrap();
        assert_eq!(s.values(), &[3.0, 2.5, 1e-3]);
        assert!(parse_sequence("1\n2\n").is_err());
    }
}
