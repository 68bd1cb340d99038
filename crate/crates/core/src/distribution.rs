//! Distributions spanned by polynomial vector fields: brackets, the weak
//! derived flag, growth vectors, regularity and nilpotent approximation.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::Gnla;
use crate::linalg::{rank, solve, Matrix, Scalar};
use crate::poly::Polynomial;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    coords: Vec<String>,
    comps: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(coords: Vec<String>, comps: Vec<Polynomial>) -> Result<Self> {
        if comps.len() != coords.len() {
            return Err(Error::DimensionMismatch {
                expected: coords.len(),
                found: comps.len(),
            });
        }
        if let Some(p) = comps.iter().find(|p| p.nvars() != coords.len()) {
            return Err(Error::DimensionMismatch {
                expected: coords.len(),
                found: p.nvars(),
            });
        }
        Ok(Self { coords, comps })
    }

    pub fn zero(coords: &[String]) -> Self {
        let n = coords.len();
        Self {
            coords: coords.to_vec(),
            comps: vec![Polynomial::zero(n); n],
        }
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(coords: &[String], i: usize) -> Self {
        let mut f = Self::zero(coords);
        f.comps[i] = Polynomial::one(coords.len());
        f
    }

    /// Parses one coefficient expression per coordinate.
    pub fn parse(coords: &[String], comps: &[impl AsRef<str>]) -> Result<Self> {
        if comps.len() != coords.len() {
            return Err(Error::Parse(format!(
                "field has {} coefficients for {} coordinates",
                comps.len(),
                coords.len()
            )));
        }
        let comps = comps
            .iter()
            .map(|s| Polynomial::parse(s.as_ref(), coords))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords.to_vec(), comps)
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.comps[i]
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Polynomial::is_zero)
    }

    /// The derivation `X(f) = Σ X^j ∂_j f`.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.dim());
        for (j, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &(c * &f.derivative(j));
            }
        }
        out
    }

    pub fn eval(&self, point: &[Scalar]) -> Vec<Scalar> {
        self.comps.iter().map(|c| c.eval(point)).collect()
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn scale_by(&self, f: &Polynomial) -> Self {
        self.map(|p| f * p)
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        Self {
            coords: self.coords.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_coords(other)?;
        Ok(Self {
            coords: self.coords.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_coords(other)?;
        Ok(Self {
            coords: self.coords.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        })
    }

    fn check_coords(&self, other: &Self) -> Result<()> {
        if self.coords != other.coords {
            return Err(Error::Inconsistent(format!(
                "coordinate mismatch: ({}) vs ({})",
                self.coords.join(","),
                other.coords.join(",")
            )));
        }
        Ok(())
    }

    /// Coefficient strings, one per coordinate.
    pub fn to_strings(&self) -> Vec<String> {
        self.comps.iter().map(|c| c.to_string_with(&self.coords)).collect()
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, name) in self.comps.iter().zip(&self.coords) {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string_with(&self.coords);
            if s == "1" {
                parts.push(format!("∂{name}"));
            } else if c.num_terms() == 1 && !s.starts_with('-') {
                parts.push(format!("{s}·∂{name}"));
            } else {
                parts.push(format!("({s})·∂{name}"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `[X,Y]^i = Σ_j (X^j ∂_j Y^i − Y^j ∂_j X^i)`.
pub fn lie_bracket(x: &PolyVectorField, y: &PolyVectorField) -> Result<PolyVectorField> {
    x.check_coords(y)?;
    let comps = (0..x.dim())
        .map(|i| &x.apply(&y.comps[i]) - &y.apply(&x.comps[i]))
        .collect();
    PolyVectorField::new(x.coords.clone(), comps)
}

/// Rank over the field of rational functions, by fraction-free elimination.
pub fn generic_rank(rows: &[Vec<Polynomial>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let cols = first.len();
    let nvars = first.first().map_or(0, Polynomial::nvars);
    let mut m: Vec<Vec<Polynomial>> = rows.to_vec();
    let mut prev = Polynomial::one(nvars);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| m[i][c].num_terms()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            for j in c + 1..cols {
                let num = &(&m[r][c] * &m[i][j]) - &(&m[i][c] * &m[r][j]);
                m[i][j] = num
                    .div_exact(&prev)
                    .expect("fraction-free elimination divides exactly");
            }
            m[i][c] = Polynomial::zero(nvars);
        }
        prev = m[r][c].clone();
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

fn evaluated_rank(fields: &[PolyVectorField], point: &[Scalar]) -> usize {
    if fields.is_empty() {
        return 0;
    }
    let rows = fields.iter().map(|f| f.eval(point)).collect();
    rank(&Matrix::from_rows(point.len(), rows).expect("consistent dimension"))
}

/// The weak derived flag: cumulative generator lists per step.
#[derive(Clone, Debug)]
pub struct FlagReport {
    coords: Vec<String>,
    /// `steps[i]` spans `Γ(Δ_{i+1})`; each list extends the previous one.
    steps: Vec<Vec<PolyVectorField>>,
    generic_ranks: Vec<usize>,
}

impl FlagReport {
    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn steps(&self) -> &[Vec<PolyVectorField>] {
        &self.steps
    }

    pub fn generic_ranks(&self) -> &[usize] {
        &self.generic_ranks
    }

    /// Number of steps computed.
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn is_bracket_generating(&self) -> bool {
        self.generic_ranks.last() == Some(&self.coords.len())
    }

    fn extend(&mut self) -> Result<()> {
        let base = self.steps[0].clone();
        let last = self.steps.last().expect("at least one step");
        let prev_len = if self.steps.len() >= 2 {
            self.steps[self.steps.len() - 2].len()
        } else {
            0
        };
        let mut next = last.clone();
        for x in &base {
            for y in &last[prev_len..] {
                let b = lie_bracket(x, y)?;
                let neg = b.scale(&-Scalar::from_integer(1.into()));
                if !b.is_zero() && !next.contains(&b) && !next.contains(&neg) {
                    next.push(b);
                }
            }
        }
        let rows: Vec<Vec<Polynomial>> = next.iter().map(|f| f.comps.clone()).collect();
        self.generic_ranks.push(generic_rank(&rows));
        self.steps.push(next);
        Ok(())
    }
}

/// Builds the flag until the generic rank is full or `max_step` steps exist.
pub fn derived_flag(fields: &[PolyVectorField], max_step: usize) -> Result<FlagReport> {
    let first = fields
        .first()
        .ok_or_else(|| Error::Inconsistent("a distribution needs at least one field".into()))?;
    let coords = first.coords.clone();
    let mut gens = Vec::new();
    for f in fields {
        first.check_coords(f)?;
        if !f.is_zero() && !gens.contains(f) {
            gens.push(f.clone());
        }
    }
    let rows: Vec<Vec<Polynomial>> = gens.iter().map(|f| f.comps.clone()).collect();
    let mut flag = FlagReport {
        generic_ranks: vec![generic_rank(&rows)],
        coords,
        steps: vec![gens],
    };
    while flag.steps.len() < max_step.max(1) && !flag.is_bracket_generating() {
        flag.extend()?;
    }
    Ok(flag)
}

fn check_point(flag: &FlagReport, point: &[Scalar]) -> Result<()> {
    if point.len() != flag.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: flag.coords.len(),
            found: point.len(),
        });
    }
    Ok(())
}

/// Extra steps allowed beyond the generic flag when a point needs more brackets.
const EXTRA_STEPS: usize = 8;

/// Ranks of the evaluated flag at `point`, continued past the generic flag
/// until the rank is full or stops being reachable.
pub fn growth_vector_at(flag: &FlagReport, point: &[Scalar]) -> Result<Vec<usize>> {
    check_point(flag, point)?;
    let n = flag.coords.len();
    let target = *flag.generic_ranks.last().expect("nonempty flag");
    let mut work = flag.clone();
    let mut out: Vec<usize> = work.steps.iter().map(|s| evaluated_rank(s, point)).collect();
    let limit = flag.steps.len() + EXTRA_STEPS;
    while *out.last().expect("nonempty") < target.min(n) && work.steps.len() < limit {
        work.extend()?;
        out.push(evaluated_rank(work.steps.last().expect("extended"), point));
    }
    Ok(out)
}

/// Pointwise growth vector equals the generic one (the algebraic regularity proxy).
pub fn regular_at(flag: &FlagReport, point: &[Scalar]) -> Result<bool> {
    Ok(growth_vector_at(flag, point)? == flag.generic_ranks)
}

/// Adapted frame at a regular point: `(degree, field)` pairs, degree −1 first.
pub fn adapted_frame(flag: &FlagReport, point: &[Scalar]) -> Result<Vec<(i32, PolyVectorField)>> {
    check_point(flag, point)?;
    let mut chosen: Vec<(i32, PolyVectorField)> = Vec::new();
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for (j, step) in flag.steps.iter().enumerate() {
        for f in step {
            let v = f.eval(point);
            let mut trial = rows.clone();
            trial.push(v.clone());
            let m = Matrix::from_rows(point.len(), trial)?;
            if rank(&m) > rows.len() {
                rows.push(v);
                chosen.push((-(j as i32) - 1, f.clone()));
            }
        }
    }
    Ok(chosen)
}

/// Nilpotent approximation at a regular point, with basis `e1..eN`.
pub fn gnla_at(flag: &FlagReport, point: &[Scalar]) -> Result<Gnla> {
    if !regular_at(flag, point)? {
        let g = growth_vector_at(flag, point)?;
        return Err(Error::IrregularPoint(format!(
            "growth vector {:?} differs from the generic {:?}",
            g, flag.generic_ranks
        )));
    }
    let frame = adapted_frame(flag, point)?;
    let n = point.len();
    let names: Vec<String> = (1..=frame.len()).map(|i| format!("e{i}")).collect();
    let depth = flag.steps.len();
    let mut components = vec![Vec::new(); depth];
    for (i, (d, _)) in frame.iter().enumerate() {
        components[(-d - 1) as usize].push(names[i].clone());
    }
    let basis = Matrix::from_rows(n, frame.iter().map(|(_, f)| f.eval(point)).collect())?.transpose();
    let mut brackets = Vec::new();
    for a in 0..frame.len() {
        for b in a + 1..frame.len() {
            let target = frame[a].0 + frame[b].0;
            let v = lie_bracket(&frame[a].1, &frame[b].1)?.eval(point);
            let c = solve(&basis, &v)?.ok_or_else(|| {
                Error::Inconsistent(format!("[{},{}] leaves the flag at the point", names[a], names[b]))
            })?;
            let mut terms = Vec::new();
            for (k, ck) in c.iter().enumerate() {
                if ck.is_zero() || frame[k].0 > target {
                    continue;
                }
                if frame[k].0 < target {
                    return Err(Error::Inconsistent(format!(
                        "[{},{}] has a component of degree {} below {target}",
                        names[a], names[b], frame[k].0
                    )));
                }
                terms.push((names[k].clone(), ck.clone()));
            }
            if !terms.is_empty() {
                brackets.push((names[a].clone(), names[b].clone(), terms));
            }
        }
    }
    Gnla::new(components, brackets)
}

/// Input document: coordinate names and one coefficient list per field.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FieldsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub coords: Vec<String>,
    pub fields: Vec<Vec<String>>,
}

impl FieldsDoc {
    pub fn parse_fields(&self) -> Result<Vec<PolyVectorField>> {
        self.fields
            .iter()
            .enumerate()
            .map(|(i, f)| {
                PolyVectorField::parse(&self.coords, f).map_err(|e| Error::Parse(format!("fields[{i}]: {e}")))
            })
            .collect()
    }

    pub fn from_fields(fields: &[PolyVectorField]) -> Self {
        Self {
            schema_version: Some(1),
            coords: fields.first().map(|f| f.coords.clone()).unwrap_or_default(),
            fields: fields.iter().map(PolyVectorField::to_strings).collect(),
        }
    }
}

/// Machine-readable flag summary at a list of points.
#[derive(Clone, Debug, Serialize)]
pub struct FlagSummary {
    pub schema_version: u32,
    pub coords: Vec<String>,
    pub generic_ranks: Vec<usize>,
    pub bracket_generating: bool,
    pub points: Vec<PointSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointSummary {
    pub point: Vec<String>,
    pub growth: Vec<usize>,
    pub regular: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gnla: Option<crate::graded::GnlaDoc>,
}

pub fn summarize(flag: &FlagReport, points: &[Vec<Scalar>], with_gnla: bool) -> Result<FlagSummary> {
    let mut out = Vec::new();
    for p in points {
        let growth = growth_vector_at(flag, p)?;
        let regular = growth == flag.generic_ranks;
        let gnla = if with_gnla && regular {
            Some(gnla_at(flag, p)?.to_doc())
        } else {
            None
        };
        out.push(PointSummary {
            point: p.iter().map(|x| x.to_string()).collect(),
            growth,
            regular,
            gnla,
        });
    }
    Ok(FlagSummary {
        schema_version: 1,
        coords: flag.coords.clone(),
        generic_ranks: flag.generic_ranks.clone(),
        bracket_generating: flag.is_bracket_generating(),
        points: out,
    })
}

/// Frequently used models, keyed by name.
pub fn named_model(name: &str) -> Option<Vec<PolyVectorField>> {
    let (coords, fields): (&[&str], Vec<Vec<&str>>) = match name {
        "heisenberg" => (&["x", "y", "z"], vec![vec!["1", "0", "0"], vec!["0", "1", "x"]]),
        "martinet" => (&["x", "y", "z"], vec![vec!["1", "0", "0"], vec!["0", "1", "x^2"]]),
        "cartan235" => (
            &["x1", "x2", "x3", "x4", "x5"],
            vec![vec!["1", "0", "0", "0", "0"], vec!["0", "1", "x1", "x3", "x1^2"]],
        ),
        "plane" => (&["x", "y"], vec![vec!["1", "0"], vec!["0", "1"]]),
        _ => return None,
    };
    let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
    Some(
        fields
            .iter()
            .map(|f| PolyVectorField::parse(&coords, f).expect("built-in model parses"))
            .collect(),
    )
}
