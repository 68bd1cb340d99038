//! Symmetries of flat graded models: verification against the distribution,
//! the weighted filtration, graded symbols inside the Tanaka algebra at the
//! origin, and jet-determinacy bounds.
//!
//! A model has weighted coordinates and a frame of weighted degree −1. The
//! symbol of a weight `i < 0` field is its value at the origin in the adapted
//! frame. For `i ≥ 0` it is the map `e_a ↦ σ([X, R_a])`, where `R_a` are the
//! weight −1 symmetries with `R_a(0) = V_a(0)`. This sends the Euler field to
//! the grading element. On negative degrees the symbol map reverses brackets.
//! Spans, and hence every filtration statement, are unaffected.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{adapted_frame, derived_flag, gnla_at, lie_bracket, regular_at, PolyVectorField};
use crate::error::{Error, Result};
use crate::flat::{
    contact_component, contact_names, contact_vector_field, hamiltonians, lagrangian_contact_g0,
    reduced_contact_tower, WeightedPolynomial,
};
use crate::graded::Gnla;
use crate::linalg::{frac, int, kernel_basis, solve, zero_vec, Matrix, Scalar, Subspace};
use crate::poly::{Exponent, Polynomial};
use crate::prolong::{prolong, Element, ProlongedAlgebra};

/// Weighted coordinates with a distribution frame that is homogeneous of
/// weighted degree −1 and Cramer-solvable.
#[derive(Clone, Debug)]
pub struct GradedCoordinateModel {
    name: String,
    coords: Vec<String>,
    weights: Vec<u32>,
    frame: Vec<PolyVectorField>,
    cramer_rows: Vec<usize>,
    gnla: Gnla,
    adapted: Vec<(i32, PolyVectorField)>,
    origin_frame: Matrix,
    right_frame: Vec<PolyVectorField>,
}

impl GradedCoordinateModel {
    pub fn new(name: impl Into<String>, coords: Vec<String>, weights: Vec<u32>, frame: Vec<PolyVectorField>) -> Result<Self> {
        let name = name.into();
        let n = coords.len();
        if weights.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: weights.len(),
            });
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::Inconsistent("coordinate weights must be positive".into()));
        }
        if frame.is_empty() {
            return Err(Error::Inconsistent("the frame is empty".into()));
        }
        for f in &frame {
            if f.coords() != coords.as_slice() {
                return Err(Error::Inconsistent("frame coordinates differ from the model coordinates".into()));
            }
            if let Some(bad) = weight_terms(f, &weights).keys().find(|&&w| w != -1) {
                return Err(Error::Inconsistent(format!(
                    "frame field `{f}` has a term of weighted degree {bad}, expected -1"
                )));
            }
        }
        let cramer_rows = find_cramer_rows(&frame)?;
        let depth = *weights.iter().max().expect("nonempty") as usize;
        let flag = derived_flag(&frame, depth + 1)?;
        let origin = zero_vec(n);
        if *flag.generic_ranks().last().expect("nonempty") != n || !regular_at(&flag, &origin)? {
            return Err(Error::IrregularPoint("the frame does not span a regular bracket-generating flag at the origin".into()));
        }
        let gnla = gnla_at(&flag, &origin)?;
        for j in 1..=gnla.depth() {
            let count = weights.iter().filter(|&&w| w as usize == j).count();
            if count != gnla.dim_of(-(j as i32)) {
                return Err(Error::Inconsistent(format!(
                    "{count} coordinates of weight {j} but the graded algebra has dimension {} there",
                    gnla.dim_of(-(j as i32))
                )));
            }
        }
        if gnla.depth() != depth {
            return Err(Error::Inconsistent("coordinate weights exceed the depth of the flag".into()));
        }
        let adapted = adapted_frame(&flag, &origin)?;
        let origin_frame = Matrix::from_rows(n, adapted.iter().map(|(_, f)| f.eval(&origin)).collect())?.transpose();
        let mut model = Self {
            name,
            coords,
            weights,
            frame,
            cramer_rows,
            gnla,
            adapted,
            origin_frame,
            right_frame: Vec::new(),
        };
        model.right_frame = model.build_right_frame()?;
        Ok(model)
    }

    /// Built-in models: `heisenberg` in the symmetric chart and `cartan235`.
    pub fn named(name: &str) -> Result<Self> {
        let (coords, weights, fields): (&[&str], Vec<u32>, Vec<Vec<&str>>) = match name {
            "heisenberg" => (
                &["x", "y", "z"],
                vec![1, 1, 2],
                vec![vec!["1", "0", "-y/2"], vec!["0", "1", "x/2"]],
            ),
            "cartan235" => (
                &["x1", "x2", "x3", "x4", "x5"],
                vec![1, 1, 2, 3, 3],
                vec![vec!["1", "0", "0", "0", "0"], vec!["0", "1", "x1", "x3", "x1^2"]],
            ),
            _ => return Err(Error::Parse(format!("unknown model `{name}`"))),
        };
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let frame = fields
            .iter()
            .map(|f| PolyVectorField::parse(&coords, f))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, coords, weights, frame)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn frame(&self) -> &[PolyVectorField] {
        &self.frame
    }

    pub fn cramer_rows(&self) -> &[usize] {
        &self.cramer_rows
    }

    pub fn gnla(&self) -> &Gnla {
        &self.gnla
    }

    pub fn depth(&self) -> usize {
        self.gnla.depth()
    }

    /// Adapted frame at the origin, `(degree, field)` pairs in basis order.
    pub fn adapted_frame(&self) -> &[(i32, PolyVectorField)] {
        &self.adapted
    }

    /// Weight −1 symmetries `R_a` with `R_a(0) = V_a(0)`.
    pub fn right_frame(&self) -> &[PolyVectorField] {
        &self.right_frame
    }

    /// The Tanaka prolongation of the model algebra up to `cap`.
    pub fn algebra(&self, cap: usize) -> Result<ProlongedAlgebra> {
        prolong(&self.gnla, None, &[], cap)
    }

    /// Weighted degree of `x^α ∂_c`.
    pub fn term_weight(&self, exp: &[u32], target: usize) -> i32 {
        monomial_weight(exp, &self.weights) - self.weights[target] as i32
    }

    fn build_right_frame(&self) -> Result<Vec<PolyVectorField>> {
        let candidates = homogeneous_symmetries(self, -1)?;
        let origin = zero_vec(self.coords.len());
        let values = Matrix::from_rows(
            self.coords.len(),
            candidates.iter().map(|f| f.eval(&origin)).collect(),
        )?
        .transpose();
        self.adapted
            .iter()
            .filter(|(d, _)| *d == -1)
            .map(|(_, v)| {
                let c = solve(&values, &v.eval(&origin))?
                    .ok_or_else(|| Error::Inconsistent("no weight -1 symmetry through a frame vector".into()))?;
                let mut r = PolyVectorField::zero(&self.coords);
                for (ci, f) in c.iter().zip(&candidates) {
                    if !ci.is_zero() {
                        r = r.add(&f.scale(ci))?;
                    }
                }
                Ok(r)
            })
            .collect()
    }
}

fn monomial_weight(exp: &[u32], weights: &[u32]) -> i32 {
    exp.iter().zip(weights).map(|(e, w)| (e * w) as i32).sum()
}

/// Terms of a field grouped by weighted degree.
fn weight_terms(f: &PolyVectorField, weights: &[u32]) -> BTreeMap<i32, usize> {
    let mut out = BTreeMap::new();
    for (c, p) in f.components().iter().enumerate() {
        for (e, _) in p.terms() {
            *out.entry(monomial_weight(e, weights) - weights[c] as i32).or_insert(0) += 1;
        }
    }
    out
}

fn find_cramer_rows(frame: &[PolyVectorField]) -> Result<Vec<usize>> {
    let n = frame[0].dim();
    let one = Polynomial::one(n);
    let mut rows = Vec::new();
    for a in 0..frame.len() {
        let row = (0..n).find(|&r| {
            frame.iter().enumerate().all(|(b, f)| {
                let c = f.component(r);
                if a == b {
                    *c == one
                } else {
                    c.is_zero()
                }
            })
        });
        match row {
            Some(r) => rows.push(r),
            None => {
                return Err(Error::NotCramerSolvable(format!(
                    "no coordinate row isolates frame field {} with coefficient 1",
                    a + 1
                )))
            }
        }
    }
    Ok(rows)
}

/// `[X, V_a] − Σ_r [X, V_a]_{row r} V_r` for each frame field `V_a`.
pub fn symmetry_residuals(x: &PolyVectorField, model: &GradedCoordinateModel) -> Result<Vec<PolyVectorField>> {
    model
        .frame
        .iter()
        .map(|v| {
            let b = lie_bracket(x, v)?;
            let mut res = b.clone();
            for (r, vr) in model.cramer_rows.iter().zip(&model.frame) {
                res = res.sub(&vr.scale_by(b.component(*r)))?;
            }
            Ok(res)
        })
        .collect()
}

/// `L_X Δ ⊂ Δ`, decided by exact polynomial residuals.
pub fn is_symmetry(x: &PolyVectorField, model: &GradedCoordinateModel) -> Result<bool> {
    Ok(symmetry_residuals(x, model)?.iter().all(PolyVectorField::is_zero))
}

/// Least weighted degree among the terms of `X`.
pub fn weighted_order_at_origin(x: &PolyVectorField, model: &GradedCoordinateModel) -> Result<i32> {
    weight_terms(x, &model.weights)
        .keys()
        .next()
        .copied()
        .ok_or_else(|| Error::Inconsistent("the zero field has no weighted order".into()))
}

/// Terms of weighted degree exactly `i`.
pub fn homogeneous_part(x: &PolyVectorField, model: &GradedCoordinateModel, i: i32) -> PolyVectorField {
    let comps = x
        .components()
        .iter()
        .enumerate()
        .map(|(c, p)| p.filter_terms(|e| model.term_weight(e, c) == i))
        .collect();
    PolyVectorField::new(model.coords.clone(), comps).expect("same coordinates")
}

/// Least total degree of the coefficients: `[X]^{s−1} = 0 ≠ [X]^s`.
pub fn jet_order(x: &PolyVectorField) -> Option<u32> {
    x.components().iter().filter_map(Polynomial::min_degree).min()
}

/// Exponents with weighted sum `w`.
fn weighted_exponents(weights: &[u32], w: i32) -> Vec<Exponent> {
    fn go(weights: &[u32], i: usize, left: u32, cur: &mut Exponent, out: &mut Vec<Exponent>) {
        if i == weights.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=left / weights[i] {
            cur[i] = k;
            go(weights, i + 1, left - k * weights[i], cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if w >= 0 {
        go(weights, 0, w as u32, &mut vec![0; weights.len()], &mut out);
    }
    out
}

/// A basis of the homogeneous symmetries of weighted degree `order`.
pub fn homogeneous_symmetries(model: &GradedCoordinateModel, order: i32) -> Result<Vec<PolyVectorField>> {
    let n = model.coords.len();
    let mut ansatz = Vec::new();
    for c in 0..n {
        for e in weighted_exponents(&model.weights, order + model.weights[c] as i32) {
            let mut comps = vec![Polynomial::zero(n); n];
            comps[c] = Polynomial::monomial(n, e, Scalar::one());
            ansatz.push(PolyVectorField::new(model.coords.clone(), comps)?);
        }
    }
    let residuals = ansatz
        .par_iter()
        .map(|f| symmetry_residuals(f, model))
        .collect::<Result<Vec<_>>>()?;
    let mut keys: BTreeMap<(usize, usize, Exponent), usize> = BTreeMap::new();
    for rs in &residuals {
        for (a, r) in rs.iter().enumerate() {
            for (c, p) in r.components().iter().enumerate() {
                for (e, _) in p.terms() {
                    let next = keys.len();
                    keys.entry((a, c, e.clone())).or_insert(next);
                }
            }
        }
    }
    let mut m = Matrix::zeros(keys.len(), ansatz.len());
    for (j, rs) in residuals.iter().enumerate() {
        for (a, r) in rs.iter().enumerate() {
            for (c, p) in r.components().iter().enumerate() {
                for (e, v) in p.terms() {
                    m.set(keys[&(a, c, e.clone())], j, v.clone());
                }
            }
        }
    }
    let kernel = kernel_basis(&m);
    kernel
        .vectors()
        .map(|v| {
            let mut f = PolyVectorField::zero(&model.coords);
            for (c, g) in v.iter().zip(&ansatz) {
                if !c.is_zero() {
                    f = f.add(&g.scale(c))?;
                }
            }
            Ok(f)
        })
        .collect()
}

/// Symbol coordinates of a field that is zero or homogeneous of weight `i`.
fn symbol_coords(y: &PolyVectorField, i: i32, model: &GradedCoordinateModel, alg: &ProlongedAlgebra) -> Result<Vec<Scalar>> {
    let dim = alg.dim(i).ok_or(Error::DegreeOutOfRange(i))?;
    if y.is_zero() {
        return Ok(zero_vec(dim));
    }
    if i < 0 {
        let v = y.eval(&zero_vec(model.coords.len()));
        let c = solve(&model.origin_frame, &v)?.ok_or_else(|| Error::Inconsistent("value outside the frame".into()))?;
        let mut out = Vec::with_capacity(dim);
        for (ck, (d, _)) in c.into_iter().zip(&model.adapted) {
            if *d == i {
                out.push(ck);
            } else if !ck.is_zero() {
                return Err(Error::Inconsistent(format!("a weight {i} field has a value of degree {d} at the origin")));
            }
        }
        return Ok(out);
    }
    let mut theta = Vec::new();
    for r in &model.right_frame {
        let z = lie_bracket(y, r)?;
        theta.extend(symbol_coords(&z, i - 1, model, alg)?);
    }
    if dim == 0 {
        if theta.iter().all(Zero::is_zero) {
            return Ok(Vec::new());
        }
        return Err(Error::Inconsistent(format!("symbol escapes the vanishing component of degree {i}")));
    }
    alg.coordinates_of_theta(i as usize, &theta)?
        .ok_or_else(|| Error::Inconsistent(format!("symbol lies outside the computed component of degree {i}")))
}

/// The image of the weight-`i` part of `X` in `g_i` at the origin.
pub fn graded_symbol(
    x: &PolyVectorField,
    i: i32,
    model: &GradedCoordinateModel,
    alg: &ProlongedAlgebra,
) -> Result<Element> {
    let order = weighted_order_at_origin(x, model)?;
    if order != i {
        return Err(Error::Inconsistent(format!("weighted order is {order}, not {i}")));
    }
    Ok(Element::new(i, symbol_coords(&homogeneous_part(x, model, i), i, model, alg)?))
}

/// Verdict for one input field.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FieldVerdict {
    pub index: usize,
    pub field: Vec<String>,
    pub symmetry: bool,
    pub weighted_order: Option<i32>,
    pub jet_order: Option<u32>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DegreeReport {
    pub degree: i32,
    pub dim_s: usize,
    pub dim_g: usize,
    pub symbols: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub model: String,
    pub cap: usize,
    pub fields: Vec<FieldVerdict>,
    pub degrees: Vec<DegreeReport>,
    pub total_s: usize,
    pub total_g: usize,
    pub bound_holds: bool,
    /// `dim S^i − dim S^{i+1}` equals the rank of the symbols at every degree.
    pub symbols_injective: bool,
    #[serde(skip)]
    symbol_bases: BTreeMap<i32, Vec<Element>>,
    #[serde(skip)]
    algebra: Option<ProlongedAlgebra>,
}

impl SymmetryReport {
    pub fn dims(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.dim_s).collect()
    }

    pub fn dim_s(&self, degree: i32) -> usize {
        self.degrees.iter().find(|d| d.degree == degree).map_or(0, |d| d.dim_s)
    }

    pub fn symbol_basis(&self, degree: i32) -> &[Element] {
        self.symbol_bases.get(&degree).map_or(&[], Vec::as_slice)
    }

    pub fn algebra(&self) -> Option<&ProlongedAlgebra> {
        self.algebra.as_ref()
    }
}

/// Checks every input, returning one verdict per field.
pub fn verify(symmetries: &[PolyVectorField], model: &GradedCoordinateModel) -> Result<Vec<FieldVerdict>> {
    symmetries
        .par_iter()
        .enumerate()
        .map(|(index, x)| {
            Ok(FieldVerdict {
                index,
                field: x.to_strings(),
                symmetry: is_symmetry(x, model)?,
                weighted_order: weighted_order_at_origin(x, model).ok(),
                jet_order: jet_order(x),
            })
        })
        .collect()
}

/// The filtration `S^j` spanned by the inputs, its graded pieces and their
/// symbols in the Tanaka algebra at the origin up to degree `cap`.
pub fn filtration_report(
    symmetries: &[PolyVectorField],
    model: &GradedCoordinateModel,
    cap: usize,
) -> Result<SymmetryReport> {
    let fields = verify(symmetries, model)?;
    if let Some(bad) = fields.iter().find(|v| !v.symmetry) {
        let res = symmetry_residuals(&symmetries[bad.index], model)?;
        return Err(Error::NotSymmetry(residual_message(bad.index, &symmetries[bad.index], &res)));
    }
    let nu = model.depth() as i32;
    for v in &fields {
        if let Some(o) = v.weighted_order {
            if o < -nu || o > cap as i32 {
                return Err(Error::DegreeOutOfRange(o));
            }
        }
    }
    let alg = model.algebra(cap)?;

    let mut keys: BTreeMap<(usize, Exponent), usize> = BTreeMap::new();
    for x in symmetries {
        for (c, p) in x.components().iter().enumerate() {
            for (e, _) in p.terms() {
                let next = keys.len();
                keys.entry((c, e.clone())).or_insert(next);
            }
        }
    }
    let key_list: Vec<(usize, Exponent)> = {
        let mut v: Vec<_> = keys.iter().map(|(k, &i)| (i, k.clone())).collect();
        v.sort();
        v.into_iter().map(|(_, k)| k).collect()
    };
    let rows = symmetries
        .iter()
        .map(|x| {
            key_list
                .iter()
                .map(|(c, e)| x.component(*c).coefficient(e))
                .collect::<Vec<_>>()
        })
        .collect();
    let span = Subspace::span(key_list.len(), rows)?;
    let key_weight: Vec<i32> = key_list.iter().map(|(c, e)| model.term_weight(e, *c)).collect();
    let level = |j: i32| -> Result<Vec<PolyVectorField>> {
        let low: Vec<usize> = (0..key_list.len()).filter(|&k| key_weight[k] < j).collect();
        let restricted = Matrix::from_rows(
            span.dim(),
            low.iter().map(|&k| span.vectors().map(|v| v[k].clone()).collect()).collect(),
        )?;
        let lambdas = kernel_basis(&restricted);
        Ok(lambdas
            .vectors()
            .map(|l| {
                let coords = span.combine(l);
                let mut comps = vec![Polynomial::zero(model.coords.len()); model.coords.len()];
                for ((c, e), v) in key_list.iter().zip(coords) {
                    comps[*c].add_term(e.clone(), v);
                }
                PolyVectorField::new(model.coords.clone(), comps).expect("same coordinates")
            })
            .collect())
    };

    if !level(cap as i32 + 1)?.is_empty() {
        return Err(Error::DegreeOutOfRange(cap as i32 + 1));
    }
    let mut degrees = Vec::new();
    let mut symbol_bases = BTreeMap::new();
    let mut injective = true;
    let mut bound = true;
    for i in -nu..=cap as i32 {
        let here = level(i)?;
        let above = level(i + 1)?.len();
        let dim_g = alg.dim(i).unwrap_or(0);
        let syms = here
            .iter()
            .map(|x| symbol_coords(&homogeneous_part(x, model, i), i, model, &alg))
            .collect::<Result<Vec<_>>>()?;
        let space = Subspace::span(dim_g, syms)?;
        let dim_s = here.len() - above;
        injective &= space.dim() == dim_s;
        bound &= dim_s <= dim_g;
        let basis: Vec<Element> = space.vectors().map(|v| Element::new(i, v.to_vec())).collect();
        degrees.push(DegreeReport {
            degree: i,
            dim_s,
            dim_g,
            symbols: basis.iter().map(|e| e.coords.iter().map(ToString::to_string).collect()).collect(),
        });
        symbol_bases.insert(i, basis);
    }
    let total_s = degrees.iter().map(|d| d.dim_s).sum();
    let total_g = degrees.iter().map(|d| d.dim_g).sum();
    bound &= total_s <= total_g;
    Ok(SymmetryReport {
        model: model.name.clone(),
        cap,
        fields,
        degrees,
        total_s,
        total_g,
        bound_holds: bound,
        symbols_injective: injective,
        symbol_bases,
        algebra: Some(alg),
    })
}

fn residual_message(index: usize, x: &PolyVectorField, res: &[PolyVectorField]) -> String {
    let mut msg = format!("field {index} `{x}`");
    for (a, r) in res.iter().enumerate() {
        if !r.is_zero() {
            msg.push_str(&format!("; residual against frame field {}: {r}", a + 1));
        }
    }
    msg
}

/// A failed instance of `[s_i, g₋₁] ⊂ s_{i−1}`.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CompatWitness {
    pub degree: i32,
    pub symbol: Vec<String>,
    pub generator: String,
    pub bracket: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BracketCompat {
    pub holds: bool,
    pub witnesses: Vec<CompatWitness>,
}

/// `[s_i, g₋₁] ⊂ s_{i−1}` for every stored symbol and every degree −1 basis vector.
pub fn check_bracket_compat(report: &SymmetryReport, model: &GradedCoordinateModel) -> Result<BracketCompat> {
    let alg = report
        .algebra
        .as_ref()
        .ok_or_else(|| Error::Inconsistent("report carries no algebra".into()))?;
    let nu = model.depth() as i32;
    let d1 = model.gnla.dim_of(-1);
    let mut witnesses = Vec::new();
    for (&i, basis) in &report.symbol_bases {
        if i - 1 < -nu {
            continue;
        }
        let dim = alg.dim(i - 1).unwrap_or(0);
        let target = Subspace::span(dim, report.symbol_basis(i - 1).iter().map(|e| e.coords.clone()).collect())?;
        for s in basis {
            for a in 0..d1 {
                let e = Element::basis(-1, d1, a);
                let b = alg.bracket(s, &e)?;
                if !target.contains(&b.coords)? {
                    witnesses.push(CompatWitness {
                        degree: i,
                        symbol: s.coords.iter().map(ToString::to_string).collect(),
                        generator: model.gnla.names_of(-1)[a].clone(),
                        bracket: b.coords.iter().map(ToString::to_string).collect(),
                    });
                }
            }
        }
    }
    Ok(BracketCompat {
        holds: witnesses.is_empty(),
        witnesses,
    })
}

/// `i/ν + 1 ≤ s ≤ i + 1`: real endpoints and the admissible integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminacyRange {
    pub lower: Scalar,
    pub upper: Scalar,
    pub s_min: u32,
    pub s_max: u32,
}

pub fn jet_determinacy_range(i: u32, nu: u32) -> DeterminacyRange {
    assert!(nu > 0, "depth is positive");
    DeterminacyRange {
        lower: frac(i as i64, nu as i64) + int(1),
        upper: int(i as i64 + 1),
        s_min: Integer::div_ceil(&i, &nu) + 1,
        s_max: i + 1,
    }
}

/// The determinacy inequality for one symmetry of nonnegative order, with
/// the bound `(i+1)/ν ≤ s ≤ i + ν` that weights alone force as a diagnostic.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DeterminacyCheck {
    pub index: usize,
    pub weighted_order: i32,
    pub jet_order: u32,
    pub lower: String,
    pub upper: String,
    pub holds: bool,
    pub weight_lower: String,
    pub weight_bound_holds: bool,
}

pub fn determinacy_table(symmetries: &[PolyVectorField], model: &GradedCoordinateModel) -> Result<Vec<DeterminacyCheck>> {
    let nu = model.depth() as u32;
    let mut out = Vec::new();
    for (index, x) in symmetries.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let i = weighted_order_at_origin(x, model)?;
        if i < 0 {
            continue;
        }
        let s = jet_order(x).expect("nonzero field");
        let r = jet_determinacy_range(i as u32, nu);
        let sv = int(s as i64);
        let weight_lower = frac(i as i64 + 1, nu as i64);
        out.push(DeterminacyCheck {
            index,
            weighted_order: i,
            jet_order: s,
            holds: r.lower <= sv && sv <= r.upper,
            weight_bound_holds: weight_lower <= sv && s as i64 <= i as i64 + nu as i64,
            lower: r.lower.to_string(),
            upper: r.upper.to_string(),
            weight_lower: weight_lower.to_string(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum ModelDoc {
    Named(String),
    Inline {
        #[serde(default)]
        name: Option<String>,
        coords: Vec<String>,
        weights: Vec<u32>,
        frame: Vec<Vec<String>>,
    },
}

/// A model plus candidate symmetries and the degree cap.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub schema_version: Option<u32>,
    pub model: ModelDoc,
    pub symmetries: Vec<Vec<String>>,
    pub cap: usize,
}

impl ScenarioDoc {
    pub fn from_json(src: &str) -> Result<Self> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }

    pub fn build(&self) -> Result<(GradedCoordinateModel, Vec<PolyVectorField>)> {
        let model = match &self.model {
            ModelDoc::Named(n) => GradedCoordinateModel::named(n)?,
            ModelDoc::Inline {
                name,
                coords,
                weights,
                frame,
            } => {
                let frame = frame
                    .iter()
                    .map(|f| PolyVectorField::parse(coords, f))
                    .collect::<Result<Vec<_>>>()?;
                GradedCoordinateModel::new(name.clone().unwrap_or_else(|| "inline".into()), coords.clone(), weights.clone(), frame)?
            }
        };
        let syms = self
            .symmetries
            .iter()
            .map(|f| PolyVectorField::parse(&model.coords, f))
            .collect::<Result<Vec<_>>>()?;
        Ok((model, syms))
    }
}

/// Everything the scenario runner computes.
#[derive(Clone, Debug, Serialize)]
pub struct ScenarioOutcome {
    pub schema_version: u32,
    pub report: SymmetryReport,
    pub compat: BracketCompat,
    pub determinacy: Vec<DeterminacyCheck>,
}

pub fn run_scenario(doc: &ScenarioDoc) -> Result<ScenarioOutcome> {
    let (model, syms) = doc.build()?;
    let report = filtration_report(&syms, &model, doc.cap)?;
    let compat = check_bracket_compat(&report, &model)?;
    let determinacy = determinacy_table(&syms, &model)?;
    Ok(ScenarioOutcome {
        schema_version: 1,
        report,
        compat,
        determinacy,
    })
}

impl ScenarioDoc {
    /// All homogeneous symmetries of weighted order `−ν..=max_order`, with
    /// the model written inline.
    pub fn graded(model: &GradedCoordinateModel, max_order: i32, cap: usize) -> Result<Self> {
        let mut symmetries = Vec::new();
        for o in -(model.depth() as i32)..=max_order {
            symmetries.extend(homogeneous_symmetries(model, o)?.iter().map(PolyVectorField::to_strings));
        }
        Ok(Self {
            schema_version: Some(1),
            model: ModelDoc::Inline {
                name: Some(model.name.clone()),
                coords: model.coords.clone(),
                weights: model.weights.clone(),
                frame: model.frame.iter().map(PolyVectorField::to_strings).collect(),
            },
            symmetries,
            cap,
        })
    }
}

/// Moves a contact field on `(x, u, p)` to the symmetric Heisenberg chart
/// `(x, y, z) = (x, p, xp/2 − u)`.
pub fn contact_field_to_heisenberg(f: &PolyVectorField) -> Result<PolyVectorField> {
    if f.coords() != contact_names(2).as_slice() {
        return Err(Error::Inconsistent("expected a field on (x1, u, p1)".into()));
    }
    let src = contact_names(2);
    let chart = [
        Polynomial::parse("x1", &src)?,
        Polynomial::parse("p1", &src)?,
        Polynomial::parse("x1*p1/2 - u", &src)?,
    ];
    let xyz: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let inverse = [
        Polynomial::parse("x", &xyz)?,
        Polynomial::parse("x*y/2 - z", &xyz)?,
        Polynomial::parse("y", &xyz)?,
    ];
    let comps = chart.iter().map(|c| f.apply(c).substitute(&inverse)).collect();
    PolyVectorField::new(xyz, comps)
}

/// The contact fields of the Lagrangian-reduced tower in three dimensions,
/// an `sl(3)` of symmetries of the Heisenberg model.
pub fn sl3_symmetries() -> Result<Vec<PolyVectorField>> {
    let n = 2;
    let mut hams: Vec<WeightedPolynomial> = Vec::new();
    for k in [-2, -1] {
        let b = contact_component(n, k);
        hams.extend((0..b.dim()).map(|i| b.polynomial(n, i)));
    }
    let tower = reduced_contact_tower(n, &lagrangian_contact_g0(n), 3)?;
    for (k, space) in tower.iter().enumerate() {
        hams.extend(hamiltonians(n, &contact_component(n, k as i32), space));
    }
    hams.iter()
        .map(|h| contact_field_to_heisenberg(&contact_vector_field(h)))
        .collect()
}

pub fn sl3_scenario() -> Result<ScenarioDoc> {
    Ok(ScenarioDoc {
        schema_version: Some(1),
        model: ModelDoc::Named("heisenberg".into()),
        symmetries: sl3_symmetries()?.iter().map(PolyVectorField::to_strings).collect(),
        cap: 3,
    })
}
