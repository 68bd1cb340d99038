//! Tanaka prolongation of a fundamental graded nilpotent Lie algebra, with
//! optional reductions of the non-negative components.
//!
//! A degree-`k` element is stored through its restriction to degree −1: a
//! block `θ` of length `dim g₋₁ · dim g_{k−1}`, laid out row-major by source,
//! so `θ[a·T + j]` is the `j`-th coordinate of `[u, e_a]`. Its action on the
//! deeper negative degrees is recovered from the derivation rule.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graded::{block_matrix, BracketTerm, Gnla, GnlaDoc};
use crate::linalg::{axpy, is_zero_vec, kernel_basis, unit_vec, zero_vec, Matrix, Scalar, Subspace};

pub const DEFAULT_MAX_DEGREE: usize = 6;

/// An element of a single graded component, in that component's basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub degree: i32,
    pub coords: Vec<Scalar>,
}

impl Element {
    pub fn new(degree: i32, coords: Vec<Scalar>) -> Self {
        Self { degree, coords }
    }

    pub fn basis(degree: i32, dim: usize, i: usize) -> Self {
        Self::new(degree, unit_vec(dim, i))
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.coords)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReductionKind {
    /// `AᵀG + GA = 0` for a nondegenerate symmetric form `G` on degree −1.
    Orthogonal(Matrix),
    /// `AᵀG + GA = λG`.
    Conformal(Matrix),
    /// `AJ = JA` for `J² = −1`.
    Complex(Matrix),
    /// Every iterated bracket with degree −1 that lands in degree 0 is trace-free on degree −1.
    TraceFreeDivergence,
    /// An explicit span of θ-blocks.
    Custom(Subspace),
}

impl ReductionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ReductionKind::Orthogonal(_) => "orthogonal",
            ReductionKind::Conformal(_) => "conformal",
            ReductionKind::Complex(_) => "complex",
            ReductionKind::TraceFreeDivergence => "trace-free-divergence",
            ReductionKind::Custom(_) => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionSpec {
    pub degree: usize,
    pub kind: ReductionKind,
}

impl ReductionSpec {
    pub fn new(degree: usize, kind: ReductionKind) -> Self {
        Self { degree, kind }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ReductionAudit {
    pub degree: usize,
    pub kind: String,
    pub dim_before: usize,
    pub dim_after: usize,
    /// Pairs `[g₀ basis, reduction basis]` that leave the reduced component.
    pub invariance_violations: Vec<String>,
}

#[derive(Clone, Debug)]
struct Component {
    space: Subspace,
    /// `action[b][x]`: `[basis_b, m_x]` in coordinates of degree `k + deg x`.
    action: Vec<Vec<Vec<Scalar>>>,
}

/// Solution of the derivation system one degree above the computed tower.
#[derive(Clone, Debug)]
pub struct StepSolution {
    pub degree: usize,
    pub space: Subspace,
    /// Per negative basis element `x`: θ ↦ `[u, x]`.
    extension: Vec<Matrix>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DimensionTable {
    /// Degrees −ν through −1.
    pub negative: Vec<usize>,
    /// Degrees 0 upwards; ends with the zero component when of finite type.
    pub nonnegative: Vec<usize>,
    pub total: usize,
    pub finite_type: Option<usize>,
    /// Highest computed degree when the tower was cut off before vanishing.
    pub truncated_at: Option<usize>,
}

impl fmt::Debug for ProlongedAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProlongedAlgebra {}", self.dims())
    }
}

impl fmt::Display for DimensionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ");
        write!(f, "({} | {})", join(&self.negative), join(&self.nonnegative))?;
        match (self.finite_type, self.truncated_at) {
            (Some(k), _) => write!(f, "  total {}  finite type, g_{k} = 0", self.total),
            (None, Some(k)) => write!(f, "  total {} (truncated at degree {k})", self.total),
            _ => write!(f, "  total {}", self.total),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiViolation {
    /// `(degree, index)` of the three basis elements.
    pub triple: [(i32, usize); 3],
}

/// Agreement between the one-step recursion and the direct description of a
/// reduced component as elements whose iterated brackets land in the reduction.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FormulaCheck {
    pub reduction_degree: usize,
    pub degree: usize,
    pub recursive: usize,
    pub direct: usize,
}

#[derive(Clone)]
pub struct ProlongedAlgebra {
    base: Gnla,
    expressions: Vec<Vec<BracketTerm>>,
    components: Vec<Component>,
    tables: BTreeMap<(usize, usize), Vec<Vec<Vec<Scalar>>>>,
    reductions: Vec<ReductionSpec>,
    constraints: BTreeMap<usize, Subspace>,
    audit: Vec<ReductionAudit>,
    finite_type: Option<usize>,
}

impl ProlongedAlgebra {
    /// Starts an empty tower over `m`; fails when `m` is not fundamental.
    pub fn new(m: Gnla) -> Result<Self> {
        if !m.is_fundamental() {
            return Err(Error::NotFundamental(
                "degree -1 does not generate the negative part".into(),
            ));
        }
        let expressions = m.bracket_expressions()?;
        Ok(Self {
            base: m,
            expressions,
            components: Vec::new(),
            tables: BTreeMap::new(),
            reductions: Vec::new(),
            constraints: BTreeMap::new(),
            audit: Vec::new(),
            finite_type: None,
        })
    }

    pub fn base(&self) -> &Gnla {
        &self.base
    }

    pub fn depth(&self) -> usize {
        self.base.depth()
    }

    /// Highest degree held explicitly, or `None` before degree 0 exists.
    pub fn top_degree(&self) -> Option<usize> {
        self.components.len().checked_sub(1)
    }

    pub fn finite_type(&self) -> Option<usize> {
        self.finite_type
    }

    pub fn audit(&self) -> &[ReductionAudit] {
        &self.audit
    }

    pub fn reductions(&self) -> &[ReductionSpec] {
        &self.reductions
    }

    /// Dimension of degree `d`, or `None` beyond the computed range.
    pub fn dim(&self, d: i32) -> Option<usize> {
        if d < 0 {
            return Some(self.base.dim_of(d));
        }
        if let Some(c) = self.components.get(d as usize) {
            return Some(c.space.dim());
        }
        self.finite_type.map(|_| 0)
    }

    fn dim_known(&self, d: i32) -> usize {
        self.dim(d).expect("degree inside the computed range")
    }

    /// θ-space of degree `k ≥ 0`: the component as a subspace of
    /// `Hom(g₋₁, g_{k−1})`.
    pub fn component_space(&self, k: usize) -> Option<&Subspace> {
        self.components.get(k).map(|c| &c.space)
    }

    pub fn theta_len(&self, k: usize) -> usize {
        self.base.dim_of(-1) * self.dim_known(k as i32 - 1)
    }

    /// Coordinates of a θ-block in degree `k`, or `None` if it is not an element.
    pub fn coordinates_of_theta(&self, k: usize, theta: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
        let c = self
            .components
            .get(k)
            .ok_or(Error::DegreeOutOfRange(k as i32))?;
        c.space.coordinates(theta)
    }

    pub fn theta_of(&self, e: &Element) -> Result<Vec<Scalar>> {
        if e.degree < 0 {
            return Err(Error::DegreeOutOfRange(e.degree));
        }
        let c = self
            .components
            .get(e.degree as usize)
            .ok_or(Error::DegreeOutOfRange(e.degree))?;
        Ok(c.space.combine(&e.coords))
    }

    /// Matrix of `Z ↦ [Z, y]` on degree `p`, for a negative basis element `y`.
    fn right_action(&self, p: i32, y: usize) -> Matrix {
        let dy = self.base.degree(y);
        let rows = self.dim_known(p + dy);
        let cols = self.dim_known(p);
        let mut m = Matrix::zeros(rows, cols);
        if rows == 0 || cols == 0 {
            return m;
        }
        if p < 0 {
            for (j, z) in self.base.range(p).enumerate() {
                for (r, v) in self.base.bracket_local(z, y).into_iter().enumerate() {
                    m.set(r, j, v);
                }
            }
        } else {
            let c = &self.components[p as usize];
            for (j, act) in c.action.iter().enumerate() {
                for (r, v) in act[y].iter().enumerate() {
                    m.set(r, j, v.clone());
                }
            }
        }
        m
    }

    /// Solves for the next degree without reductions.
    pub fn solve_step(&self) -> Result<StepSolution> {
        let k = self.components.len() as i32;
        let m = &self.base;
        let d1 = m.dim_of(-1);
        let t = self.dim_known(k - 1);
        let u = d1 * t;
        let n = m.dim();
        let mut ext: Vec<Matrix> = vec![Matrix::zeros(0, u); n];
        for (a, x) in m.range(-1).enumerate() {
            let mut e = Matrix::zeros(t, u);
            for j in 0..t {
                e.set(j, a * t + j, Scalar::one());
            }
            ext[x] = e;
        }
        for d in 2..=m.depth() as i32 {
            for x in m.range(-d) {
                let mut acc = Matrix::zeros(self.dim_known(k - d), u);
                for BracketTerm { coef, generator, inner } in &self.expressions[x] {
                    let dy = m.degree(*inner);
                    let first = self.right_action(k - 1, *inner).mul(&ext[*generator])?;
                    let second = self.right_action(k + dy, *generator).mul(&ext[*inner])?;
                    acc.add_scaled(coef, &first)?;
                    acc.add_scaled(&-coef.clone(), &second)?;
                }
                ext[x] = acc;
            }
        }
        let mut constraints = Matrix::zeros(0, u);
        for x in 0..n {
            for y in x + 1..n {
                let (dx, dy) = (m.degree(x), m.degree(y));
                let rows = self.dim_known(k + dx + dy);
                if rows == 0 {
                    continue;
                }
                let mut acc = Matrix::zeros(rows, u);
                let xy = m.bracket(x, y);
                for z in m.range(dx + dy) {
                    if !xy[z].is_zero() {
                        acc.add_scaled(&xy[z], &ext[z])?;
                    }
                }
                acc.add_scaled(&-Scalar::one(), &self.right_action(k + dx, y).mul(&ext[x])?)?;
                acc.add_scaled(&Scalar::one(), &self.right_action(k + dy, x).mul(&ext[y])?)?;
                for r in 0..rows {
                    if !is_zero_vec(acc.row(r)) {
                        constraints.push_row(acc.row(r).to_vec());
                    }
                }
            }
        }
        Ok(StepSolution {
            degree: k as usize,
            space: kernel_basis(&constraints),
            extension: ext,
        })
    }

    fn install(&mut self, sol: &StepSolution, space: Subspace) {
        let action = space
            .vectors()
            .map(|v| sol.extension.iter().map(|e| e.mul_vec(v)).collect())
            .collect();
        let comp = Component { space, action };
        if self.components.len() == sol.degree {
            self.components.push(comp);
        } else {
            self.components[sol.degree] = comp;
        }
    }

    /// `[u, v]` for a degree-`p ≥ 0` basis element `u` and an element `w` of degree `q ≥ −1`.
    fn bracket_basis_with(&self, p: usize, i: usize, q: i32, w: &[Scalar]) -> Result<Vec<Scalar>> {
        let target = p as i32 + q;
        let mut out = zero_vec(self.dim(target).ok_or(Error::DegreeOutOfRange(target))?);
        if out.is_empty() {
            return Ok(out);
        }
        if q < 0 {
            let act = &self.components[p].action[i];
            for (l, c) in w.iter().enumerate() {
                let y = self.base.range(q).start + l;
                axpy(&mut out, c, &act[y]);
            }
            return Ok(out);
        }
        let q = q as usize;
        let (table, swap) = if p <= q {
            (self.tables.get(&(p, q)), false)
        } else {
            (self.tables.get(&(q, p)), true)
        };
        let table = table.ok_or(Error::DegreeOutOfRange(target))?;
        for (l, c) in w.iter().enumerate() {
            if swap {
                axpy(&mut out, &-c.clone(), &table[l][i]);
            } else {
                axpy(&mut out, c, &table[i][l]);
            }
        }
        Ok(out)
    }

    /// θ-block of the bracket of basis elements `u ∈ g_p`, `v ∈ g_q`.
    fn bracket_block(&self, p: usize, i: usize, q: usize, j: usize) -> Result<Vec<Scalar>> {
        let m = &self.base;
        let target_below = (p + q) as i32 - 1;
        let t = self.dim_known(target_below);
        let mut theta = zero_vec(m.dim_of(-1) * t);
        for (a, e) in m.range(-1).enumerate() {
            let ve = &self.components[q].action[j][e];
            let ue = &self.components[p].action[i][e];
            let first = self.bracket_basis_with(p, i, q as i32 - 1, ve)?;
            let second = self.bracket_basis_with(q, j, p as i32 - 1, ue)?;
            for r in 0..t {
                theta[a * t + r] = &first[r] - &second[r];
            }
        }
        Ok(theta)
    }

    fn build_tables(&mut self, k: usize) -> Result<()> {
        for p in 0..=k / 2 {
            let q = k - p;
            let (dp, dq) = (self.components[p].space.dim(), self.components[q].space.dim());
            let rows: Vec<Vec<Vec<Scalar>>> = (0..dp)
                .into_par_iter()
                .map(|i| {
                    (0..dq)
                        .map(|j| {
                            let theta = self.bracket_block(p, i, q, j)?;
                            self.components[k].space.coordinates(&theta)?.ok_or_else(|| {
                                Error::Inconsistent(format!(
                                    "bracket of degrees {p} and {q} leaves degree {k}"
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            self.tables.insert((p, q), rows);
        }
        Ok(())
    }

    /// Computes, reduces and installs the next degree.
    pub fn advance(&mut self, reductions: &[ReductionSpec]) -> Result<usize> {
        let sol = self.solve_step()?;
        let k = sol.degree;
        self.install(&sol, sol.space.clone());
        let mut constraint: Option<Subspace> = None;
        for spec in reductions {
            if spec.degree != k {
                return Err(Error::Reduction {
                    degree: spec.degree as i32,
                    reason: format!("applied while computing degree {k}"),
                });
            }
            let before = self.components[k].space.clone();
            let s = make_reduction(spec, self)?;
            let reduced = before.intersect(&s)?;
            if matches!(spec.kind, ReductionKind::Custom(_)) && !s.is_subspace_of(&before)? {
                return Err(Error::Reduction {
                    degree: k as i32,
                    reason: "custom span is not contained in the computed component".into(),
                });
            }
            if k == 0 && matches!(spec.kind, ReductionKind::Custom(_)) {
                check_subalgebra(&reduced, self.base.dim_of(-1))?;
            }
            self.install(&sol, reduced.clone());
            let mut violations = Vec::new();
            if k > 0 && matches!(spec.kind, ReductionKind::Custom(_)) {
                violations = self.invariance_violations(k, &reduced)?;
            }
            self.audit.push(ReductionAudit {
                degree: k,
                kind: spec.kind.name().into(),
                dim_before: before.dim(),
                dim_after: reduced.dim(),
                invariance_violations: violations,
            });
            self.reductions.push(spec.clone());
            constraint = Some(match constraint {
                None => s,
                Some(c) => c.intersect(&s)?,
            });
        }
        if let Some(c) = constraint {
            self.constraints.insert(k, c);
        }
        self.build_tables(k)?;
        if self.components[k].space.is_zero() {
            self.finite_type = Some(k);
        }
        Ok(self.components[k].space.dim())
    }

    /// `[w, s]` for `w` in degree 0 and `s` a θ-block of degree `k`, as a θ-block.
    fn g0_bracket_theta(&self, w: usize, k: usize, s: &[Scalar]) -> Result<Vec<Scalar>> {
        let m = &self.base;
        let d1 = m.dim_of(-1);
        let t = self.dim_known(k as i32 - 1);
        let mut out = zero_vec(d1 * t);
        for (a, e) in m.range(-1).enumerate() {
            let se = &s[a * t..(a + 1) * t];
            let first = self.bracket_basis_with(0, w, k as i32 - 1, se)?;
            let we = &self.components[0].action[w][e];
            for r in 0..t {
                let mut v = first[r].clone();
                for (b, c) in we.iter().enumerate() {
                    if !c.is_zero() {
                        v -= c * &s[b * t + r];
                    }
                }
                out[a * t + r] = v;
            }
        }
        Ok(out)
    }

    fn invariance_violations(&self, k: usize, reduced: &Subspace) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for w in 0..self.components[0].space.dim() {
            for (j, s) in reduced.vectors().enumerate() {
                let b = self.g0_bracket_theta(w, k, s)?;
                if !reduced.contains(&b)? {
                    out.push(format!("[g0 basis {w}, g{k} basis {j}]"));
                }
            }
        }
        Ok(out)
    }

    /// Bracket of two homogeneous elements.
    pub fn bracket(&self, u: &Element, v: &Element) -> Result<Element> {
        let target = u.degree + v.degree;
        let dim = self.dim(target).ok_or(Error::DegreeOutOfRange(target))?;
        for e in [u, v] {
            let d = self.dim(e.degree).ok_or(Error::DegreeOutOfRange(e.degree))?;
            if e.coords.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: e.coords.len(),
                });
            }
        }
        let mut out = zero_vec(dim);
        if dim == 0 {
            return Ok(Element::new(target, out));
        }
        match (u.degree < 0, v.degree < 0) {
            (true, true) => {
                let full = |e: &Element| {
                    let mut x = zero_vec(self.base.dim());
                    let r = self.base.range(e.degree);
                    x[r].clone_from_slice(&e.coords);
                    x
                };
                let b = self.base.bracket_vec(&full(u), &full(v));
                out.clone_from_slice(&b[self.base.range(target)]);
            }
            (false, true) => {
                let p = u.degree as usize;
                for (i, c) in u.coords.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                    let act = &self.components[p].action[i];
                    for (l, d) in v.coords.iter().enumerate().filter(|(_, d)| !d.is_zero()) {
                        let y = self.base.range(v.degree).start + l;
                        axpy(&mut out, &(c * d), &act[y]);
                    }
                }
            }
            (true, false) => {
                let r = self.bracket(v, u)?;
                return Ok(Element::new(target, r.coords.into_iter().map(|x| -x).collect()));
            }
            (false, false) => {
                let p = u.degree as usize;
                for (i, c) in u.coords.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                    let w = self.bracket_basis_with(p, i, v.degree, &v.coords)?;
                    axpy(&mut out, c, &w);
                }
            }
        }
        Ok(Element::new(target, out))
    }

    /// Basis elements of degree −ν through `top`.
    fn basis_list(&self, top: usize) -> Vec<(i32, usize)> {
        let mut out = Vec::new();
        for d in -(self.depth() as i32)..=top as i32 {
            for i in 0..self.dim(d).unwrap_or(0) {
                out.push((d, i));
            }
        }
        out
    }

    fn unit(&self, (d, i): (i32, usize)) -> Element {
        Element::basis(d, self.dim_known(d), i)
    }

    fn computable(&self, d: i32) -> bool {
        self.dim(d).is_some()
    }

    /// Pairs of basis elements violating `[x, y] = −[y, x]`.
    pub fn antisymmetry_violations(&self, depth: Option<usize>) -> Result<Vec<((i32, usize), (i32, usize))>> {
        let top = self.check_depth(depth)?;
        let basis = self.basis_list(top);
        let mut out = Vec::new();
        for (ix, &x) in basis.iter().enumerate() {
            for &y in &basis[ix..] {
                if !self.computable(x.0 + y.0) || x.0 + y.0 > top as i32 {
                    continue;
                }
                let a = self.bracket(&self.unit(x), &self.unit(y))?;
                let b = self.bracket(&self.unit(y), &self.unit(x))?;
                if a.coords.iter().zip(&b.coords).any(|(p, q)| !(p + q).is_zero()) {
                    out.push((x, y));
                }
            }
        }
        Ok(out)
    }

    fn check_depth(&self, depth: Option<usize>) -> Result<usize> {
        let top = self.top_degree().ok_or(Error::DegreeOutOfRange(0))?;
        match depth {
            Some(d) if d > top && self.finite_type.is_none() => Err(Error::DegreeOutOfRange(d as i32)),
            Some(d) => Ok(d.min(top)),
            None => Ok(top),
        }
    }

    /// Basis triples, all of whose partial brackets lie within `depth`,
    /// for which the Jacobi sum does not vanish.
    pub fn verify_graded_jacobi(&self, depth: Option<usize>) -> Result<Vec<JacobiViolation>> {
        let top = self.check_depth(depth)? as i32;
        let basis = self.basis_list(top as usize);
        let ok = |d: i32| d <= top && self.computable(d);
        let found: Vec<Vec<JacobiViolation>> = (0..basis.len())
            .into_par_iter()
            .map(|ix| {
                let x = basis[ix];
                let mut local = Vec::new();
                for iy in ix + 1..basis.len() {
                    let y = basis[iy];
                    if !ok(x.0 + y.0) {
                        continue;
                    }
                    for &z in &basis[iy + 1..] {
                        if !ok(x.0 + z.0) || !ok(y.0 + z.0) || !ok(x.0 + y.0 + z.0) {
                            continue;
                        }
                        let (ex, ey, ez) = (self.unit(x), self.unit(y), self.unit(z));
                        let t1 = self.bracket(&ex, &self.bracket(&ey, &ez)?)?;
                        let t2 = self.bracket(&ey, &self.bracket(&ez, &ex)?)?;
                        let t3 = self.bracket(&ez, &self.bracket(&ex, &ey)?)?;
                        let mut sum = t1.coords;
                        axpy(&mut sum, &Scalar::one(), &t2.coords);
                        axpy(&mut sum, &Scalar::one(), &t3.coords);
                        if !is_zero_vec(&sum) {
                            local.push(JacobiViolation { triple: [x, y, z] });
                        }
                    }
                }
                Ok(local)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(found.into_iter().flatten().collect())
    }

    pub fn dims(&self) -> DimensionTable {
        let negative = self.base.dims();
        let nonnegative: Vec<usize> = self.components.iter().map(|c| c.space.dim()).collect();
        let total = negative.iter().sum::<usize>() + nonnegative.iter().sum::<usize>();
        DimensionTable {
            negative,
            truncated_at: match self.finite_type {
                Some(_) => None,
                None => self.top_degree(),
            },
            nonnegative,
            total,
            finite_type: self.finite_type,
        }
    }

    /// The derivation acting by `k` on degree `k`, when it lies in degree 0.
    pub fn grading_element(&self) -> Option<Element> {
        let d1 = self.base.dim_of(-1);
        let c = self.components.first()?;
        let mut theta = zero_vec(d1 * d1);
        for a in 0..d1 {
            theta[a * d1 + a] = -Scalar::one();
        }
        let coords = c.space.coordinates(&theta).ok()??;
        Some(Element::new(0, coords))
    }

    /// Recomputes each reduced component directly: with `S_i` the reduction
    /// imposed at degree `i`, degree `i + s` consists of the elements of the
    /// prolongation of everything below `i` whose `s`-fold brackets with
    /// degree −1 land in `S_i`. Runs up to the next reduction or the top.
    pub fn check_reduction_formula(&self) -> Result<Vec<FormulaCheck>> {
        let top = match self.top_degree() {
            Some(t) => t,
            None => return Ok(Vec::new()),
        };
        let degrees: Vec<usize> = self.constraints.keys().copied().collect();
        let mut out = Vec::new();
        for (ri, &i) in degrees.iter().enumerate() {
            let stop = degrees.get(ri + 1).map_or(top, |&n| (n - 1).min(top));
            let below: Vec<ReductionSpec> = self.reductions.iter().filter(|r| r.degree < i).cloned().collect();
            let mut tower = Self::new(self.base.clone())?;
            for k in 0..=stop {
                let here: Vec<ReductionSpec> = below.iter().filter(|r| r.degree == k).cloned().collect();
                tower.advance(&here)?;
            }
            let ann = self.constraints[&i].annihilator();
            let comp_i = &tower.components[i].space;
            let d1 = self.base.dim_of(-1);
            for s in 0..=stop - i {
                // functionals on degree i + s whose kernel is the direct description
                let mut funcs: Vec<Vec<Scalar>> = Vec::new();
                for a in ann.vectors() {
                    let f: Vec<Scalar> = comp_i.vectors().map(|v| dot(a, v)).collect();
                    funcs.push(f);
                }
                for level in i + 1..=i + s {
                    let mut next = Vec::new();
                    for e in self.base.range(-1) {
                        let r = tower.right_action(level as i32, e);
                        for f in &funcs {
                            next.push(vec_mat(f, &r));
                        }
                    }
                    funcs = Subspace::span(tower.dim_known(level as i32), next)?.basis().row_vecs();
                }
                let _ = d1;
                let n = tower.dim_known((i + s) as i32);
                let direct = n - Subspace::span(n, funcs)?.dim();
                out.push(FormulaCheck {
                    reduction_degree: i,
                    degree: i + s,
                    recursive: self.dim_known((i + s) as i32),
                    direct,
                });
            }
        }
        Ok(out)
    }

    pub fn report(&self) -> ProlongationReport {
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(k, c)| ComponentReport {
                degree: k,
                dim: c.space.dim(),
                basis: c
                    .space
                    .vectors()
                    .map(|v| v.iter().map(|x| x.to_string()).collect())
                    .collect(),
            })
            .collect();
        ProlongationReport {
            schema_version: 1,
            base: self.base.to_doc(),
            dims: self.dims(),
            components,
            reductions: self.audit.clone(),
        }
    }
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

/// Row vector `f` times matrix `m`.
fn vec_mat(f: &[Scalar], m: &Matrix) -> Vec<Scalar> {
    let mut out = zero_vec(m.cols());
    for (r, c) in f.iter().enumerate() {
        axpy(&mut out, c, m.row(r));
    }
    out
}

fn check_subalgebra(space: &Subspace, d1: usize) -> Result<()> {
    let mats: Vec<Matrix> = space.vectors().map(|v| block_matrix(v, d1, d1)).collect();
    for (i, a) in mats.iter().enumerate() {
        for b in &mats[i + 1..] {
            let mut c = a.mul(b)?;
            c.add_scaled(&-Scalar::one(), &b.mul(a)?)?;
            let mut theta = zero_vec(d1 * d1);
            for s in 0..d1 {
                for t in 0..d1 {
                    theta[s * d1 + t] = c.get(t, s).clone();
                }
            }
            if !space.contains(&theta)? {
                return Err(Error::Reduction {
                    degree: 0,
                    reason: "degree-0 reduction is not closed under brackets".into(),
                });
            }
        }
    }
    Ok(())
}

fn check_form(degree: usize, g: &Matrix, d1: usize, what: &str) -> Result<()> {
    let bad = |reason: String| Error::Reduction {
        degree: degree as i32,
        reason,
    };
    if degree != 0 {
        return Err(bad(format!("{what} reductions act on degree 0 only")));
    }
    if g.rows() != d1 || g.cols() != d1 {
        return Err(bad(format!("{what} matrix must be {d1}x{d1}")));
    }
    if crate::linalg::rank(g) != d1 {
        return Err(bad(format!("{what} matrix is degenerate")));
    }
    Ok(())
}

/// Linear conditions on a degree-0 θ-block `U` (`target × source`, `U[j][a] = θ[a·d + j]`)
/// expressing `coefficient(U)[r][c] = 0`, where the coefficient is bilinear in a fixed matrix.
fn theta_index(d: usize, target: usize, source: usize) -> usize {
    source * d + target
}

/// The subspace of θ-blocks cut out by a reduction, in the ambient of its degree.
pub fn make_reduction(spec: &ReductionSpec, alg: &ProlongedAlgebra) -> Result<Subspace> {
    let m = alg.base();
    let d1 = m.dim_of(-1);
    let k = spec.degree;
    let ambient = alg.theta_len(k);
    match &spec.kind {
        ReductionKind::Orthogonal(g) | ReductionKind::Conformal(g) => {
            let what = spec.kind.name();
            check_form(k, g, d1, what)?;
            if g != &g.transpose() {
                return Err(Error::Reduction {
                    degree: 0,
                    reason: format!("{what} form must be symmetric"),
                });
            }
            let conformal = matches!(spec.kind, ReductionKind::Conformal(_));
            let cols = ambient + usize::from(conformal);
            let mut rows = Matrix::zeros(0, cols);
            // (UᵀG + GU)[a][b] = Σ_j U[j][a] G[j][b] + Σ_j G[a][j] U[j][b]
            for a in 0..d1 {
                for b in a..d1 {
                    let mut row = zero_vec(cols);
                    for j in 0..d1 {
                        row[theta_index(d1, j, a)] += g.get(j, b);
                        row[theta_index(d1, j, b)] += g.get(a, j);
                    }
                    if conformal {
                        row[ambient] = -g.get(a, b).clone();
                    }
                    rows.push_row(row);
                }
            }
            let ker = kernel_basis(&rows);
            let projected = ker.vectors().map(|v| v[..ambient].to_vec()).collect();
            Subspace::span(ambient, projected)
        }
        ReductionKind::Complex(j) => {
            check_form(k, j, d1, "complex")?;
            let mut sq = j.mul(j)?;
            sq.add_scaled(&Scalar::one(), &Matrix::identity(d1))?;
            if !sq.is_zero() {
                return Err(Error::Reduction {
                    degree: 0,
                    reason: "complex structure must square to -1".into(),
                });
            }
            let mut rows = Matrix::zeros(0, ambient);
            // (UJ − JU)[t][s] = Σ_b U[t][b] J[b][s] − Σ_b J[t][b] U[b][s]
            for t in 0..d1 {
                for s in 0..d1 {
                    let mut row = zero_vec(ambient);
                    for b in 0..d1 {
                        row[theta_index(d1, t, b)] += j.get(b, s);
                        row[theta_index(d1, b, s)] -= j.get(t, b);
                    }
                    rows.push_row(row);
                }
            }
            Ok(kernel_basis(&rows))
        }
        ReductionKind::TraceFreeDivergence => {
            let comp = alg
                .component_space(k)
                .ok_or(Error::DegreeOutOfRange(k as i32))?;
            let comp0 = alg.component_space(0).ok_or(Error::DegreeOutOfRange(0))?;
            let trace: Vec<Scalar> = comp0
                .vectors()
                .map(|v| (0..d1).fold(Scalar::zero(), |acc, a| acc + &v[theta_index(d1, a, a)]))
                .collect();
            let mut funcs = vec![trace];
            for level in 1..=k {
                let mut next = Vec::new();
                for e in m.range(-1) {
                    let r = alg.right_action(level as i32, e);
                    for f in &funcs {
                        next.push(vec_mat(f, &r));
                    }
                }
                funcs = Subspace::span(alg.dim_known(level as i32), next)?.basis().row_vecs();
            }
            let n = comp.dim();
            let f = Matrix::from_rows(n, funcs)?;
            let ker = kernel_basis(&f);
            Subspace::span(ambient, ker.vectors().map(|c| comp.combine(c)).collect())
        }
        ReductionKind::Custom(s) => {
            if s.ambient_dim() != ambient {
                return Err(Error::Reduction {
                    degree: k as i32,
                    reason: format!("custom span has length {}, expected {ambient}", s.ambient_dim()),
                });
            }
            Ok(s.clone())
        }
    }
}

/// Prolongs `m` up to `max_degree`, stopping early at the first vanishing degree.
///
/// `g0`, when given, is a subalgebra of degree-0 derivations (as θ-blocks)
/// and is applied as the first degree-0 reduction.
pub fn prolong(
    m: &Gnla,
    g0: Option<&Subspace>,
    reductions: &[ReductionSpec],
    max_degree: usize,
) -> Result<ProlongedAlgebra> {
    for w in reductions.windows(2) {
        if w[0].degree >= w[1].degree {
            return Err(Error::Reduction {
                degree: w[1].degree as i32,
                reason: "reduction degrees must be strictly increasing".into(),
            });
        }
    }
    let mut all = Vec::new();
    if let Some(s) = g0 {
        all.push(ReductionSpec::new(0, ReductionKind::Custom(s.clone())));
    }
    all.extend(reductions.iter().cloned());
    if let Some(r) = all.iter().find(|r| r.degree > max_degree) {
        return Err(Error::Reduction {
            degree: r.degree as i32,
            reason: format!("beyond the maximal degree {max_degree}"),
        });
    }
    let mut alg = ProlongedAlgebra::new(m.clone())?;
    for k in 0..=max_degree {
        let here: Vec<ReductionSpec> = all.iter().filter(|r| r.degree == k).cloned().collect();
        alg.advance(&here)?;
        if alg.finite_type.is_some() {
            break;
        }
    }
    Ok(alg)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub degree: usize,
    pub dim: usize,
    pub basis: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProlongationReport {
    pub schema_version: u32,
    pub base: GnlaDoc,
    pub dims: DimensionTable,
    pub components: Vec<ComponentReport>,
    pub reductions: Vec<ReductionAudit>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frac, int};

    #[test]
    fn abelian_two_is_infinite() {
        let a = prolong(&Gnla::abelian(2), None, &[], 3).unwrap();
        // polynomial vector fields: 2 · C(k+2, 1+k) ... dims 4, 6, 8, 10
        assert_eq!(a.dims().nonnegative, vec![4, 6, 8, 10]);
        assert_eq!(a.dims().truncated_at, Some(3));
        assert!(a.verify_graded_jacobi(None).unwrap().is_empty());
    }

    #[test]
    fn heisenberg_one_is_contact() {
        let a = prolong(&Gnla::heisenberg(1), None, &[], 3).unwrap();
        assert_eq!(a.dims().nonnegative, vec![4, 6, 9, 12]);
        assert!(a.verify_graded_jacobi(None).unwrap().is_empty());
        assert!(a.antisymmetry_violations(None).unwrap().is_empty());
    }

    #[test]
    fn orthogonal_plane_is_finite() {
        let g = Matrix::identity(2);
        let r = ReductionSpec::new(0, ReductionKind::Orthogonal(g));
        let a = prolong(&Gnla::abelian(2), None, &[r], 6).unwrap();
        let d = a.dims();
        assert_eq!(d.nonnegative, vec![1, 0]);
        assert_eq!(d.finite_type, Some(1));
        assert_eq!(d.total, 3);
    }

    #[test]
    fn conformal_space_three() {
        let r = ReductionSpec::new(0, ReductionKind::Conformal(Matrix::identity(3)));
        let a = prolong(&Gnla::abelian(3), None, &[r], 6).unwrap();
        assert_eq!(a.dims().nonnegative, vec![4, 3, 0]);
        assert_eq!(a.dims().total, 10);
        assert!(a.verify_graded_jacobi(None).unwrap().is_empty());
    }

    #[test]
    fn complex_line_is_infinite() {
        let j = Matrix::from_i64(&[&[0, -1], &[1, 0]]);
        let r = ReductionSpec::new(0, ReductionKind::Complex(j));
        let a = prolong(&Gnla::abelian(2), None, &[r], 3).unwrap();
        // holomorphic vector fields in one variable: real dimension 2 per degree
        assert_eq!(a.dims().nonnegative, vec![2, 2, 2, 2]);
    }

    #[test]
    fn trace_free_degree_zero() {
        let r = ReductionSpec::new(0, ReductionKind::TraceFreeDivergence);
        let a = prolong(&Gnla::abelian(2), None, &[r], 2).unwrap();
        // divergence-free fields: n·C(n+k, k+1) − C(n+k−1, k)
        assert_eq!(a.dims().nonnegative, vec![3, 4, 5]);
    }

    #[test]
    fn rejects_bad_reductions() {
        let h = Gnla::heisenberg(1);
        let g = Matrix::identity(2);
        let late = ReductionSpec::new(1, ReductionKind::Orthogonal(g.clone()));
        assert!(prolong(&h, None, &[late], 3).is_err());
        let degenerate = ReductionSpec::new(0, ReductionKind::Orthogonal(Matrix::zeros(2, 2)));
        assert!(prolong(&h, None, &[degenerate], 3).is_err());
        let j_bad = ReductionSpec::new(0, ReductionKind::Complex(Matrix::identity(2)));
        assert!(prolong(&h, None, &[j_bad], 3).is_err());
        let a = ReductionSpec::new(0, ReductionKind::Orthogonal(g.clone()));
        let b = ReductionSpec::new(0, ReductionKind::Conformal(g));
        assert!(prolong(&h, None, &[a, b], 3).is_err());
        // a non-closed custom degree-0 span
        let s = Subspace::span(4, vec![vec![int(0), int(1), int(0), int(0)], vec![int(0), int(0), int(1), int(0)]]).unwrap();
        let r = ReductionSpec::new(0, ReductionKind::Custom(s));
        assert!(matches!(prolong(&Gnla::abelian(2), None, &[r], 2), Err(Error::Reduction { .. })));
    }

    #[test]
    fn vanishing_is_monotone() {
        let r = ReductionSpec::new(0, ReductionKind::Orthogonal(Matrix::identity(3)));
        let mut a = prolong(&Gnla::abelian(3), None, &[r], 6).unwrap();
        assert_eq!(a.finite_type(), Some(1));
        for _ in 0..2 {
            assert_eq!(a.advance(&[]).unwrap(), 0);
        }
    }

    #[test]
    fn grading_element_acts_by_degree() {
        let a = prolong(&Gnla::heisenberg(1), None, &[], 2).unwrap();
        let e = a.grading_element().unwrap();
        for d in -2..=2 {
            let n = a.dim(d).unwrap();
            for i in 0..n {
                let v = Element::basis(d, n, i);
                let b = a.bracket(&e, &v).unwrap();
                let want: Vec<Scalar> = v.coords.iter().map(|x| x * int(d as i64)).collect();
                assert_eq!(b.coords, want);
            }
        }
    }

    #[test]
    fn corrupted_table_breaks_jacobi() {
        let mut a = prolong(&Gnla::heisenberg(1), None, &[], 2).unwrap();
        assert!(a.verify_graded_jacobi(None).unwrap().is_empty());
        let t = a.tables.get_mut(&(0, 1)).unwrap();
        t[1][0][0] += frac(1, 3);
        let v = a.verify_graded_jacobi(None).unwrap();
        assert!(!v.is_empty());
        assert!(v.iter().all(|j| j.triple.iter().any(|&(d, _)| d >= 0)));
    }

    #[test]
    fn formula_matches_recursion() {
        let r = ReductionSpec::new(0, ReductionKind::Conformal(Matrix::identity(3)));
        let a = prolong(&Gnla::abelian(3), None, &[r], 6).unwrap();
        for c in a.check_reduction_formula().unwrap() {
            assert_eq!(c.recursive, c.direct, "{c:?}");
        }
    }

    #[test]
    fn non_fundamental_rejected() {
        let m = Gnla::new(vec![vec!["a".into()], vec!["b".into()]], vec![]).unwrap();
        assert!(matches!(ProlongedAlgebra::new(m), Err(Error::NotFundamental(_))));
    }
}
