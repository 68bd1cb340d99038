//! Graded nilpotent Lie algebras given by structure constants.
//!
//! Basis elements are numbered globally with degree −1 first, then −2, and so
//! on down to −ν. Only declared bracket entries are stored; the remaining
//! ordered pairs are filled in by antisymmetry.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, int, is_zero_vec, parse_scalar, solve, unit_vec, zero_vec, Matrix, Scalar, Subspace};

#[derive(Clone, PartialEq, Eq)]
pub struct Gnla {
    names: Vec<String>,
    degrees: Vec<i32>,
    offsets: Vec<usize>,
    declared: BTreeMap<(usize, usize), Vec<Scalar>>,
    table: Vec<Vec<Vec<Scalar>>>,
}

/// One term `coef · [a, y]` of a chosen bracket expression, with `a` in degree −1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketTerm {
    pub coef: Scalar,
    pub generator: usize,
    pub inner: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Grading { a: String, b: String, target: String },
    Antisymmetry { a: String, b: String },
    Jacobi { a: String, b: String, c: String },
    EmptyTopDegree { depth: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Grading { a, b, target } => {
                write!(f, "grading: [{a},{b}] has a component along {target}")
            }
            Violation::Antisymmetry { a, b } => write!(f, "antisymmetry: [{a},{b}] != -[{b},{a}]"),
            Violation::Jacobi { a, b, c } => write!(f, "jacobi fails on ({a}, {b}, {c})"),
            Violation::EmptyTopDegree { depth } => write!(f, "depth {depth} declared but degree -{depth} is empty"),
        }
    }
}

impl Gnla {
    /// `components[i]` lists the basis names of degree `-(i + 1)`.
    pub fn new(components: Vec<Vec<String>>, brackets: Vec<(String, String, Vec<(String, Scalar)>)>) -> Result<Self> {
        if components.first().is_none_or(|c| c.is_empty()) {
            return Err(Error::Malformed("degree -1 must contain at least one basis element".into()));
        }
        let mut names = Vec::new();
        let mut degrees = Vec::new();
        let mut offsets = vec![0];
        for (i, comp) in components.iter().enumerate() {
            for n in comp {
                names.push(n.clone());
                degrees.push(-(i as i32) - 1);
            }
            offsets.push(names.len());
        }
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || n.contains([',', '[', ']']) || n.trim() != n {
                return Err(Error::Malformed(format!("invalid basis name `{n}`")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::Malformed(format!("duplicate basis name `{n}`")));
            }
        }
        let dim = names.len();
        let index = |n: &str| {
            names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::Malformed(format!("unknown basis element `{n}`")))
        };
        let mut declared = BTreeMap::new();
        for (a, b, coeffs) in brackets {
            let key = (index(&a)?, index(&b)?);
            let mut v = zero_vec(dim);
            for (n, c) in coeffs {
                v[index(&n)?] += c;
            }
            if declared.contains_key(&key) {
                return Err(Error::Malformed(format!("bracket [{a},{b}] declared twice")));
            }
            if !is_zero_vec(&v) {
                declared.insert(key, v);
            }
        }
        let mut table = vec![vec![zero_vec(dim); dim]; dim];
        for (&(a, b), v) in &declared {
            table[a][b] = v.clone();
            if !declared.contains_key(&(b, a)) {
                table[b][a] = v.iter().map(|x| -x).collect();
            }
        }
        Ok(Self {
            names,
            degrees,
            offsets,
            declared,
            table,
        })
    }

    /// Abelian algebra concentrated in degree −1.
    pub fn abelian(n: usize) -> Self {
        let names = (1..=n).map(|i| format!("e{i}")).collect();
        Self::new(vec![names], vec![]).expect("abelian algebra is well formed")
    }

    /// Heisenberg algebra of dimension 2d+1: degree −1 spanned by
    /// `x1..xd, p1..pd`, degree −2 by `z`, with `[x_i, p_i] = z`.
    pub fn heisenberg(d: usize) -> Self {
        assert!(d >= 1, "heisenberg algebra needs d >= 1");
        let mut g1: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        g1.extend((1..=d).map(|i| format!("p{i}")));
        let brackets = (1..=d)
            .map(|i| (format!("x{i}"), format!("p{i}"), vec![("z".to_string(), Scalar::one())]))
            .collect();
        Self::new(vec![g1, vec!["z".into()]], brackets).expect("heisenberg algebra is well formed")
    }

    pub fn depth(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Dimension of the degree-`d` component (zero outside `−ν..=−1`).
    pub fn dim_of(&self, d: i32) -> usize {
        self.range(d).len()
    }

    /// Global indices of the degree-`d` basis elements.
    pub fn range(&self, d: i32) -> Range<usize> {
        if d >= 0 || (-d) as usize > self.depth() {
            return 0..0;
        }
        let i = (-d - 1) as usize;
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.degrees[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn names_of(&self, d: i32) -> &[String] {
        &self.names[self.range(d)]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Component dimensions from degree −ν up to −1.
    pub fn dims(&self) -> Vec<usize> {
        (1..=self.depth()).rev().map(|k| self.dim_of(-(k as i32))).collect()
    }

    /// `[a, b]` as a vector over the whole basis.
    pub fn bracket(&self, a: usize, b: usize) -> &[Scalar] {
        &self.table[a][b]
    }

    /// `[a, b]` in local coordinates of degree `deg a + deg b` (empty below −ν).
    pub fn bracket_local(&self, a: usize, b: usize) -> Vec<Scalar> {
        let r = self.range(self.degrees[a] + self.degrees[b]);
        self.table[a][b][r].to_vec()
    }

    pub fn bracket_vec(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = zero_vec(self.dim());
        for (a, ca) in x.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (b, cb) in y.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                axpy(&mut out, &(ca * cb), &self.table[a][b]);
            }
        }
        out
    }

    pub fn declared(&self) -> &BTreeMap<(usize, usize), Vec<Scalar>> {
        &self.declared
    }

    /// Checks grading, antisymmetry, Jacobi and the declared depth.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.dim();
        if self.dim_of(-(self.depth() as i32)) == 0 {
            out.push(Violation::EmptyTopDegree { depth: self.depth() });
        }
        for (&(a, b), v) in &self.declared {
            let target = self.degrees[a] + self.degrees[b];
            for (c, x) in v.iter().enumerate() {
                if !x.is_zero() && self.degrees[c] != target {
                    out.push(Violation::Grading {
                        a: self.names[a].clone(),
                        b: self.names[b].clone(),
                        target: self.names[c].clone(),
                    });
                }
            }
            let anti_ok = if a == b {
                false
            } else if let Some(w) = self.declared.get(&(b, a)) {
                v.iter().zip(w).all(|(x, y)| (x + y).is_zero())
            } else {
                true
            };
            if !anti_ok && a <= b {
                out.push(Violation::Antisymmetry {
                    a: self.names[a].clone(),
                    b: self.names[b].clone(),
                });
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let mut sum = self.bracket_vec(&unit_vec(n, a), self.bracket(b, c));
                    let t2 = self.bracket_vec(&unit_vec(n, b), self.bracket(c, a));
                    let t3 = self.bracket_vec(&unit_vec(n, c), self.bracket(a, b));
                    axpy(&mut sum, &int(1), &t2);
                    axpy(&mut sum, &int(1), &t3);
                    if !is_zero_vec(&sum) {
                        out.push(Violation::Jacobi {
                            a: self.names[a].clone(),
                            b: self.names[b].clone(),
                            c: self.names[c].clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// True when iterated brackets of degree −1 span every component.
    pub fn is_fundamental(&self) -> bool {
        let mut current = Subspace::full(self.dim_of(-1));
        for k in 2..=self.depth() as i32 {
            let d = -k;
            let mut vecs = Vec::new();
            for e in self.range(-1) {
                for s in current.vectors() {
                    let mut v = zero_vec(self.dim_of(d));
                    for (j, c) in s.iter().enumerate() {
                        let y = self.range(d + 1).start + j;
                        axpy(&mut v, c, &self.bracket_local(e, y));
                    }
                    vecs.push(v);
                }
            }
            current = Subspace::span(self.dim_of(d), vecs).expect("consistent lengths");
            if current.dim() != self.dim_of(d) {
                return false;
            }
        }
        true
    }

    /// For every basis element of degree ≤ −2 an expression as a combination of
    /// brackets `[e, y]` with `e` of degree −1 and `y` one degree higher.
    pub fn bracket_expressions(&self) -> Result<Vec<Vec<BracketTerm>>> {
        let mut out = vec![Vec::new(); self.dim()];
        for k in 2..=self.depth() as i32 {
            let d = -k;
            let pairs: Vec<(usize, usize)> = self
                .range(-1)
                .flat_map(|e| self.range(d + 1).map(move |y| (e, y)))
                .collect();
            let cols: Vec<Vec<Scalar>> = pairs.iter().map(|&(e, y)| self.bracket_local(e, y)).collect();
            let m = Matrix::from_rows(self.dim_of(d), cols)?.transpose();
            for (j, b) in self.range(d).enumerate() {
                let target = unit_vec(self.dim_of(d), j);
                let x = solve(&m, &target)?.ok_or_else(|| {
                    Error::NotFundamental(format!("`{}` is not generated by degree -1", self.names[b]))
                })?;
                out[b] = x
                    .into_iter()
                    .zip(&pairs)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(coef, &(generator, inner))| BracketTerm { coef, generator, inner })
                    .collect();
            }
        }
        Ok(out)
    }

    pub fn to_doc(&self) -> GnlaDoc {
        let mut degrees = BTreeMap::new();
        for k in 1..=self.depth() as i32 {
            degrees.insert((-k).to_string(), self.names_of(-k).to_vec());
        }
        let mut brackets = BTreeMap::new();
        for (&(a, b), v) in &self.declared {
            let coeffs = v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (self.names[i].clone(), c.to_string()))
                .collect();
            brackets.insert(format!("[{},{}]", self.names[a], self.names[b]), coeffs);
        }
        GnlaDoc {
            schema_version: Some(1),
            degrees,
            brackets,
        }
    }

    pub fn from_doc(doc: &GnlaDoc) -> Result<Self> {
        let mut depth = 0usize;
        for key in doc.degrees.keys() {
            let d: i32 = key
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("degrees: key `{key}` is not an integer")))?;
            if d >= 0 {
                return Err(Error::Parse(format!("degrees: key `{key}` must be negative")));
            }
            depth = depth.max((-d) as usize);
        }
        let mut components = vec![Vec::new(); depth];
        for (key, names) in &doc.degrees {
            let d: i32 = key.trim().parse().expect("checked above");
            components[(-d - 1) as usize] = names.clone();
        }
        let mut brackets = Vec::new();
        for (key, coeffs) in &doc.brackets {
            let inner = key
                .trim()
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("brackets: key `{key}` must look like `[a,b]`")))?;
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("brackets: key `{key}` must look like `[a,b]`")))?;
            let mut terms = Vec::new();
            for (n, c) in coeffs {
                let c = parse_scalar(c).map_err(|e| Error::Parse(format!("brackets.{key}.{n}: {e}")))?;
                terms.push((n.clone(), c));
            }
            brackets.push((a.trim().to_string(), b.trim().to_string(), terms));
        }
        Self::new(components, brackets)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GnlaDoc = serde_json::from_str(s)?;
        Self::from_doc(&doc)
    }
}

impl fmt::Debug for Gnla {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gnla{:?}", self.to_doc())
    }
}

/// Serialized form of a graded nilpotent Lie algebra.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GnlaDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub degrees: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub brackets: BTreeMap<String, BTreeMap<String, String>>,
}

/// Grading-preserving derivations: a basis of degree-0 maps together with
/// their commutator table `[D_i, D_j] = Σ c_k D_k`.
pub struct Derivations {
    /// Each row is a degree −1 block, row-major by source basis element.
    pub space: Subspace,
    pub brackets: Vec<Vec<Vec<Scalar>>>,
}

/// The Lie algebra of grading-preserving derivations.
pub fn der0(m: &Gnla) -> Result<Derivations> {
    if !m.is_fundamental() {
        return Err(Error::NotFundamental("derivations are only determined on fundamental algebras".into()));
    }
    let alg = crate::prolong::ProlongedAlgebra::new(m.clone())?;
    let step = alg.solve_step()?;
    let d1 = m.dim_of(-1);
    let mats: Vec<Matrix> = step.space.vectors().map(|v| block_matrix(v, d1, d1)).collect();
    let mut brackets = Vec::new();
    for a in &mats {
        let mut row = Vec::new();
        for b in &mats {
            let ab = a.mul(b)?;
            let ba = b.mul(a)?;
            let mut theta = zero_vec(d1 * d1);
            for src in 0..d1 {
                for tgt in 0..d1 {
                    theta[src * d1 + tgt] = ab.get(tgt, src) - ba.get(tgt, src);
                }
            }
            let c = step
                .space
                .coordinates(&theta)?
                .ok_or_else(|| Error::Inconsistent("derivations are not closed under commutator".into()))?;
            row.push(c);
        }
        brackets.push(row);
    }
    Ok(Derivations {
        space: step.space,
        brackets,
    })
}

/// Reads a degree −1 block (row-major by source) as a `target × source` matrix.
pub fn block_matrix(theta: &[Scalar], sources: usize, targets: usize) -> Matrix {
    let mut m = Matrix::zeros(targets, sources);
    for s in 0..sources {
        for t in 0..targets {
            m.set(t, s, theta[s * targets + t].clone());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn abelian_is_valid() {
        let a = Gnla::abelian(2);
        assert!(a.validate().is_empty());
        assert!(a.is_fundamental());
        assert_eq!(a.depth(), 1);
    }

    #[test]
    fn heisenberg_models() {
        let h1 = Gnla::heisenberg(1);
        assert_eq!(h1.dims(), vec![1, 2]);
        assert_eq!(h1.declared().len(), 1);
        assert_eq!(Gnla::heisenberg(2).dims(), vec![1, 4]);
        for d in 1..=4 {
            let h = Gnla::heisenberg(d);
            assert!(h.validate().is_empty());
            assert!(h.is_fundamental());
        }
    }

    #[test]
    fn grading_violation_reported() {
        let m = Gnla::new(
            vec![vec![s("e1"), s("e2")], vec![s("e3")]],
            vec![
                (s("e1"), s("e2"), vec![(s("e3"), int(1))]),
                (s("e1"), s("e3"), vec![(s("e2"), int(1))]),
            ],
        )
        .unwrap();
        let v = m.validate();
        assert!(v.contains(&Violation::Grading {
            a: s("e1"),
            b: s("e3"),
            target: s("e2")
        }));
    }

    #[test]
    fn antisymmetry_violation_reported() {
        let m = Gnla::new(
            vec![vec![s("a"), s("b")], vec![s("c")]],
            vec![
                (s("a"), s("b"), vec![(s("c"), int(1))]),
                (s("b"), s("a"), vec![(s("c"), int(1))]),
            ],
        )
        .unwrap();
        assert!(m
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::Antisymmetry { .. })));
    }

    #[test]
    fn jacobi_violation_reported() {
        let ok = Gnla::new(
            vec![vec![s("a"), s("b"), s("c")], vec![s("d")], vec![s("f")]],
            vec![
                (s("a"), s("b"), vec![(s("d"), int(1))]),
                (s("a"), s("d"), vec![(s("f"), int(1))]),
            ],
        )
        .unwrap();
        assert!(ok.validate().is_empty());
        // [c,[a,b]] = [c,d] = f while the other two cyclic terms vanish
        let bad = Gnla::new(
            vec![vec![s("a"), s("b"), s("c")], vec![s("d")], vec![s("f")]],
            vec![
                (s("a"), s("b"), vec![(s("d"), int(1))]),
                (s("a"), s("d"), vec![(s("f"), int(1))]),
                (s("c"), s("d"), vec![(s("f"), int(1))]),
            ],
        )
        .unwrap();
        assert!(bad.validate().contains(&Violation::Jacobi {
            a: s("a"),
            b: s("b"),
            c: s("c")
        }));
    }

    #[test]
    fn non_fundamental_detected() {
        let m = Gnla::new(vec![vec![s("a"), s("b")], vec![s("c")]], vec![]).unwrap();
        assert!(!m.is_fundamental());
        assert!(matches!(der0(&m), Err(Error::NotFundamental(_))));
    }

    #[test]
    fn empty_top_degree_reported() {
        let m = Gnla::new(vec![vec![s("a")], vec![]], vec![]).unwrap();
        assert!(m.validate().contains(&Violation::EmptyTopDegree { depth: 2 }));
    }

    #[test]
    fn rejects_malformed() {
        assert!(Gnla::new(vec![vec![]], vec![]).is_err());
        assert!(Gnla::new(vec![vec![s("a"), s("a")]], vec![]).is_err());
        assert!(Gnla::new(vec![vec![s("a")]], vec![(s("a"), s("q"), vec![])]).is_err());
        assert!(Gnla::new(vec![vec![s("a,b")]], vec![]).is_err());
    }

    #[test]
    fn der0_dimensions() {
        assert_eq!(der0(&Gnla::heisenberg(1)).unwrap().space.dim(), 4);
        assert_eq!(der0(&Gnla::abelian(3)).unwrap().space.dim(), 9);
        // sp(4) ⊕ scalings acting on the symplectic plane pair
        assert_eq!(der0(&Gnla::heisenberg(2)).unwrap().space.dim(), 11);
    }

    #[test]
    fn der0_brackets_are_commutators() {
        let d = der0(&Gnla::heisenberg(1)).unwrap();
        let n = d.space.dim();
        for i in 0..n {
            assert!(is_zero_vec(&d.brackets[i][i]));
            for j in 0..n {
                let neg: Vec<Scalar> = d.brackets[j][i].iter().map(|x| -x).collect();
                assert_eq!(d.brackets[i][j], neg);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let h = Gnla::heisenberg(2);
        let text = h.to_json();
        assert_eq!(Gnla::from_json(&text).unwrap(), h);
        assert!(text.contains("\"[x1,p1]\""));
    }

    #[test]
    fn json_errors_name_the_field() {
        let bad = r#"{"degrees": {"-1": ["a","b"], "-2": ["c"]}, "brackets": {"[a,b]": {"c": "1/x"}}}"#;
        let err = Gnla::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("brackets.[a,b].c"), "{err}");
        assert!(Gnla::from_json(r#"{"degrees": {"1": ["a"]}}"#).is_err());
        assert!(Gnla::from_json("{").is_err());
    }

    #[test]
    fn bracket_expressions_reconstruct_basis() {
        let h = Gnla::heisenberg(2);
        let ex = h.bracket_expressions().unwrap();
        let z = h.index_of("z").unwrap();
        let mut v = zero_vec(h.dim());
        for t in &ex[z] {
            axpy(&mut v, &t.coef, h.bracket(t.generator, t.inner));
        }
        assert_eq!(v, unit_vec(h.dim(), z));
    }
}
