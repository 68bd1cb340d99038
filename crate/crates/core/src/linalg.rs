//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Every subspace is stored by its reduced row-echelon basis, so two
//! subspaces are equal exactly when their representations are equal.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p"`, `"-p"` or `"p/q"`.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let t = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Scalar::new(p, q))
        }
        None => {
            let p: BigInt = t.parse().map_err(|_| bad())?;
            Ok(Scalar::from_integer(p))
        }
    }
}

pub fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// `acc += c * v`
pub fn axpy(acc: &mut [Scalar], c: &Scalar, v: &[Scalar]) {
    if c.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += c * x;
        }
    }
}

pub fn zero_vec(n: usize) -> Vec<Scalar> {
    vec![Scalar::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Scalar> {
    let mut v = zero_vec(n);
    v[i] = Scalar::one();
    v
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: zero_vec(rows * cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Scalar::one();
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n = rows.len();
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Self { rows: n, cols, data })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect();
        Self::from_rows(cols, rows).expect("ragged integer matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Scalar] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.data)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                axpy(out.row_mut(r), a, other.row(k));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = Scalar::zero();
                for (a, x) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: &Scalar, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        axpy(&mut self.data, c, &other.data);
        Ok(())
    }

    pub fn push_row(&mut self, row: Vec<Scalar>) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend(row);
        self.rows += 1;
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

fn row_to_integers(row: &[Scalar]) -> Vec<BigInt> {
    let l = row
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter()
        .map(|x| {
            if x.is_zero() {
                BigInt::zero()
            } else {
                x.numer() * (&l / x.denom())
            }
        })
        .collect()
}

fn remove_content(row: &mut [BigInt]) {
    let g = row
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g > BigInt::one() {
        for x in row.iter_mut() {
            if !x.is_zero() {
                *x /= &g;
            }
        }
    }
}

/// `target := p * target - c * pivot`, then strip the content.
fn eliminate(target: &mut [BigInt], pivot: &[BigInt], col: usize) {
    let c = target[col].clone();
    if c.is_zero() {
        return;
    }
    let p = &pivot[col];
    let g = c.gcd(p);
    let pm = p / &g;
    let cm = &c / &g;
    for (t, s) in target.iter_mut().zip(pivot) {
        if t.is_zero() && s.is_zero() {
            continue;
        }
        let mut v = &*t * &pm;
        if !s.is_zero() {
            v -= &cm * s;
        }
        *t = v;
    }
    remove_content(target);
}

/// Reduced row-echelon form: `(rref, pivot columns, rank)`.
///
/// Forward elimination and back-substitution run fraction-free on integer
/// rows; pivots are normalised to one at the very end.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>, usize) {
    let cols = m.cols;
    let mut rows: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|r| row_to_integers(m.row(r)))
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    for r in rows.iter_mut() {
        remove_content(r);
    }

    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        if next == rows.len() {
            break;
        }
        // smallest nonzero entry keeps coefficient growth down
        let best = (next..rows.len())
            .filter(|&r| !rows[r][col].is_zero())
            .min_by_key(|&r| rows[r][col].bits());
        let Some(best) = best else { continue };
        rows.swap(next, best);
        let (head, tail) = rows.split_at_mut(next + 1);
        let pivot = &head[next];
        for r in tail.iter_mut() {
            eliminate(r, pivot, col);
        }
        pivots.push(col);
        next += 1;
    }
    rows.truncate(next);

    for i in (0..pivots.len()).rev() {
        let col = pivots[i];
        let (head, tail) = rows.split_at_mut(i);
        let pivot = &tail[0];
        for r in head.iter_mut() {
            eliminate(r, pivot, col);
        }
    }

    let rank = pivots.len();
    let mut out = Matrix::zeros(m.rows, cols);
    for (i, r) in rows.iter().enumerate() {
        let p = &r[pivots[i]];
        for c in 0..cols {
            if !r[c].is_zero() {
                out.set(i, c, Scalar::new(r[c].clone(), p.clone()));
            }
        }
    }
    (out, pivots, rank)
}

pub fn rank(m: &Matrix) -> usize {
    rref(m).2
}

/// Null space of `m`, i.e. all `x` with `m x = 0`.
pub fn kernel_basis(m: &Matrix) -> Subspace {
    let (r, pivots, rank) = rref(m);
    let cols = m.cols;
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut vecs = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = zero_vec(cols);
        v[free] = Scalar::one();
        for (i, &p) in pivots.iter().enumerate().take(rank) {
            v[p] = -r.get(i, free).clone();
        }
        vecs.push(v);
    }
    Subspace::span(cols, vecs).expect("kernel vectors have the ambient length")
}

/// Solves `m x = b`, returning the particular solution with all free variables zero.
pub fn solve(m: &Matrix, b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
    if b.len() != m.rows {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            found: b.len(),
        });
    }
    let mut aug = Matrix::zeros(m.rows, m.cols + 1);
    for r in 0..m.rows {
        for c in 0..m.cols {
            aug.set(r, c, m.get(r, c).clone());
        }
        aug.set(r, m.cols, b[r].clone());
    }
    let (red, pivots, _) = rref(&aug);
    if pivots.last() == Some(&m.cols) {
        return Ok(None);
    }
    let mut x = zero_vec(m.cols);
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = red.get(i, m.cols).clone();
    }
    Ok(Some(x))
}

/// A linear subspace of `Q^ambient` held in canonical reduced row-echelon form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Matrix::zeros(0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Matrix::identity(ambient),
            pivots: (0..ambient).collect(),
        }
    }

    pub fn span(ambient: usize, vectors: Vec<Vec<Scalar>>) -> Result<Self> {
        let m = Matrix::from_rows(ambient, vectors)?;
        Ok(Self::row_space(&m))
    }

    pub fn row_space(m: &Matrix) -> Self {
        let (r, pivots, rank) = rref(m);
        let mut basis = Matrix::zeros(0, m.cols);
        for i in 0..rank {
            basis.push_row(r.row(i).to_vec());
        }
        Self {
            ambient: m.cols,
            basis,
            pivots,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn vector(&self, i: usize) -> &[Scalar] {
        self.basis.row(i)
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[Scalar]> {
        (0..self.dim()).map(move |i| self.basis.row(i))
    }

    /// Coordinates of `v` in the echelon basis, or `None` when `v` is outside.
    pub fn coordinates(&self, v: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
        if v.len() != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: v.len(),
            });
        }
        let coords: Vec<Scalar> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let mut residual = v.to_vec();
        for (i, c) in coords.iter().enumerate() {
            axpy(&mut residual, &-c.clone(), self.basis.row(i));
        }
        Ok(is_zero_vec(&residual).then_some(coords))
    }

    pub fn contains(&self, v: &[Scalar]) -> Result<bool> {
        Ok(self.coordinates(v)?.is_some())
    }

    /// The vector with the given coordinates.
    pub fn combine(&self, coords: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(coords.len(), self.dim(), "coordinate length mismatch");
        let mut v = zero_vec(self.ambient);
        for (i, c) in coords.iter().enumerate() {
            axpy(&mut v, c, self.basis.row(i));
        }
        v
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        for v in self.vectors() {
            if !other.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: other.ambient,
            });
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(Self::row_space(&self.basis.vstack(&other.basis)?))
    }

    /// All covectors vanishing on the subspace, written as vectors.
    pub fn annihilator(&self) -> Subspace {
        kernel_basis(&self.basis)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let constraints = self
            .annihilator()
            .basis
            .vstack(&other.annihilator().basis)?;
        Ok(kernel_basis(&constraints))
    }
}

/// Serialized subspace: the echelon basis with rational entries as strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SubspaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    /// Degree of the component the span lives in, when it is a reduction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub ambient: usize,
    pub basis: Vec<Vec<String>>,
}

impl Subspace {
    pub fn to_doc(&self, degree: Option<usize>) -> SubspaceDoc {
        SubspaceDoc {
            schema_version: Some(1),
            degree,
            ambient: self.ambient,
            basis: self
                .vectors()
                .map(|v| v.iter().map(|x| x.to_string()).collect())
                .collect(),
        }
    }

    pub fn from_doc(doc: &SubspaceDoc) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, r) in doc.basis.iter().enumerate() {
            let row = r
                .iter()
                .enumerate()
                .map(|(j, x)| parse_scalar(x).map_err(|e| Error::Parse(format!("basis[{i}][{j}]: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != doc.ambient {
                return Err(Error::Parse(format!(
                    "basis[{i}] has {} entries, ambient is {}",
                    row.len(),
                    doc.ambient
                )));
            }
            rows.push(row);
        }
        Subspace::span(doc.ambient, rows)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in {}) {:?}", self.dim(), self.ambient, self.basis)
    }
}
