//! Dense reference solver for prolongation dimensions.
//!
//! Each element of degree `k` is stored with its full action on every
//! negative degree, `g_j → g_{j+k}` for all `j`, and the derivation equation
//! is imposed on every pair of basis elements. Nothing here reuses the
//! degree −1 encoding or the bracket tables of the library engine.

#![allow(dead_code)]

use std::path::PathBuf;

use num_traits::Zero;
use tanaka::graded::Gnla;
use tanaka::linalg::{kernel_basis, Matrix, Scalar, Subspace};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Degree 0 constraint `AᵀG + GA = λG`, with `λ = 0` unless conformal.
pub struct FormConstraint<'a> {
    pub form: &'a Matrix,
    pub conformal: bool,
}

pub struct DenseTower<'a> {
    m: &'a Gnla,
    nu: i32,
    comps: Vec<Vec<Vec<Scalar>>>,
}

impl<'a> DenseTower<'a> {
    pub fn new(m: &'a Gnla) -> Self {
        Self {
            m,
            nu: m.depth() as i32,
            comps: Vec::new(),
        }
    }

    fn dim(&self, d: i32) -> usize {
        if d < -self.nu {
            0
        } else if d < 0 {
            self.m.dim_of(d)
        } else {
            self.comps[d as usize].len()
        }
    }

    fn block_offset(&self, k: i32, j: i32) -> usize {
        (-self.nu..j).map(|i| self.dim(i) * self.dim(i + k)).sum()
    }

    fn unknowns(&self, k: i32) -> usize {
        self.block_offset(k, 0)
    }

    /// Unknown holding the `t`-th coordinate of the image of the `s`-th basis vector of `g_j`.
    fn idx(&self, k: i32, j: i32, s: usize, t: usize) -> usize {
        self.block_offset(k, j) + s * self.dim(j + k) + t
    }

    /// `[w, y]` for `w` the `t`-th element of degree `c ≥ 0` and `y` the `s`-th of degree `b < 0`.
    fn act(&self, c: i32, t: usize, b: i32, s: usize) -> Vec<Scalar> {
        let elem = &self.comps[c as usize][t];
        let start = self.block_offset(c, b) + s * self.dim(b + c);
        elem[start..start + self.dim(b + c)].to_vec()
    }

    /// `[w, y]` for `w` the `t`-th basis element of degree `c` and `y` the `s`-th of degree `b < 0`.
    fn bracket_into(&self, c: i32, t: usize, b: i32, s: usize) -> Vec<Scalar> {
        if c >= 0 {
            return self.act(c, t, b, s);
        }
        let target = self.m.range(c + b);
        let gw = self.m.range(c).start + t;
        let gy = self.m.range(b).start + s;
        if target.is_empty() {
            return Vec::new();
        }
        self.m.bracket(gw, gy)[target].to_vec()
    }

    pub fn step(&mut self, form: Option<&FormConstraint>) -> usize {
        let k = self.comps.len() as i32;
        let n = self.unknowns(k);
        let aux = usize::from(form.is_some_and(|f| f.conformal));
        let width = n + aux;
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for a in -self.nu..0 {
            for b in a..0 {
                let tdeg = a + b + k;
                let tdim = self.dim(tdeg);
                if tdim == 0 {
                    continue;
                }
                for x in 0..self.dim(a) {
                    let y0 = if a == b { x + 1 } else { 0 };
                    for y in y0..self.dim(b) {
                        let mut eq = vec![vec![Scalar::zero(); width]; tdim];
                        let gx = self.m.range(a).start + x;
                        let gy = self.m.range(b).start + y;
                        let ab = self.m.range(a + b);
                        if !ab.is_empty() {
                            let br = &self.m.bracket(gx, gy)[ab];
                            for (z, c) in br.iter().enumerate() {
                                if c.is_zero() {
                                    continue;
                                }
                                for (t, row) in eq.iter_mut().enumerate() {
                                    row[self.idx(k, a + b, z, t)] += c;
                                }
                            }
                        }
                        for w in 0..self.dim(a + k) {
                            let v = self.bracket_into(a + k, w, b, y);
                            let i = self.idx(k, a, x, w);
                            for (t, row) in eq.iter_mut().enumerate() {
                                row[i] -= &v[t];
                            }
                        }
                        for w in 0..self.dim(b + k) {
                            let v = self.bracket_into(b + k, w, a, x);
                            let i = self.idx(k, b, y, w);
                            for (t, row) in eq.iter_mut().enumerate() {
                                row[i] += &v[t];
                            }
                        }
                        rows.extend(eq);
                    }
                }
            }
        }
        if let (Some(f), 0) = (form, k) {
            let d1 = self.dim(-1);
            for i in 0..d1 {
                for j in 0..d1 {
                    let mut row = vec![Scalar::zero(); width];
                    for t in 0..d1 {
                        row[self.idx(0, -1, i, t)] += f.form.get(t, j);
                        row[self.idx(0, -1, j, t)] += f.form.get(i, t);
                    }
                    if f.conformal {
                        row[n] -= f.form.get(i, j);
                    }
                    rows.push(row);
                }
            }
        }
        let mat = Matrix::from_rows(width, rows).expect("rectangular");
        let kernel = kernel_basis(&mat);
        let projected: Vec<Vec<Scalar>> = kernel.vectors().map(|v| v[..n].to_vec()).collect();
        let space = Subspace::span(n, projected).expect("consistent lengths");
        let basis: Vec<Vec<Scalar>> = space.vectors().map(<[Scalar]>::to_vec).collect();
        let dim = basis.len();
        self.comps.push(basis);
        dim
    }
}

/// Nonnegative dimensions up to the first zero or `max_degree`.
pub fn dense_prolong(m: &Gnla, form: Option<FormConstraint>, max_degree: usize) -> Vec<usize> {
    let mut tower = DenseTower::new(m);
    let mut dims = Vec::new();
    for k in 0..=max_degree {
        let d = tower.step(if k == 0 { form.as_ref() } else { None });
        dims.push(d);
        if d == 0 {
            break;
        }
    }
    dims
}
