//! Flat models. The contact algebra is realized by weighted polynomials in
//! `x1..x_{n-1}, u, p1..p_{n-1}` under the Jacobi bracket; the projective
//! model by homogeneous polynomial vector fields, the monomial field
//! `x^α ∂_a` standing for the tensor basis element of `S^{k+1}V*⊗V`.

use std::fmt;

use num_traits::{One, Zero};

use crate::distribution::PolyVectorField;
use crate::error::{Error, Result};
use crate::graded::Gnla;
use crate::linalg::{int, kernel_basis, unit_vec, Matrix, Scalar, Subspace};
use crate::poly::{exponents_of_degree, Exponent, Polynomial};
use crate::prolong::{Element, ProlongedAlgebra};

/// Variable names `x1..x_{n-1}, u, p1..p_{n-1}`.
pub fn contact_names(n: usize) -> Vec<String> {
    assert!(n >= 2, "contact models need n >= 2");
    let d = n - 1;
    let mut v: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    v.push("u".into());
    v.extend((1..=d).map(|i| format!("p{i}")));
    v
}

/// `w(x^a u^b p^c) = |a| + 2(b − 1) + |c|` for an exponent laid out as `(a, b, c)`.
pub fn weight(exp: &[u32]) -> i32 {
    let d = exp.len() / 2;
    let total: u32 = exp.iter().sum();
    total as i32 + exp[d] as i32 - 2
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeightedPolynomial {
    n: usize,
    poly: Polynomial,
}

impl WeightedPolynomial {
    pub fn new(n: usize, poly: Polynomial) -> Result<Self> {
        if n < 2 || poly.nvars() != 2 * n - 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * n.max(2) - 1,
                found: poly.nvars(),
            });
        }
        Ok(Self { n, poly })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            poly: Polynomial::zero(2 * n - 1),
        }
    }

    pub fn monomial(n: usize, exp: Exponent) -> Self {
        Self {
            n,
            poly: Polynomial::monomial(2 * n - 1, exp, Scalar::one()),
        }
    }

    pub fn parse(n: usize, src: &str) -> Result<Self> {
        Self::new(n, Polynomial::parse(src, &contact_names(n))?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Common weight of all terms; `None` for zero or mixed polynomials.
    pub fn homogeneous_weight(&self) -> Option<i32> {
        let mut w = None;
        for (e, _) in self.poly.terms() {
            let we = weight(e);
            if w.is_some_and(|x| x != we) {
                return None;
            }
            w = Some(we);
        }
        w
    }

    /// Part of weight exactly `w`.
    pub fn part(&self, w: i32) -> Self {
        Self {
            n: self.n,
            poly: self.poly.filter_terms(|e| weight(e) == w),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            poly: &self.poly + &other.poly,
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self {
            n: self.n,
            poly: self.poly.scale(c),
        }
    }

    fn x(&self, i: usize) -> usize {
        i
    }

    fn u(&self) -> usize {
        self.n - 1
    }

    fn p(&self, i: usize) -> usize {
        self.n + i
    }
}

impl fmt::Display for WeightedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly.to_string_with(&contact_names(self.n)))
    }
}

impl fmt::Debug for WeightedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `{f,g} = f g_u + Σ (f_{x_i} + p_i f_u) g_{p_i} − g f_u − Σ (g_{x_i} + p_i g_u) f_{p_i}`.
pub fn jacobi_bracket(f: &WeightedPolynomial, g: &WeightedPolynomial) -> Result<WeightedPolynomial> {
    if f.n != g.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            found: g.n,
        });
    }
    let (a, b) = (&f.poly, &g.poly);
    let u = f.u();
    let fu = a.derivative(u);
    let gu = b.derivative(u);
    let mut out = &(a * &gu) - &(b * &fu);
    for i in 0..f.n - 1 {
        let p = Polynomial::var(a.nvars(), f.p(i));
        let left = &a.derivative(f.x(i)) + &(&p * &fu);
        let right = &b.derivative(f.x(i)) + &(&p * &gu);
        out = &out + &(&left * &b.derivative(f.p(i)));
        out = &out - &(&right * &a.derivative(f.p(i)));
    }
    Ok(WeightedPolynomial { n: f.n, poly: out })
}

/// The contact vector field of a generating function, for the contact form
/// `du − Σ p_i dx_i`; `f ↦ X_f` turns the Jacobi bracket into the Lie bracket.
pub fn contact_vector_field(f: &WeightedPolynomial) -> PolyVectorField {
    let n = f.n;
    let a = &f.poly;
    let nv = a.nvars();
    let fu = a.derivative(f.u());
    let mut comps = vec![Polynomial::zero(nv); nv];
    let mut du = a.clone();
    for i in 0..n - 1 {
        let p = Polynomial::var(nv, f.p(i));
        let fp = a.derivative(f.p(i));
        comps[f.x(i)] = -&fp;
        du = &du - &(&p * &fp);
        comps[f.p(i)] = &a.derivative(f.x(i)) + &(&p * &fu);
    }
    comps[f.u()] = du;
    PolyVectorField::new(contact_names(n), comps).expect("consistent dimensions")
}

/// An ordered basis of one graded component of a flat model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedComponentBasis<E> {
    pub degree: i32,
    pub elements: Vec<E>,
}

impl<E: PartialEq> GradedComponentBasis<E> {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, e: &E) -> Option<usize> {
        self.elements.iter().position(|x| x == e)
    }
}

/// Contact model component: monomials of one weight.
pub type ContactBasis = GradedComponentBasis<Exponent>;
/// Projective model component: monomial fields `(α, a)` meaning `x^α ∂_a`.
pub type FieldBasis = GradedComponentBasis<(Exponent, usize)>;

/// All monomials of weight `k` in the `2n − 1` contact variables.
pub fn contact_component(n: usize, k: i32) -> ContactBasis {
    assert!(n >= 2, "contact models need n >= 2");
    let nv = 2 * n - 1;
    let mut elements = Vec::new();
    if k >= -2 {
        let budget = (k + 2) as u32;
        for total in 0..=budget {
            for e in exponents_of_degree(nv, total) {
                if weight(&e) == k {
                    elements.push(e);
                }
            }
        }
    }
    ContactBasis { degree: k, elements }
}

impl ContactBasis {
    pub fn polynomial(&self, n: usize, i: usize) -> WeightedPolynomial {
        WeightedPolynomial::monomial(n, self.elements[i].clone())
    }

    pub fn coordinates(&self, f: &WeightedPolynomial) -> Result<Vec<Scalar>> {
        let mut out = vec![Scalar::zero(); self.dim()];
        for (e, c) in f.poly.terms() {
            let i = self
                .index_of(e)
                .ok_or_else(|| Error::Inconsistent(format!("`{f}` has terms outside weight {}", self.degree)))?;
            out[i] = c.clone();
        }
        Ok(out)
    }

    pub fn combine(&self, n: usize, coords: &[Scalar]) -> WeightedPolynomial {
        let poly = Polynomial::from_terms(
            2 * n - 1,
            self.elements.iter().cloned().zip(coords.iter().cloned()),
        );
        WeightedPolynomial { n, poly }
    }

    pub fn span(&self, fs: &[WeightedPolynomial]) -> Result<Subspace> {
        let rows = fs.iter().map(|f| self.coordinates(f)).collect::<Result<Vec<_>>>()?;
        Subspace::span(self.dim(), rows)
    }
}

/// Monomial fields `x^α ∂_a` with `|α| = k + 1` on `n` coordinates.
pub fn field_component(n: usize, k: i32) -> FieldBasis {
    let mut elements = Vec::new();
    if k >= -1 {
        for alpha in exponents_of_degree(n, (k + 1) as u32) {
            for a in 0..n {
                elements.push((alpha.clone(), a));
            }
        }
    }
    FieldBasis { degree: k, elements }
}

/// Coordinate names `x1..xn` of the projective model.
pub fn field_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl FieldBasis {
    pub fn field(&self, n: usize, i: usize) -> PolyVectorField {
        let (alpha, a) = &self.elements[i];
        let mut comps = vec![Polynomial::zero(n); n];
        comps[*a] = Polynomial::monomial(n, alpha.clone(), Scalar::one());
        PolyVectorField::new(field_names(n), comps).expect("consistent dimensions")
    }

    pub fn coordinates(&self, xi: &PolyVectorField) -> Result<Vec<Scalar>> {
        let mut out = vec![Scalar::zero(); self.dim()];
        for (a, c) in xi.components().iter().enumerate() {
            for (e, v) in c.terms() {
                let i = self.index_of(&(e.clone(), a)).ok_or_else(|| {
                    Error::Inconsistent(format!("`{xi}` is not homogeneous of degree {}", self.degree + 1))
                })?;
                out[i] = v.clone();
            }
        }
        Ok(out)
    }

    pub fn combine(&self, n: usize, coords: &[Scalar]) -> PolyVectorField {
        let mut comps = vec![Polynomial::zero(n); n];
        for ((alpha, a), c) in self.elements.iter().zip(coords) {
            comps[*a].add_term(alpha.clone(), c.clone());
        }
        PolyVectorField::new(field_names(n), comps).expect("consistent dimensions")
    }
}

/// The contraction `q: S^{k+1}V*⊗V → S^kV*`, i.e. the divergence of `x^α ∂_a`.
pub fn contraction_matrix(n: usize, k: i32) -> Matrix {
    let src = field_component(n, k);
    let tgt = exponents_of_degree(n, k.max(0) as u32);
    let mut m = Matrix::zeros(tgt.len(), src.dim());
    for (j, (alpha, a)) in src.elements.iter().enumerate() {
        if alpha[*a] == 0 {
            continue;
        }
        let mut e = alpha.clone();
        e[*a] -= 1;
        let r = tgt.iter().position(|t| *t == e).expect("degree k exponent");
        m.set(r, j, int(alpha[*a] as i64));
    }
    m
}

pub fn divergence_kernel_component(n: usize, k: i32) -> Subspace {
    assert!(n >= 1 && k >= 1, "defined for n >= 1 and k >= 1");
    kernel_basis(&contraction_matrix(n, k))
}

/// `i(dx_b)`, the field `x_b Σ_a x_a ∂_a`.
pub fn embedding_of_covector(n: usize, b: usize) -> PolyVectorField {
    let comps = (0..n)
        .map(|a| &Polynomial::var(n, b) * &Polynomial::var(n, a))
        .collect();
    PolyVectorField::new(field_names(n), comps).expect("consistent dimensions")
}

/// `(Ker q, i(V*))` inside degree 1 of the projective model.
pub fn decompose_g1_projective(n: usize) -> (Subspace, Subspace) {
    assert!(n >= 2, "defined for n >= 2");
    let basis = field_component(n, 1);
    let rows = (0..n)
        .map(|b| basis.coordinates(&embedding_of_covector(n, b)).expect("homogeneous quadratic field"))
        .collect();
    (
        divergence_kernel_component(n, 1),
        Subspace::span(basis.dim(), rows).expect("consistent lengths"),
    )
}

/// `(W, S³W)` inside contact degree 1. `S³W` is the cubics in `x, p`; `W` is
/// spanned by `x_i·θ` and `p_i·θ` with `θ = u − ½ Σ x_j p_j`. The plain
/// monomials `u x_i, u p_i` complement `S³W` too but are not `g₀`-stable.
pub fn decompose_g1_contact(n: usize) -> (Subspace, Subspace) {
    let basis = contact_component(n, 1);
    let u = n - 1;
    let theta = {
        let mut src = String::from("u");
        for i in 1..n {
            src.push_str(&format!(" - x{i}*p{i}/2"));
        }
        WeightedPolynomial::parse(n, &src).expect("valid expression")
    };
    let w_rows = contact_negative_order(n)
        .into_iter()
        .map(|i| {
            let v = WeightedPolynomial::new(n, Polynomial::var(2 * n - 1, i)).expect("matching variables");
            let f = WeightedPolynomial::new(n, v.poly() * theta.poly()).expect("matching variables");
            basis.coordinates(&f).expect("weight 1")
        })
        .collect();
    let cubic_rows = basis
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e[u] == 0)
        .map(|(i, _)| unit_vec(basis.dim(), i))
        .collect();
    (
        Subspace::span(basis.dim(), w_rows).expect("consistent lengths"),
        Subspace::span(basis.dim(), cubic_rows).expect("consistent lengths"),
    )
}

/// `ℝ ⊕ V⊗V*` inside contact degree 0: `u` and all `x_i p_j`.
pub fn lagrangian_contact_g0(n: usize) -> Subspace {
    let basis = contact_component(n, 0);
    let u = n - 1;
    let rows = basis
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            let xs: u32 = e[..u].iter().sum();
            let ps: u32 = e[u + 1..].iter().sum();
            e[u] == 1 || (xs == 1 && ps == 1)
        })
        .map(|(i, _)| unit_vec(basis.dim(), i))
        .collect();
    Subspace::span(basis.dim(), rows).expect("consistent lengths")
}

/// Prolongation of a degree 0 subalgebra inside the contact model: degree `k`
/// keeps the Hamiltonians whose brackets with every `x_i, p_i` land in the
/// kept part of degree `k − 1`. Entry `k` is a subspace of `contact_component(n, k)`.
pub fn reduced_contact_tower(n: usize, g0: &Subspace, max_degree: usize) -> Result<Vec<Subspace>> {
    let c0 = contact_component(n, 0);
    if g0.ambient_dim() != c0.dim() {
        return Err(Error::DimensionMismatch {
            expected: c0.dim(),
            found: g0.ambient_dim(),
        });
    }
    let gens: Vec<WeightedPolynomial> = contact_negative_order(n)
        .into_iter()
        .map(|i| WeightedPolynomial::monomial(n, unit_exp(n, i)))
        .collect();
    let mut tower = vec![g0.clone()];
    for k in 1..=max_degree as i32 {
        let here = contact_component(n, k);
        let below = contact_component(n, k - 1);
        let ann = tower.last().expect("degree 0 present").annihilator();
        let mut m = Matrix::zeros(0, here.dim());
        for e in &gens {
            let images = (0..here.dim())
                .map(|j| below.coordinates(&jacobi_bracket(&here.polynomial(n, j), e)?))
                .collect::<Result<Vec<_>>>()?;
            for phi in ann.vectors() {
                let row = images
                    .iter()
                    .map(|v| v.iter().zip(phi).map(|(a, b)| a * b).sum())
                    .collect();
                m.push_row(row);
            }
        }
        tower.push(kernel_basis(&m));
    }
    Ok(tower)
}

/// Hamiltonians spanning a subspace of a contact component.
pub fn hamiltonians(n: usize, basis: &ContactBasis, space: &Subspace) -> Vec<WeightedPolynomial> {
    space.vectors().map(|v| basis.combine(n, v)).collect()
}

/// The negative part of the contact model as a graded Lie algebra, with
/// `x_i, p_i` in degree −1 and the constant `1` named `z`.
pub fn contact_gnla(n: usize) -> Result<Gnla> {
    let g1 = contact_component(n, -1);
    let mut names: Vec<String> = Vec::new();
    let order = contact_negative_order(n);
    for &i in &order {
        names.push(contact_names(n)[i].clone());
    }
    let mut brackets = Vec::new();
    for (ia, &a) in order.iter().enumerate() {
        for (ib, &b) in order.iter().enumerate().skip(ia + 1) {
            let fa = WeightedPolynomial::monomial(n, unit_exp(n, a));
            let fb = WeightedPolynomial::monomial(n, unit_exp(n, b));
            let c = jacobi_bracket(&fa, &fb)?;
            let coef = c.poly.coefficient(&vec![0; 2 * n - 1]);
            if !c.part(-1).is_zero() {
                return Err(Error::Inconsistent("bracket of degree -1 elements has degree -1 terms".into()));
            }
            if !coef.is_zero() {
                brackets.push((names[ia].clone(), names[ib].clone(), vec![("z".to_string(), coef)]));
            }
        }
    }
    debug_assert_eq!(g1.dim(), names.len());
    Gnla::new(vec![names, vec!["z".into()]], brackets)
}

fn unit_exp(n: usize, i: usize) -> Exponent {
    let mut e = vec![0; 2 * n - 1];
    e[i] = 1;
    e
}

/// Variable indices of `x1..x_d, p1..p_d`, the order of degree −1 in `heisenberg(d)`.
fn contact_negative_order(n: usize) -> Vec<usize> {
    let d = n - 1;
    (0..d).chain(n..n + d).collect()
}

fn check_base(alg: &ProlongedAlgebra, expected: &Gnla, what: &str) -> Result<()> {
    if alg.base() != expected {
        return Err(Error::Inconsistent(format!("the algebra is not built on the {what} model")));
    }
    Ok(())
}

/// Coordinates in degree `k` of a contact Hamiltonian that is zero or of weight `k`.
fn contact_coords(alg: &ProlongedAlgebra, f: &WeightedPolynomial, k: i32) -> Result<Vec<Scalar>> {
    let n = f.n;
    match k {
        k if k < -2 => Ok(Vec::new()),
        -2 => Ok(vec![f.poly.coefficient(&vec![0; 2 * n - 1])]),
        -1 => Ok(contact_negative_order(n)
            .into_iter()
            .map(|i| f.poly.coefficient(&unit_exp(n, i)))
            .collect()),
        _ => {
            let theta = contact_theta_at(alg, f, k as usize)?;
            alg.coordinates_of_theta(k as usize, &theta)?
                .ok_or_else(|| Error::Inconsistent(format!("`{f}` lies outside the computed degree {k}")))
        }
    }
}

fn contact_theta_at(alg: &ProlongedAlgebra, f: &WeightedPolynomial, k: usize) -> Result<Vec<Scalar>> {
    let n = f.n;
    let mut theta = Vec::new();
    for i in contact_negative_order(n) {
        let e = WeightedPolynomial::monomial(n, unit_exp(n, i));
        theta.extend(contact_coords(alg, &jacobi_bracket(f, &e)?, k as i32 - 1)?);
    }
    Ok(theta)
}

fn weight_of(f: &WeightedPolynomial) -> Result<i32> {
    f.homogeneous_weight()
        .ok_or_else(|| Error::Inconsistent(format!("`{f}` is zero or not weight-homogeneous")))
}

/// The element of the prolongation of `heisenberg(n − 1)` represented by a
/// homogeneous Hamiltonian; `[f, e] = {f, e}` for `e` of degree −1.
pub fn contact_element(alg: &ProlongedAlgebra, f: &WeightedPolynomial) -> Result<Element> {
    check_base(alg, &Gnla::heisenberg(f.n - 1), "contact")?;
    let k = weight_of(f)?;
    Ok(Element::new(k, contact_coords(alg, f, k)?))
}

/// θ-block of a Hamiltonian of weight `k ≥ 0`, needing degrees below `k` only.
pub fn contact_theta(alg: &ProlongedAlgebra, f: &WeightedPolynomial) -> Result<Vec<Scalar>> {
    check_base(alg, &Gnla::heisenberg(f.n - 1), "contact")?;
    let k = weight_of(f)?;
    if k < 0 {
        return Err(Error::DegreeOutOfRange(k));
    }
    contact_theta_at(alg, f, k as usize)
}

/// θ-span of Hamiltonians of weight `k`, ready for a custom reduction at degree `k`.
pub fn contact_span_theta(alg: &ProlongedAlgebra, k: usize, fs: &[WeightedPolynomial]) -> Result<Subspace> {
    let rows = fs
        .iter()
        .filter(|f| !f.is_zero())
        .map(|f| {
            if f.homogeneous_weight() != Some(k as i32) {
                return Err(Error::Inconsistent(format!("`{f}` does not have weight {k}")));
            }
            contact_theta(alg, f)
        })
        .collect::<Result<Vec<_>>>()?;
    Subspace::span(alg.theta_len(k), rows)
}

/// Degree of a homogeneous field: polynomial degree minus one.
fn field_degree(xi: &PolyVectorField) -> Result<i32> {
    let mut d = None;
    for c in xi.components() {
        for (e, _) in c.terms() {
            let t = e.iter().sum::<u32>() as i32 - 1;
            if d.is_some_and(|x| x != t) {
                return Err(Error::Inconsistent(format!("`{xi}` is not homogeneous")));
            }
            d = Some(t);
        }
    }
    d.ok_or_else(|| Error::Inconsistent("the zero field has no degree".into()))
}

fn field_coords(alg: &ProlongedAlgebra, xi: &PolyVectorField, k: i32) -> Result<Vec<Scalar>> {
    let n = xi.dim();
    if k == -1 {
        let zero = vec![0; n];
        return Ok(xi.components().iter().map(|c| c.coefficient(&zero)).collect());
    }
    let theta = field_theta_at(alg, xi, k as usize)?;
    alg.coordinates_of_theta(k as usize, &theta)?
        .ok_or_else(|| Error::Inconsistent(format!("`{xi}` lies outside the computed degree {k}")))
}

fn field_theta_at(alg: &ProlongedAlgebra, xi: &PolyVectorField, k: usize) -> Result<Vec<Scalar>> {
    let mut theta = Vec::new();
    for a in 0..xi.dim() {
        // [ξ, ∂_a] = −∂_a ξ
        let d = xi.map(|c| -&c.derivative(a));
        theta.extend(field_coords(alg, &d, k as i32 - 1)?);
    }
    Ok(theta)
}

/// The element of the prolongation of the abelian algebra represented by a
/// homogeneous polynomial field; the Lie bracket of fields is preserved.
pub fn field_element(alg: &ProlongedAlgebra, xi: &PolyVectorField) -> Result<Element> {
    check_base(alg, &Gnla::abelian(xi.dim()), "projective")?;
    let k = field_degree(xi)?;
    Ok(Element::new(k, field_coords(alg, xi, k)?))
}

pub fn field_theta(alg: &ProlongedAlgebra, xi: &PolyVectorField) -> Result<Vec<Scalar>> {
    check_base(alg, &Gnla::abelian(xi.dim()), "projective")?;
    let k = field_degree(xi)?;
    if k < 0 {
        return Err(Error::DegreeOutOfRange(k));
    }
    field_theta_at(alg, xi, k as usize)
}

/// θ-span of homogeneous fields of degree `k`, ready for a custom reduction.
pub fn field_span_theta(alg: &ProlongedAlgebra, k: usize, fields: &[PolyVectorField]) -> Result<Subspace> {
    let rows = fields
        .iter()
        .filter(|f| !f.is_zero())
        .map(|f| {
            if field_degree(f)? != k as i32 {
                return Err(Error::Inconsistent(format!("`{f}` does not have degree {k}")));
            }
            field_theta(alg, f)
        })
        .collect::<Result<Vec<_>>>()?;
    Subspace::span(alg.theta_len(k), rows)
}
