//! Acceptance criteria, one line each. A criterion that cannot hold is
//! listed in `UNATTAINABLE` with its reason; it still prints FAIL.

mod common;

use std::io::Write;

use common::{dense_prolong, read_data, FormConstraint};
use num_traits::Zero;
use rand::{rngs::StdRng, Rng, SeedableRng};
use tanaka::distribution::{derived_flag, gnla_at, growth_vector_at, named_model, regular_at};
use tanaka::flat::{
    contact_component, contact_span_theta, decompose_g1_contact, divergence_kernel_component, embedding_of_covector,
    field_component, field_span_theta, hamiltonians, jacobi_bracket, lagrangian_contact_g0,
};
use tanaka::graded::Gnla;
use tanaka::linalg::{frac, int, Matrix, Scalar, Subspace};
use tanaka::prolong::{prolong, ProlongedAlgebra, ReductionKind, ReductionSpec};
use tanaka::symmetry::{run_scenario, ScenarioDoc};

/// Criteria that fail as stated on the shipped inputs, with the reason.
const UNATTAINABLE: &[(&str, &str)] = &[(
    "10e",
    "weight 1 sl(3) symmetries have a degree 1 term (e.g. z·∂x), so s = 1 < i/ν + 1 = 3/2",
)];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn custom(degree: usize, s: Subspace) -> ReductionSpec {
    ReductionSpec::new(degree, ReductionKind::Custom(s))
}

fn axioms_hold(alg: &ProlongedAlgebra) -> bool {
    alg.verify_graded_jacobi(None).unwrap().is_empty() && alg.antisymmetry_violations(None).unwrap().is_empty()
}

fn criterion_1(assembled: &mut Vec<ProlongedAlgebra>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [3usize, 4] {
        let g = Matrix::identity(n);
        let alg = prolong(&Gnla::abelian(n), None, &[ReductionSpec::new(0, ReductionKind::Conformal(g.clone()))], 6).unwrap();
        let t = alg.dims();
        let want = vec![1 + n * (n - 1) / 2, n, 0];
        let oracle = dense_prolong(&Gnla::abelian(n), Some(FormConstraint { form: &g, conformal: true }), 6);
        pass &= t.nonnegative == want && t.total == (n + 1) * (n + 2) / 2 && oracle == want;
        detail.push(format!("n={n} {t}"));
        assembled.push(alg);
    }
    Outcome { id: "1", pass, detail: detail.join("; ") }
}

fn projective_reduction(n: usize, fields: Vec<tanaka::distribution::PolyVectorField>) -> Subspace {
    let alg = prolong(&Gnla::abelian(n), None, &[], 0).unwrap();
    field_span_theta(&alg, 1, &fields).unwrap()
}

fn criterion_2(assembled: &mut Vec<ProlongedAlgebra>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2usize, 3] {
        let image = projective_reduction(n, (0..n).map(|b| embedding_of_covector(n, b)).collect());
        let alg = prolong(&Gnla::abelian(n), None, &[custom(1, image)], 6).unwrap();
        let t = alg.dims();
        pass &= t.total == (n + 1) * (n + 1) - 1 && t.nonnegative.get(2) == Some(&0);
        detail.push(format!("n={n} {t}"));
        assembled.push(alg);
    }
    Outcome { id: "2", pass, detail: detail.join("; ") }
}

fn criterion_3(assembled: &mut Vec<ProlongedAlgebra>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in 1usize..=3 {
        let basis = field_component(n, 1);
        let ker = divergence_kernel_component(n, 1);
        let fields = ker.vectors().map(|v| basis.combine(n, v)).collect();
        let red = projective_reduction(n, fields);
        let alg = prolong(&Gnla::abelian(n), None, &[custom(1, red)], 3).unwrap();
        let dims = alg.dims().nonnegative;
        for k in 1..=3usize {
            let nu = n as u64;
            let kk = k as u64;
            let formula = (nu * binom(nu + kk, kk + 1) - binom(nu + kk - 1, kk)) as usize;
            let got = dims.get(k).copied().unwrap_or(0);
            let direct = divergence_kernel_component(n, k as i32).dim();
            pass &= got == formula && direct == formula;
        }
        detail.push(format!("n={n} {:?}", &dims[1..]));
        assembled.push(alg);
    }
    Outcome { id: "3", pass, detail: detail.join("; ") }
}

fn lagrangian_reduction(n: usize) -> Subspace {
    let alg = ProlongedAlgebra::new(Gnla::heisenberg(n - 1)).unwrap();
    let hams = hamiltonians(n, &contact_component(n, 0), &lagrangian_contact_g0(n));
    contact_span_theta(&alg, 0, &hams).unwrap()
}

fn criterion_4(assembled: &mut Vec<ProlongedAlgebra>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2usize, 3] {
        let m = Gnla::heisenberg(n - 1);
        let alg = prolong(&m, Some(&lagrangian_reduction(n)), &[], 6).unwrap();
        let t = alg.dims();
        let d = n - 1;
        pass &= t.negative == vec![1, 2 * d]
            && t.nonnegative == vec![1 + d * d, 2 * d, 1, 0]
            && t.total == (n + 1) * (n + 1) - 1;
        detail.push(format!("n={n} {t}"));
        assembled.push(alg);
    }
    Outcome { id: "4", pass, detail: detail.join("; ") }
}

fn contact_g1_reduction(n: usize, w_part: bool) -> Subspace {
    let (w, s3w) = decompose_g1_contact(n);
    let alg = prolong(&Gnla::heisenberg(n - 1), None, &[], 0).unwrap();
    let hams = hamiltonians(n, &contact_component(n, 1), if w_part { &w } else { &s3w });
    contact_span_theta(&alg, 1, &hams).unwrap()
}

fn criterion_5(assembled: &mut Vec<ProlongedAlgebra>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, s4w) in [(2usize, 5usize), (3, 35)] {
        let m = Gnla::heisenberg(n - 1);
        let alg = prolong(&m, None, &[custom(1, contact_g1_reduction(n, true))], 6).unwrap();
        let t = alg.dims();
        pass &= t.total == n * (2 * n + 1) && t.nonnegative.get(2) == Some(&1) && t.nonnegative.get(3) == Some(&0);
        let first = prolong(&m, None, &[custom(1, contact_g1_reduction(n, false))], 2).unwrap();
        let g2 = first.dims().nonnegative[2];
        pass &= g2 == s4w;
        detail.push(format!("n={n} W: {t}; S3W: g2 = {g2}"));
        assembled.push(alg);
        assembled.push(first);
    }
    Outcome { id: "5", pass, detail: detail.join("; ") }
}

fn criterion_6(assembled: &mut Vec<ProlongedAlgebra>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2usize, 3] {
        let alg = prolong(&Gnla::heisenberg(n - 1), None, &[], 3).unwrap();
        let dims = alg.dims().nonnegative;
        let counts: Vec<usize> = (0..=3).map(|k| contact_component(n, k).dim()).collect();
        pass &= dims == counts;
        detail.push(format!("n={n} engine {dims:?} monomials {counts:?}"));
        assembled.push(alg);
    }
    Outcome { id: "6", pass, detail: detail.join("; ") }
}

fn criterion_7(assembled: &mut Vec<ProlongedAlgebra>) -> Outcome {
    let g = Matrix::identity(2);
    let m = Gnla::heisenberg(1);
    let alg = prolong(&m, None, &[ReductionSpec::new(0, ReductionKind::Orthogonal(g.clone()))], 6).unwrap();
    let t = alg.dims();
    let oracle = dense_prolong(&m, Some(FormConstraint { form: &g, conformal: false }), 6);
    let pass = t.finite_type.is_some() && t.total == 4 && oracle == t.nonnegative;
    let detail = format!("{t}; oracle {oracle:?}");
    assembled.push(alg);
    Outcome { id: "7", pass, detail }
}

fn criterion_8(assembled: &mut Vec<ProlongedAlgebra>) -> Outcome {
    let fields = named_model("cartan235").unwrap();
    let flag = derived_flag(&fields, 5).unwrap();
    let origin = vec![Scalar::zero(); 5];
    let m = gnla_at(&flag, &origin).unwrap();
    let axioms = m.validate().is_empty() && m.is_fundamental();
    let alg = prolong(&m, None, &[], 6).unwrap();
    let t = alg.dims();
    let oracle = dense_prolong(&m, None, 6);
    let pass = flag.generic_ranks() == [2, 3, 5]
        && axioms
        && t.total == 14
        && t.nonnegative.get(4) == Some(&0)
        && oracle == t.nonnegative;
    let detail = format!("growth {:?}; {t}; oracle {oracle:?}", flag.generic_ranks());
    assembled.push(alg);
    Outcome { id: "8", pass, detail }
}

fn criterion_9() -> Outcome {
    let flag = derived_flag(&named_model("martinet").unwrap(), 5).unwrap();
    let origin = vec![Scalar::zero(); 3];
    let at_origin = growth_vector_at(&flag, &origin).unwrap();
    let mut pass = at_origin == [2, 2, 3] && !regular_at(&flag, &origin).unwrap() && flag.generic_ranks() == [2, 3];
    let mut rng = StdRng::seed_from_u64(9);
    let mut random_ok = 0;
    for _ in 0..20 {
        let mut x = 0i64;
        while x == 0 {
            x = rng.gen_range(-50..=50);
        }
        let p = vec![
            frac(x, rng.gen_range(1..=9)),
            frac(rng.gen_range(-50..=50), rng.gen_range(1..=9)),
            frac(rng.gen_range(-50..=50), rng.gen_range(1..=9)),
        ];
        if regular_at(&flag, &p).unwrap() && growth_vector_at(&flag, &p).unwrap() == [2, 3] {
            random_ok += 1;
        }
    }
    pass &= random_ok == 20;
    Outcome {
        id: "9",
        pass,
        detail: format!("origin {at_origin:?}; {random_ok}/20 random points regular with (2, 3)"),
    }
}

fn shipped_scenarios() -> Vec<(String, ScenarioDoc)> {
    let mut out = Vec::new();
    let mut names: Vec<String> = std::fs::read_dir(common::data_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".scenario.json"))
        .collect();
    names.sort();
    for n in names {
        let doc = ScenarioDoc::from_json(&read_data(&n)).unwrap();
        out.push((n, doc));
    }
    out
}

fn criterion_10(assembled: &[ProlongedAlgebra]) -> Vec<Outcome> {
    let a_ok = assembled.iter().filter(|a| axioms_hold(a)).count();
    let a = Outcome {
        id: "10a",
        pass: a_ok == assembled.len(),
        detail: format!("{a_ok}/{} assembled algebras pass Jacobi and antisymmetry", assembled.len()),
    };

    let mut rng = StdRng::seed_from_u64(10);
    let mut b_ok = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=3);
        let (k, l) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        let mut sample = |w: i32| {
            let basis = contact_component(n, w);
            let coords: Vec<Scalar> = (0..basis.dim()).map(|_| int(rng.gen_range(-4..=4))).collect();
            basis.combine(n, &coords)
        };
        let (f, g) = (sample(k), sample(l));
        let h = jacobi_bracket(&f, &g).unwrap();
        if h.is_zero() || h.homogeneous_weight() == Some(k + l) {
            b_ok += 1;
        }
    }
    let b = Outcome {
        id: "10b",
        pass: b_ok == 200,
        detail: format!("{b_ok}/200 random pairs weight additive"),
    };

    let mut c_pass = true;
    let mut d_pass = true;
    let mut e_pass = true;
    let mut c_detail = Vec::new();
    let mut d_detail = Vec::new();
    let mut e_fail = Vec::new();
    for (name, doc) in shipped_scenarios() {
        let out = run_scenario(&doc).unwrap();
        if out.report.model == "heisenberg" {
            c_pass &= out.compat.holds;
            c_detail.push(format!("{name}: {}", if out.compat.holds { "holds" } else { "fails" }));
        }
        d_pass &= out.report.bound_holds && out.report.total_s <= out.report.total_g;
        d_detail.push(format!("{name}: {} <= {}", out.report.total_s, out.report.total_g));
        for chk in &out.determinacy {
            if !chk.holds {
                e_pass = false;
                e_fail.push(format!(
                    "{name} field {} (i = {}, s = {}, need {} <= s <= {})",
                    chk.index, chk.weighted_order, chk.jet_order, chk.lower, chk.upper
                ));
            }
        }
    }
    vec![
        a,
        b,
        Outcome { id: "10c", pass: c_pass, detail: c_detail.join("; ") },
        Outcome { id: "10d", pass: d_pass, detail: d_detail.join("; ") },
        Outcome {
            id: "10e",
            pass: e_pass,
            detail: if e_fail.is_empty() { "all shipped symmetries in range".into() } else { e_fail.join("; ") },
        },
    ]
}

#[test]
fn acceptance_criteria() {
    let mut assembled = Vec::new();
    let mut outcomes = vec![
        criterion_1(&mut assembled),
        criterion_2(&mut assembled),
        criterion_3(&mut assembled),
        criterion_4(&mut assembled),
        criterion_5(&mut assembled),
        criterion_6(&mut assembled),
        criterion_7(&mut assembled),
        criterion_8(&mut assembled),
        criterion_9(),
    ];
    outcomes.extend(criterion_10(&assembled));
    // Written to the stdout handle directly so the lines survive test output capture.
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    let mut unexpected = Vec::new();
    for o in &outcomes {
        writeln!(out, "criterion {:<4} {}  {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail).unwrap();
        let known = UNATTAINABLE.iter().find(|(id, _)| *id == o.id);
        match (o.pass, known) {
            (false, Some((_, why))) => writeln!(out, "             known unattainable: {why}").unwrap(),
            (false, None) => unexpected.push(o.id),
            (true, Some(_)) => unexpected.push(o.id),
            (true, None) => {}
        }
    }
    assert!(unexpected.is_empty(), "criteria with unexpected outcome: {unexpected:?}");
}
