mod common;

use common::{dense_prolong, FormConstraint};
use tanaka::graded::Gnla;
use tanaka::linalg::{int, Matrix};
use tanaka::prolong::{prolong, ReductionKind, ReductionSpec};

fn engine(m: &Gnla, reductions: &[ReductionSpec], max: usize) -> Vec<usize> {
    prolong(m, None, reductions, max).unwrap().dims().nonnegative
}

#[test]
fn oracle_matches_engine_without_reductions() {
    assert_eq!(dense_prolong(&Gnla::abelian(2), None, 3), engine(&Gnla::abelian(2), &[], 3));
    assert_eq!(dense_prolong(&Gnla::heisenberg(1), None, 3), vec![4, 6, 9, 12]);
    assert_eq!(dense_prolong(&Gnla::heisenberg(2), None, 2), engine(&Gnla::heisenberg(2), &[], 2));
}

#[test]
fn oracle_matches_engine_with_forms() {
    let g = Matrix::identity(3);
    let co = dense_prolong(&Gnla::abelian(3), Some(FormConstraint { form: &g, conformal: true }), 4);
    assert_eq!(co, vec![4, 3, 0]);
    let so = dense_prolong(&Gnla::abelian(3), Some(FormConstraint { form: &g, conformal: false }), 4);
    assert_eq!(so, engine(&Gnla::abelian(3), &[ReductionSpec::new(0, ReductionKind::Orthogonal(g.clone()))], 4));
}

#[test]
fn oracle_on_a_three_step_algebra() {
    let m = Gnla::new(
        vec![vec!["a".into(), "b".into()], vec!["c".into()], vec!["d".into(), "e".into()]],
        vec![
            ("a".into(), "b".into(), vec![("c".into(), int(1))]),
            ("a".into(), "c".into(), vec![("d".into(), int(1))]),
            ("b".into(), "c".into(), vec![("e".into(), int(1))]),
        ],
    )
    .unwrap();
    assert_eq!(dense_prolong(&m, None, 5), engine(&m, &[], 5));
}
