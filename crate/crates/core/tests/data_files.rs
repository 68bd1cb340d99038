//! Shipped data files agree with the generators that produced them.

mod common;

use common::read_data;
use tanaka::distribution::{named_model, FieldsDoc};
use tanaka::flat::{
    contact_component, contact_span_theta, decompose_g1_contact, decompose_g1_projective, embedding_of_covector,
    field_component, field_span_theta, hamiltonians, lagrangian_contact_g0,
};
use tanaka::graded::Gnla;
use tanaka::linalg::{Subspace, SubspaceDoc};
use tanaka::prolong::{prolong, ProlongedAlgebra};
use tanaka::symmetry::{sl3_scenario, GradedCoordinateModel, ScenarioDoc};

fn subspace(name: &str) -> (Subspace, Option<usize>) {
    let doc: SubspaceDoc = serde_json::from_str(&read_data(name)).unwrap();
    (Subspace::from_doc(&doc).unwrap(), doc.degree)
}

#[test]
fn algebras() {
    assert_eq!(Gnla::from_json(&read_data("heisenberg1.json")).unwrap(), Gnla::heisenberg(1));
    assert_eq!(Gnla::from_json(&read_data("heisenberg2.json")).unwrap(), Gnla::heisenberg(2));
    assert_eq!(Gnla::from_json(&read_data("abelian2.json")).unwrap(), Gnla::abelian(2));
    assert_eq!(Gnla::from_json(&read_data("abelian3.json")).unwrap(), Gnla::abelian(3));
}

#[test]
fn distributions() {
    for name in ["martinet", "cartan235", "heisenberg"] {
        let doc: FieldsDoc = serde_json::from_str(&read_data(&format!("{name}.fields.json"))).unwrap();
        assert_eq!(doc.parse_fields().unwrap(), named_model(name).unwrap());
    }
}

#[test]
fn contact_reductions() {
    for n in [2usize, 3] {
        let (w, s3w) = decompose_g1_contact(n);
        let alg = prolong(&Gnla::heisenberg(n - 1), None, &[], 0).unwrap();
        let basis = contact_component(n, 1);
        let want_w = contact_span_theta(&alg, 1, &hamiltonians(n, &basis, &w)).unwrap();
        let want_s = contact_span_theta(&alg, 1, &hamiltonians(n, &basis, &s3w)).unwrap();
        assert_eq!(subspace(&format!("contact_w_n{n}.json")), (want_w, Some(1)));
        assert_eq!(subspace(&format!("contact_s3w_n{n}.json")), (want_s, Some(1)));
        let empty = ProlongedAlgebra::new(Gnla::heisenberg(n - 1)).unwrap();
        let hams = hamiltonians(n, &contact_component(n, 0), &lagrangian_contact_g0(n));
        let want_l = contact_span_theta(&empty, 0, &hams).unwrap();
        assert_eq!(subspace(&format!("lagrangian_n{n}.json")), (want_l, Some(0)));
    }
}

#[test]
fn projective_reductions() {
    let n = 2;
    let alg = prolong(&Gnla::abelian(n), None, &[], 0).unwrap();
    let image: Vec<_> = (0..n).map(|b| embedding_of_covector(n, b)).collect();
    assert_eq!(subspace("projective_image_n2.json").0, field_span_theta(&alg, 1, &image).unwrap());
    let (ker, _) = decompose_g1_projective(n);
    let basis = field_component(n, 1);
    let fields: Vec<_> = ker.vectors().map(|v| basis.combine(n, v)).collect();
    assert_eq!(subspace("divergence_free_n2.json").0, field_span_theta(&alg, 1, &fields).unwrap());
}

#[test]
fn scenarios() {
    assert_eq!(ScenarioDoc::from_json(&read_data("sl3.scenario.json")).unwrap(), sl3_scenario().unwrap());
    let cartan = GradedCoordinateModel::named("cartan235").unwrap();
    assert_eq!(
        ScenarioDoc::from_json(&read_data("cartan235_graded.scenario.json")).unwrap(),
        ScenarioDoc::graded(&cartan, 0, 1).unwrap()
    );
}
