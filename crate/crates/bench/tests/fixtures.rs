use polylab_bench::{family_case, random_case, standard_cases};
use polylab_core::FamilySpec;

#[test]
fn standard_set_shape() {
    let cases = standard_cases().unwrap();
    let names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["random-d2", "random-d3", "orthogonal-d2-p1e-3", "permutation-d3-p1e-2"]);
    assert!(cases.iter().all(|c| !c.methods.is_empty()));
}

#[test]
fn seeds_matter() {
    assert_ne!(random_case(2, 1).unwrap().system, random_case(2, 2).unwrap().system);
    let a = family_case(FamilySpec::orthogonal(2, 0.1)).unwrap();
    let b = family_case(FamilySpec::orthogonal(2, 0.1)).unwrap();
    assert_eq!(a.system, b.system);
}
