//! Deterministic inputs for the solver benchmarks.

use polylab_core::families::{self, FamilySpec};
use polylab_core::{Method, PolySystem, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const BENCH_SEED: u64 = 1;

/// One benchmark input: a labelled system plus the methods that accept it.
pub struct Case {
    pub name: String,
    pub system: PolySystem,
    pub methods: Vec<Method>,
}

const GENERAL: [Method; 3] = [Method::NormalForm, Method::Macaulay, Method::Mep];

/// Dense random quadratics in `d` variables.
pub fn random_case(d: usize, seed: u64) -> Result<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Case {
        name: format!("random-d{d}"),
        system: families::random_quadratic_system(d, &mut rng)?,
        // no determinantal representation for dense quadratics
        methods: vec![Method::NormalForm, Method::Macaulay],
    })
}

/// A devastating family member (shifted off the origin like the figure sweeps).
pub fn family_case(spec: FamilySpec) -> Result<Case> {
    let d = spec.d;
    let spec = spec.with_seed(BENCH_SEED).with_shift(vec![1.0 / 3.0; d]);
    Ok(Case {
        name: format!("{}-d{d}-p{:e}", spec.family.tag(), spec.param),
        system: families::generate_seeded(&spec)?,
        methods: GENERAL.to_vec(),
    })
}

/// The standard set: random systems in 2 and 3 variables, and the
/// orthogonal and permutation families at a small parameter.
pub fn standard_cases() -> Result<Vec<Case>> {
    Ok(vec![
        random_case(2, BENCH_SEED)?,
        random_case(3, BENCH_SEED)?,
        family_case(FamilySpec::orthogonal(2, 1e-3))?,
        family_case(FamilySpec::permutation(3, 1e-2))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use polylab_core::solvers::solve_system;

    #[test]
    fn cases_are_solvable() {
        for case in standard_cases().unwrap() {
            for &m in &case.methods {
                let r = solve_system(&case.system, m, true, BENCH_SEED).unwrap();
                assert_eq!(r.len(), 1 << case.system.d(), "{} {m}", case.name);
            }
        }
    }

    #[test]
    fn cases_are_deterministic() {
        let a = random_case(3, 5).unwrap().system;
        let b = random_case(3, 5).unwrap().system;
        assert_eq!(a, b);
    }
}
