//! Roots from the eigenvectors of the `h`-augmented Macaulay pencil.

use rand::Rng;

use super::{newton_polish, Diagnostics, Method, RootReport};
use crate::error::{Error, Result};
use crate::macaulay::{macaulay_pencil, MacaulayPencil};
use crate::numkernel::{bilinear, generalized_eig, vec_norm};
use crate::poly::{Monomial, PolySystem, C64};

/// Below this relative size the entry labelled `1` is not trusted as the
/// affine normalizer.
const AFFINE_ENTRY_TOL: f64 = 1e-8;

/// Reads a root from an eigenvector indexed by monomial labels.
pub fn root_from_label_vector(labels: &[Monomial], w: &[C64]) -> Result<Vec<C64>> {
    let d = labels.first().map(Monomial::nvars).ok_or(Error::EigenvectorDegenerate)?;
    let find = |m: &Monomial| labels.iter().position(|c| c == m);
    let one = find(&Monomial::one(d)).ok_or(Error::EigenvectorDegenerate)?;
    let norm = vec_norm(w);
    if !(norm > 0.0) {
        return Err(Error::EigenvectorDegenerate);
    }
    if w[one].norm() >= AFFINE_ENTRY_TOL * norm {
        return (0..d)
            .map(|i| find(&Monomial::var(d, i)).map(|k| w[k] / w[one]).ok_or(Error::EigenvectorDegenerate))
            .collect();
    }
    // least squares over all label pairs (m, x_i m): w[x_i m] = x_i w[m]
    (0..d)
        .map(|i| {
            let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
            for (k, m) in labels.iter().enumerate() {
                if let Some(k2) = find(&m.times_var(i)) {
                    num += w[k].conj() * w[k2];
                    den += w[k].norm_sqr();
                }
            }
            if den <= (AFFINE_ENTRY_TOL * norm).powi(2) {
                Err(Error::EigenvectorDegenerate)
            } else {
                Ok(num / den)
            }
        })
        .collect()
}

pub fn solve_macaulay_resultant<R: Rng + ?Sized>(s: &PolySystem, polish: bool, rng: &mut R) -> Result<RootReport> {
    let pencil = macaulay_pencil(s, rng)?;
    solve_pencil(s, &pencil, polish)
}

/// Solves an already constructed pencil (exposed for conditioning checks).
pub fn solve_pencil(s: &PolySystem, pencil: &MacaulayPencil, polish: bool) -> Result<RootReport> {
    let labels = &pencil.hat.col_labels;
    let trips = generalized_eig(&pencil.gep)?;
    let mut roots = Vec::new();
    let mut kappas = Vec::new();
    for t in trips.iter().filter(|t| t.is_finite()) {
        let x = root_from_label_vector(labels, &t.right)?;
        let ybx = bilinear(&t.left, &pencil.gep.b, &t.right);
        let lam = t.lambda.expect("finite");
        kappas.push(vec_norm(&t.left) * vec_norm(&t.right) / ybx.norm() * (1.0 + lam.norm()));
        roots.push(if polish { newton_polish(s, &x, 2) } else { x });
    }
    let diagnostics = Diagnostics {
        basis: Some(pencil.basis.basis.iter().map(Monomial::label).collect()),
        basis_condition: Some(pencil.basis.condition),
        sigma_min_hat: crate::macaulay::smallest_singular_hat(s).ok(),
        dropped_rows: Some(pencil.dropped_h_monomials().iter().map(|m| format!("{}h", prefix(m))).collect()),
        notes: if pencil.p_row_count() < pencil.hat.mat.nrows() {
            vec![format!("{} dependent p-rows omitted from A1", pencil.hat.mat.nrows() - pencil.p_row_count())]
        } else {
            Vec::new()
        },
    };
    RootReport::new(s, roots, kappas, Method::Macaulay, diagnostics)
}

fn prefix(m: &Monomial) -> String {
    if m.degree() == 0 {
        String::new()
    } else {
        m.label()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiPoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_system() {
        let s = PolySystem::new(vec![
            MultiPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[0, 0], -1.0)]).unwrap(),
            MultiPoly::from_real_terms(2, &[(&[0, 2], 1.0), (&[0, 0], -1.0)]).unwrap(),
        ])
        .unwrap();
        let r = solve_macaulay_resultant(&s, false, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.max_residual() <= 1e-10);
        assert_eq!(r.diagnostics.dropped_rows.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn eigenvalue_matches_h_ratio() {
        let s = PolySystem::new(vec![
            MultiPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[0, 1], 0.3), (&[0, 0], -1.0)]).unwrap(),
            MultiPoly::from_real_terms(2, &[(&[0, 2], 1.0), (&[1, 0], -0.2), (&[0, 0], -2.0)]).unwrap(),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pencil = macaulay_pencil(&s, &mut rng).unwrap();
        let trips = generalized_eig(&pencil.gep).unwrap();
        for t in trips.iter().filter(|t| t.is_finite()) {
            let x = root_from_label_vector(&pencil.hat.col_labels, &t.right).unwrap();
            let lam = t.lambda.unwrap();
            let h = pencil.h_alpha().eval(&x).unwrap() - lam * pencil.h_beta().eval(&x).unwrap();
            assert!(h.norm() <= 1e-8 * (1.0 + lam.norm()));
            assert!((pencil.eigenvalue_at(&x).unwrap() - lam).norm() <= 1e-8 * (1.0 + lam.norm()));
        }
    }

    #[test]
    fn fallback_least_squares_readout() {
        let labels: Vec<Monomial> = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]].iter().map(|e| Monomial::new(e.to_vec())).collect();
        let x = [C64::new(2.0, 0.0), C64::new(-3.0, 0.5)];
        let mut w: Vec<C64> = labels.iter().map(|m| m.eval(&x)).collect();
        assert_eq!(root_from_label_vector(&labels, &w).unwrap(), x.to_vec());
        w[0] = C64::new(0.0, 0.0);
        let got = root_from_label_vector(&labels, &w).unwrap();
        assert!((got[0] - x[0]).norm() < 1e-12 && (got[1] - x[1]).norm() < 1e-12);
        let zero = vec![C64::new(0.0, 0.0); 6];
        assert_eq!(root_from_label_vector(&labels, &zero), Err(Error::EigenvectorDegenerate));
    }
}
