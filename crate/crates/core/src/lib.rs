pub mod conditioning;
pub mod error;
pub mod experiments;
pub mod families;
pub mod io;
pub mod macaulay;
pub mod numkernel;
pub mod poly;
pub mod solvers;
pub mod verification;

pub use conditioning::{ConditionReport, QFactorization};
pub use error::{Error, Result};
pub use families::{Family, FamilySpec, MatrixChoice};
pub use macaulay::{MacaulayMatrix, MacaulayPencil, QuotientBasis};
pub use numkernel::{CMatrix, EigTriple, GenEigProblem, SvdResult};
pub use poly::{C64, Monomial, MonomialOrder, MultiPoly, PolySystem, UniPoly};
pub use solvers::{Method, MultiParamEig, RootReport};
