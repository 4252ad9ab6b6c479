//! Dense complex linear algebra: SVD, QZ with left and right eigenvectors,
//! fixed-nullity null spaces, Kronecker products and operator determinants,
//! companion-matrix rootfinding and seeded random generators.
//!
//! The heavy lifting is delegated to `faer`; this module pins the contracts
//! (conventions for left eigenvectors, infinite-eigenvalue flagging,
//! regularity probing) that the solvers and condition numbers rely on.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::ComputeEigenvectors;
use faer::linalg::gevd;
use faer::linalg::solvers::Solve;
use faer::{Mat, Par};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::poly::{Monomial, UniPoly, C64};

pub type CMatrix = Mat<C64>;

/// Threshold on `|beta| / (|alpha| + |beta|)` below which an eigenvalue of
/// the pencil is considered infinite.
pub const INFINITE_EIGENVALUE_TOL: f64 = 1e-12;

/// Singular-value gap below which `null_space` warns that the nullity is
/// numerically ambiguous.
pub const NULL_SPACE_GAP_WARN: f64 = 1e2;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// A pencil `A x = lambda B x` with optional monomial labels.
#[derive(Clone, Debug)]
pub struct GenEigProblem {
    pub a: CMatrix,
    pub b: CMatrix,
    pub row_labels: Option<Vec<Monomial>>,
    pub col_labels: Option<Vec<Monomial>>,
}

impl GenEigProblem {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        let n = a.nrows();
        for (m, what) in [(&a, "A"), (&b, "B")] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::BlockSizeMismatch(format!(
                    "{what} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(GenEigProblem { a, b, row_labels: None, col_labels: None })
    }

    /// The standard eigenproblem `A x = lambda x`.
    pub fn standard(a: CMatrix) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, CMatrix::identity(n, n))
    }

    pub fn with_labels(mut self, rows: Vec<Monomial>, cols: Vec<Monomial>) -> Result<Self> {
        let n = self.dim();
        if rows.len() != n || cols.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rows.len().max(cols.len()) });
        }
        self.row_labels = Some(rows);
        self.col_labels = Some(cols);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// One eigenvalue with unit right eigenvector `x` (`A x = lambda B x`) and
/// unit left eigenvector `y` in the transpose convention, `y^T A = lambda y^T B`.
#[derive(Clone, Debug)]
pub struct EigTriple {
    pub alpha: C64,
    pub beta: C64,
    /// `alpha / beta`, or `None` when flagged infinite.
    pub lambda: Option<C64>,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
}

impl EigTriple {
    pub fn is_finite(&self) -> bool {
        self.lambda.is_some()
    }
}

/// Full SVD `M = U diag(s) V^H`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: CMatrix,
    pub v: CMatrix,
    /// Descending, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
}

impl SvdResult {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

pub fn svd(m: &CMatrix) -> Result<SvdResult> {
    let (r, c) = (m.nrows(), m.ncols());
    if r == 0 || c == 0 {
        return Ok(SvdResult {
            u: CMatrix::identity(r, r),
            v: CMatrix::identity(c, c),
            singular_values: Vec::new(),
        });
    }
    if !m.is_all_finite() {
        return Err(Error::Overflow("non-finite matrix entry passed to svd".into()));
    }
    let dec = m.svd().map_err(|_| Error::Convergence("SVD"))?;
    let s = dec.S().column_vector().iter().map(|x| x.re).collect();
    Ok(SvdResult { u: dec.U().to_owned(), v: dec.V().to_owned(), singular_values: s })
}

/// Singular values only, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    if !m.is_all_finite() {
        return Err(Error::Overflow("non-finite matrix entry".into()));
    }
    m.singular_values().map_err(|_| Error::Convergence("SVD"))
}

/// Spectral norm.
pub fn norm2(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Smallest singular value of a (possibly rectangular) matrix.
pub fn sigma_min(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0))
}

/// Orthonormal basis of the right singular vectors belonging to the
/// `nullity` smallest singular values (counting the structural zeros of a
/// wide matrix).
pub fn null_space(m: &CMatrix, nullity: usize) -> Result<CMatrix> {
    Ok(null_space_with_gap(m, nullity)?.0)
}

/// Like [`null_space`], also returning the gap ratio
/// `sigma_rank / sigma_{rank+1}` (infinite when the split is exact).
pub fn null_space_with_gap(m: &CMatrix, nullity: usize) -> Result<(CMatrix, f64)> {
    let cols = m.ncols();
    if nullity == 0 || nullity > cols {
        return Err(Error::NullityTooLarge { nullity, cols });
    }
    let dec = svd(m)?;
    let rank = cols - nullity;
    let sv = |k: usize| dec.singular_values.get(k).copied().unwrap_or(0.0);
    let gap = if rank == 0 {
        f64::INFINITY
    } else {
        let below = sv(rank);
        if below == 0.0 { f64::INFINITY } else { sv(rank - 1) / below }
    };
    if gap < NULL_SPACE_GAP_WARN {
        log::warn!("null space of requested nullity {nullity} has singular-value gap only {gap:.3e}");
    }
    let basis = dec.v.submatrix(0, rank, cols, nullity).to_owned();
    Ok((basis, gap))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.nrows(), b.ncols());
    CMatrix::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Determinant of a `d x d` grid of square blocks, with products replaced by
/// Kronecker products: `sum_perm sign * blocks[0][p0] (x) ... (x) blocks[d-1][p_{d-1}]`.
///
/// Block `(i, j)` must be `n_i x n_i`. Permutations that touch an all-zero
/// block are pruned, which keeps sparse grids cheap for large `d`.
pub fn block_operator_determinant(blocks: &[Vec<CMatrix>]) -> Result<CMatrix> {
    let d = blocks.len();
    if d == 0 {
        return Err(Error::BlockSizeMismatch("empty block grid".into()));
    }
    let mut sizes = Vec::with_capacity(d);
    for (i, row) in blocks.iter().enumerate() {
        if row.len() != d {
            return Err(Error::BlockSizeMismatch(format!("row {i} has {} blocks, expected {d}", row.len())));
        }
        let n = row[0].nrows();
        for (j, blk) in row.iter().enumerate() {
            if blk.nrows() != n || blk.ncols() != n {
                return Err(Error::BlockSizeMismatch(format!(
                    "block ({i},{j}) is {}x{}, expected {n}x{n}",
                    blk.nrows(),
                    blk.ncols()
                )));
            }
        }
        sizes.push(n);
    }
    let total: usize = sizes.iter().product();
    let nonzero: Vec<Vec<bool>> = blocks
        .iter()
        .map(|row| row.iter().map(|b| b.norm_max() > 0.0).collect())
        .collect();

    let mut acc = CMatrix::zeros(total, total);
    let mut used = vec![false; d];
    let one = CMatrix::identity(1, 1);
    expand(blocks, &nonzero, 0, &mut used, one, 1.0, &mut acc);
    Ok(acc)
}

fn expand(
    blocks: &[Vec<CMatrix>],
    nonzero: &[Vec<bool>],
    row: usize,
    used: &mut [bool],
    partial: CMatrix,
    sign: f64,
    acc: &mut CMatrix,
) {
    let d = blocks.len();
    if row == d {
        *acc += faer::Scale(C64::new(sign, 0.0)) * &partial;
        return;
    }
    for col in 0..d {
        if used[col] || !nonzero[row][col] {
            continue;
        }
        // each already-placed column to the right of `col` is one inversion
        let inversions = (col + 1..d).filter(|&c| used[c]).count();
        let s = if inversions % 2 == 0 { sign } else { -sign };
        used[col] = true;
        expand(blocks, nonzero, row + 1, used, kron(&partial, &blocks[row][col]), s, acc);
        used[col] = false;
    }
}

/// Fixed, pseudo-random probe points for the regularity test (unit scale).
const REGULARITY_PROBES: [(f64, f64); 3] = [(0.327_1, 0.741_2), (-1.137_4, 0.402_8), (0.552_1, -1.293_7)];

/// Returns true when `det(A - lambda B)` is numerically zero at all probe points.
pub fn pencil_is_singular(gep: &GenEigProblem) -> Result<bool> {
    let n = gep.dim();
    if n == 0 {
        return Ok(false);
    }
    let na = gep.a.norm_l2();
    let nb = gep.b.norm_l2();
    let scale = if nb > 0.0 && na > 0.0 { na / nb } else { 1.0 };
    for &(re, im) in &REGULARITY_PROBES {
        let lam = C64::new(re, im) * scale;
        let shifted = &gep.a - faer::Scale(lam) * &gep.b;
        let smin = sigma_min(&shifted)?;
        let tol = n as f64 * f64::EPSILON * (na + lam.norm() * nb);
        if smin > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// QZ-based generalized eigendecomposition returning one triple per
/// eigenvalue (finite or flagged infinite).
pub fn generalized_eig(gep: &GenEigProblem) -> Result<Vec<EigTriple>> {
    let n = gep.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !gep.a.is_all_finite() || !gep.b.is_all_finite() {
        return Err(Error::Overflow("non-finite pencil entry".into()));
    }
    if pencil_is_singular(gep)? {
        return Err(Error::SingularPencil);
    }
    let mut a = gep.a.clone();
    let mut b = gep.b.clone();
    let mut alpha = Diag::<C64>::zeros(n);
    let mut beta = Diag::<C64>::zeros(n);
    let mut ul = CMatrix::zeros(n, n);
    let mut ur = CMatrix::zeros(n, n);
    let par = Par::Seq;
    let scratch = gevd::gevd_scratch::<C64>(
        n,
        ComputeEigenvectors::Yes,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    )
    // the eigenvector back-substitution needs an extra column not covered
    // by faer's own estimate for small dimensions
    .and(faer::linalg::temp_mat_scratch::<C64>(n, 2));
    gevd::gevd_cplx(
        a.as_mut(),
        b.as_mut(),
        alpha.as_mut(),
        beta.as_mut(),
        Some(ul.as_mut()),
        Some(ur.as_mut()),
        par,
        MemStack::new(&mut MemBuffer::new(scratch)),
        Default::default(),
    )
    .map_err(|_| Error::Convergence("QZ"))?;

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (al, be) = (alpha[k], beta[k]);
        let finite = be.norm() > INFINITE_EIGENVALUE_TOL * (al.norm() + be.norm());
        // faer's left vectors satisfy u^H (A - lambda B) = 0; conjugate for y^T.
        let left = normalized(ul.col(k).iter().map(|z| z.conj()).collect());
        let right = normalized(ur.col(k).iter().copied().collect());
        out.push(EigTriple {
            alpha: al,
            beta: be,
            lambda: finite.then(|| al / be),
            right,
            left,
        });
    }
    Ok(out)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: Vec<C64>) -> Vec<C64> {
    let n = vec_norm(&v);
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|z| z / n).collect()
    }
}

/// Bilinear form `y^T M x` (no conjugation).
pub fn bilinear(y: &[C64], m: &CMatrix, x: &[C64]) -> C64 {
    let mut acc = zero();
    for i in 0..m.nrows() {
        let mut row = zero();
        for j in 0..m.ncols() {
            row += m[(i, j)] * x[j];
        }
        acc += y[i] * row;
    }
    acc
}

pub fn mat_vec(m: &CMatrix, x: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// Solves the square system `m x = rhs` by partial-pivoting LU.
pub fn solve_square(m: &CMatrix, rhs: &CMatrix) -> CMatrix {
    let mut out = rhs.clone();
    m.partial_piv_lu().solve_in_place(out.as_mut());
    out
}

/// 2-norm condition number.
pub fn condition_number(m: &CMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        _ => Ok(f64::INFINITY),
    }
}

/// Roots of `p` as eigenvalues of its balanced monic companion matrix.
/// Exact zero roots are kept (no deflation).
pub fn companion_roots(p: &UniPoly) -> Result<Vec<C64>> {
    let n = match p.degree() {
        None | Some(0) => return Err(Error::ConstantPolynomial),
        Some(n) => n,
    };
    let c = p.coeffs();
    let lead = c[n];
    if n == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    // Frobenius form: ones on the subdiagonal, -a_k/a_n in the last column.
    let mut m = CMatrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    if !m.is_all_finite() {
        return Err(Error::Overflow("companion matrix entries overflow".into()));
    }
    balance(&mut m);
    m.eigenvalues().map_err(|_| Error::Convergence("companion eigenvalues"))
}

/// Diagonal similarity scaling by powers of two so rows and columns have
/// comparable norms (scaling only, no permutation).
fn balance(m: &mut CMatrix) {
    let n = m.nrows();
    let radix = 2.0_f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].l1_norm();
                    row += m[(i, j)].l1_norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let s = col + row;
            let mut f = 1.0;
            let mut c = col;
            let mut r = row;
            while c < r / radix {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while c >= r * radix {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if (c + r) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Standard complex Gaussian `(N + iN)/sqrt(2)`.
pub fn random_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / std::f64::consts::SQRT_2
}

/// Haar-distributed real orthogonal matrix: QR of a Gaussian matrix with
/// the signs of `diag(R)` folded into `Q`.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = Mat::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    CMatrix::from_fn(d, d, |i, j| {
        let s = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        C64::new(q[(i, j)] * s, 0.0)
    })
}

/// Uniformly random permutation of `0..d` (Fisher–Yates).
pub fn random_permutation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..d).collect();
    p.shuffle(rng);
    p
}

/// Permutation matrix with `P[i][perm[i]] = 1`.
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let d = perm.len();
    CMatrix::from_fn(d, d, |i, j| if perm[i] == j { C64::new(1.0, 0.0) } else { zero() })
}

/// Uniform point on the real unit sphere in `R^d`.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
