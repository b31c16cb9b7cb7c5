//! Factor-once/solve-many dense linear algebra: real LU and Cholesky,
//! complex LU for the shifted systems of the stepper, and a small dense
//! generalized symmetric eigensolver for modal references.
//!
//! Everything is dense; the benchmark problems stay in the few-thousand-DOF
//! range where a dense factorization is seconds-scale.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting as pplu;
use faer::linalg::solvers::{Llt, SelfAdjointEigen, Solve};
use faer::perm::PermRef;
use faer::traits::ComplexField;
use faer::{Col, Mat, MatRef, Par, Side};
use num_complex::Complex64;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Matrix numerically singular; carries the offending pivot index.
    Singular { pivot: usize },
    /// Cholesky hit a non-positive pivot; the matrix is not positive definite.
    NotPositiveDefinite { pivot: usize },
    /// Claimed symmetric but the symmetry check failed.
    NotSymmetric { max_asymmetry: f64 },
    DimensionMismatch { expected: usize, got: usize },
    /// Eigensolver did not converge.
    EigenFailed,
    /// Problem size beyond what the dense eigensolver is meant for.
    TooLarge { n: usize, max: usize },
    /// Real solve requested against a complex factorization.
    ComplexFactorization,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular { pivot } => {
                write!(f, "matrix singular to working precision at pivot {pivot}")
            }
            LinalgError::NotPositiveDefinite { pivot } => {
                write!(f, "matrix not positive definite (pivot {pivot})")
            }
            LinalgError::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix not symmetric (max |a_ij - a_ji| = {max_asymmetry:e})")
            }
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            LinalgError::EigenFailed => write!(f, "eigensolver failed to converge"),
            LinalgError::TooLarge { n, max } => {
                write!(f, "problem size {n} exceeds dense eigensolver limit {max}")
            }
            LinalgError::ComplexFactorization => {
                write!(f, "real solve against a complex factorization; promote the rhs")
            }
        }
    }
}

impl std::error::Error for LinalgError {}

/// Structure tag that picks the factorization path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    /// Symmetric positive definite; factor() uses Cholesky.
    PositiveDefinite,
}

/// Dense real square matrix with a structure tag.
#[derive(Debug, Clone)]
pub struct SquareMatrix {
    data: Mat<f64>,
    symmetry: Symmetry,
}

impl SquareMatrix {
    /// Wraps a dense matrix. A symmetric tag is verified against
    /// max |a_ij - a_ji| <= 1e-12 ||A||_inf.
    pub fn new(data: Mat<f64>, symmetry: Symmetry) -> Result<Self, LinalgError> {
        assert!(data.nrows() >= 1, "matrix must be at least 1x1");
        assert_eq!(data.nrows(), data.ncols(), "matrix must be square");
        if symmetry != Symmetry::General {
            let n = data.nrows();
            let mut max_asym = 0.0f64;
            let mut norm_inf = 0.0f64;
            for i in 0..n {
                let mut row_sum = 0.0;
                for j in 0..n {
                    row_sum += data[(i, j)].abs();
                    if j > i {
                        max_asym = max_asym.max((data[(i, j)] - data[(j, i)]).abs());
                    }
                }
                norm_inf = norm_inf.max(row_sum);
            }
            if max_asym > 1e-12 * norm_inf.max(f64::MIN_POSITIVE) {
                return Err(LinalgError::NotSymmetric { max_asymmetry: max_asym });
            }
        }
        Ok(Self { data, symmetry })
    }

    pub fn zeros(n: usize, symmetry: Symmetry) -> Self {
        Self { data: Mat::zeros(n, n), symmetry }
    }

    pub fn identity(n: usize) -> Self {
        Self { data: Mat::identity(n, n), symmetry: Symmetry::PositiveDefinite }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.data.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.data.norm_max() == 0.0
    }

    pub fn mul_vec(&self, x: &Col<f64>) -> Col<f64> {
        self.data.as_ref() * x
    }
}

/// Checksum of the source matrix, kept so a factorization can be traced back
/// to the matrix it came from.
fn matrix_checksum(a: MatRef<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * (1.0 + ((7 * i + 13 * j) % 31) as f64 / 31.0);
        }
    }
    acc
}

fn complex_checksum(a: MatRef<'_, Complex64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let w = 1.0 + ((7 * i + 13 * j) % 31) as f64 / 31.0;
            acc += (a[(i, j)].re + 0.5 * a[(i, j)].im) * w;
        }
    }
    acc
}

/// Relative pivot threshold below which an LU factor is declared singular.
const SINGULAR_PIVOT_TOL: f64 = 1e-14;

/// LU with partial pivoting over the low-level kernels, with the
/// parallelism choice pinned per scalar type (the parallel real kernel
/// loses accuracy on some targets, so real factorizations run sequential).
struct PivotLu<T: ComplexField> {
    packed: Mat<T>,
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
    par: Par,
}

impl<T: ComplexField> PivotLu<T> {
    fn new(a: MatRef<'_, T>, par: Par, scale: f64, abs: impl Fn(&T) -> f64) -> Result<Self, LinalgError> {
        Self::new_owned(a.to_owned(), par, scale, abs)
    }

    /// Factors in place, consuming the matrix buffer.
    fn new_owned(mut packed: Mat<T>, par: Par, scale: f64, abs: impl Fn(&T) -> f64) -> Result<Self, LinalgError> {
        let n = packed.nrows();
        let mut perm = vec![0usize; n];
        let mut perm_inv = vec![0usize; n];
        let mut mem = MemBuffer::new(pplu::factor::lu_in_place_scratch::<usize, T>(
            n,
            n,
            par,
            Default::default(),
        ));
        pplu::factor::lu_in_place(
            packed.as_mut(),
            &mut perm,
            &mut perm_inv,
            par,
            MemStack::new(&mut mem),
            Default::default(),
        );
        for i in 0..n {
            if abs(&packed[(i, i)]) <= SINGULAR_PIVOT_TOL * scale {
                return Err(LinalgError::Singular { pivot: i });
            }
        }
        Ok(Self { packed, perm, perm_inv, par })
    }

    fn solve(&self, rhs: &Col<T>) -> Col<T> {
        let n = self.packed.nrows();
        let mut x = rhs.to_owned();
        let mut mem = MemBuffer::new(pplu::solve::solve_in_place_scratch::<usize, T>(n, 1, self.par));
        pplu::solve::solve_in_place(
            self.packed.as_ref(),
            self.packed.as_ref(),
            PermRef::new_checked(&self.perm, &self.perm_inv, n),
            x.as_mat_mut(),
            self.par,
            MemStack::new(&mut mem),
        );
        x
    }
}

enum FactorKind {
    Cholesky(Llt<f64>),
    RealLu(PivotLu<f64>),
    ComplexLu(PivotLu<Complex64>),
}

/// Opaque factorization handle, reusable for many right-hand sides.
pub struct Factorization {
    n: usize,
    checksum: f64,
    kind: FactorKind,
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn checksum(&self) -> f64 {
        self.checksum
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.kind, FactorKind::ComplexLu(_))
    }

    /// Solves A x = b for a real right-hand side against a real
    /// factorization. For a complex factorization use solve_promoted.
    pub fn solve(&self, b: &Col<f64>) -> Result<Col<f64>, LinalgError> {
        if b.nrows() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, got: b.nrows() });
        }
        match &self.kind {
            FactorKind::Cholesky(llt) => Ok(llt.solve(b)),
            FactorKind::RealLu(lu) => Ok(lu.solve(b)),
            FactorKind::ComplexLu(_) => Err(LinalgError::ComplexFactorization),
        }
    }

    /// Solves with a real right-hand side, promoting it to complex so the
    /// call works against any factorization kind.
    pub fn solve_promoted(&self, b: &Col<f64>) -> Result<Col<Complex64>, LinalgError> {
        let rhs = Col::from_fn(b.nrows(), |i| Complex64::new(b[i], 0.0));
        self.solve_complex(&rhs)
    }

    /// Solves A y = b with a complex right-hand side.
    pub fn solve_complex(&self, b: &Col<Complex64>) -> Result<Col<Complex64>, LinalgError> {
        if b.nrows() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, got: b.nrows() });
        }
        match &self.kind {
            FactorKind::ComplexLu(lu) => Ok(lu.solve(b)),
            FactorKind::RealLu(lu) => {
                let re = Col::<f64>::from_fn(self.n, |i| b[i].re);
                let im = Col::<f64>::from_fn(self.n, |i| b[i].im);
                let xr = lu.solve(&re);
                let xi = lu.solve(&im);
                Ok(Col::from_fn(self.n, |i| Complex64::new(xr[i], xi[i])))
            }
            FactorKind::Cholesky(llt) => {
                let re = Col::<f64>::from_fn(self.n, |i| b[i].re);
                let im = Col::<f64>::from_fn(self.n, |i| b[i].im);
                let xr = llt.solve(&re);
                let xi = llt.solve(&im);
                Ok(Col::from_fn(self.n, |i| Complex64::new(xr[i], xi[i])))
            }
        }
    }
}

/// Factors a real matrix: Cholesky when tagged positive definite, LU with
/// partial pivoting otherwise.
pub fn factor(a: &SquareMatrix) -> Result<Factorization, LinalgError> {
    let n = a.dim();
    let checksum = matrix_checksum(a.as_ref());
    match a.symmetry() {
        Symmetry::PositiveDefinite => {
            let llt = Llt::new(a.as_ref(), Side::Lower)
                .map_err(|faer::linalg::solvers::LltError::NonPositivePivot { index }| {
                    LinalgError::NotPositiveDefinite { pivot: index }
                })?;
            Ok(Factorization { n, checksum, kind: FactorKind::Cholesky(llt) })
        }
        _ => {
            let scale = a.as_ref().norm_max().max(f64::MIN_POSITIVE);
            let lu = PivotLu::new(a.as_ref(), Par::Seq, scale, |v| v.abs())?;
            Ok(Factorization { n, checksum, kind: FactorKind::RealLu(lu) })
        }
    }
}

/// Factors a complex matrix with general complex LU.
pub fn factor_complex(a: MatRef<'_, Complex64>) -> Result<Factorization, LinalgError> {
    factor_complex_owned(a.to_owned())
}

/// Like factor_complex but consumes the buffer, avoiding a second copy of
/// a matrix that can run to hundreds of megabytes at desk scale.
pub fn factor_complex_owned(a: Mat<Complex64>) -> Result<Factorization, LinalgError> {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    let n = a.nrows();
    let checksum = complex_checksum(a.as_ref());
    let scale = a.norm_max().max(f64::MIN_POSITIVE);
    let lu = PivotLu::new_owned(a, faer::get_global_parallelism(), scale, |v| v.norm())?;
    Ok(Factorization { n, checksum, kind: FactorKind::ComplexLu(lu) })
}

/// Upper size limit for the dense generalized eigensolver.
pub const MAX_EIG_DIM: usize = 200;

/// Solves K phi = omega^2 M phi for symmetric K and positive definite M.
/// Returns the squared natural frequencies ascending and the matching
/// M-orthonormal eigenvectors as columns.
pub fn generalized_eig(
    k: &SquareMatrix,
    m: &SquareMatrix,
) -> Result<(Vec<f64>, Mat<f64>), LinalgError> {
    let n = k.dim();
    if m.dim() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: m.dim() });
    }
    if n > MAX_EIG_DIM {
        return Err(LinalgError::TooLarge { n, max: MAX_EIG_DIM });
    }
    let llt = Llt::new(m.as_ref(), Side::Lower)
        .map_err(|faer::linalg::solvers::LltError::NonPositivePivot { index }| {
            LinalgError::NotPositiveDefinite { pivot: index }
        })?;
    let l = llt.L();
    let par = faer::get_global_parallelism();

    // B = L^-1 K L^-T, built with two triangular solves
    let mut x = k.as_ref().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, x.as_mut(), par);
    let mut b = x.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, b.as_mut(), par);
    // symmetrize against roundoff from the two solves
    let bt = b.transpose().to_owned();
    let mut sym = b;
    for j in 0..n {
        for i in 0..n {
            sym[(i, j)] = 0.5 * (sym[(i, j)] + bt[(i, j)]);
        }
    }

    let eig = SelfAdjointEigen::new(sym.as_ref(), Side::Lower).map_err(|_| LinalgError::EigenFailed)?;

    let mut order: Vec<usize> = (0..n).collect();
    let s = eig.S();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let omega_sq: Vec<f64> = order.iter().map(|&i| s[i]).collect();

    // back-transform: phi = L^-T y
    let mut y = Mat::<f64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            y[(i, col)] = eig.U()[(i, src)];
        }
    }
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(l.transpose(), y.as_mut(), par);

    Ok((omega_sq, y))
}
