//! Dense complex LU factorization reused across many right-hand sides.

use faer::linalg::solvers::{PartialPivLu, SolveCore};
use faer::{Conj, Mat, Par};

use crate::error::{Error, Result};
use crate::specfun::C64;

/// Column-major dense complex matrix.
pub type CMat = Mat<C64>;

/// A factorized square system A = P⁻¹LU.
pub struct DenseLu {
    lu: PartialPivLu<C64>,
    n: usize,
    /// max|U_ii| / min|U_ii|, a cheap lower bound on the condition number.
    pub pivot_ratio: f64,
}

impl std::fmt::Debug for DenseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseLu").field("n", &self.n).field("pivot_ratio", &self.pivot_ratio).finish()
    }
}

/// Largest pivot ratio accepted before a system is declared ill-conditioned.
pub const MAX_PIVOT_RATIO: f64 = 1e12;

impl DenseLu {
    /// Factorizes `a`, always sequentially so the result does not depend on
    /// the thread pool.
    pub fn factor(a: &CMat) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Solver(format!("matrix is {}x{}, not square", n, a.ncols())));
        }
        for j in 0..n {
            for i in 0..n {
                let v = a[(i, j)];
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::Solver(format!("non-finite matrix entry at ({i}, {j})")));
                }
            }
        }
        faer::set_global_parallelism(Par::Seq);
        let lu = PartialPivLu::new(a.as_ref());
        let u = lu.U();
        let mut hi = 0.0f64;
        let mut lo = f64::INFINITY;
        for i in 0..n {
            let d = u[(i, i)].norm();
            hi = hi.max(d);
            lo = lo.min(d);
        }
        let pivot_ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if pivot_ratio > MAX_PIVOT_RATIO {
            return Err(Error::Solver(format!(
                "system is ill-conditioned (pivot ratio {pivot_ratio:.3e}); refine the mesh or change the coupling parameter"
            )));
        }
        Ok(Self { lu, n, pivot_ratio })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves in place for every column of `rhs`.
    pub fn solve_in_place(&self, rhs: &mut CMat) {
        assert_eq!(rhs.nrows(), self.n, "right-hand side has the wrong length");
        faer::set_global_parallelism(Par::Seq);
        self.lu.solve_in_place_with_conj(Conj::No, rhs.as_mut());
    }

    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let mut m = CMat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.solve_in_place(&mut m);
        (0..rhs.len()).map(|i| m[(i, 0)]).collect()
    }
}

/// ‖Ax − b‖ / ‖b‖ in the Euclidean norm.
pub fn relative_residual(a: &CMat, x: &[C64], b: &[C64]) -> f64 {
    let n = a.nrows();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..a.ncols() {
            s += a[(i, j)] * x[j];
        }
        num += (s - b[i]).norm_sqr();
        den += b[i].norm_sqr();
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// y = A x for a column-major matrix, summed in a fixed order.
pub fn matvec(a: &CMat, x: &[C64]) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}
