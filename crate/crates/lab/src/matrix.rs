//! Dense Hermitian matrices and their spectra.

use faer::linalg::matmul::matmul;
use faer::linalg::matmul::triangular::{self as tri, BlockStructure};
use faer::{c64, Accum, Mat, MatRef, Par, Side};
use specmix_core::{Error, Result};

use crate::vectors::Field;

/// Relative tolerance of the Hermitian-symmetry contract.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum HermitianMatrix {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl HermitianMatrix {
    pub fn zeros(n: usize, field: Field) -> Self {
        match field {
            Field::Real => HermitianMatrix::Real(Mat::zeros(n, n)),
            Field::Complex => HermitianMatrix::Complex(Mat::zeros(n, n)),
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        match field {
            Field::Real => HermitianMatrix::Real(Mat::identity(n, n)),
            Field::Complex => HermitianMatrix::Complex(Mat::identity(n, n)),
        }
    }

    /// Wraps a real matrix after checking symmetry and finiteness.
    pub fn from_real(m: Mat<f64>) -> Result<Self> {
        let h = HermitianMatrix::Real(m);
        h.check()?;
        Ok(h)
    }

    pub fn from_complex(m: Mat<c64>) -> Result<Self> {
        let h = HermitianMatrix::Complex(m);
        h.check()?;
        Ok(h)
    }

    pub fn n(&self) -> usize {
        match self {
            HermitianMatrix::Real(m) => m.nrows(),
            HermitianMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            HermitianMatrix::Real(_) => Field::Real,
            HermitianMatrix::Complex(_) => Field::Complex,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        match self {
            HermitianMatrix::Real(m) => c64::new(m[(i, j)], 0.0),
            HermitianMatrix::Complex(m) => m[(i, j)],
        }
    }

    pub fn to_complex(&self) -> Mat<c64> {
        let n = self.n();
        Mat::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.n();
        let mut best = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                best = best.max(self.get(i, j).norm());
            }
        }
        best
    }

    /// `max |M_ij - conj(M_ji)| / max(1, max |M_ij|)`, infinite on NaN or
    /// infinite entries or a non-square shape.
    pub fn hermitian_defect(&self) -> f64 {
        let (r, c) = match self {
            HermitianMatrix::Real(m) => (m.nrows(), m.ncols()),
            HermitianMatrix::Complex(m) => (m.nrows(), m.ncols()),
        };
        if r != c {
            return f64::INFINITY;
        }
        let mut defect = 0.0f64;
        let mut scale = 1.0f64;
        for j in 0..r {
            for i in 0..=j {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
                    return f64::INFINITY;
                }
                defect = defect.max((a - b.conj()).norm());
                scale = scale.max(a.norm());
            }
        }
        defect / scale
    }

    pub fn check(&self) -> Result<()> {
        let d = self.hermitian_defect();
        if d <= HERMITIAN_TOL {
            Ok(())
        } else {
            Err(Error::contract(format!("matrix is not Hermitian (relative defect {d:e})")))
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.get(i, i).re).sum()
    }

    /// The spectrum, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.check()?;
        let out = match self {
            HermitianMatrix::Real(m) => m.self_adjoint_eigenvalues(Side::Lower),
            HermitianMatrix::Complex(m) => m.self_adjoint_eigenvalues(Side::Lower),
        };
        let mut ev = out.map_err(|e| Error::contract(format!("eigensolver failed: {e:?}")))?;
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Eigenvalues ascending with unit eigenvectors as columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, Mat<c64>)> {
        self.check()?;
        let n = self.n();
        let err = |e| Error::contract(format!("eigensolver failed: {e:?}"));
        match self {
            HermitianMatrix::Real(m) => {
                let e = m.self_adjoint_eigen(Side::Lower).map_err(err)?;
                let s = e.S().column_vector();
                let u = e.U();
                Ok(((0..n).map(|i| s[i]).collect(), Mat::from_fn(n, n, |i, j| c64::new(u[(i, j)], 0.0))))
            }
            HermitianMatrix::Complex(m) => {
                let e = m.self_adjoint_eigen(Side::Lower).map_err(err)?;
                let s = e.S().column_vector();
                Ok(((0..n).map(|i| s[i].re).collect(), e.U().to_owned()))
            }
        }
    }

    /// `max_k ||M v_k - lambda_k v_k|| / max(1, ||M||_F)` over an eigen pair list.
    pub fn max_residual(&self, values: &[f64], vectors: MatRef<'_, c64>) -> f64 {
        let m = self.to_complex();
        let mut mv = Mat::<c64>::zeros(m.nrows(), vectors.ncols());
        matmul(mv.as_mut(), Accum::Replace, m.as_ref(), vectors, c64::new(1.0, 0.0), Par::Seq);
        let scale = m.norm_l2().max(1.0);
        let mut worst = 0.0f64;
        for (k, &lam) in values.iter().enumerate() {
            let r: f64 = (0..m.nrows()).map(|i| (mv[(i, k)] - vectors[(i, k)] * lam).norm_sqr()).sum();
            worst = worst.max(r.sqrt() / scale);
        }
        worst
    }
}

/// Accumulates `(1/N) sum_i w_i u_i u_i^*` from rank-one terms, a block of
/// columns at a time so memory stays at `N^2 + N * BLOCK`.
pub struct RankOneSum {
    n: usize,
    field: Field,
    acc: HermitianMatrix,
    cols: Vec<c64>,
    signs: Vec<f64>,
}

const BLOCK: usize = 256;
const LOWER: BlockStructure = BlockStructure::TriangularLower;
const RECT: BlockStructure = BlockStructure::Rectangular;

impl RankOneSum {
    pub fn new(n: usize, field: Field) -> Self {
        RankOneSum {
            n,
            field,
            acc: HermitianMatrix::zeros(n, field),
            cols: Vec::with_capacity(n * BLOCK),
            signs: Vec::with_capacity(BLOCK),
        }
    }

    /// Adds `w u u^*`; `u.len()` must be `N`.
    pub fn push(&mut self, w: f64, u: &[c64]) {
        debug_assert_eq!(u.len(), self.n);
        if w == 0.0 {
            return;
        }
        let r = w.abs().sqrt();
        self.cols.extend(u.iter().map(|x| x * r));
        self.signs.push(w.signum());
        if self.signs.len() == BLOCK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        let p = self.signs.len();
        if p == 0 {
            return;
        }
        let n = self.n;
        let alpha = 1.0 / n as f64;
        let (cols, signs) = (&self.cols, &self.signs);
        match (&mut self.acc, self.field) {
            (HermitianMatrix::Real(acc), Field::Real) => {
                let a = Mat::from_fn(n, p, |i, j| cols[j * n + i].re);
                let b = Mat::from_fn(n, p, |i, j| cols[j * n + i].re * signs[j]);
                tri::matmul(acc.as_mut(), LOWER, Accum::Add, b.as_ref(), RECT, a.transpose(), RECT, alpha, Par::Seq);
            }
            (HermitianMatrix::Complex(acc), Field::Complex) => {
                let a = Mat::from_fn(n, p, |i, j| cols[j * n + i]);
                let b = Mat::from_fn(n, p, |i, j| cols[j * n + i] * signs[j]);
                let alpha = c64::new(alpha, 0.0);
                tri::matmul(acc.as_mut(), LOWER, Accum::Add, b.as_ref(), RECT, a.adjoint(), RECT, alpha, Par::Seq);
            }
            _ => unreachable!("accumulator field is fixed at construction"),
        }
        self.cols.clear();
        self.signs.clear();
    }

    /// The accumulated matrix. Only the lower triangle is computed; the upper
    /// one is filled in by symmetry.
    pub fn finish(mut self) -> HermitianMatrix {
        self.flush();
        let n = self.n;
        match &mut self.acc {
            HermitianMatrix::Real(m) => {
                for j in 0..n {
                    for i in 0..j {
                        m[(i, j)] = m[(j, i)];
                    }
                }
            }
            HermitianMatrix::Complex(m) => {
                for j in 0..n {
                    m[(j, j)] = c64::new(m[(j, j)].re, 0.0);
                    for i in 0..j {
                        m[(i, j)] = m[(j, i)].conj();
                    }
                }
            }
        }
        self.acc
    }
}
