//! Dense complex operator substrate.
//!
//! Everything above this module works with [`HermitianOperator`]s backed by
//! `nalgebra` dense matrices. Positivity and order checks are relative to the
//! operator's spectral scale so they behave the same in every dimension.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMat = DMatrix<C64>;

/// Absolute floor applied to every relative tolerance.
pub const ABS_FLOOR: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Numerical tolerances shared by validity checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub herm_tol: f64,
    pub psd_tol: f64,
    pub sum_tol: f64,
    pub commute_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: 1e-10,
            psd_tol: 1e-9,
            sum_tol: 1e-9,
            commute_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(herm_tol: f64, psd_tol: f64, sum_tol: f64, commute_tol: f64) -> Result<Self> {
        for (name, value) in [
            ("herm_tol", herm_tol),
            ("psd_tol", psd_tol),
            ("sum_tol", sum_tol),
            ("commute_tol", commute_tol),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::ParameterOutOfRange { name, value });
            }
        }
        Ok(Self {
            herm_tol,
            psd_tol,
            sum_tol,
            commute_tol,
        })
    }
}

/// A finite-entry complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(CMat);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                found: entries.len(),
            });
        }
        Self::from_matrix(CMat::from_row_slice(rows, cols, &entries))
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::ShapeMismatch {
                rows: m.nrows(),
                cols: m.ncols(),
                found: 0,
            });
        }
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<C64> {
        self.0.transpose().iter().copied().collect()
    }
}

/// A self-adjoint operator. Construction symmetrizes the input so downstream
/// code sees exact Hermiticity.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMat,
}

impl HermitianOperator {
    /// Validates `‖M − M†‖_F ≤ herm_tol · max(1, ‖M‖_F)` with the default tolerance.
    pub fn new(m: CMat) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().herm_tol)
    }

    pub fn with_tolerance(m: CMat, herm_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::ShapeMismatch {
                rows: 0,
                cols: 0,
                found: 0,
            });
        }
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let deviation = (&m - m.adjoint()).norm();
        if deviation > herm_tol * m.norm().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::hermitize(m))
    }

    pub(crate) fn hermitize(m: CMat) -> Self {
        let adj = m.adjoint();
        Self {
            matrix: (m + adj) * c(0.5, 0.0),
        }
    }

    pub fn from_complex(m: &ComplexMatrix) -> Result<Self> {
        Self::new(m.matrix().clone())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMat::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            matrix: CMat::zeros(n, n),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = c(*d, 0.0);
        }
        Self { matrix: m }
    }

    /// Rank-one projector `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn projector_onto(v: &[C64]) -> Result<Self> {
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::NotNormalized {
                norm: norm_sq.sqrt(),
            });
        }
        let col = nalgebra::DVector::from_column_slice(v);
        Ok(Self::hermitize(&col * col.adjoint() / c(norm_sq, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: &self.matrix * c(s, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// `Tr(self · other)`, real for Hermitian pairs.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(trace_of_product(&self.matrix, &other.matrix).re)
    }

    /// `V† self V` for a matrix `V` with `dim` rows.
    pub fn conjugate_by(&self, v: &CMat) -> Result<Self> {
        check_dim(self.dim(), v.nrows())?;
        Ok(Self::hermitize(v.adjoint() * &self.matrix * v))
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let eig = eig_hermitian(self)?;
        Ok(eig.reassemble(eig.values.iter().map(|&l| f(l))))
    }
}

/// Eigendecomposition with ascending eigenvalues and eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenDecomposition {
    /// Largest absolute eigenvalue, floored at 1.
    pub fn spectral_scale(&self) -> f64 {
        self.values.iter().fold(1.0_f64, |acc, l| acc.max(l.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `Σ_k w_k v_k v_k†` over the eigenvectors.
    pub fn reassemble(&self, weights: impl Iterator<Item = f64>) -> HermitianOperator {
        let n = self.vectors.nrows();
        let mut out = CMat::zeros(n, n);
        for (k, w) in weights.enumerate() {
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            out += (v * v.adjoint()) * c(w, 0.0);
        }
        HermitianOperator::hermitize(out)
    }

    /// Projector onto the span of eigenvectors selected by `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> HermitianOperator {
        self.reassemble(self.values.iter().map(|&l| if keep(l) { 1.0 } else { 0.0 }))
    }

    /// Columns whose eigenvalue satisfies `keep`.
    pub fn select_vectors(&self, keep: impl Fn(f64) -> bool) -> CMat {
        let idx: Vec<usize> = (0..self.values.len())
            .filter(|&k| keep(self.values[k]))
            .collect();
        self.vectors.select_columns(idx.iter())
    }
}

/// Hermitian eigendecomposition via Householder tridiagonalization and implicit QR.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<EigenDecomposition> {
    let n = h.dim();
    let eig = SymmetricEigen::try_new(h.matrix.clone(), f64::EPSILON, 10_000 * n.max(1))
        .ok_or(Error::EigenNonConvergence {
            dim: n,
            frobenius: h.frobenius_norm(),
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Ok(EigenDecomposition { values, vectors })
}

/// Threshold below which a minimum eigenvalue counts as negative.
pub(crate) fn psd_threshold(eig: &EigenDecomposition, tol: f64) -> f64 {
    (tol * eig.spectral_scale()).max(ABS_FLOOR)
}

pub fn is_psd(h: &HermitianOperator, tol: f64) -> bool {
    match eig_hermitian(h) {
        Ok(eig) => eig.min() >= -psd_threshold(&eig, tol),
        Err(_) => false,
    }
}

/// `A ⪯ B` in the Löwner order.
pub fn loewner_leq(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> Result<bool> {
    Ok(is_psd(&b.sub(a)?, tol))
}

pub fn trace_norm(h: &HermitianOperator) -> Result<f64> {
    Ok(eig_hermitian(h)?.values.iter().map(|l| l.abs()).sum())
}

/// Kronecker product with the first factor as the most significant index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

pub fn tensor_hermitian(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::hermitize(a.matrix.kronecker(&b.matrix))
}

/// `‖AB − BA‖_F`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok((&a.matrix * &b.matrix - &b.matrix * &a.matrix).norm())
}

pub(crate) fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `Tr(AB)` without forming the product.
pub(crate) fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Pauli matrices and small fixed operators.
pub mod pauli {
    use super::{c, CMat};

    pub fn identity() -> CMat {
        CMat::identity(2, 2)
    }

    pub fn x() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn y() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn z() -> CMat {
        CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    /// `[X, Y, Z]`.
    pub fn all() -> [CMat; 3] {
        [x(), y(), z()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn herm(rows: &[&[f64]]) -> HermitianOperator {
        let n = rows.len();
        let entries: Vec<C64> = rows.iter().flat_map(|r| r.iter().map(|&x| c(x, 0.0))).collect();
        HermitianOperator::new(CMat::from_row_slice(n, n, &entries)).unwrap()
    }

    #[test]
    fn eig_of_pauli_z_is_ascending() {
        let z = HermitianOperator::new(pauli::z()).unwrap();
        let eig = eig_hermitian(&z).unwrap();
        assert_eq!(eig.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn eig_of_identity() {
        let eig = eig_hermitian(&HermitianOperator::identity(2)).unwrap();
        assert_abs_diff_eq!(eig.values[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-15);
        let vtv = eig.vectors.adjoint() * &eig.vectors;
        assert!((vtv - CMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn eig_of_helstrom_delta_matches_characteristic_polynomial() {
        // λ² − (a+d)λ + (ad − b²) = 0 with a = ¼, d = −¼, b = −¼
        let (a, b, d): (f64, f64, f64) = (0.25, -0.25, -0.25);
        let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
        let oracle = [((a + d) - disc) / 2.0, ((a + d) + disc) / 2.0];
        let eig = eig_hermitian(&herm(&[&[a, b], &[b, d]])).unwrap();
        assert_abs_diff_eq!(eig.values[0], oracle[0], epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], oracle[1], epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 0.353_553_390_593_273_8, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetric() {
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn hermitian_constructor_rejects_nan() {
        let m = CMat::from_element(2, 2, c(f64::NAN, 0.0));
        assert_eq!(HermitianOperator::new(m), Err(Error::NonFinite));
    }

    #[test]
    fn complex_matrix_shape_checked() {
        assert!(ComplexMatrix::new(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        let m = ComplexMatrix::new(1, 2, vec![c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert_eq!(m.entries(), vec![c(1.0, 0.0), c(0.0, 2.0)]);
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&HermitianOperator::identity(2), 1e-9));
        assert!(!is_psd(&HermitianOperator::from_real_diagonal(&[1.0, -0.5]), 1e-9));
        assert!(is_psd(&HermitianOperator::from_real_diagonal(&[1.0, -1e-12]), 1e-9));
    }

    #[test]
    fn loewner_examples() {
        let i = HermitianOperator::identity(2);
        let half = i.scale(0.5);
        assert!(loewner_leq(&half, &i, 1e-9).unwrap());
        assert!(!loewner_leq(&i, &half, 1e-9).unwrap());
        let a = HermitianOperator::from_real_diagonal(&[0.2, 0.7]);
        let b = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
        assert!(!loewner_leq(&a, &b, 1e-9).unwrap());
        assert!(loewner_leq(&i, &HermitianOperator::identity(3), 1e-9).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        let d = HermitianOperator::from_real_diagonal(&[0.5, -0.5]);
        assert_abs_diff_eq!(trace_norm(&d).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(trace_norm(&HermitianOperator::zeros(3)).unwrap(), 0.0);
        let delta = herm(&[&[0.25, -0.25], &[-0.25, -0.25]]);
        assert_abs_diff_eq!(
            trace_norm(&delta).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-9
        );
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4));
        let z = ComplexMatrix::from_matrix(pauli::z()).unwrap();
        let zz = tensor(&z, &z);
        let expected = HermitianOperator::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(zz.matrix(), expected.matrix());
        let p0 = ComplexMatrix::new(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let lifted = tensor(&p0, &i2);
        let expected = HermitianOperator::from_real_diagonal(&[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(lifted.matrix(), expected.matrix());
    }

    #[test]
    fn tensor_mixed_product_property() {
        let a = ComplexMatrix::new(2, 2, vec![c(1.0, 0.0), c(2.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)])
            .unwrap();
        let b = ComplexMatrix::new(2, 2, vec![c(0.0, 1.0), c(1.0, 0.0), c(2.0, 0.0), c(-1.0, 0.0)])
            .unwrap();
        let cm = ComplexMatrix::new(2, 2, vec![c(1.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)])
            .unwrap();
        let d = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, -1.0), c(1.0, 0.0)])
            .unwrap();
        let lhs = tensor(&a, &b).matrix() * tensor(&cm, &d).matrix();
        let ac = ComplexMatrix::from_matrix(a.matrix() * cm.matrix()).unwrap();
        let bd = ComplexMatrix::from_matrix(b.matrix() * d.matrix()).unwrap();
        assert_eq!(&lhs, tensor(&ac, &bd).matrix());
    }

    #[test]
    fn commutator_examples() {
        let z = HermitianOperator::new(pauli::z()).unwrap();
        let x = HermitianOperator::new(pauli::x()).unwrap();
        assert_eq!(commutator_norm(&z, &z).unwrap(), 0.0);
        let a = HermitianOperator::from_real_diagonal(&[0.3, 1.5]);
        let b = HermitianOperator::from_real_diagonal(&[-2.0, 4.0]);
        assert_eq!(commutator_norm(&a, &b).unwrap(), 0.0);
        assert_abs_diff_eq!(
            commutator_norm(&x, &z).unwrap(),
            2.0 * 2f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(Tolerances::new(1e-10, 0.0, 1e-9, 1e-9).is_err());
        assert!(Tolerances::new(1e-10, 1e-9, 1e-9, 1e-9).is_ok());
    }
}
