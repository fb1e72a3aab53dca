//! Density operators and pure states.
//!
//! Basis ordering is computational (`|0⟩, |1⟩, …`); a bipartite index `(a, b)`
//! flattens to `a · dim_b + b`, matching [`crate::linalg::tensor`].

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, c, pauli, CMat, HermitianOperator, Tolerances, C64};

/// Inputs whose trace or norm is within this distance of 1 are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-8;

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Accepts amplitudes whose norm is within `1e-8` of one and renormalizes them.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let v = DVector::from_vec(amplitudes);
        if !linalg::is_finite(&CMat::from_column_slice(v.len(), 1, v.as_slice())) {
            return Err(Error::NonFinite);
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: v / c(norm, 0.0),
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidIndexSet(format!("basis index {k} >= dim {dim}")));
        }
        let mut amps = vec![c(0.0, 0.0); dim];
        amps[k] = c(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub(crate) fn as_vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// A positive semidefinite unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(m: CMat) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(m)?)
    }

    /// Validates positivity and unit trace; traces within `1e-8` of one are renormalized.
    pub fn from_hermitian(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::InvalidTrace { trace });
        }
        let op = op.scale(1.0 / trace);
        let eig = linalg::eig_hermitian(&op)?;
        if eig.min() < -linalg::psd_threshold(&eig, Tolerances::default().psd_tol) {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min(),
            });
        }
        Ok(Self { op })
    }

    /// For results of trace- and positivity-preserving maps on valid inputs.
    pub(crate) fn from_trusted(m: CMat) -> Self {
        let op = HermitianOperator::hermitize(m);
        let trace = op.trace();
        Self {
            op: op.scale(1.0 / trace),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(self.matrix(), self.matrix()).re
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self {
            op: linalg::tensor_hermitian(&self.op, &other.op),
        }
    }
}

/// Bloch vector of a qubit state, `‖r‖ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = Self { x, y, z };
        let norm = r.norm();
        if !norm.is_finite() || norm > 1.0 + 1e-10 {
            return Err(Error::InvalidBlochVector { norm });
        }
        Ok(r)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, e: &[f64; 3]) -> f64 {
        self.x * e[0] + self.y * e[1] + self.z * e[2]
    }
}

/// Which factor of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// `|ψ⟩⟨ψ|`.
pub fn pure_state(psi: &StateVector) -> DensityOperator {
    let v = psi.as_vector();
    DensityOperator::from_trusted(v * v.adjoint())
}

/// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn pure_qubit(theta: f64, phi: f64) -> StateVector {
    let (s, co) = (theta / 2.0).sin_cos();
    StateVector {
        amplitudes: DVector::from_vec(vec![c(co, 0.0), C64::from_polar(s, phi)]),
    }
}

/// `½(I + r·σ)`.
pub fn mixed_qubit(r: &BlochVector) -> DensityOperator {
    let [x, y, z] = pauli::all();
    let m = (pauli::identity() + x * c(r.x, 0.0) + y * c(r.y, 0.0) + z * c(r.z, 0.0)) * c(0.5, 0.0);
    DensityOperator {
        op: HermitianOperator::hermitize(m),
    }
}

/// `Σ p_k |ψ_k⟩⟨ψ_k|`; components need not be orthogonal.
pub fn mixture(components: &[(f64, StateVector)]) -> Result<DensityOperator> {
    let first = components.first().ok_or(Error::EmptyFamily)?;
    let dim = first.1.dim();
    let mut total = 0.0;
    for (w, psi) in components {
        check_dim(dim, psi.dim())?;
        if !(*w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidWeights(format!("negative or non-finite weight {w}")));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let mut m = CMat::zeros(dim, dim);
    for (w, psi) in components {
        let v = psi.as_vector();
        m += (v * v.adjoint()) * c(*w, 0.0);
    }
    Ok(DensityOperator::from_trusted(m))
}

/// Reduced state of a bipartite `ρ_AB` with `dim = dim_a · dim_b`.
pub fn partial_trace(
    rho_ab: &DensityOperator,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<DensityOperator> {
    check_dim(rho_ab.dim(), dim_a * dim_b)?;
    let m = rho_ab.matrix();
    let out = match keep {
        Subsystem::A => CMat::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Subsystem::B => CMat::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| m[(k * dim_b + i, k * dim_b + j)]).sum()
        }),
    };
    Ok(DensityOperator::from_trusted(out))
}

/// `r_k = Tr(ρ σ_k)`.
pub fn bloch_of(rho: &DensityOperator) -> Result<BlochVector> {
    check_dim(2, rho.dim())?;
    let [x, y, z] = pauli::all().map(|p| linalg::trace_of_product(rho.matrix(), &p).re);
    Ok(BlochVector { x, y, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn assert_mat_eq(a: &CMat, b: &[&[f64]], tol: f64) {
        let n = b.len();
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(a[(i, j)].re, b[i][j], epsilon = tol);
                assert_abs_diff_eq!(a[(i, j)].im, 0.0, epsilon = tol);
            }
        }
    }

    fn plus() -> StateVector {
        StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap()
    }

    #[test]
    fn pure_state_examples() {
        let rho = pure_state(&StateVector::basis(2, 0).unwrap());
        assert_mat_eq(rho.matrix(), &[&[1.0, 0.0], &[0.0, 0.0]], 0.0);
        let rho = pure_state(&plus());
        assert_mat_eq(rho.matrix(), &[&[0.5, 0.5], &[0.5, 0.5]], 1e-15);
        let bell = StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let rho = pure_state(&bell);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_abs_diff_eq!(rho.matrix()[(i, j)].re, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 0.0);
    }

    #[test]
    fn non_normalized_vector_rejected() {
        assert!(matches!(
            StateVector::from_real(&[1.0, 1.0]),
            Err(Error::NotNormalized { .. })
        ));
        let almost = StateVector::from_real(&[1.0 + 1e-9, 0.0]).unwrap();
        assert_eq!(almost.amplitudes()[0], c(1.0, 0.0));
    }

    #[test]
    fn pure_qubit_examples() {
        let s = pure_qubit(0.0, 1.234);
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert_abs_diff_eq!(s.amplitudes()[1].norm(), 0.0);
        let s = pure_qubit(PI, 0.0);
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-16);
        let s = pure_qubit(PI / 2.0, 0.0);
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn mixed_qubit_examples() {
        let rho = mixed_qubit(&BlochVector::new(0.0, 0.0, 0.0).unwrap());
        assert_mat_eq(rho.matrix(), &[&[0.5, 0.0], &[0.0, 0.5]], 0.0);
        let rho = mixed_qubit(&BlochVector::new(0.0, 0.0, 1.0).unwrap());
        assert_mat_eq(rho.matrix(), &[&[1.0, 0.0], &[0.0, 0.0]], 0.0);
        let a = 40f64.to_radians();
        let r = BlochVector::new(0.75 * a.sin(), 0.0, 0.75 * a.cos()).unwrap();
        let eig = linalg::eig_hermitian(mixed_qubit(&r).as_hermitian()).unwrap();
        assert_abs_diff_eq!(eig.values[0], 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[1], 0.875, epsilon = 1e-12);
        assert!(matches!(
            BlochVector::new(1.0, 0.1, 0.0),
            Err(Error::InvalidBlochVector { .. })
        ));
    }

    #[test]
    fn mixture_examples() {
        let zero = StateVector::basis(2, 0).unwrap();
        let one = StateVector::basis(2, 1).unwrap();
        let rho = mixture(&[(1.0, zero.clone())]).unwrap();
        assert_mat_eq(rho.matrix(), &[&[1.0, 0.0], &[0.0, 0.0]], 0.0);
        let rho = mixture(&[(0.5, zero.clone()), (0.5, one)]).unwrap();
        assert_mat_eq(rho.matrix(), &[&[0.5, 0.0], &[0.0, 0.5]], 0.0);
        let rho = mixture(&[(0.5, zero.clone()), (0.5, plus())]).unwrap();
        assert_mat_eq(rho.matrix(), &[&[0.75, 0.25], &[0.25, 0.25]], 1e-15);
    }

    #[test]
    fn mixture_errors() {
        let zero = StateVector::basis(2, 0).unwrap();
        assert!(matches!(
            mixture(&[(0.7, zero.clone())]),
            Err(Error::InvalidWeights(_))
        ));
        let wide = StateVector::basis(4, 0).unwrap();
        assert!(matches!(
            mixture(&[(0.5, zero), (0.5, wide)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let bell = StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let red = partial_trace(&pure_state(&bell), 2, 2, Subsystem::A).unwrap();
        assert_mat_eq(red.matrix(), &[&[0.5, 0.0], &[0.0, 0.5]], 1e-15);

        let p0 = pure_state(&StateVector::basis(2, 0).unwrap());
        let product = p0.tensor(&DensityOperator::maximally_mixed(2));
        let red = partial_trace(&product, 2, 2, Subsystem::A).unwrap();
        assert_mat_eq(red.matrix(), &[&[1.0, 0.0], &[0.0, 0.0]], 0.0);

        // |01⟩ is basis index 1
        let ket01 = pure_state(&StateVector::basis(4, 1).unwrap());
        let red = partial_trace(&ket01, 2, 2, Subsystem::B).unwrap();
        assert_mat_eq(red.matrix(), &[&[0.0, 0.0], &[0.0, 1.0]], 0.0);

        assert!(partial_trace(&ket01, 3, 2, Subsystem::A).is_err());
    }

    #[test]
    fn bloch_of_examples() {
        let r = bloch_of(&DensityOperator::maximally_mixed(2)).unwrap();
        assert_eq!(r.components(), [0.0, 0.0, 0.0]);
        let r = bloch_of(&pure_state(&StateVector::basis(2, 0).unwrap())).unwrap();
        assert_eq!(r.components(), [0.0, 0.0, 1.0]);
        let rho = DensityOperator::new(CMat::from_row_slice(
            2,
            2,
            &[c(0.75, 0.0), c(0.25, 0.0), c(0.25, 0.0), c(0.25, 0.0)],
        ))
        .unwrap();
        let r = bloch_of(&rho).unwrap();
        assert_abs_diff_eq!(r.x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.z, 0.5, epsilon = 1e-15);
        assert!(bloch_of(&DensityOperator::maximally_mixed(4)).is_err());
    }

    #[test]
    fn density_constructor_errors() {
        let bad_trace = CMat::identity(2, 2);
        assert!(matches!(
            DensityOperator::new(bad_trace),
            Err(Error::InvalidTrace { .. })
        ));
        let negative = HermitianOperator::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(
            DensityOperator::from_hermitian(negative),
            Err(Error::NotPsd { .. })
        ));
        let nearly = HermitianOperator::from_real_diagonal(&[0.5 + 2e-9, 0.5]);
        let rho = DensityOperator::from_hermitian(nearly).unwrap();
        assert_abs_diff_eq!(rho.as_hermitian().trace(), 1.0, epsilon = 1e-15);
    }
}
