//! Quantum channels in Kraus form.
//!
//! States evolve with `E(ρ) = Σ K ρ K†`; granules evolve backwards with the
//! Heisenberg adjoint `E†(E) = Σ K† E K`. Channels are compared through their
//! Choi matrices because Kraus sets are not unique.

use crate::error::{check_dim, Error, Result};
use crate::granules::Effect;
use crate::linalg::{self, c, pauli, CMat, ComplexMatrix, HermitianOperator, Tolerances};
use crate::states::DensityOperator;

/// A completely positive trace-preserving map.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Each operator is `dim_out × dim_in`; `Σ K†K = I` within `sum_tol`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        let mut sum = CMat::zeros(dim_in, dim_in);
        for (k, op) in kraus.iter().enumerate() {
            if op.rows() != dim_out || op.cols() != dim_in {
                return Err(Error::InvalidChannel(format!(
                    "operator {k} is {}x{}, expected {dim_out}x{dim_in}",
                    op.rows(),
                    op.cols()
                )));
            }
            sum += op.matrix().adjoint() * op.matrix();
        }
        let deviation = (sum - CMat::identity(dim_in, dim_in)).norm();
        if deviation > Tolerances::default().sum_tol {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving: ‖Σ K†K − I‖_F = {deviation:.3e}"
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    fn from_matrices(ops: Vec<CMat>) -> Result<Self> {
        Self::new(
            ops.into_iter()
                .map(ComplexMatrix::from_matrix)
                .collect::<Result<_>>()?,
        )
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value })
    }
}

/// `{√(1−3p/4) I, √(p/4) X, √(p/4) Y, √(p/4) Z}`.
pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    check_unit_interval("p", p)?;
    let a = (1.0 - 0.75 * p).sqrt();
    let b = (p / 4.0).sqrt();
    let [x, y, z] = pauli::all();
    KrausChannel::from_matrices(vec![
        pauli::identity() * c(a, 0.0),
        x * c(b, 0.0),
        y * c(b, 0.0),
        z * c(b, 0.0),
    ])
}

/// `{diag(1, √(1−γ)), √γ |0⟩⟨1|}`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_unit_interval("gamma", gamma)?;
    let k0 = CMat::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)],
    );
    let k1 = CMat::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)],
    );
    KrausChannel::from_matrices(vec![k0, k1])
}

/// `{√(1−p/2) I, √(p/2) Z}`.
pub fn dephasing(p: f64) -> Result<KrausChannel> {
    check_unit_interval("p", p)?;
    KrausChannel::from_matrices(vec![
        pauli::identity() * c((1.0 - p / 2.0).sqrt(), 0.0),
        pauli::z() * c((p / 2.0).sqrt(), 0.0),
    ])
}

/// Schrödinger picture: `Σ K ρ K†`.
pub fn apply(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    check_dim(ch.dim_in, rho.dim())?;
    let out = ch.kraus.iter().fold(CMat::zeros(ch.dim_out, ch.dim_out), |acc, k| {
        acc + k.matrix() * rho.matrix() * k.matrix().adjoint()
    });
    Ok(DensityOperator::from_trusted(out))
}

/// Heisenberg picture: `Σ K† E K`, an effect on the input space.
pub fn adjoint_apply(ch: &KrausChannel, e: &Effect) -> Result<Effect> {
    check_dim(ch.dim_out, e.dim())?;
    let out = ch.kraus.iter().fold(CMat::zeros(ch.dim_in, ch.dim_in), |acc, k| {
        acc + k.matrix().adjoint() * e.matrix() * k.matrix()
    });
    Ok(Effect::from_trusted(HermitianOperator::hermitize(out)))
}

/// The granule that, measured before the channel, reproduces measuring `e` after it.
pub fn dressed_granule(ch: &KrausChannel, e: &Effect) -> Result<Effect> {
    adjoint_apply(ch, e)
}

/// `J = (E ⊗ id)(|Φ⁺⟩⟨Φ⁺|)` with `|Φ⁺⟩ = Σ|ii⟩/√d`, so `Tr J = 1`.
/// The output factor is the most significant index.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: HermitianOperator,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::eig_hermitian(&self.matrix)?.min())
    }

    /// Completely positive iff `J ⪰ 0`.
    pub fn is_completely_positive(&self, tol: f64) -> bool {
        linalg::is_psd(&self.matrix, tol)
    }

    /// Reconstructs the channel action `E(ρ) = d · Tr_in[J (I ⊗ ρᵀ)]`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        check_dim(self.dim_in, rho.dim())?;
        let (din, dout) = (self.dim_in, self.dim_out);
        let j = self.matrix.matrix();
        let r = rho.matrix();
        let out = CMat::from_fn(dout, dout, |a, b| {
            let mut acc = c(0.0, 0.0);
            for i in 0..din {
                for k in 0..din {
                    acc += j[(a * din + i, b * din + k)] * r[(i, k)];
                }
            }
            acc * c(din as f64, 0.0)
        });
        Ok(DensityOperator::from_trusted(out))
    }
}

pub fn choi(ch: &KrausChannel) -> ChoiMatrix {
    let (din, dout) = (ch.dim_in, ch.dim_out);
    let n = din * dout;
    let mut j = CMat::zeros(n, n);
    // (K ⊗ I)|Φ⁺⟩ has amplitude K[a, i] / √d at index a·din + i
    for k in &ch.kraus {
        let v = nalgebra::DVector::from_fn(n, |idx, _| {
            let (a, i) = (idx / din, idx % din);
            k.matrix()[(a, i)]
        });
        j += &v * v.adjoint();
    }
    ChoiMatrix {
        dim_in: din,
        dim_out: dout,
        matrix: HermitianOperator::hermitize(j / c(din as f64, 0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::granules::membership;
    use crate::states::{mixed_qubit, pure_state, BlochVector, StateVector};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn diag(d: &[f64]) -> CMat {
        HermitianOperator::from_real_diagonal(d).into_matrix()
    }

    fn some_states() -> Vec<DensityOperator> {
        [(0.0, 0.0, 1.0), (0.3, -0.4, 0.5), (0.0, 0.0, -1.0), (0.6, 0.0, 0.0)]
            .iter()
            .map(|&(x, y, z)| mixed_qubit(&BlochVector::new(x, y, z).unwrap()))
            .collect()
    }

    #[test]
    fn identity_channel_is_noop() {
        let id = KrausChannel::identity(2);
        for rho in some_states() {
            assert_eq!(apply(&id, &rho).unwrap().matrix(), rho.matrix());
        }
        let e = Effect::from_hermitian(HermitianOperator::from_real_diagonal(&[0.3, 0.8])).unwrap();
        assert_eq!(adjoint_apply(&id, &e).unwrap().matrix(), e.matrix());
        assert_eq!(depolarizing(0.0).unwrap().kraus().len(), 4);
        let rho = &some_states()[1];
        assert!((apply(&depolarizing(0.0).unwrap(), rho).unwrap().matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn full_depolarizing_maps_to_maximally_mixed() {
        let ch = depolarizing(1.0).unwrap();
        for rho in some_states() {
            let out = apply(&ch, &rho).unwrap();
            assert!((out.matrix() - diag(&[0.5, 0.5])).norm() < 1e-10);
        }
        let dressed = adjoint_apply(&ch, &Effect::basis_projector(2, 0).unwrap()).unwrap();
        assert!((dressed.matrix() - diag(&[0.5, 0.5])).norm() < 1e-15);
    }

    #[test]
    fn amplitude_damping_examples() {
        let ch = amplitude_damping(1.0).unwrap();
        for rho in some_states() {
            assert!((apply(&ch, &rho).unwrap().matrix() - diag(&[1.0, 0.0])).norm() < 1e-15);
        }
        let ket1 = pure_state(&StateVector::basis(2, 1).unwrap());
        assert!((apply(&ch, &ket1).unwrap().matrix() - diag(&[1.0, 0.0])).norm() < 1e-15);
        for gamma in [0.0, 0.25, 0.5, 1.0] {
            let ch = amplitude_damping(gamma).unwrap();
            let dressed = adjoint_apply(&ch, &Effect::basis_projector(2, 0).unwrap()).unwrap();
            assert!((dressed.matrix() - diag(&[1.0, gamma])).norm() < 1e-15);
        }
    }

    #[test]
    fn dephasing_adjoint_on_plus_projector() {
        let plus = Effect::projector(&StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap());
        let dressed = adjoint_apply(&dephasing(1.0).unwrap(), &plus).unwrap();
        assert!((dressed.matrix() - diag(&[0.5, 0.5])).norm() < 1e-15);
    }

    #[test]
    fn dressed_granule_duality_examples() {
        let plus_vec = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let plus = Effect::projector(&plus_vec);
        let rho = pure_state(&plus_vec);
        let ch = dephasing(1.0).unwrap();
        let lhs = membership(&apply(&ch, &rho).unwrap(), &plus).unwrap();
        let rhs = membership(&rho, &dressed_granule(&ch, &plus).unwrap()).unwrap();
        assert_abs_diff_eq!(lhs, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rhs, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn parameter_ranges() {
        assert!(depolarizing(1.1).is_err());
        assert!(amplitude_damping(-0.1).is_err());
        assert!(dephasing(f64::NAN).is_err());
    }

    #[test]
    fn corrupted_kraus_set_rejected() {
        let ch = amplitude_damping(0.3).unwrap();
        let mut ops: Vec<CMat> = ch.kraus().iter().map(|k| k.matrix().clone()).collect();
        ops[1] *= c(1.5, 0.0);
        assert!(matches!(
            KrausChannel::from_matrices(ops),
            Err(Error::InvalidChannel(_))
        ));
        let shape = vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)];
        assert!(KrausChannel::new(shape).is_err());
        assert!(KrausChannel::new(vec![]).is_err());
    }

    #[test]
    fn choi_examples() {
        let j = choi(&KrausChannel::identity(2));
        let phi = StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        assert!((j.matrix().matrix() - pure_state(&phi).matrix()).norm() < 1e-15);
        assert_abs_diff_eq!(j.matrix().trace(), 1.0, epsilon = 1e-15);

        let j = choi(&depolarizing(1.0).unwrap());
        assert!((j.matrix().matrix() - diag(&[0.25; 4])).norm() < 1e-15);

        for ch in [amplitude_damping(0.4).unwrap(), dephasing(0.7).unwrap()] {
            let j = choi(&ch);
            assert!(j.min_eigenvalue().unwrap() >= -1e-10);
            assert!(j.is_completely_positive(1e-10));
            for rho in some_states() {
                let direct = apply(&ch, &rho).unwrap();
                let rebuilt = j.apply(&rho).unwrap();
                assert!((direct.matrix() - rebuilt.matrix()).norm() < 1e-12);
            }
        }
    }
}
