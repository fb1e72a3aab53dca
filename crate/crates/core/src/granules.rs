//! Quantum granules: effects, POVMs and PVMs.
//!
//! The membership of a state `ρ` in a granule `E` is the Born probability
//! `Tr(ρE)`. Projector meet and join are provided for sharp granules only.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, c, pauli, CMat, ComplexMatrix, HermitianOperator, Tolerances};
use crate::states::{DensityOperator, StateVector, Subsystem};

/// Sharpness and orthogonality tolerance for projector families.
pub const SHARP_TOL: f64 = 1e-9;

/// Relative eigenvalue threshold used to compute numerical ranges.
pub const RANK_TOL: f64 = 1e-9;

/// An operator `0 ⪯ E ⪯ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    op: HermitianOperator,
}

impl Effect {
    pub fn new(m: CMat) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(m)?)
    }

    pub fn from_hermitian(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, Tolerances::default().psd_tol)
    }

    pub fn with_tolerance(op: HermitianOperator, psd_tol: f64) -> Result<Self> {
        let eig = linalg::eig_hermitian(&op)?;
        let thr = linalg::psd_threshold(&eig, psd_tol);
        if eig.min() < -thr || eig.max() > 1.0 + thr {
            return Err(Error::NotAnEffect {
                min_eigenvalue: eig.min(),
                max_eigenvalue: eig.max(),
            });
        }
        Ok(Self { op })
    }

    pub(crate) fn from_trusted(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            op: HermitianOperator::zeros(dim),
        }
    }

    /// Scalar effect `s·I`, `s ∈ [0, 1]`.
    pub fn scalar(dim: usize, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ParameterOutOfRange { name: "s", value: s });
        }
        Ok(Self {
            op: HermitianOperator::identity(dim).scale(s),
        })
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn projector(psi: &StateVector) -> Self {
        Self {
            op: HermitianOperator::projector_onto(psi.amplitudes())
                .expect("state vectors are normalized"),
        }
    }

    /// Computational-basis projector `|k⟩⟨k|`.
    pub fn basis_projector(dim: usize, k: usize) -> Result<Self> {
        Ok(Self::projector(&StateVector::basis(dim, k)?))
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

    pub fn into_hermitian(self) -> HermitianOperator {
        self.op
    }
}

/// Families of effects that define a measurement.
pub trait EffectFamily {
    fn effects(&self) -> &[Effect];

    fn dim(&self) -> usize {
        self.effects()[0].dim()
    }

    fn len(&self) -> usize {
        self.effects().len()
    }

    fn is_empty(&self) -> bool {
        self.effects().is_empty()
    }
}

/// Effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<Effect>,
}

impl Povm {
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        Self::with_tolerance(effects, Tolerances::default().sum_tol)
    }

    pub fn with_tolerance(effects: Vec<Effect>, sum_tol: f64) -> Result<Self> {
        let deviation = completeness_deviation(&effects)?;
        if deviation > sum_tol {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self { effects })
    }

    pub fn into_effects(self) -> Vec<Effect> {
        self.effects
    }

    /// `‖Σ E − I‖_F`.
    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.effects).expect("validated at construction")
    }
}

impl EffectFamily for Povm {
    fn effects(&self) -> &[Effect] {
        &self.effects
    }
}

/// Pairwise-orthogonal projectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm {
    projectors: Vec<Effect>,
}

impl Pvm {
    pub fn new(projectors: Vec<Effect>) -> Result<Self> {
        for (index, p) in projectors.iter().enumerate() {
            let deviation = sharpness_deviation(p);
            if deviation > SHARP_TOL {
                return Err(Error::NotSharp { index, deviation });
            }
        }
        for i in 0..projectors.len() {
            for j in (i + 1)..projectors.len() {
                check_dim(projectors[i].dim(), projectors[j].dim())?;
                let overlap = (projectors[i].matrix() * projectors[j].matrix()).norm();
                if overlap > SHARP_TOL {
                    return Err(Error::NotOrthogonal { i, j, overlap });
                }
            }
        }
        let deviation = completeness_deviation(&projectors)?;
        if deviation > Tolerances::default().sum_tol {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self { projectors })
    }

    /// Projectors onto the computational basis states.
    pub fn computational(dim: usize) -> Self {
        Self {
            projectors: (0..dim)
                .map(|k| Effect::basis_projector(dim, k).expect("k < dim"))
                .collect(),
        }
    }

    pub fn to_povm(&self) -> Povm {
        Povm {
            effects: self.projectors.clone(),
        }
    }
}

impl EffectFamily for Pvm {
    fn effects(&self) -> &[Effect] {
        &self.projectors
    }
}

fn completeness_deviation(effects: &[Effect]) -> Result<f64> {
    let first = effects.first().ok_or(Error::EmptyFamily)?;
    let n = first.dim();
    let mut sum = CMat::zeros(n, n);
    for e in effects {
        check_dim(n, e.dim())?;
        sum += e.matrix();
    }
    Ok((sum - CMat::identity(n, n)).norm())
}

fn sharpness_deviation(e: &Effect) -> f64 {
    (e.matrix() * e.matrix() - e.matrix()).norm()
}

/// Bloch-form qubit effect `αI + e·σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitEffectBloch {
    pub alpha: f64,
    pub e: [f64; 3],
}

impl QubitEffectBloch {
    /// Requires `0 ≤ α − ‖e‖` and `α + ‖e‖ ≤ 1`.
    pub fn new(alpha: f64, e: [f64; 3]) -> Result<Self> {
        let b = Self { alpha, e };
        let norm = b.e_norm();
        let slack = 1e-10;
        if !alpha.is_finite() || !norm.is_finite() || alpha - norm < -slack || alpha + norm > 1.0 + slack
        {
            return Err(Error::InvalidEffectParameters { alpha, norm });
        }
        Ok(b)
    }

    pub fn e_norm(&self) -> f64 {
        self.e.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Bloch parameters of a 2×2 effect: `α = Tr E / 2`, `e_k = Tr(Eσ_k) / 2`.
    pub fn from_effect(effect: &Effect) -> Result<Self> {
        check_dim(2, effect.dim())?;
        let alpha = effect.as_hermitian().trace() / 2.0;
        let e = pauli::all().map(|p| linalg::trace_of_product(effect.matrix(), &p).re / 2.0);
        Self::new(alpha, e)
    }
}

/// Lower and upper effects with `lower ⪯ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughGranulePair {
    lower: Effect,
    upper: Effect,
}

impl RoughGranulePair {
    pub fn new(lower: Effect, upper: Effect) -> Result<Self> {
        if !linalg::loewner_leq(lower.as_hermitian(), upper.as_hermitian(), Tolerances::default().psd_tol)? {
            let gap = upper.as_hermitian().sub(lower.as_hermitian())?;
            let min_eigenvalue = linalg::eig_hermitian(&gap)?.min();
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &Effect {
        &self.lower
    }

    pub fn upper(&self) -> &Effect {
        &self.upper
    }

    /// Memberships `(p(lower), p(upper))`; the first never exceeds the second.
    pub fn memberships(&self, rho: &DensityOperator) -> Result<(f64, f64)> {
        Ok((membership(rho, &self.lower)?, membership(rho, &self.upper)?))
    }
}

/// Accept / reject / undecided effects forming a POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeWayPovm {
    povm: Povm,
}

impl ThreeWayPovm {
    pub fn new(accept: Effect, reject: Effect, undecided: Effect) -> Result<Self> {
        Ok(Self {
            povm: Povm::new(vec![accept, reject, undecided])?,
        })
    }

    pub fn accept(&self) -> &Effect {
        &self.povm.effects[0]
    }

    pub fn reject(&self) -> &Effect {
        &self.povm.effects[1]
    }

    pub fn undecided(&self) -> &Effect {
        &self.povm.effects[2]
    }

    pub fn as_povm(&self) -> &Povm {
        &self.povm
    }
}

/// Born value `Tr(ρE)` before clamping.
pub fn membership_raw(rho: &DensityOperator, e: &Effect) -> Result<f64> {
    rho.as_hermitian().trace_product(e.as_hermitian())
}

/// `Tr(ρE)` clamped to `[0, 1]`.
pub fn membership(rho: &DensityOperator, e: &Effect) -> Result<f64> {
    Ok(membership_raw(rho, e)?.clamp(0.0, 1.0))
}

/// `⟨ψ|E|ψ⟩`.
pub fn membership_pure(psi: &StateVector, e: &Effect) -> Result<f64> {
    check_dim(e.dim(), psi.dim())?;
    let v = psi.as_vector();
    Ok((v.adjoint() * e.matrix() * v)[(0, 0)].re.clamp(0.0, 1.0))
}

pub fn is_sharp(e: &Effect, tol: f64) -> bool {
    sharpness_deviation(e) <= tol
}

/// `Σ_{i∈S} E_i`.
pub fn coarse_grain<F: EffectFamily + ?Sized>(family: &F, indices: &[usize]) -> Result<Effect> {
    if indices.is_empty() {
        return Err(Error::InvalidIndexSet("empty index set".into()));
    }
    let effects = family.effects();
    let mut seen = vec![false; effects.len()];
    for &i in indices {
        if i >= effects.len() {
            return Err(Error::InvalidIndexSet(format!(
                "index {i} out of range for {} outcomes",
                effects.len()
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidIndexSet(format!("index {i} repeated")));
        }
    }
    let n = family.dim();
    let sum = indices
        .iter()
        .fold(CMat::zeros(n, n), |acc, &i| acc + effects[i].matrix());
    Ok(Effect::from_trusted(HermitianOperator::hermitize(sum)))
}

/// `αI + e·σ`.
pub fn qubit_effect(b: &QubitEffectBloch) -> Effect {
    let [x, y, z] = pauli::all();
    let m = pauli::identity() * c(b.alpha, 0.0)
        + x * c(b.e[0], 0.0)
        + y * c(b.e[1], 0.0)
        + z * c(b.e[2], 0.0);
    Effect::from_trusted(HermitianOperator::hermitize(m))
}

/// `E ⊗ I_B` (for `A`) or `I_A ⊗ E` (for `B`).
pub fn lift_local(e: &Effect, dim_a: usize, dim_b: usize, which: Subsystem) -> Result<Effect> {
    let op = match which {
        Subsystem::A => {
            check_dim(dim_a, e.dim())?;
            linalg::tensor_hermitian(e.as_hermitian(), &HermitianOperator::identity(dim_b))
        }
        Subsystem::B => {
            check_dim(dim_b, e.dim())?;
            linalg::tensor_hermitian(&HermitianOperator::identity(dim_a), e.as_hermitian())
        }
    };
    Ok(Effect::from_trusted(op))
}

/// `I − E`.
pub fn complement(e: &Effect) -> Effect {
    let n = e.dim();
    Effect::from_trusted(HermitianOperator::hermitize(CMat::identity(n, n) - e.matrix()))
}

fn require_sharp(p: &Effect, index: usize) -> Result<()> {
    let deviation = sharpness_deviation(p);
    if deviation > SHARP_TOL {
        return Err(Error::NotSharp { index, deviation });
    }
    Ok(())
}

/// Projector onto `ran P ∩ ran Q`: the null space of `(I − P) + (I − Q)`.
pub fn projector_meet(p: &Effect, q: &Effect) -> Result<Effect> {
    require_sharp(p, 0)?;
    require_sharp(q, 1)?;
    check_dim(p.dim(), q.dim())?;
    let n = p.dim();
    let complements = CMat::identity(n, n) * c(2.0, 0.0) - p.matrix() - q.matrix();
    let eig = linalg::eig_hermitian(&HermitianOperator::hermitize(complements))?;
    let thr = RANK_TOL * eig.spectral_scale();
    Ok(Effect::from_trusted(eig.spectral_projector(|l| l <= thr)))
}

/// Projector onto `span(ran P ∪ ran Q)`: the range of `P + Q`.
pub fn projector_join(p: &Effect, q: &Effect) -> Result<Effect> {
    require_sharp(p, 0)?;
    require_sharp(q, 1)?;
    let sum = p.as_hermitian().add(q.as_hermitian())?;
    let eig = linalg::eig_hermitian(&sum)?;
    let thr = RANK_TOL * eig.spectral_scale();
    Ok(Effect::from_trusted(eig.spectral_projector(|l| l > thr)))
}

/// `{½(I⊗I + Z⊗Z), ½(I⊗I − Z⊗Z)}` on two qubits.
pub fn parity_effects() -> Pvm {
    let zz = linalg::tensor(
        &ComplexMatrix::from_matrix(pauli::z()).expect("finite"),
        &ComplexMatrix::from_matrix(pauli::z()).expect("finite"),
    )
    .into_matrix();
    let id = CMat::identity(4, 4);
    let even = (&id + &zz) * c(0.5, 0.0);
    let odd = (&id - &zz) * c(0.5, 0.0);
    Pvm {
        projectors: vec![
            Effect::from_trusted(HermitianOperator::hermitize(even)),
            Effect::from_trusted(HermitianOperator::hermitize(odd)),
        ],
    }
}
