//! Boolean islands: commuting granule families as classical fuzzy sets.
//!
//! A pairwise-commuting family `{E_j}` is simultaneously diagonal in some
//! orthonormal basis. Each basis vector is a point of the sample space Ω, each
//! effect becomes the function `f_j(ω) = ⟨ω|E_j|ω⟩`, and a state induces the
//! measure `μ_ρ(ω) = ⟨ω|ρ|ω⟩` with `Tr(ρE_j) = Σ_ω f_j(ω) μ_ρ(ω)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::granules::Effect;
use crate::linalg::{self, c, CMat, HermitianOperator, Tolerances};
use crate::states::DensityOperator;

const COMBINATION_SEED: u64 = 0x5eed_b001;

/// Off-diagonal Frobenius mass allowed after diagonalization, scaled by `max(1, ‖E‖_F)`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-8;

/// Relative gap under which eigenvalues are grouped into one eigenspace during refinement.
const CLUSTER_TOL: f64 = 1e-8;

/// Points of Ω are the basis columns; `functions[j][ω]` is `f_j(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalRepresentation {
    basis: CMat,
    functions: Vec<Vec<f64>>,
}

impl ClassicalRepresentation {
    pub fn omega_size(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn functions(&self) -> &[Vec<f64>] {
        &self.functions
    }

    /// `Σ_ω f_j(ω) μ(ω)`.
    pub fn integrate(&self, j: usize, measure: &StateMeasure) -> f64 {
        self.functions[j]
            .iter()
            .zip(&measure.weights)
            .map(|(f, w)| f * w)
            .sum()
    }
}

/// Probability weights over Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMeasure {
    pub weights: Vec<f64>,
}

/// Largest pairwise commutator norm, as `(i, j, ‖[E_i, E_j]‖_F)`.
pub fn worst_pair(effects: &[Effect]) -> Result<Option<(usize, usize, f64)>> {
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..effects.len() {
        for j in (i + 1)..effects.len() {
            let norm = linalg::commutator_norm(effects[i].as_hermitian(), effects[j].as_hermitian())?;
            if worst.is_none_or(|(_, _, w)| norm > w) {
                worst = Some((i, j, norm));
            }
        }
    }
    Ok(worst)
}

/// True iff every pair satisfies `‖[E_i, E_j]‖_F ≤ tol · max(1, ‖E_i‖_F ‖E_j‖_F)`.
pub fn is_commuting_family(effects: &[Effect], tol: f64) -> Result<bool> {
    Ok(first_violation(effects, tol)?.is_none())
}

fn first_violation(effects: &[Effect], tol: f64) -> Result<Option<(usize, usize, f64)>> {
    let mut worst: Option<(usize, usize, f64, f64)> = None;
    for i in 0..effects.len() {
        for j in (i + 1)..effects.len() {
            let (a, b) = (effects[i].as_hermitian(), effects[j].as_hermitian());
            let norm = linalg::commutator_norm(a, b)?;
            let scale = (a.frobenius_norm() * b.frobenius_norm()).max(1.0);
            let ratio = norm / scale;
            if ratio > tol && worst.is_none_or(|(_, _, _, r)| ratio > r) {
                worst = Some((i, j, norm, ratio));
            }
        }
    }
    Ok(worst.map(|(i, j, n, _)| (i, j, n)))
}

/// Simultaneous diagonalization of a commuting family.
pub fn boolean_island(effects: &[Effect]) -> Result<ClassicalRepresentation> {
    let first = effects.first().ok_or(Error::EmptyFamily)?;
    let dim = first.dim();
    for e in effects {
        check_dim(dim, e.dim())?;
    }
    if let Some((i, j, norm)) = first_violation(effects, Tolerances::default().commute_tol)? {
        return Err(Error::Incompatible { i, j, norm });
    }

    let basis = match generic_combination_basis(effects)? {
        Some(v) => v,
        None => refine_eigenspaces(effects)?,
    };
    let functions = effects
        .iter()
        .map(|e| diagonal_in(e.as_hermitian(), &basis))
        .collect::<Result<_>>()?;
    Ok(ClassicalRepresentation { basis, functions })
}

/// Diagonalizes `Σ c_j E_j` with fixed-seed Gaussian `c_j`; `None` if some `E_j`
/// is left off-diagonal (an eigenvalue collision).
fn generic_combination_basis(effects: &[Effect]) -> Result<Option<CMat>> {
    let mut rng = ChaCha8Rng::seed_from_u64(COMBINATION_SEED);
    let dim = effects[0].dim();
    let mut h = CMat::zeros(dim, dim);
    for e in effects {
        let coeff: f64 = StandardNormal.sample(&mut rng);
        h += e.matrix() * c(coeff, 0.0);
    }
    let eig = linalg::eig_hermitian(&HermitianOperator::hermitize(h))?;
    let all_diagonal = effects
        .iter()
        .all(|e| off_diagonal_ok(e.as_hermitian(), &eig.vectors));
    Ok(all_diagonal.then_some(eig.vectors))
}

/// Diagonalizes `E_1`, then `E_2` inside each eigenspace of `E_1`, and so on.
fn refine_eigenspaces(effects: &[Effect]) -> Result<CMat> {
    let dim = effects[0].dim();
    let mut blocks: Vec<CMat> = vec![CMat::identity(dim, dim)];
    for e in effects {
        let mut next = Vec::with_capacity(blocks.len());
        for block in blocks {
            let restricted = e.as_hermitian().conjugate_by(&block)?;
            let eig = linalg::eig_hermitian(&restricted)?;
            let rotated = &block * &eig.vectors;
            let thr = CLUSTER_TOL * eig.spectral_scale();
            let mut start = 0;
            for k in 1..=eig.values.len() {
                if k == eig.values.len() || eig.values[k] - eig.values[k - 1] > thr {
                    next.push(rotated.columns(start, k - start).into_owned());
                    start = k;
                }
            }
        }
        blocks = next;
    }
    let cols: Vec<_> = blocks.iter().flat_map(|b| b.column_iter().map(|c| c.into_owned())).collect();
    Ok(CMat::from_columns(&cols))
}

fn off_diagonal_ok(e: &HermitianOperator, basis: &CMat) -> bool {
    let d = basis.adjoint() * e.matrix() * basis;
    let off: f64 = d
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx % d.nrows() != idx / d.nrows())
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    off <= OFF_DIAGONAL_TOL * e.frobenius_norm().max(1.0)
}

fn diagonal_in(op: &HermitianOperator, basis: &CMat) -> Result<Vec<f64>> {
    let d = op.conjugate_by(basis)?;
    Ok(d.matrix().diagonal().iter().map(|z| z.re).collect())
}

/// `μ_ρ(ω) = ⟨ω|ρ|ω⟩`.
pub fn measure_for(rep: &ClassicalRepresentation, rho: &DensityOperator) -> Result<StateMeasure> {
    check_dim(rep.basis.nrows(), rho.dim())?;
    let weights = diagonal_in(rho.as_hermitian(), &rep.basis)?
        .into_iter()
        .map(|w| w.max(0.0))
        .collect();
    Ok(StateMeasure { weights })
}
