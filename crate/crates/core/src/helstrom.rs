//! Minimum-error binary decisions.
//!
//! For hypotheses `(ρ₀, π₀)` and `(ρ₁, π₁)` the optimal decision granule is the
//! projector onto the positive spectrum of `Δ = π₀ρ₀ − π₁ρ₁`, with success
//! probability `½(1 + ‖Δ‖₁)`. Zero eigenvalues are assigned to the "decide ρ₁"
//! side, which keeps `E*` minimal without changing the success probability.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::granules::{complement, membership, Effect, Povm};
use crate::linalg::{self, HermitianOperator};
use crate::states::DensityOperator;

/// Default relative threshold separating positive from zero eigenvalues of `Δ`.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryHypothesis {
    rho0: DensityOperator,
    rho1: DensityOperator,
    pi0: f64,
    pi1: f64,
}

impl BinaryHypothesis {
    pub fn new(rho0: DensityOperator, rho1: DensityOperator, pi0: f64, pi1: f64) -> Result<Self> {
        check_dim(rho0.dim(), rho1.dim())?;
        if !(pi0 > 0.0 && pi1 > 0.0) || (pi0 + pi1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPriors { pi0, pi1 });
        }
        Ok(Self {
            rho0,
            rho1,
            pi0,
            pi1,
        })
    }

    pub fn equal_priors(rho0: DensityOperator, rho1: DensityOperator) -> Result<Self> {
        Self::new(rho0, rho1, 0.5, 0.5)
    }

    pub fn rho0(&self) -> &DensityOperator {
        &self.rho0
    }

    pub fn rho1(&self) -> &DensityOperator {
        &self.rho1
    }

    pub fn priors(&self) -> (f64, f64) {
        (self.pi0, self.pi1)
    }

    /// The same problem with the hypothesis labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            rho0: self.rho1.clone(),
            rho1: self.rho0.clone(),
            pi0: self.pi1,
            pi1: self.pi0,
        }
    }

    pub fn dim(&self) -> usize {
        self.rho0.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelstromResult {
    pub delta: HermitianOperator,
    pub optimal_granule: Effect,
    pub trace_norm: f64,
    pub optimal_value: f64,
}

impl HelstromResult {
    /// The two-outcome measurement `{E*, I − E*}`.
    pub fn decision_povm(&self) -> Povm {
        Povm::new(vec![
            self.optimal_granule.clone(),
            complement(&self.optimal_granule),
        ])
        .expect("E* and its complement sum to I")
    }
}

/// `Δ = π₀ρ₀ − π₁ρ₁`.
pub fn delta(h: &BinaryHypothesis) -> HermitianOperator {
    h.rho0
        .as_hermitian()
        .scale(h.pi0)
        .sub(&h.rho1.as_hermitian().scale(h.pi1))
        .expect("dims checked at construction")
}

/// Projector onto eigenvalues of `Δ` above `tol · max(1, max|λ|)`.
pub fn optimal_granule(h: &BinaryHypothesis, tol: f64) -> Result<Effect> {
    let eig = linalg::eig_hermitian(&delta(h))?;
    let thr = tol * eig.spectral_scale();
    Effect::from_hermitian(eig.spectral_projector(|l| l > thr))
}

/// `π₀ p_{ρ₀}(E) + π₁ p_{ρ₁}(I − E)`.
pub fn success_probability(h: &BinaryHypothesis, e: &Effect) -> Result<f64> {
    check_dim(h.dim(), e.dim())?;
    let p0 = membership(&h.rho0, e)?;
    let p1 = membership(&h.rho1, &complement(e))?;
    Ok((h.pi0 * p0 + h.pi1 * p1).clamp(0.0, 1.0))
}

/// `½(1 + Tr(Δ(2E − I)))`, an algebraically equivalent route to [`success_probability`].
pub fn success_probability_via_delta(h: &BinaryHypothesis, e: &Effect) -> Result<f64> {
    check_dim(h.dim(), e.dim())?;
    let two_e_minus_i = e
        .as_hermitian()
        .scale(2.0)
        .sub(&HermitianOperator::identity(e.dim()))?;
    Ok(0.5 * (1.0 + delta(h).trace_product(&two_e_minus_i)?))
}

pub fn solve(h: &BinaryHypothesis) -> Result<HelstromResult> {
    let delta = delta(h);
    let eig = linalg::eig_hermitian(&delta)?;
    let thr = ZERO_EIGENVALUE_TOL * eig.spectral_scale();
    let optimal_granule = Effect::from_hermitian(eig.spectral_projector(|l| l > thr))?;
    let trace_norm: f64 = eig.values.iter().map(|l| l.abs()).sum();
    Ok(HelstromResult {
        delta,
        optimal_granule,
        trace_norm,
        optimal_value: 0.5 * (1.0 + trace_norm),
    })
}

/// Soft decision memberships `(μ₀, μ₁) = (p_ρ(E*), 1 − p_ρ(E*))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftMemberships {
    pub mu0: f64,
    pub mu1: f64,
}

pub fn soft_memberships(rho: &DensityOperator, e_star: &Effect) -> Result<SoftMemberships> {
    let mu0 = membership(rho, e_star)?;
    Ok(SoftMemberships { mu0, mu1: 1.0 - mu0 })
}
