//! Sweeps and reports behind the `qgc` subcommands.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channels::{self, KrausChannel};
use crate::error::{check_dim, Error, Result};
use crate::granules::{coarse_grain, membership, membership_pure, parity_effects, Effect, EffectFamily, QubitEffectBloch};
use crate::helstrom::{self, BinaryHypothesis};
use crate::io::MatrixJson;
use crate::islands;
use crate::linalg::Tolerances;
use crate::states::{pure_qubit, DensityOperator};

fn check_steps(name: &'static str, steps: usize) -> Result<()> {
    if steps < 2 {
        return Err(Error::ParameterOutOfRange { name, value: steps as f64 });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub phi: f64,
    pub membership: f64,
}

/// Memberships of `|ψ(θ, φ)⟩` with `θ` over `[0, π]` inclusive and `φ` over `[0, 2π)`.
pub fn qubit_sweep(theta_steps: usize, phi_steps: usize, e: &Effect) -> Result<Vec<SweepRow>> {
    check_steps("theta_steps", theta_steps)?;
    check_steps("phi_steps", phi_steps)?;
    check_dim(2, e.dim())?;
    let mut rows = Vec::with_capacity(theta_steps * phi_steps);
    for i in 0..theta_steps {
        let theta = PI * i as f64 / (theta_steps - 1) as f64;
        for k in 0..phi_steps {
            let phi = 2.0 * PI * k as f64 / phi_steps as f64;
            let membership = membership_pure(&pure_qubit(theta, phi), e)?;
            rows.push(SweepRow { theta, phi, membership });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedRow {
    pub r: f64,
    /// Polar angle of `r` in the x–z plane.
    pub angle: f64,
    pub membership: f64,
}

/// `α + r·e` for `r = ‖r‖(sin γ, 0, cos γ)`, `‖r‖ ∈ [0, 1]` and `γ ∈ [0, π]`.
pub fn mixed_sweep(r_steps: usize, angle_steps: usize, e: &QubitEffectBloch) -> Result<Vec<MixedRow>> {
    check_steps("r_steps", r_steps)?;
    check_steps("angle_steps", angle_steps)?;
    let e = QubitEffectBloch::new(e.alpha, e.e)?;
    let mut rows = Vec::with_capacity(r_steps * angle_steps);
    for i in 0..r_steps {
        let r = i as f64 / (r_steps - 1) as f64;
        for k in 0..angle_steps {
            let angle = PI * k as f64 / (angle_steps - 1) as f64;
            let v = [r * angle.sin(), 0.0, r * angle.cos()];
            let membership = (e.alpha + v[0] * e.e[0] + v[1] * e.e[1] + v[2] * e.e[2]).clamp(0.0, 1.0);
            rows.push(MixedRow { r, angle, membership });
        }
    }
    Ok(rows)
}

/// `max − min` membership among rows with the given radius.
pub fn contrast(rows: &[MixedRow], r: f64) -> f64 {
    let ms = rows.iter().filter(|row| row.r == r).map(|row| row.membership);
    let (lo, hi) = ms.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub p_even: f64,
    pub p_odd: f64,
    /// Membership in the coarse-grained union of both parity classes.
    pub p_any: f64,
}

pub fn parity_report(rho: &DensityOperator) -> Result<ParityReport> {
    let parity = parity_effects();
    check_dim(4, rho.dim())?;
    let fx = parity.effects();
    Ok(ParityReport {
        p_even: membership(rho, &fx[0])?,
        p_odd: membership(rho, &fx[1])?,
        p_any: membership(rho, &coarse_grain(&parity, &[0, 1])?)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressRow {
    /// `Tr(E(ρ) E)`.
    pub schrodinger: f64,
    /// `Tr(ρ E†(E))`.
    pub heisenberg: f64,
    pub difference: f64,
}

pub fn channel_dress(ch: &KrausChannel, e: &Effect, states: &[DensityOperator]) -> Result<Vec<DressRow>> {
    let dressed = channels::dressed_granule(ch, e)?;
    states
        .iter()
        .map(|rho| {
            let schrodinger = membership(&channels::apply(ch, rho)?, e)?;
            let heisenberg = membership(rho, &dressed)?;
            Ok(DressRow {
                schrodinger,
                heisenberg,
                difference: (schrodinger - heisenberg).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandReport {
    pub commuting: bool,
    pub worst_pair: Option<[usize; 2]>,
    pub commutator_norm: f64,
    /// `f_j(ω)` per effect, present when the family commutes.
    pub functions: Option<Vec<Vec<f64>>>,
}

pub fn island_check(effects: &[Effect]) -> Result<IslandReport> {
    if effects.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let worst = islands::worst_pair(effects)?;
    let commuting = islands::is_commuting_family(effects, Tolerances::default().commute_tol)?;
    let functions = if commuting {
        Some(islands::boolean_island(effects)?.functions().to_vec())
    } else {
        None
    };
    Ok(IslandReport {
        commuting,
        worst_pair: worst.map(|(i, j, _)| [i, j]),
        commutator_norm: worst.map_or(0.0, |(_, _, n)| n),
        functions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelstromReport {
    pub trace_norm: f64,
    pub optimal_value: f64,
    pub e_star: MatrixJson,
    /// Soft memberships of the probe state in `E*` and `I − E*`.
    pub mu0: f64,
    pub mu1: f64,
}

/// Solves the problem and reports soft memberships of `probe`, or of `ρ₀` when absent.
pub fn helstrom_report(h: &BinaryHypothesis, probe: Option<&DensityOperator>) -> Result<HelstromReport> {
    let res = helstrom::solve(h)?;
    let soft = helstrom::soft_memberships(probe.unwrap_or(h.rho0()), &res.optimal_granule)?;
    Ok(HelstromReport {
        trace_norm: res.trace_norm,
        optimal_value: res.optimal_value,
        e_star: MatrixJson::from_matrix(res.optimal_granule.matrix(), true),
        mu0: soft.mu0,
        mu1: soft.mu1,
    })
}
