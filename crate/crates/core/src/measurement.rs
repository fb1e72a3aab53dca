//! Born statistics, Lüders updates and simulated shot sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::granules::{membership, Effect, EffectFamily, Pvm};
use crate::linalg::CMat;
use crate::states::DensityOperator;

/// Branches with probability at or below this are not conditioned on.
pub const LUDERS_FLOOR: f64 = 1e-12;

/// Generator behind [`sample_shots`]: ChaCha with 8 rounds (`rand_chacha` 0.9),
/// seeded through `SeedableRng::seed_from_u64`. Multinomial draws use sequential
/// binomial conditioning with `rand_distr` 0.5's `Binomial`.
pub const SHOT_RNG: &str = "ChaCha8Rng/seed_from_u64 + sequential Binomial (rand_distr 0.5)";

/// A probability vector over measurement outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OutcomeDistribution {
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    /// Entries must be nonnegative within `1e-10` and sum to 1 within `1e-9`;
    /// the vector is clamped and renormalized.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some(p) = probabilities.iter().find(|p| !p.is_finite() || **p < -1e-10) {
            return Err(Error::InvalidDistribution(format!("entry {p}")));
        }
        let clamped: Vec<f64> = probabilities.iter().map(|p| p.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("sum {total}")));
        }
        Ok(Self {
            probabilities: clamped.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

impl TryFrom<Vec<f64>> for OutcomeDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OutcomeDistribution> for Vec<f64> {
    fn from(d: OutcomeDistribution) -> Self {
        d.probabilities
    }
}

/// Multinomial counts from a seeded run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotRecord {
    /// `counts_i / shots`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&n| n as f64 / self.shots as f64)
            .collect()
    }
}

/// `p_i = Tr(ρ E_i)`.
pub fn outcome_probabilities<F: EffectFamily + ?Sized>(
    rho: &DensityOperator,
    family: &F,
) -> Result<OutcomeDistribution> {
    check_dim(family.dim(), rho.dim())?;
    let raw = family
        .effects()
        .iter()
        .map(|e| membership(rho, e))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = raw.iter().sum();
    OutcomeDistribution::new(raw.into_iter().map(|p| p / total).collect())
}

/// Selective update: `(p_i, P_i ρ P_i / p_i)`.
pub fn luders_selective(rho: &DensityOperator, pvm: &Pvm, i: usize) -> Result<(f64, DensityOperator)> {
    check_dim(pvm.dim(), rho.dim())?;
    let p = pvm
        .effects()
        .get(i)
        .ok_or_else(|| Error::InvalidIndexSet(format!("outcome {i} out of range")))?;
    let (probability, projected) = project(rho, p)?;
    if probability <= LUDERS_FLOOR {
        return Err(Error::ZeroProbabilityBranch {
            index: i,
            probability,
        });
    }
    Ok((probability, DensityOperator::from_trusted(projected)))
}

fn project(rho: &DensityOperator, p: &Effect) -> Result<(f64, CMat)> {
    let probability = membership(rho, p)?;
    Ok((probability, p.matrix() * rho.matrix() * p.matrix()))
}

/// Nonselective update `Σ_i P_i ρ P_i`.
pub fn luders_nonselective(rho: &DensityOperator, pvm: &Pvm) -> Result<DensityOperator> {
    check_dim(pvm.dim(), rho.dim())?;
    let n = rho.dim();
    let sum = pvm
        .effects()
        .iter()
        .fold(CMat::zeros(n, n), |acc, p| acc + p.matrix() * rho.matrix() * p.matrix());
    Ok(DensityOperator::from_trusted(sum))
}

/// One outcome of a refinement: its probability and the conditional membership
/// of the conditioned state, `None` when the branch is below [`LUDERS_FLOOR`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementBranch {
    pub probability: f64,
    pub conditional_membership: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub branches: Vec<RefinementBranch>,
    /// `Σ p_i · p_{ρ_i}(E)` over live branches.
    pub total: f64,
}

/// Decomposes `p_{ρ'}(E)` over the outcomes of a nonselective Lüders update.
pub fn refinement_decompose(rho: &DensityOperator, pvm: &Pvm, e: &Effect) -> Result<Refinement> {
    check_dim(pvm.dim(), rho.dim())?;
    check_dim(e.dim(), rho.dim())?;
    let mut branches = Vec::with_capacity(pvm.len());
    let mut total = 0.0;
    for p in pvm.effects() {
        let (probability, projected) = project(rho, p)?;
        if probability <= LUDERS_FLOOR {
            branches.push(RefinementBranch {
                probability,
                conditional_membership: None,
            });
            continue;
        }
        let conditioned = DensityOperator::from_trusted(projected);
        let m = membership(&conditioned, e)?;
        total += probability * m;
        branches.push(RefinementBranch {
            probability,
            conditional_membership: Some(m),
        });
    }
    Ok(Refinement { branches, total })
}

/// Seeded multinomial draw of `shots` outcomes.
pub fn sample_shots(dist: &OutcomeDistribution, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = dist.probabilities();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    let last = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last {
            counts[i] = remaining;
            break;
        }
        let conditional = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let drawn = Binomial::new(remaining, conditional)
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?
            .sample(&mut rng);
        counts[i] = drawn;
        remaining -= drawn;
        mass -= p;
    }
    Ok(ShotRecord {
        counts,
        shots,
        seed,
    })
}
