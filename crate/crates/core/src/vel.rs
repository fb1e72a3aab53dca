//! Variational effect learning.
//!
//! A template POVM `{F_j}` is conjugated by a parametrized unitary,
//! `E_j(θ) = U(θ)† F_j U(θ)`, which stays a valid POVM for every `θ`. Training
//! minimizes an empirical risk over labeled encoded states with plain gradient
//! descent on central finite-difference gradients.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::encoding::{Encoder, LabeledDataset};
use crate::error::{check_dim, Error, Result};
use crate::granules::{Effect, EffectFamily, Povm};
use crate::linalg::{self, c, CMat, HermitianOperator, C64};
use crate::measurement::OutcomeDistribution;
use crate::states::DensityOperator;

/// Rotation generators; the angle multiplies `−iG/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    Rx(usize),
    Ry(usize),
    Rz(usize),
    Rzz(usize, usize),
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rx(q) | Gate::Ry(q) | Gate::Rz(q) => vec![q],
            Gate::Rzz(a, b) => vec![a, b],
        }
    }

    /// `exp(−iθG/2)` on `n` qubits; qubit 0 is the most significant.
    pub fn matrix(&self, n: usize, theta: f64) -> CMat {
        let (s, co) = (theta / 2.0).sin_cos();
        let single = |g: CMat, q: usize| {
            let left = CMat::identity(1 << q, 1 << q);
            let right = CMat::identity(1 << (n - q - 1), 1 << (n - q - 1));
            left.kronecker(&g).kronecker(&right)
        };
        match *self {
            Gate::Rx(q) => single(
                CMat::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]),
                q,
            ),
            Gate::Ry(q) => single(
                CMat::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]),
                q,
            ),
            Gate::Rz(q) => single(
                CMat::from_row_slice(
                    2,
                    2,
                    &[C64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, theta / 2.0)],
                ),
                q,
            ),
            Gate::Rzz(a, b) => {
                let dim = 1 << n;
                let mut m = CMat::zeros(dim, dim);
                for idx in 0..dim {
                    let za = if (idx >> (n - 1 - a)) & 1 == 0 { 1.0 } else { -1.0 };
                    let zb = if (idx >> (n - 1 - b)) & 1 == 0 { 1.0 } else { -1.0 };
                    m[(idx, idx)] = C64::from_polar(1.0, -theta / 2.0 * za * zb);
                }
                m
            }
        }
    }
}

/// `layers` repetitions of a gate layout, one angle per gate instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryAnsatz {
    num_qubits: usize,
    layers: usize,
    layer: Vec<Gate>,
}

impl UnitaryAnsatz {
    pub fn new(num_qubits: usize, layers: usize, layer: Vec<Gate>) -> Result<Self> {
        if num_qubits == 0 || layers == 0 {
            return Err(Error::InvalidAnsatz("qubits and layers must be positive".into()));
        }
        if num_qubits > 10 {
            return Err(Error::InvalidAnsatz(format!("{num_qubits} qubits exceeds the dense limit of 10")));
        }
        for g in &layer {
            let qs = g.qubits();
            if let Some(q) = qs.iter().find(|&&q| q >= num_qubits) {
                return Err(Error::InvalidAnsatz(format!(
                    "{g:?} targets qubit {q} of {num_qubits}"
                )));
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::InvalidAnsatz(format!("{g:?} needs two distinct qubits")));
            }
        }
        Ok(Self {
            num_qubits,
            layers,
            layer,
        })
    }

    /// Per layer: RY on every qubit, RZ on every qubit, then RZZ along a linear chain.
    pub fn hardware_efficient(num_qubits: usize, layers: usize) -> Result<Self> {
        let mut layer: Vec<Gate> = (0..num_qubits).map(Gate::Ry).collect();
        layer.extend((0..num_qubits).map(Gate::Rz));
        layer.extend((1..num_qubits).map(|q| Gate::Rzz(q - 1, q)));
        Self::new(num_qubits, layers, layer)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn layer(&self) -> &[Gate] {
        &self.layer
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.layers * self.layer.len()
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::ThetaLength {
                expected: self.num_params(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

/// `U(θ) = G_K(θ_K) ⋯ G_1(θ_1)`: the first gate in the layout acts first.
pub fn build_unitary(ansatz: &UnitaryAnsatz, theta: &[f64]) -> Result<CMat> {
    ansatz.check_theta(theta)?;
    let n = ansatz.num_qubits;
    let gates = ansatz.layer.iter().cycle().take(ansatz.num_params());
    Ok(gates
        .zip(theta)
        .fold(CMat::identity(ansatz.dim(), ansatz.dim()), |u, (g, &t)| g.matrix(n, t) * u))
}

/// Template POVM conjugated by a variational unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametrizedPovm {
    template: Povm,
    ansatz: UnitaryAnsatz,
}

impl ParametrizedPovm {
    pub fn new(template: Povm, ansatz: UnitaryAnsatz) -> Result<Self> {
        check_dim(ansatz.dim(), template.dim())?;
        Ok(Self { template, ansatz })
    }

    pub fn template(&self) -> &Povm {
        &self.template
    }

    pub fn ansatz(&self) -> &UnitaryAnsatz {
        &self.ansatz
    }

    pub fn num_outcomes(&self) -> usize {
        self.template.len()
    }
}

/// `E_j(θ) = U(θ)† F_j U(θ)`, validated as a POVM.
pub fn effects_at(p: &ParametrizedPovm, theta: &[f64]) -> Result<Povm> {
    let u = build_unitary(&p.ansatz, theta)?;
    let effects = p
        .template
        .effects()
        .iter()
        .map(|f| Effect::from_hermitian(f.as_hermitian().conjugate_by(&u)?))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

/// `p_j = Tr(ρ E_j(θ)) = Tr(UρU† F_j)`.
pub fn probabilities(p: &ParametrizedPovm, rho: &DensityOperator, theta: &[f64]) -> Result<OutcomeDistribution> {
    let u = build_unitary(&p.ansatz, theta)?;
    probabilities_with_unitary(p, rho, &u)
}

fn probabilities_with_unitary(p: &ParametrizedPovm, rho: &DensityOperator, u: &CMat) -> Result<OutcomeDistribution> {
    check_dim(p.template.dim(), rho.dim())?;
    let rotated = HermitianOperator::hermitize(u * rho.matrix() * u.adjoint());
    let raw = p
        .template
        .effects()
        .iter()
        .map(|f| Ok(rotated.trace_product(f.as_hermitian())?.clamp(0.0, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = raw.iter().sum();
    OutcomeDistribution::new(raw.into_iter().map(|q| q / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    CrossEntropy,
    Margin,
}

/// Probability floor inside the cross-entropy logarithm.
pub const CROSS_ENTROPY_FLOOR: f64 = 1e-12;

/// Required gap `p_y − max_{j≠y} p_j` for a zero margin loss.
pub const MARGIN: f64 = 0.1;

impl LossKind {
    pub fn per_example(&self, probs: &[f64], label: usize) -> f64 {
        match self {
            LossKind::CrossEntropy => -probs[label].max(CROSS_ENTROPY_FLOOR).ln(),
            LossKind::Margin => {
                let best_other = probs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != label)
                    .map(|(_, p)| *p)
                    .fold(0.0, f64::max);
                (MARGIN - (probs[label] - best_other)).max(0.0)
            }
        }
    }
}

/// Labeled states ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    states: Vec<DensityOperator>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl EncodedDataset {
    pub fn new(examples: Vec<(DensityOperator, usize)>, num_classes: usize) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let dim = examples[0].0.dim();
        for (rho, y) in &examples {
            check_dim(dim, rho.dim())?;
            if *y >= num_classes {
                return Err(Error::InvalidDataset(format!("label {y} outside 0..{num_classes}")));
            }
        }
        let (states, labels) = examples.into_iter().unzip();
        Ok(Self {
            states,
            labels,
            num_classes,
        })
    }

    /// Encodes every feature vector of a classical dataset.
    pub fn encode(data: &LabeledDataset, encoder: &Encoder) -> Result<Self> {
        let examples = data
            .examples()
            .iter()
            .map(|(x, y)| Ok((encoder.encode(x)?, *y)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(examples, data.num_classes())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DensityOperator, usize)> {
        self.states.iter().zip(self.labels.iter().copied())
    }
}

fn check_classes(p: &ParametrizedPovm, data: &EncodedDataset) -> Result<()> {
    if data.num_classes != p.num_outcomes() {
        return Err(Error::ClassCountMismatch {
            data: data.num_classes,
            outcomes: p.num_outcomes(),
        });
    }
    Ok(())
}

/// Mean loss `(1/N) Σ ℓ(y, p(x; θ))`.
pub fn loss(p: &ParametrizedPovm, data: &EncodedDataset, theta: &[f64], kind: LossKind) -> Result<f64> {
    check_classes(p, data)?;
    let u = build_unitary(&p.ansatz, theta)?;
    let mut total = 0.0;
    for (rho, y) in data.iter() {
        let probs = probabilities_with_unitary(p, rho, &u)?;
        total += kind.per_example(probs.probabilities(), y);
    }
    Ok(total / data.len() as f64)
}

/// Central differences `(f(θ + h e_k) − f(θ − h e_k)) / 2h`.
pub fn finite_difference_gradient(
    f: impl Fn(&[f64]) -> Result<f64>,
    theta: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        probe[k] = theta[k] + h;
        let up = f(&probe)?;
        probe[k] = theta[k] - h;
        let down = f(&probe)?;
        probe[k] = theta[k];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub max_iters: usize,
    pub learning_rate: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub loss: LossKind,
    /// Stop once the best loss improves by less than this over 10 iterations.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Standard deviation of the seeded Gaussian initial angles; 0 starts at the template.
    #[serde(default)]
    pub init_scale: f64,
}

fn default_fd_step() -> f64 {
    1e-5
}

fn default_tolerance() -> f64 {
    1e-9
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            learning_rate: 0.5,
            fd_step: default_fd_step(),
            seed: 0,
            loss: LossKind::CrossEntropy,
            tolerance: default_tolerance(),
            init_scale: 0.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("learning_rate", self.learning_rate),
            ("fd_step", self.fd_step),
            ("tolerance", self.tolerance),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::ParameterOutOfRange { name, value });
            }
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "init_scale",
                value: self.init_scale,
            });
        }
        Ok(())
    }
}

/// Number of iterations over which the stopping rule measures improvement.
pub const PATIENCE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// Best-so-far loss after each iteration, starting with the initial loss.
    pub loss_trace: Vec<f64>,
    /// Loss at the iterate itself.
    pub current_loss_trace: Vec<f64>,
    pub best_theta: Vec<f64>,
    pub best_loss: f64,
    /// Mean probability of the correct outcome under `E(best_theta)`.
    pub final_accuracy: f64,
    /// Fraction of examples whose most probable outcome is the label.
    pub argmax_accuracy: f64,
    pub iters_run: usize,
    /// Worst `‖Σ E_j(θ) − I‖_F` over visited iterates.
    pub max_completeness_error: f64,
    /// Smallest effect eigenvalue over visited iterates.
    pub min_effect_eigenvalue: f64,
    /// Largest effect eigenvalue over visited iterates.
    pub max_effect_eigenvalue: f64,
}

struct ValidityLog {
    max_completeness_error: f64,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
}

impl ValidityLog {
    fn record(&mut self, p: &ParametrizedPovm, theta: &[f64]) -> Result<()> {
        let povm = effects_at(p, theta)?;
        self.max_completeness_error = self.max_completeness_error.max(povm.completeness_deviation());
        for e in povm.effects() {
            let eig = linalg::eig_hermitian(e.as_hermitian())?;
            self.min_eigenvalue = self.min_eigenvalue.min(eig.min());
            self.max_eigenvalue = self.max_eigenvalue.max(eig.max());
        }
        Ok(())
    }
}

pub fn train(p: &ParametrizedPovm, data: &EncodedDataset, cfg: &TrainingConfig) -> Result<TrainingReport> {
    cfg.validate()?;
    check_classes(p, data)?;
    check_dim(p.template.dim(), data.states[0].dim())?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut theta: Vec<f64> = (0..p.ansatz.num_params())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            cfg.init_scale * z
        })
        .collect();

    let objective = |t: &[f64]| loss(p, data, t, cfg.loss);
    let mut log = ValidityLog {
        max_completeness_error: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_eigenvalue: f64::NEG_INFINITY,
    };

    let mut current = objective(&theta)?;
    if !current.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }
    log.record(p, &theta)?;
    let mut best = current;
    let mut best_theta = theta.clone();
    let mut loss_trace = vec![best];
    let mut current_loss_trace = vec![current];

    let mut iters_run = 0;
    for iteration in 1..=cfg.max_iters {
        let grad = finite_difference_gradient(objective, &theta, cfg.fd_step)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration });
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= cfg.learning_rate * g;
        }
        current = objective(&theta)?;
        if !current.is_finite() {
            return Err(Error::NonFiniteLoss { iteration });
        }
        log.record(p, &theta)?;
        if current < best {
            best = current;
            best_theta.clone_from(&theta);
        }
        loss_trace.push(best);
        current_loss_trace.push(current);
        iters_run = iteration;
        if iteration >= PATIENCE && loss_trace[iteration - PATIENCE] - best < cfg.tolerance {
            break;
        }
    }

    let u = build_unitary(&p.ansatz, &best_theta)?;
    let mut success = 0.0;
    let mut correct = 0usize;
    for (rho, y) in data.iter() {
        let probs = probabilities_with_unitary(p, rho, &u)?;
        success += probs.probabilities()[y];
        if argmax(probs.probabilities()) == y {
            correct += 1;
        }
    }
    let n = data.len() as f64;
    Ok(TrainingReport {
        loss_trace,
        current_loss_trace,
        best_theta,
        best_loss: best,
        final_accuracy: success / n,
        argmax_accuracy: correct as f64 / n,
        iters_run,
        max_completeness_error: log.max_completeness_error,
        min_effect_eigenvalue: log.min_eigenvalue,
        max_effect_eigenvalue: log.max_eigenvalue,
    })
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = j;
        }
    }
    best
}
