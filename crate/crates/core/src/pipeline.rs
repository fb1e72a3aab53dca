//! Granular decision pipeline: encode, measure, decide.
//!
//! Classical inputs pass through fuzzy memberships and an encoder to a state;
//! quantum inputs are used directly. The state is measured exactly or with a
//! finite number of shots, and a decision rule maps the membership vector to
//! a label.

use serde::{Deserialize, Serialize};

use crate::encoding::{ClassicalGranule, Encoder, EncodingScheme, FeatureVector, LabeledDataset};
use crate::error::{check_dim, Error, Result};
use crate::granules::{EffectFamily, Povm};
use crate::helstrom::{self, BinaryHypothesis, SoftMemberships};
use crate::io::{AnsatzJson, EffectJson, StateJson};
use crate::measurement::{outcome_probabilities, sample_shots, OutcomeDistribution, ShotRecord};
use crate::states::DensityOperator;
use crate::vel::{self, argmax, ParametrizedPovm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionRule {
    Argmax,
    /// Binary: accept when the membership of `index` reaches `cutoff`.
    Threshold { index: usize, cutoff: f64 },
    /// Argmax over the pair `{E*, I − E*}`, also reporting soft memberships.
    HelstromBinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Class(usize),
    Verdict(Verdict),
}

impl DecisionRule {
    fn validate(&self, outcomes: usize) -> Result<()> {
        match *self {
            DecisionRule::Argmax => Ok(()),
            DecisionRule::Threshold { index, cutoff } => {
                if !(0.0..=1.0).contains(&cutoff) {
                    return Err(Error::ParameterOutOfRange { name: "cutoff", value: cutoff });
                }
                if outcomes != 2 || index >= 2 {
                    return Err(Error::InvalidConfig(format!(
                        "threshold rule needs a 2-outcome measurement and index < 2, got {outcomes} outcomes and index {index}"
                    )));
                }
                Ok(())
            }
            DecisionRule::HelstromBinary => {
                if outcomes != 2 {
                    return Err(Error::InvalidConfig(format!(
                        "helstrom_binary rule needs 2 outcomes, got {outcomes}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, memberships: &[f64]) -> Label {
        match *self {
            DecisionRule::Argmax | DecisionRule::HelstromBinary => Label::Class(argmax(memberships)),
            DecisionRule::Threshold { index, cutoff } => {
                if memberships[index] >= cutoff {
                    Label::Verdict(Verdict::Accept)
                } else {
                    Label::Verdict(Verdict::Reject)
                }
            }
        }
    }

    /// Outcome index a label stands for; accept means `index`, reject the other outcome.
    pub fn class_of(&self, label: Label) -> usize {
        match (label, *self) {
            (Label::Class(k), _) => k,
            (Label::Verdict(Verdict::Accept), DecisionRule::Threshold { index, .. }) => index,
            (Label::Verdict(Verdict::Reject), DecisionRule::Threshold { index, .. }) => 1 - index,
            (Label::Verdict(Verdict::Accept), _) => 0,
            (Label::Verdict(Verdict::Reject), _) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementSpec {
    Povm {
        effects: Vec<EffectJson>,
    },
    Parametrized {
        template: Vec<EffectJson>,
        ansatz: AnsatzJson,
        theta: Vec<f64>,
    },
    /// The decision pair `{E*, I − E*}` of a binary hypothesis.
    Helstrom {
        rho0: StateJson,
        rho1: StateJson,
        #[serde(default = "half")]
        pi0: f64,
        #[serde(default = "half")]
        pi1: f64,
    },
}

fn half() -> f64 {
    0.5
}

impl MeasurementSpec {
    pub fn resolve(&self) -> Result<Povm> {
        match self {
            MeasurementSpec::Povm { effects } => crate::io::povm_from_json(effects),
            MeasurementSpec::Parametrized { template, ansatz, theta } => {
                let p = ParametrizedPovm::new(crate::io::povm_from_json(template)?, ansatz.to_ansatz()?)?;
                vel::effects_at(&p, theta)
            }
            MeasurementSpec::Helstrom { rho0, rho1, pi0, pi1 } => {
                let h = BinaryHypothesis::new(rho0.to_density()?, rho1.to_density()?, *pi0, *pi1)?;
                Ok(helstrom_rule_from(&h)?.1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input_mode: InputMode,
    #[serde(default)]
    pub granules: Option<Vec<ClassicalGranule>>,
    #[serde(default)]
    pub encoder: Option<EncodingScheme>,
    pub measurement: MeasurementSpec,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    pub rule: DecisionRule,
}

/// A validated configuration with its measurement resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    mode: InputMode,
    encoder: Option<Encoder>,
    povm: Povm,
    shots: Option<u64>,
    seed: u64,
    rule: DecisionRule,
}

impl Pipeline {
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self> {
        Self::new(
            cfg.input_mode,
            match (cfg.input_mode, cfg.encoder) {
                (InputMode::Classical, Some(scheme)) => Some(Encoder::new(scheme, cfg.granules.clone())?),
                (InputMode::Classical, None) => {
                    return Err(Error::InvalidConfig("classical mode requires an encoder".into()))
                }
                (InputMode::Quantum, _) => None,
            },
            cfg.measurement.resolve()?,
            cfg.shots,
            cfg.seed,
            cfg.rule,
        )
    }

    pub fn new(
        mode: InputMode,
        encoder: Option<Encoder>,
        povm: Povm,
        shots: Option<u64>,
        seed: u64,
        rule: DecisionRule,
    ) -> Result<Self> {
        if mode == InputMode::Classical && encoder.is_none() {
            return Err(Error::InvalidConfig("classical mode requires an encoder".into()));
        }
        if shots == Some(0) {
            return Err(Error::ZeroShots);
        }
        rule.validate(povm.len())?;
        Ok(Self {
            mode,
            encoder: if mode == InputMode::Classical { encoder } else { None },
            povm,
            shots,
            seed,
            rule,
        })
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn rule(&self) -> DecisionRule {
        self.rule
    }

    pub fn mode(&self) -> InputMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn encoder(&self) -> Option<&Encoder> {
        self.encoder.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineInput {
    Features(FeatureVector),
    State(DensityOperator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: Label,
    /// Exact Born memberships, or empirical frequencies in shot mode.
    pub memberships: OutcomeDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot_record: Option<ShotRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soft_memberships: Option<SoftMemberships>,
}

/// Runs one input with the configured seed.
pub fn run(p: &Pipeline, input: &PipelineInput) -> Result<Decision> {
    run_seeded(p, input, p.seed)
}

pub fn run_seeded(p: &Pipeline, input: &PipelineInput, seed: u64) -> Result<Decision> {
    let encoded;
    let rho = match (p.mode, input) {
        (InputMode::Quantum, PipelineInput::State(rho)) => rho,
        (InputMode::Classical, PipelineInput::Features(x)) => {
            encoded = p.encoder.as_ref().expect("checked at construction").encode(x)?;
            &encoded
        }
        (InputMode::Quantum, PipelineInput::Features(_)) => {
            return Err(Error::ModeMismatch("quantum mode expects a state input".into()))
        }
        (InputMode::Classical, PipelineInput::State(_)) => {
            return Err(Error::ModeMismatch("classical mode expects a feature vector".into()))
        }
    };
    check_dim(p.povm.dim(), rho.dim())?;
    let exact = outcome_probabilities(rho, &p.povm)?;
    let soft_memberships = (p.rule == DecisionRule::HelstromBinary).then(|| SoftMemberships {
        mu0: exact.probabilities()[0],
        mu1: 1.0 - exact.probabilities()[0],
    });
    let (memberships, shot_record) = match p.shots {
        None => (exact, None),
        Some(n) => {
            let record = sample_shots(&exact, n, seed)?;
            (OutcomeDistribution::new(record.frequencies())?, Some(record))
        }
    };
    Ok(Decision {
        label: p.rule.apply(memberships.probabilities()),
        memberships,
        shot_record,
        soft_memberships,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Fraction of examples whose decided class equals the label.
    pub accuracy: f64,
    /// Mean membership of the true label, the per-shot success probability.
    pub success_rate: f64,
    /// Rows are true labels, columns predicted classes.
    pub confusion: Vec<Vec<u64>>,
    pub examples: usize,
}

/// Evaluates labeled inputs, seeding example `n` with `seed ^ n`.
pub fn evaluate_inputs(p: &Pipeline, data: &[(PipelineInput, usize)]) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = p.povm.len();
    let mut confusion = vec![vec![0u64; k]; k];
    let mut correct = 0usize;
    let mut success = 0.0;
    for (n, (input, y)) in data.iter().enumerate() {
        if *y >= k {
            return Err(Error::ClassCountMismatch { data: y + 1, outcomes: k });
        }
        let d = run_seeded(p, input, p.seed ^ n as u64)?;
        let predicted = p.rule.class_of(d.label);
        confusion[*y][predicted] += 1;
        if predicted == *y {
            correct += 1;
        }
        success += d.memberships.probabilities()[*y];
    }
    let total = data.len() as f64;
    Ok(Metrics {
        accuracy: correct as f64 / total,
        success_rate: success / total,
        confusion,
        examples: data.len(),
    })
}

pub fn evaluate(p: &Pipeline, data: &LabeledDataset) -> Result<Metrics> {
    if data.num_classes() != p.povm.len() {
        return Err(Error::ClassCountMismatch {
            data: data.num_classes(),
            outcomes: p.povm.len(),
        });
    }
    let inputs: Vec<_> = data
        .examples()
        .iter()
        .map(|(x, y)| (PipelineInput::Features(x.clone()), *y))
        .collect();
    evaluate_inputs(p, &inputs)
}

/// The Helstrom pair `{E*, I − E*}` with the matching rule.
pub fn helstrom_rule_from(h: &BinaryHypothesis) -> Result<(DecisionRule, Povm)> {
    let res = helstrom::solve(h)?;
    Ok((DecisionRule::HelstromBinary, res.decision_povm()))
}

/// Quantum-mode pipeline around a fixed measurement.
pub fn quantum_pipeline(povm: Povm, rule: DecisionRule, shots: Option<u64>, seed: u64) -> Result<Pipeline> {
    Pipeline::new(InputMode::Quantum, None, povm, shots, seed, rule)
}
