use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use qgc_core::case_studies;
use qgc_core::encoding::{ClassicalGranule, Encoder, EncodingScheme, FeatureVector, LabeledDataset};
use qgc_core::granules::{coarse_grain, Effect, EffectFamily, Povm, Pvm, QubitEffectBloch};
use qgc_core::helstrom::BinaryHypothesis;
use qgc_core::io::{parse_json, round_sig, AnsatzJson, ChannelJson, EffectJson, StateJson};
use qgc_core::pipeline::{self, InputMode, Pipeline, PipelineConfig, PipelineInput};
use qgc_core::vel::{self, EncodedDataset, LossKind, ParametrizedPovm, TrainingConfig};

const SEED_ENV: &str = "QGC_SEED";

#[derive(Parser)]
#[command(name = "qgc", version, about = "Quantum granular computing case studies and utilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Membership of pure qubit states over a (θ, φ) grid, as CSV.
    QubitSweep(QubitSweepArgs),
    /// Membership of mixed qubit states over a (‖r‖, angle) grid, as CSV.
    MixedSweep(MixedSweepArgs),
    /// Even/odd parity memberships of a two-qubit state.
    Parity(ParityArgs),
    /// Optimal binary decision granule for two states.
    Helstrom(HelstromArgs),
    /// Commutativity check and classical representation of an effect family.
    IslandCheck(IslandArgs),
    /// Compare channel-then-measure against measuring the dressed granule.
    ChannelDress(ChannelDressArgs),
    /// Train a variational POVM on a labeled dataset.
    VelTrain(VelTrainArgs),
    /// Run the decision pipeline on one input.
    PipelineRun(PipelineRunArgs),
    /// Evaluate the decision pipeline on a labeled dataset.
    PipelineEval(PipelineEvalArgs),
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QubitSweepArgs {
    #[arg(long, default_value_t = 181)]
    theta_steps: usize,
    #[arg(long, default_value_t = 36)]
    phi_steps: usize,
    /// Effect JSON (matrix or Bloch form); defaults to the projector selected by --projector.
    #[arg(long)]
    effect: Option<PathBuf>,
    /// Computational-basis projector P₀ or P₁.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    projector: u8,
    /// Print angles in radians instead of degrees.
    #[arg(long)]
    radians: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MixedSweepArgs {
    #[arg(long, default_value_t = 11)]
    r_steps: usize,
    #[arg(long, default_value_t = 19)]
    angle_steps: usize,
    /// Bloch-form effect JSON; defaults to P₀.
    #[arg(long)]
    effect: Option<PathBuf>,
    #[arg(long)]
    radians: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ParityArgs {
    /// Two-qubit state JSON.
    #[arg(long)]
    state: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct HelstromArgs {
    #[arg(long)]
    rho0: PathBuf,
    #[arg(long)]
    rho1: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pi0: f64,
    /// Defaults to 1 − pi0.
    #[arg(long)]
    pi1: Option<f64>,
    /// State whose soft memberships are reported; defaults to rho0.
    #[arg(long)]
    probe: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct IslandArgs {
    /// JSON array of effects.
    #[arg(long)]
    effects: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ChannelDressArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    effect: PathBuf,
    /// JSON array of states.
    #[arg(long)]
    states: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    CrossEntropy,
    Margin,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncoderArg {
    Amplitude,
    Angle,
}

impl From<EncoderArg> for EncodingScheme {
    fn from(e: EncoderArg) -> Self {
        match e {
            EncoderArg::Amplitude => EncodingScheme::Amplitude,
            EncoderArg::Angle => EncodingScheme::Angle,
        }
    }
}

#[derive(Args)]
struct VelTrainArgs {
    /// Dataset CSV: feature columns plus an integer `label` column.
    #[arg(long)]
    data: PathBuf,
    /// Classical granule-spec JSON; raw features are encoded when absent.
    #[arg(long)]
    granules: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "angle")]
    encoder: EncoderArg,
    /// Ansatz JSON `{ "qubits": n, "layers": l }`.
    #[arg(long)]
    ansatz: PathBuf,
    /// Template POVM JSON; defaults to computational basis states grouped by index mod class count.
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 0.5)]
    lr: f64,
    #[arg(long, default_value_t = 1e-5)]
    fd_step: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "cross-entropy")]
    loss: LossArg,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 0.0)]
    init_scale: f64,
    /// Loss-trace CSV destination.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PipelineRunArgs {
    #[arg(long)]
    config: PathBuf,
    /// State JSON (quantum mode).
    #[arg(long, conflicts_with = "row")]
    state: Option<PathBuf>,
    /// Comma-separated feature values (classical mode).
    #[arg(long, allow_hyphen_values = true)]
    row: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PipelineEvalArgs {
    #[arg(long)]
    config: PathBuf,
    /// Dataset CSV (classical mode).
    #[arg(long, conflicts_with = "states")]
    data: Option<PathBuf>,
    /// JSON array of `{ "state": ..., "label": k }` (quantum mode).
    #[arg(long)]
    states: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Confusion-matrix CSV destination.
    #[arg(long)]
    confusion: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let report = serde_json::json!({ "error": "usage", "message": e.to_string().trim_end() });
            eprintln!("{report}");
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = err
                .chain()
                .find_map(|e| e.downcast_ref::<qgc_core::Error>())
                .map_or("io", |e| e.kind());
            let report = serde_json::json!({ "error": kind, "message": format!("{err:#}") });
            eprintln!("{report}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::QubitSweep(a) => qubit_sweep(a),
        Command::MixedSweep(a) => mixed_sweep(a),
        Command::Parity(a) => {
            let rho = read_json::<StateJson>(&a.state)?.to_density()?;
            write_json(&a.output, &case_studies::parity_report(&rho)?)
        }
        Command::Helstrom(a) => helstrom(a),
        Command::IslandCheck(a) => {
            let effects = read_effects(&a.effects)?;
            write_json(&a.output, &case_studies::island_check(&effects)?)
        }
        Command::ChannelDress(a) => channel_dress(a),
        Command::VelTrain(a) => vel_train(a),
        Command::PipelineRun(a) => pipeline_run(a),
        Command::PipelineEval(a) => pipeline_eval(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_effects(path: &Path) -> Result<Vec<Effect>> {
    read_json::<Vec<EffectJson>>(path)?
        .iter()
        .map(|e| Ok(e.to_effect()?))
        .collect()
}

/// Flag, then config or environment fallback, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{SEED_ENV}={v:?} is not a seed"))?)),
        Err(_) => Ok(None),
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            if let Some(r) = serde_json::Number::from_f64(x) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn sink(output: &Output) -> Result<Box<dyn Write>> {
    Ok(match &output.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json_to(w: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    serde_json::to_writer_pretty(&mut *w, &v)?;
    writeln!(w)?;
    Ok(())
}

fn write_json(output: &Output, value: &impl Serialize) -> Result<()> {
    write_json_to(&mut *sink(output)?, value)
}

fn write_csv(w: Box<dyn Write>, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(row.iter().map(|x| qgc_core::io::fmt_sig(*x)))?;
    }
    wtr.flush()?;
    Ok(())
}

fn angle_out(x: f64, radians: bool) -> f64 {
    if radians {
        x
    } else {
        x.to_degrees()
    }
}

fn qubit_sweep(a: QubitSweepArgs) -> Result<()> {
    let e = match &a.effect {
        Some(p) => read_json::<EffectJson>(p)?.to_effect()?,
        None => Effect::basis_projector(2, a.projector as usize)?,
    };
    let rows = case_studies::qubit_sweep(a.theta_steps, a.phi_steps, &e)?;
    write_csv(
        sink(&a.output)?,
        &["theta", "phi", "membership"],
        rows.iter()
            .map(|r| vec![angle_out(r.theta, a.radians), angle_out(r.phi, a.radians), r.membership]),
    )
}

fn mixed_sweep(a: MixedSweepArgs) -> Result<()> {
    let e = match &a.effect {
        Some(p) => read_json::<QubitEffectBloch>(p)?,
        None => QubitEffectBloch::new(0.5, [0.0, 0.0, 0.5])?,
    };
    let rows = case_studies::mixed_sweep(a.r_steps, a.angle_steps, &e)?;
    write_csv(
        sink(&a.output)?,
        &["r", "angle", "membership"],
        rows.iter().map(|r| vec![r.r, angle_out(r.angle, a.radians), r.membership]),
    )
}

fn helstrom(a: HelstromArgs) -> Result<()> {
    let rho0 = read_json::<StateJson>(&a.rho0)?.to_density()?;
    let rho1 = read_json::<StateJson>(&a.rho1)?.to_density()?;
    let h = BinaryHypothesis::new(rho0, rho1, a.pi0, a.pi1.unwrap_or(1.0 - a.pi0))?;
    let probe = match &a.probe {
        Some(p) => Some(read_json::<StateJson>(p)?.to_density()?),
        None => None,
    };
    write_json(&a.output, &case_studies::helstrom_report(&h, probe.as_ref())?)
}

#[derive(Serialize)]
struct DressReport {
    rows: Vec<case_studies::DressRow>,
    max_difference: f64,
}

fn channel_dress(a: ChannelDressArgs) -> Result<()> {
    let ch = read_json::<ChannelJson>(&a.channel)?.to_channel()?;
    let e = read_json::<EffectJson>(&a.effect)?.to_effect()?;
    let states = read_json::<Vec<StateJson>>(&a.states)?
        .iter()
        .map(|s| Ok(s.to_density()?))
        .collect::<Result<Vec<_>>>()?;
    let rows = case_studies::channel_dress(&ch, &e, &states)?;
    let max_difference = rows.iter().map(|r| r.difference).fold(0.0, f64::max);
    write_json(&a.output, &DressReport { rows, max_difference })
}

/// Basis states `|k⟩` grouped into outcome `k mod classes`.
fn default_template(dim: usize, classes: usize) -> Result<Povm> {
    let basis = Pvm::computational(dim);
    let effects = (0..classes)
        .map(|j| {
            let idx: Vec<usize> = (j..dim).step_by(classes).collect();
            Ok(coarse_grain(&basis, &idx)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Povm::new(effects)?)
}

fn vel_train(a: VelTrainArgs) -> Result<()> {
    let data = LabeledDataset::from_csv(File::open(&a.data).with_context(|| format!("opening {}", a.data.display()))?, None)?;
    let granules = match &a.granules {
        Some(p) => Some(read_json::<Vec<ClassicalGranule>>(p)?),
        None => None,
    };
    let encoder = Encoder::new(a.encoder.into(), granules)?;
    let ansatz = read_json::<AnsatzJson>(&a.ansatz)?.to_ansatz()?;
    let template = match &a.template {
        Some(p) => qgc_core::io::povm_from_json(&read_json::<Vec<EffectJson>>(p)?)?,
        None => default_template(ansatz.dim(), data.num_classes())?,
    };
    let encoded = EncodedDataset::encode(&data, &encoder)?;
    let p = ParametrizedPovm::new(template, ansatz)?;
    let cfg = TrainingConfig {
        max_iters: a.iters,
        learning_rate: a.lr,
        fd_step: a.fd_step,
        seed: resolve_seed(a.seed)?.unwrap_or(0),
        loss: match a.loss {
            LossArg::CrossEntropy => LossKind::CrossEntropy,
            LossArg::Margin => LossKind::Margin,
        },
        tolerance: a.tolerance,
        init_scale: a.init_scale,
    };
    let report = vel::train(&p, &encoded, &cfg)?;
    if let Some(path) = &a.trace {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_csv(
            Box::new(file),
            &["iteration", "best_loss", "loss"],
            report
                .loss_trace
                .iter()
                .zip(&report.current_loss_trace)
                .enumerate()
                .map(|(k, (b, l))| vec![k as f64, *b, *l]),
        )?;
    }
    write_json(&a.output, &report)
}

fn load_pipeline(path: &Path, seed_flag: Option<u64>) -> Result<Pipeline> {
    let mut raw: Value = read_json(path)?;
    let explicit = raw.get("seed").is_some();
    if let Some(seed) = resolve_seed(seed_flag)? {
        if seed_flag.is_some() || !explicit {
            raw["seed"] = Value::from(seed);
        }
    }
    let cfg: PipelineConfig =
        serde_json::from_value(raw).map_err(|e| qgc_core::Error::Parse(e.to_string()))?;
    Ok(Pipeline::from_config(&cfg)?)
}

fn parse_row(row: &str) -> Result<FeatureVector> {
    let values = row
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| qgc_core::Error::Parse(format!("{s:?} is not a number"))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(FeatureVector::new(values)?)
}

fn pipeline_run(a: PipelineRunArgs) -> Result<()> {
    let p = load_pipeline(&a.config, a.seed)?;
    let input = match (&a.state, &a.row) {
        (Some(s), None) => PipelineInput::State(read_json::<StateJson>(s)?.to_density()?),
        (None, Some(r)) => PipelineInput::Features(parse_row(r)?),
        _ => return Err(qgc_core::Error::ModeMismatch("pass exactly one of --state or --row".into()).into()),
    };
    write_json(&a.output, &pipeline::run(&p, &input)?)
}

#[derive(Deserialize)]
struct LabeledState {
    state: StateJson,
    label: usize,
}

fn pipeline_eval(a: PipelineEvalArgs) -> Result<()> {
    let p = load_pipeline(&a.config, a.seed)?;
    let metrics = match (&a.data, &a.states) {
        (Some(d), None) => {
            if p.mode() != InputMode::Classical {
                return Err(qgc_core::Error::ModeMismatch("--data needs a classical-mode config".into()).into());
            }
            let data = LabeledDataset::from_csv(File::open(d).with_context(|| format!("opening {}", d.display()))?, Some(p.povm().len()))?;
            pipeline::evaluate(&p, &data)?
        }
        (None, Some(s)) => {
            let inputs = read_json::<Vec<LabeledState>>(s)?
                .into_iter()
                .map(|ls| Ok((PipelineInput::State(ls.state.to_density()?), ls.label)))
                .collect::<Result<Vec<_>>>()?;
            pipeline::evaluate_inputs(&p, &inputs)?
        }
        _ => return Err(qgc_core::Error::ModeMismatch("pass exactly one of --data or --states".into()).into()),
    };
    if let Some(path) = &a.confusion {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut wtr = csv::Writer::from_writer(file);
        let k = metrics.confusion.len();
        let mut header = vec!["true".to_string()];
        header.extend((0..k).map(|j| format!("pred_{j}")));
        wtr.write_record(&header)?;
        for (i, row) in metrics.confusion.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(row.iter().map(u64::to_string));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
    }
    write_json(&a.output, &metrics)
}
