//! Classical granulation and classical-to-quantum encodings.
//!
//! Feature vectors are first mapped to membership degrees by a list of
//! [`ClassicalGranule`]s, then embedded into a state either by amplitude
//! encoding (normalized memberships as amplitudes, padded to a power of two) or
//! angle encoding (one qubit per membership, `θ = π·μ`).

use std::io::Read;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::c;
use crate::states::{pure_qubit, pure_state, DensityOperator, StateVector};

/// A fuzzy membership function over one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalGranule {
    /// `exp(−(x − center)² / (2 width²))`.
    Gaussian {
        #[serde(default)]
        feature: usize,
        center: f64,
        width: f64,
    },
    /// Piecewise-linear hat on `[left, right]` peaking at `peak`.
    Triangular {
        #[serde(default)]
        feature: usize,
        left: f64,
        peak: f64,
        right: f64,
    },
    /// Linear interpolation through `(x, μ)` knots, clamped at the ends.
    Table {
        #[serde(default)]
        feature: usize,
        points: Vec<(f64, f64)>,
    },
}

impl ClassicalGranule {
    pub fn feature(&self) -> usize {
        match self {
            Self::Gaussian { feature, .. }
            | Self::Triangular { feature, .. }
            | Self::Table { feature, .. } => *feature,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { center, width, .. } => {
                if !center.is_finite() || !(*width > 0.0) || !width.is_finite() {
                    return Err(Error::InvalidGranule(format!(
                        "gaussian needs finite center and width > 0 (got {center}, {width})"
                    )));
                }
            }
            Self::Triangular { left, peak, right, .. } => {
                let finite = left.is_finite() && peak.is_finite() && right.is_finite();
                if !finite || left > peak || peak > right || left == right {
                    return Err(Error::InvalidGranule(format!(
                        "triangular knots must satisfy left <= peak <= right, left < right (got {left}, {peak}, {right})"
                    )));
                }
            }
            Self::Table { points, .. } => {
                if points.is_empty() {
                    return Err(Error::InvalidGranule("table has no points".into()));
                }
                for w in points.windows(2) {
                    if !(w[0].0 < w[1].0) {
                        return Err(Error::InvalidGranule(
                            "table abscissae must be strictly increasing".into(),
                        ));
                    }
                }
                if let Some((x, mu)) = points
                    .iter()
                    .find(|(x, mu)| !x.is_finite() || !(0.0..=1.0).contains(mu))
                {
                    return Err(Error::InvalidGranule(format!("table point ({x}, {mu}) invalid")));
                }
            }
        }
        Ok(())
    }

    /// Membership of a scalar value; assumes [`Self::validate`] passed.
    pub fn evaluate(&self, x: f64) -> f64 {
        let mu = match self {
            Self::Gaussian { center, width, .. } => {
                let z = (x - center) / width;
                (-0.5 * z * z).exp()
            }
            Self::Triangular { left, peak, right, .. } => {
                if x == *peak {
                    1.0
                } else if x < *peak {
                    if x <= *left { 0.0 } else { (x - left) / (peak - left) }
                } else if x >= *right {
                    0.0
                } else {
                    (right - x) / (right - peak)
                }
            }
            Self::Table { points, .. } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if x <= first.0 {
                    first.1
                } else if x >= last.0 {
                    last.1
                } else {
                    let k = points.partition_point(|p| p.0 <= x);
                    let (x0, y0) = points[k - 1];
                    let (x1, y1) = points[k];
                    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
                }
            }
        };
        mu.clamp(0.0, 1.0)
    }
}

/// A finite numerical feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(f: FeatureVector) -> Self {
        f.0
    }
}

/// Labeled examples with class indices in `0..num_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    examples: Vec<(FeatureVector, usize)>,
    num_classes: usize,
}

impl LabeledDataset {
    pub fn new(examples: Vec<(FeatureVector, usize)>, num_classes: usize) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if num_classes == 0 {
            return Err(Error::InvalidDataset("num_classes must be positive".into()));
        }
        if let Some((_, y)) = examples.iter().find(|(_, y)| *y >= num_classes) {
            return Err(Error::InvalidDataset(format!(
                "label {y} outside 0..{num_classes}"
            )));
        }
        Ok(Self {
            examples,
            num_classes,
        })
    }

    /// Reads CSV with a header row: feature columns followed by an integer
    /// `label` column (the column named `label`, else the last column).
    /// The class count is `max(label) + 1` unless `num_classes` is given.
    pub fn from_csv<R: Read>(reader: R, num_classes: Option<usize>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if headers.is_empty() {
            return Err(Error::InvalidDataset("no columns".into()));
        }
        let label_col = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case("label"))
            .unwrap_or(headers.len() - 1);
        let mut examples = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            let mut features = Vec::with_capacity(record.len().saturating_sub(1));
            let mut label = None;
            for (col, field) in record.iter().enumerate() {
                if col == label_col {
                    label = Some(field.parse::<usize>().map_err(|_| {
                        Error::Parse(format!("row {}: label {field:?} is not a class index", row + 1))
                    })?);
                } else {
                    features.push(field.parse::<f64>().map_err(|_| {
                        Error::Parse(format!("row {}: feature {field:?} is not a number", row + 1))
                    })?);
                }
            }
            let label = label.ok_or_else(|| Error::Parse(format!("row {} has no label", row + 1)))?;
            examples.push((FeatureVector::new(features)?, label));
        }
        let inferred = examples.iter().map(|(_, y)| y + 1).max().unwrap_or(0);
        Self::new(examples, num_classes.unwrap_or(inferred))
    }

    pub fn examples(&self) -> &[(FeatureVector, usize)] {
        &self.examples
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// `μ_i(x)` for each granule, evaluated on the granule's feature.
pub fn classical_memberships(x: &FeatureVector, granules: &[ClassicalGranule]) -> Result<Vec<f64>> {
    granules
        .iter()
        .map(|g| {
            g.validate()?;
            let value = x.values().get(g.feature()).ok_or_else(|| {
                Error::InvalidGranule(format!(
                    "feature index {} out of range for {} features",
                    g.feature(),
                    x.values().len()
                ))
            })?;
            Ok(g.evaluate(*value))
        })
        .collect()
}

/// Amplitudes `μ/√Σμ²`, zero-padded to the next power of two (at least 2).
pub fn amplitude_encode(weights: &[f64]) -> Result<StateVector> {
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or non-finite")));
    }
    let z: f64 = weights.iter().map(|w| w * w).sum();
    if !(z > 0.0) {
        return Err(Error::DegenerateEncoding);
    }
    let dim = weights.len().next_power_of_two().max(2);
    let norm = z.sqrt();
    let mut amps = vec![c(0.0, 0.0); dim];
    for (a, w) in amps.iter_mut().zip(weights) {
        *a = c(w / norm, 0.0);
    }
    StateVector::new(amps)
}

/// Product state `⊗_i (cos(πμ_i/2)|0⟩ + sin(πμ_i/2)|1⟩)`; the first membership is
/// the most significant qubit.
pub fn angle_encode(memberships: &[f64]) -> Result<StateVector> {
    if memberships.is_empty() {
        return Err(Error::InvalidWeights("no memberships to encode".into()));
    }
    let mut state: Option<StateVector> = None;
    for &mu in memberships {
        if !mu.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&mu) {
            return Err(Error::InvalidMembership { value: mu });
        }
        let qubit = pure_qubit(PI * mu.clamp(0.0, 1.0), 0.0);
        state = Some(match state {
            None => qubit,
            Some(s) => s.tensor(&qubit),
        });
    }
    Ok(state.expect("nonempty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    Amplitude,
    Angle,
}

/// Granulation followed by a quantum encoding. Without granules the raw feature
/// values are encoded directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    #[serde(default)]
    pub granules: Option<Vec<ClassicalGranule>>,
    pub scheme: EncodingScheme,
}

impl Encoder {
    pub fn new(scheme: EncodingScheme, granules: Option<Vec<ClassicalGranule>>) -> Result<Self> {
        if let Some(gs) = &granules {
            if gs.is_empty() {
                return Err(Error::InvalidGranule("empty granule list".into()));
            }
            for g in gs {
                g.validate()?;
            }
        }
        Ok(Self { granules, scheme })
    }

    pub fn memberships(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        match &self.granules {
            Some(gs) => classical_memberships(x, gs),
            None => Ok(x.values().to_vec()),
        }
    }

    pub fn encode_vector(&self, x: &FeatureVector) -> Result<StateVector> {
        let mu = self.memberships(x)?;
        match self.scheme {
            EncodingScheme::Amplitude => amplitude_encode(&mu),
            EncodingScheme::Angle => angle_encode(&mu),
        }
    }

    pub fn encode(&self, x: &FeatureVector) -> Result<DensityOperator> {
        Ok(pure_state(&self.encode_vector(x)?))
    }
}
