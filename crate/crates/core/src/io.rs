//! JSON schemas for states, effects, measurements, channels and ansätze.
//!
//! Matrices are `{ "re": [[..]], "im": [[..]] }` with an optional `"dim"`;
//! `"im"` may be omitted for real matrices. State vectors are
//! `{ "amplitudes_re": [..], "amplitudes_im": [..] }`. Effects also accept the
//! qubit Bloch form `{ "alpha": a, "e": [ex, ey, ez] }`.

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::granules::{qubit_effect, Effect, EffectFamily, Povm, QubitEffectBloch};
use crate::linalg::{c, CMat, ComplexMatrix};
use crate::states::{pure_state, DensityOperator, StateVector};
use crate::vel::{Gate, UnitaryAnsatz};

/// Rounds to 12 significant digits and folds `-0.0` into `0.0`.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// 12-significant-digit text form used in CSV output.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 || (1e-6..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    /// Rounded to 12 significant digits; `im` is omitted when identically zero.
    pub fn from_matrix(m: &CMat, with_dim: bool) -> Self {
        let part = |f: fn(&crate::linalg::C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| round_sig(f(&m[(i, j)]))).collect())
                .collect()
        };
        let re = part(|z| z.re);
        let im = part(|z| z.im);
        let real = im.iter().flatten().all(|v| *v == 0.0);
        Self {
            dim: with_dim.then_some(m.nrows()),
            re,
            im: if real { Vec::new() } else { im },
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let rows = self.re.len();
        if rows == 0 {
            return Err(Error::Parse("matrix has no rows".into()));
        }
        let cols = self.re[0].len();
        if self.re.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged \"re\" rows".into()));
        }
        if !self.im.is_empty() && (self.im.len() != rows || self.im.iter().any(|r| r.len() != cols)) {
            return Err(Error::Parse(format!("\"im\" must be {rows}x{cols} like \"re\"")));
        }
        if let Some(d) = self.dim {
            if d != rows || d != cols {
                return Err(Error::Parse(format!("declared dim {d} but matrix is {rows}x{cols}")));
            }
        }
        let m = CMat::from_fn(rows, cols, |i, j| {
            c(self.re[i][j], self.im.get(i).map_or(0.0, |r| r[j]))
        });
        ComplexMatrix::from_matrix(m).map(ComplexMatrix::into_matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub amplitudes_re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub amplitudes_im: Vec<f64>,
}

impl VectorJson {
    pub fn to_state(&self) -> Result<StateVector> {
        if !self.amplitudes_im.is_empty() && self.amplitudes_im.len() != self.amplitudes_re.len() {
            return Err(Error::Parse("amplitudes_re and amplitudes_im differ in length".into()));
        }
        let amps = self
            .amplitudes_re
            .iter()
            .enumerate()
            .map(|(k, re)| c(*re, self.amplitudes_im.get(k).copied().unwrap_or(0.0)))
            .collect();
        StateVector::new(amps)
    }
}

/// A state given either as a vector or as a density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Vector(VectorJson),
    Density(MatrixJson),
}

impl StateJson {
    pub fn from_density(rho: &DensityOperator) -> Self {
        StateJson::Density(MatrixJson::from_matrix(rho.matrix(), true))
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        match self {
            StateJson::Vector(v) => Ok(pure_state(&v.to_state()?)),
            StateJson::Density(m) => DensityOperator::new(m.to_matrix()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EffectJson {
    Bloch(QubitEffectBloch),
    Matrix(MatrixJson),
}

impl EffectJson {
    pub fn from_effect(e: &Effect) -> Self {
        EffectJson::Matrix(MatrixJson::from_matrix(e.matrix(), true))
    }

    pub fn to_effect(&self) -> Result<Effect> {
        match self {
            EffectJson::Bloch(b) => {
                let b = QubitEffectBloch::new(b.alpha, b.e)?;
                Ok(qubit_effect(&b))
            }
            EffectJson::Matrix(m) => Effect::new(m.to_matrix()?),
        }
    }
}

pub fn povm_from_json(effects: &[EffectJson]) -> Result<Povm> {
    Povm::new(effects.iter().map(EffectJson::to_effect).collect::<Result<_>>()?)
}

pub fn povm_to_json(p: &Povm) -> Vec<EffectJson> {
    p.effects().iter().map(EffectJson::from_effect).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelJson {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: ch
                .kraus()
                .iter()
                .map(|k| MatrixJson::from_matrix(k.matrix(), false))
                .collect(),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        let kraus = self
            .kraus
            .iter()
            .map(|k| ComplexMatrix::from_matrix(k.to_matrix()?))
            .collect::<Result<Vec<_>>>()?;
        let ch = KrausChannel::new(kraus)?;
        if ch.dim_in() != self.dim_in || ch.dim_out() != self.dim_out {
            return Err(Error::InvalidChannel(format!(
                "declared {}->{} but Kraus operators map {}->{}",
                self.dim_in,
                self.dim_out,
                ch.dim_in(),
                ch.dim_out()
            )));
        }
        Ok(ch)
    }
}

/// `{ "qubits": n, "layers": l }`, optionally with an explicit per-layer gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzJson {
    pub qubits: usize,
    pub layers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<Vec<Gate>>,
}

impl AnsatzJson {
    pub fn to_ansatz(&self) -> Result<UnitaryAnsatz> {
        match &self.gates {
            Some(g) => UnitaryAnsatz::new(self.qubits, self.layers, g.clone()),
            None => UnitaryAnsatz::hardware_efficient(self.qubits, self.layers),
        }
    }
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::granules::membership;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(-0.0), 0.0);
        assert_eq!(round_sig(1e-17 - 1e-17), 0.0);
        assert_eq!(round_sig(0.883_022_221_559_489_1), 0.883_022_221_559);
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(3.749399456654644e-33), "3.74939945665e-33");
    }

    #[test]
    fn state_schemas() {
        let v: StateJson = parse_json(r#"{"amplitudes_re":[0.6,0.8]}"#).unwrap();
        let rho = v.to_density().unwrap();
        assert!((rho.matrix()[(1, 1)].re - 0.64).abs() < 1e-15);

        let d: StateJson = parse_json(r#"{"dim":2,"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}"#).unwrap();
        assert_eq!(d.to_density().unwrap(), DensityOperator::maximally_mixed(2));

        let round = StateJson::from_density(&rho);
        assert!((round.to_density().unwrap().matrix() - rho.matrix()).norm() < 1e-12);

        let bad: StateJson = parse_json(r#"{"dim":3,"re":[[1,0],[0,0]]}"#).unwrap();
        assert!(bad.to_density().is_err());
        let ragged: StateJson = parse_json(r#"{"re":[[1,0],[0]]}"#).unwrap();
        assert!(ragged.to_density().is_err());
    }

    #[test]
    fn effect_schemas() {
        let b: EffectJson = parse_json(r#"{"alpha":0.5,"e":[0,0,0.5]}"#).unwrap();
        let e = b.to_effect().unwrap();
        let m: EffectJson = parse_json(r#"{"re":[[1,0],[0,0]]}"#).unwrap();
        assert!((e.matrix() - m.to_effect().unwrap().matrix()).norm() < 1e-15);

        let too_big: EffectJson = parse_json(r#"{"alpha":0.5,"e":[0,0,0.6]}"#).unwrap();
        assert!(too_big.to_effect().is_err());

        let p: Vec<EffectJson> = parse_json(r#"[{"re":[[1,0],[0,0]]},{"re":[[0,0],[0,1]]}]"#).unwrap();
        let povm = povm_from_json(&p).unwrap();
        assert_eq!(povm.len(), 2);
        let rho = DensityOperator::maximally_mixed(2);
        assert_eq!(membership(&rho, &povm.effects()[1]).unwrap(), 0.5);
        let incomplete: Vec<EffectJson> = parse_json(r#"[{"re":[[1,0],[0,0]]}]"#).unwrap();
        assert!(povm_from_json(&incomplete).is_err());
    }

    #[test]
    fn channel_schema_round_trip() {
        let ch = crate::channels::amplitude_damping(0.5).unwrap();
        let j = ChannelJson::from_channel(&ch);
        let text = serde_json::to_string(&j).unwrap();
        let back: ChannelJson = parse_json(&text).unwrap();
        let ch2 = back.to_channel().unwrap();
        assert_eq!(ch2.kraus().len(), 2);

        let wrong = ChannelJson { dim_in: 3, ..j };
        assert!(wrong.to_channel().is_err());
    }

    #[test]
    fn ansatz_schema() {
        let a: AnsatzJson = parse_json(r#"{"qubits":2,"layers":1}"#).unwrap();
        assert_eq!(a.to_ansatz().unwrap().num_params(), 5);
        let g: AnsatzJson = parse_json(r#"{"qubits":1,"layers":2,"gates":[{"ry":0}]}"#).unwrap();
        assert_eq!(g.to_ansatz().unwrap().num_params(), 2);
    }
}
