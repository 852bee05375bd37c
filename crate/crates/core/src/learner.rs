//! Two-class prototype learning on encoded windows.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hdc::{Accumulator, BitCounter, Hypervector, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    NonSeizure = 0,
    Seizure = 1,
}

impl Label {
    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::NonSeizure),
            1 => Ok(Label::Seizure),
            _ => Err(Error::invalid(format!("label must be 0 or 1, got {v}"))),
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn other(self) -> Self {
        match self {
            Label::NonSeizure => Label::Seizure,
            Label::Seizure => Label::NonSeizure,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    #[default]
    SinglePass,
    OnlineHd,
}

impl TrainMode {
    pub fn cli_name(self) -> &'static str {
        match self {
            TrainMode::SinglePass => "singlepass",
            TrainMode::OnlineHd => "onlinehd",
        }
    }
}

impl std::str::FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singlepass" => Ok(TrainMode::SinglePass),
            "onlinehd" => Ok(TrainMode::OnlineHd),
            _ => Err(Error::invalid(format!(
                "unknown training mode {s:?}; expected singlepass or onlinehd"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub mode: TrainMode,
    /// OnlineHD only; in `(0, 1]`.
    pub learning_rate: f64,
    pub epochs: usize,
    /// Seeds the tie-break vector used when binarizing class accumulators.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: TrainMode::SinglePass,
            learning_rate: 0.5,
            epochs: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be positive"));
        }
        if self.mode == TrainMode::OnlineHd
            && !(self.learning_rate > 0.0 && self.learning_rate <= 1.0)
        {
            return Err(Error::invalid(format!(
                "learning rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Accumulated prototype of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    pub label: Label,
    pub acc: Accumulator<f64>,
    pub hv: Hypervector,
    /// Windows presented to this class.
    pub count: u64,
}

/// Seizure and non-seizure prototypes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModels {
    pub seizure: ClassModel,
    pub nonseizure: ClassModel,
    pub config: TrainConfig,
    /// Fingerprint of the encoder the vectors came from, if known.
    pub encoder_hash: Option<u64>,
}

impl ClassModels {
    pub fn dim(&self) -> usize {
        self.seizure.hv.dim()
    }

    pub fn get(&self, label: Label) -> &ClassModel {
        match label {
            Label::Seizure => &self.seizure,
            Label::NonSeizure => &self.nonseizure,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub dist_s: f64,
    pub dist_ns: f64,
}

/// Nearest prototype by normalized Hamming distance; exact ties go to
/// non-seizure.
pub fn classify(x: &Hypervector, models: &ClassModels) -> Result<Classification> {
    classify_against(x, &models.seizure.hv, &models.nonseizure.hv)
}

pub fn classify_against(
    x: &Hypervector,
    seizure: &Hypervector,
    nonseizure: &Hypervector,
) -> Result<Classification> {
    let dist_s = x.hamming(seizure)?;
    let dist_ns = x.hamming(nonseizure)?;
    Ok(Classification {
        label: if dist_s < dist_ns {
            Label::Seizure
        } else {
            Label::NonSeizure
        },
        dist_s,
        dist_ns,
    })
}

pub fn train(vectors: &[Hypervector], labels: &[u8], cfg: &TrainConfig) -> Result<ClassModels> {
    cfg.validate()?;
    if vectors.is_empty() {
        return Err(Error::invalid("no training vectors"));
    }
    if vectors.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    let labels = labels
        .iter()
        .map(|&l| Label::from_u8(l))
        .collect::<Result<Vec<_>>>()?;
    if !labels.contains(&Label::Seizure) || !labels.contains(&Label::NonSeizure) {
        return Err(Error::TrainingDegenerate(
            "training data must contain both seizure and non-seizure windows".into(),
        ));
    }
    let dim = vectors[0].dim();
    if vectors.iter().any(|v| v.dim() != dim) {
        return Err(Error::invalid("training vectors differ in dimension"));
    }
    let tie = TieBreak::from_seed(cfg.seed, dim)?;
    match cfg.mode {
        TrainMode::SinglePass => single_pass(vectors, &labels, cfg, &tie),
        TrainMode::OnlineHd => online_hd(vectors, &labels, cfg, &tie),
    }
}

fn single_pass(
    vectors: &[Hypervector],
    labels: &[Label],
    cfg: &TrainConfig,
    tie: &TieBreak,
) -> Result<ClassModels> {
    let dim = vectors[0].dim();
    let build = |label: Label| -> Result<ClassModel> {
        let mut counter = BitCounter::new(dim)?;
        for _ in 0..cfg.epochs {
            for (v, _) in vectors.iter().zip(labels).filter(|(_, &l)| l == label) {
                counter.add(v)?;
            }
        }
        let n = counter.len();
        let counts = counter
            .counts()
            .into_iter()
            .map(|ones| 2.0 * ones as f64 - n as f64)
            .collect();
        let acc = Accumulator::from_parts(counts, n as f64)?;
        let hv = acc.threshold(tie)?;
        Ok(ClassModel {
            label,
            acc,
            hv,
            count: n as u64,
        })
    };
    Ok(ClassModels {
        seizure: build(Label::Seizure)?,
        nonseizure: build(Label::NonSeizure)?,
        config: cfg.clone(),
        encoder_hash: None,
    })
}

struct OnlineState {
    acc: Accumulator<f64>,
    hv: Option<Hypervector>,
    count: u64,
}

fn online_hd(
    vectors: &[Hypervector],
    labels: &[Label],
    cfg: &TrainConfig,
    tie: &TieBreak,
) -> Result<ClassModels> {
    let dim = vectors[0].dim();
    let lr = cfg.learning_rate;
    let mut state = [
        OnlineState {
            acc: Accumulator::new(dim)?,
            hv: None,
            count: 0,
        },
        OnlineState {
            acc: Accumulator::new(dim)?,
            hv: None,
            count: 0,
        },
    ];
    for _ in 0..cfg.epochs {
        for (x, &label) in vectors.iter().zip(labels) {
            let (ci, wi) = (label as usize, label.other() as usize);
            // an empty prototype has zero similarity to everything
            let s_correct = match &state[ci].hv {
                Some(hv) => 1.0 - x.hamming(hv)?,
                None => 0.0,
            };
            if state[ci].hv.is_some() {
                if let Some(wrong_hv) = &state[wi].hv {
                    let s_wrong = 1.0 - x.hamming(wrong_hv)?;
                    if s_wrong > s_correct {
                        let wrong = &mut state[wi];
                        wrong.acc.subtract(x, lr * (s_wrong - s_correct))?;
                        wrong.hv = Some(wrong.acc.threshold(tie)?);
                    }
                }
            }
            let correct = &mut state[ci];
            let w = lr * (1.0 - s_correct);
            if w > 0.0 {
                correct.acc.add(x, w)?;
                correct.hv = Some(correct.acc.threshold(tie)?);
            }
            correct.count += 1;
        }
    }
    let [ns, s] = state;
    let finish = |st: OnlineState, label: Label| -> Result<ClassModel> {
        let hv = st.hv.ok_or_else(|| {
            Error::TrainingDegenerate(format!("{label:?} prototype never received weight"))
        })?;
        Ok(ClassModel {
            label,
            acc: st.acc,
            hv,
            count: st.count,
        })
    };
    Ok(ClassModels {
        seizure: finish(s, Label::Seizure)?,
        nonseizure: finish(ns, Label::NonSeizure)?,
        config: cfg.clone(),
        encoder_hash: None,
    })
}

const MODEL_MAGIC: &[u8; 4] = b"HDMD";
const MODEL_VERSION: u16 = 1;

impl ClassModels {
    /// `HDMD` container: header, then per class (non-seizure, seizure) the
    /// absorbed count, weight total, f64 accumulator and packed prototype.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let dim = self.dim();
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&[match self.config.mode {
            TrainMode::SinglePass => 0,
            TrainMode::OnlineHd => 1,
        }])?;
        w.write_all(&(self.config.epochs as u32).to_le_bytes())?;
        w.write_all(&self.config.learning_rate.to_le_bytes())?;
        w.write_all(&self.config.seed.to_le_bytes())?;
        w.write_all(&self.encoder_hash.unwrap_or(0).to_le_bytes())?;
        w.write_all(&(dim as u32).to_le_bytes())?;
        for m in [&self.nonseizure, &self.seizure] {
            w.write_all(&m.count.to_le_bytes())?;
            w.write_all(&m.acc.weight_total().to_le_bytes())?;
            for c in m.acc.counts() {
                w.write_all(&c.to_le_bytes())?;
            }
            for word in m.hv.words() {
                w.write_all(&word.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a model; if `expected_hash` is given the stored encoder
    /// fingerprint must match it.
    pub fn read_from<R: Read>(mut r: R, expected_hash: Option<u64>) -> Result<Self> {
        let bad = |at: usize, msg: String| Error::parse("<model>", format!("byte {at}"), msg);
        let mut header = [0u8; 39];
        r.read_exact(&mut header).map_err(|e| bad(0, format!("short header: {e}")))?;
        if &header[..4] != MODEL_MAGIC {
            return Err(bad(0, "bad magic, expected HDMD".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != MODEL_VERSION {
            return Err(bad(4, format!("unsupported version {version}")));
        }
        let mode = match header[6] {
            0 => TrainMode::SinglePass,
            1 => TrainMode::OnlineHd,
            m => return Err(bad(6, format!("unknown training mode {m}"))),
        };
        let epochs = u32::from_le_bytes(header[7..11].try_into().unwrap()) as usize;
        let learning_rate = f64::from_le_bytes(header[11..19].try_into().unwrap());
        let seed = u64::from_le_bytes(header[19..27].try_into().unwrap());
        let hash = u64::from_le_bytes(header[27..35].try_into().unwrap());
        let dim = u32::from_le_bytes(header[35..39].try_into().unwrap()) as usize;
        if let Some(expected) = expected_hash {
            if expected != hash {
                return Err(Error::SchemeMismatch(format!(
                    "model was trained against encoder {hash:016x}, not {expected:016x}"
                )));
            }
        }
        if dim == 0 {
            return Err(bad(35, "zero dimension".into()));
        }
        let nwords = dim.div_ceil(64);
        let mut offset = 39;
        let mut read_class = |label: Label| -> Result<ClassModel> {
            let mut buf = vec![0u8; 16 + dim * 8 + nwords * 8];
            r.read_exact(&mut buf)
                .map_err(|e| bad(offset, format!("truncated {label:?} model: {e}")))?;
            offset += buf.len();
            let count = u64::from_le_bytes(buf[..8].try_into().unwrap());
            let weight_total = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            let counts = buf[16..16 + dim * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let words = buf[16 + dim * 8..]
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Ok(ClassModel {
                label,
                acc: Accumulator::from_parts(counts, weight_total)?,
                hv: Hypervector::from_words(dim, words)?,
                count,
            })
        };
        let nonseizure = read_class(Label::NonSeizure)?;
        let seizure = read_class(Label::Seizure)?;
        Ok(Self {
            seizure,
            nonseizure,
            config: TrainConfig {
                mode,
                learning_rate,
                epochs,
                seed,
            },
            encoder_hash: (hash != 0).then_some(hash),
        })
    }
}
