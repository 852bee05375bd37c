//! Synthetic EEG-like recordings with planted seizure effects.
//!
//! Background is pink (1/f) noise per channel. During a seizure the
//! informative channels are scaled and/or receive a sinusoid. Optional
//! artifacts apply the same effects to random non-informative channels at
//! a rate independent of the seizure state, so that only models which know
//! *which* channels changed can tell seizures from artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::io::{save_recording, SignalFormat};
use super::manifest::{DatasetManifest, RecordingEntry, SubjectEntry};
use crate::error::{Error, Result};
use crate::hdc::rng::{stream_rng, Stream};
use crate::signal::{Annotation, Recording};

/// A change applied to a channel while an event is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Effect {
    /// Multiplies the background.
    Amplitude { scale: f64 },
    /// Adds a sinusoid with amplitude relative to the background level.
    Sine { freq_hz: f64, amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactSpec {
    /// Expected events per minute in every file.
    pub rate_per_min: f64,
    pub len_s: (f64, f64),
    /// Non-informative channels affected per event.
    pub num_channels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub num_subjects: usize,
    pub num_channels: usize,
    pub sample_rate: f64,
    /// Each seizure file holds exactly one seizure.
    pub num_seizure_files: usize,
    pub seizure_file_duration_s: f64,
    pub num_free_files: usize,
    pub free_file_duration_s: f64,
    pub seizure_len_s: (f64, f64),
    pub effects: Vec<Effect>,
    pub informative_channels: Vec<usize>,
    pub artifacts: Option<ArtifactSpec>,
    /// Background level (standard deviation of the pink noise).
    pub background_std: f64,
    /// Permits an empty effect list (a chance-level control).
    pub allow_null: bool,
    pub format: SignalFormat,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            num_subjects: 1,
            num_channels: 18,
            sample_rate: 256.0,
            num_seizure_files: 5,
            seizure_file_duration_s: 240.0,
            num_free_files: 3,
            free_file_duration_s: 600.0,
            seizure_len_s: (20.0, 40.0),
            effects: vec![
                Effect::Amplitude { scale: 3.0 },
                Effect::Sine {
                    freq_hz: 5.0,
                    amplitude: 1.0,
                },
            ],
            informative_channels: vec![2, 7, 12],
            artifacts: Some(ArtifactSpec {
                rate_per_min: 0.5,
                len_s: (5.0, 15.0),
                num_channels: 3,
            }),
            background_std: 20.0,
            allow_null: false,
            format: SignalFormat::Rawbin,
            seed: 1,
        }
    }
}

/// Margin kept free of seizures at both ends of a seizure file.
const EDGE_MARGIN_S: f64 = 20.0;

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.effects.is_empty() && !self.allow_null {
            return bad("no planted effects: the dataset would be unlearnable (set allow_null for a control)".into());
        }
        if self.num_subjects == 0 || self.num_channels == 0 {
            return bad("need at least one subject and one channel".into());
        }
        if !(self.sample_rate > 0.0) || !(self.background_std > 0.0) {
            return bad("sample rate and background level must be positive".into());
        }
        let (lo, hi) = self.seizure_len_s;
        if !(lo > 0.0 && lo <= hi) {
            return bad(format!("invalid seizure length range [{lo}, {hi}]"));
        }
        if self.seizure_file_duration_s < hi + 2.0 * EDGE_MARGIN_S {
            return bad(format!(
                "seizure files of {} s cannot hold a {hi} s seizure with {EDGE_MARGIN_S} s margins",
                self.seizure_file_duration_s
            ));
        }
        if self.num_free_files > 0 && !(self.free_file_duration_s > 0.0) {
            return bad("seizure-free file duration must be positive".into());
        }
        if let Some(&c) = self.informative_channels.iter().find(|&&c| c >= self.num_channels) {
            return bad(format!("informative channel {c} out of range"));
        }
        for e in &self.effects {
            match *e {
                Effect::Amplitude { scale } if !(scale > 0.0) => {
                    return bad(format!("amplitude scale {scale} must be positive"))
                }
                Effect::Sine { freq_hz, .. }
                    if !(freq_hz > 0.0 && freq_hz < self.sample_rate / 2.0) =>
                {
                    return bad(format!("sine frequency {freq_hz} Hz outside (0, Nyquist)"))
                }
                _ => {}
            }
        }
        if let Some(a) = &self.artifacts {
            let free = self.num_channels - self.informative_channels.len();
            if a.num_channels > free {
                return bad(format!(
                    "artifacts need {} non-informative channels, only {free} exist",
                    a.num_channels
                ));
            }
            if !(a.rate_per_min >= 0.0 && a.len_s.0 > 0.0 && a.len_s.0 <= a.len_s.1) {
                return bad("invalid artifact rate or length range".into());
            }
        }
        Ok(())
    }

    pub fn channel_names(&self) -> Vec<String> {
        (0..self.num_channels).map(|c| format!("ch{c:02}")).collect()
    }

    pub fn subject_id(&self, subject: usize) -> String {
        format!("s{:02}", subject + 1)
    }
}

fn pink_noise<R: Rng>(rng: &mut R, n: usize, std: f64) -> Vec<f64> {
    // Kellet's three-pole approximation of a 1/f spectrum
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    let scale = std / 3.0;
    let warmup = 2048;
    let mut out = Vec::with_capacity(n);
    for i in 0..n + warmup {
        let w: f64 = StandardNormal.sample(rng);
        b0 = 0.99765 * b0 + w * 0.099_046;
        b1 = 0.96300 * b1 + w * 0.296_516_4;
        b2 = 0.57000 * b2 + w * 1.052_691_3;
        if i >= warmup {
            out.push((b0 + b1 + b2 + w * 0.1848) * scale);
        }
    }
    out
}

fn apply_effects(x: &mut [f64], range: (usize, usize), effects: &[Effect], fs: f64, level: f64, phase: f64) {
    let (s, e) = range;
    for (i, v) in x[s..e].iter_mut().enumerate() {
        let t = (s + i) as f64 / fs;
        for eff in effects {
            match *eff {
                Effect::Amplitude { scale } => *v *= scale,
                Effect::Sine { freq_hz, amplitude } => {
                    *v += amplitude * level * (2.0 * std::f64::consts::PI * freq_hz * t + phase).sin()
                }
            }
        }
    }
}

fn stream_index(subject: usize, file: usize, slot: usize) -> u64 {
    ((subject as u64) << 32) | ((file as u64) << 16) | slot as u64
}

/// Recordings of one subject: seizure files first, then seizure-free files.
/// Samples are rounded to f32 so they survive storage unchanged.
pub fn synthesize_subject(spec: &SynthSpec, subject: usize) -> Result<Vec<Recording<f64>>> {
    spec.validate()?;
    let fs = spec.sample_rate;
    let names = spec.channel_names();
    let informative = &spec.informative_channels;
    let others: Vec<usize> = (0..spec.num_channels).filter(|c| !informative.contains(c)).collect();
    let files = spec.num_seizure_files + spec.num_free_files;
    (0..files)
        .map(|file| {
            let has_seizure = file < spec.num_seizure_files;
            let dur = if has_seizure {
                spec.seizure_file_duration_s
            } else {
                spec.free_file_duration_s
            };
            let n = (dur * fs).round() as usize;
            let mut layout = stream_rng(spec.seed, Stream::Synthesis, stream_index(subject, file, 0xffff));
            let gains: Vec<f64> = (0..spec.num_channels).map(|_| layout.random_range(0.8..1.2)).collect();
            let phases: Vec<f64> = (0..spec.num_channels)
                .map(|_| layout.random_range(0.0..std::f64::consts::TAU))
                .collect();

            let mut annotations = Vec::new();
            // (sample range, channels) of every event
            let mut events: Vec<((usize, usize), Vec<usize>)> = Vec::new();
            if has_seizure {
                let (lo, hi) = spec.seizure_len_s;
                let len = if hi > lo { layout.random_range(lo..hi) } else { lo };
                let len = (len * fs).round() / fs;
                let start = layout.random_range(EDGE_MARGIN_S..dur - EDGE_MARGIN_S - len);
                let start = (start * fs).round() / fs;
                annotations.push(Annotation::new(start, start + len));
                let range = ((start * fs).round() as usize, ((start + len) * fs).round() as usize);
                events.push((range, informative.clone()));
            }
            if let Some(a) = &spec.artifacts {
                let count = (a.rate_per_min * dur / 60.0).round() as usize;
                for _ in 0..count {
                    let len = if a.len_s.1 > a.len_s.0 {
                        layout.random_range(a.len_s.0..a.len_s.1)
                    } else {
                        a.len_s.0
                    };
                    let len_n = ((len * fs).round() as usize).min(n);
                    let start = layout.random_range(0..=n - len_n);
                    let chans = sample(&mut layout, others.len(), a.num_channels)
                        .into_iter()
                        .map(|i| others[i])
                        .collect();
                    events.push(((start, start + len_n), chans));
                }
            }

            let data: Vec<Vec<f64>> = (0..spec.num_channels)
                .map(|c| {
                    let mut rng = stream_rng(spec.seed, Stream::Synthesis, stream_index(subject, file, c));
                    let level = spec.background_std * gains[c];
                    let mut x = pink_noise(&mut rng, n, level);
                    for (range, chans) in &events {
                        if chans.contains(&c) {
                            apply_effects(&mut x, *range, &spec.effects, fs, level, phases[c]);
                        }
                    }
                    x.into_iter().map(|v| v as f32 as f64).collect()
                })
                .collect();
            Recording::new(fs, names.clone(), data, annotations)
        })
        .collect()
}

/// Writes every subject's recordings, annotation files, the spec and a
/// manifest (`manifest.json`) under `out_dir`.
pub fn generate_synthetic(spec: &SynthSpec, out_dir: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut subjects = Vec::with_capacity(spec.num_subjects);
    for s in 0..spec.num_subjects {
        let id = spec.subject_id(s);
        let dir = out_dir.join(&id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let recs = synthesize_subject(spec, s)?;
        let mut entries = Vec::with_capacity(recs.len());
        for (k, rec) in recs.iter().enumerate() {
            let stem = format!("{id}_{k:02}");
            let sig = PathBuf::from(&id).join(format!("{stem}.{}", spec.format.extension()));
            let ann = PathBuf::from(&id).join(format!("{stem}.annotations.csv"));
            save_recording(rec, &out_dir.join(&sig), Some(&out_dir.join(&ann)), spec.format)?;
            entries.push(RecordingEntry {
                signal_path: sig,
                annotation_path: Some(ann),
                sample_rate: rec.sample_rate(),
                channel_names: rec.channels().to_vec(),
            });
        }
        subjects.push(SubjectEntry {
            id,
            recordings: entries,
        });
    }
    let manifest = DatasetManifest::new(spec.format, subjects).with_base_dir(out_dir);
    manifest.save(&out_dir.join("manifest.json"))?;
    let spec_path = out_dir.join("synth_spec.json");
    fs::write(&spec_path, serde_json::to_string_pretty(spec)? + "\n")
        .map_err(|e| Error::io(&spec_path, e))?;
    Ok(manifest)
}
