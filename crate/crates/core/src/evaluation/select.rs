//! Per-seizure fold files: each seizure surrounded by randomly drawn
//! seizure-free data.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hdc::rng::{stream_rng, Stream};
use crate::scalar::Scalar;
use crate::signal::{Annotation, Recording};

/// Where a fold's samples came from, in source-recording indices and samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSource {
    pub seizure_recording: usize,
    pub seizure_index: usize,
    pub seizure_samples: (usize, usize),
    /// `(recording, start, end)` of the chunk placed before the seizure.
    pub before: Option<(usize, usize, usize)>,
    pub after: Option<(usize, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldFile<T> {
    pub recording: Recording<T>,
    pub source: FoldSource,
    /// No non-seizure data (ratio 0).
    pub degenerate: bool,
}

/// Builds one fold file per annotated seizure.
///
/// The seizure segment is kept whole; `ratio` times its length of
/// non-seizure data is taken as two contiguous chunks (half before, half
/// after) at random offsets in randomly chosen seizure-free recordings.
pub fn select_data<T: Scalar>(
    recordings: &[Recording<T>],
    ratio: f64,
    seed: u64,
) -> Result<Vec<FoldFile<T>>> {
    if !(ratio >= 0.0 && ratio.is_finite()) {
        return Err(Error::invalid(format!("ratio must be non-negative, got {ratio}")));
    }
    let Some(first) = recordings.first() else {
        return Err(Error::invalid("no recordings"));
    };
    let fs = first.sample_rate();
    if recordings
        .iter()
        .any(|r| r.sample_rate() != fs || r.channels() != first.channels())
    {
        return Err(Error::invalid(
            "recordings of one subject must share sample rate and channels",
        ));
    }
    let free: Vec<usize> = recordings
        .iter()
        .enumerate()
        .filter(|(_, r)| r.annotations().is_empty())
        .map(|(i, _)| i)
        .collect();

    let mut folds = Vec::new();
    for (ri, rec) in recordings.iter().enumerate() {
        for (si, ann) in rec.annotations().iter().enumerate() {
            let start = (ann.start_s * fs).round() as usize;
            let end = ((ann.end_s * fs).round() as usize).min(rec.num_samples());
            if end <= start {
                continue;
            }
            let fold_index = folds.len() as u64;
            let mut rng = stream_rng(seed, Stream::DataSelection, fold_index);
            let total = (ratio * (end - start) as f64).round() as usize;
            let lens = [total / 2, total - total / 2];
            let mut chunks = [None, None];
            for (slot, &len) in chunks.iter_mut().zip(&lens) {
                if len == 0 {
                    continue;
                }
                let eligible: Vec<usize> = free
                    .iter()
                    .copied()
                    .filter(|&i| recordings[i].num_samples() >= len)
                    .collect();
                if eligible.is_empty() {
                    let available = free
                        .iter()
                        .map(|&i| recordings[i].num_samples())
                        .max()
                        .unwrap_or(0);
                    return Err(Error::InsufficientData {
                        required_s: len as f64 / fs,
                        available_s: available as f64 / fs,
                    });
                }
                let src = eligible[rng.random_range(0..eligible.len())];
                let offset = rng.random_range(0..=recordings[src].num_samples() - len);
                *slot = Some((src, offset, offset + len));
            }

            let take = |c: Option<(usize, usize, usize)>, ch: usize| -> &[T] {
                c.map_or(&[][..], |(r, s, e)| &recordings[r].channel(ch)[s..e])
            };
            let data: Vec<Vec<T>> = (0..rec.num_channels())
                .map(|ch| {
                    let mut v = Vec::with_capacity(total + end - start);
                    v.extend_from_slice(take(chunks[0], ch));
                    v.extend_from_slice(&rec.channel(ch)[start..end]);
                    v.extend_from_slice(take(chunks[1], ch));
                    v
                })
                .collect();
            let before_s = lens[0] as f64 / fs;
            let annotation = Annotation::new(before_s, before_s + (end - start) as f64 / fs);
            folds.push(FoldFile {
                recording: Recording::new(
                    fs,
                    rec.channels().to_vec(),
                    data,
                    vec![annotation],
                )?,
                source: FoldSource {
                    seizure_recording: ri,
                    seizure_index: si,
                    seizure_samples: (start, end),
                    before: chunks[0],
                    after: chunks[1],
                },
                degenerate: total == 0,
            });
        }
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(secs: usize, fs: f64, ann: Vec<Annotation>, base: f64) -> Recording<f64> {
        let n = secs * fs as usize;
        let data = (0..2)
            .map(|c| (0..n).map(|i| base + c as f64 + i as f64 * 1e-3).collect())
            .collect();
        Recording::new(fs, vec!["a".into(), "b".into()], data, ann).unwrap()
    }

    fn subject() -> Vec<Recording<f64>> {
        vec![
            rec(200, 16.0, vec![Annotation::new(50.0, 110.0)], 0.0),
            rec(700, 16.0, vec![], 100.0),
            rec(100, 16.0, vec![Annotation::new(10.0, 20.0), Annotation::new(40.0, 45.0)], 200.0),
            rec(800, 16.0, vec![], 300.0),
        ]
    }

    #[test]
    fn fold_length_follows_ratio() {
        let folds = select_data(&subject(), 10.0, 1).unwrap();
        assert_eq!(folds.len(), 3);
        assert!((folds[0].recording.duration_s() - 660.0).abs() < 1e-9);
        let a = folds[0].recording.annotations()[0];
        assert!((a.start_s - 300.0).abs() < 1e-9 && (a.duration_s() - 60.0).abs() < 1e-9);
        assert_eq!(folds[1].recording.duration_s(), 110.0);
        assert!(folds.iter().all(|f| !f.degenerate));
    }

    #[test]
    fn seizure_samples_copied_verbatim() {
        let subj = subject();
        let folds = select_data(&subj, 2.0, 3).unwrap();
        let f = &folds[0];
        let (s, e) = f.source.seizure_samples;
        let a = f.recording.annotations()[0];
        let off = (a.start_s * 16.0).round() as usize;
        assert_eq!(&f.recording.channel(1)[off..off + e - s], &subj[0].channel(1)[s..e]);
        let (r, cs, ce) = f.source.before.unwrap();
        assert!(subj[r].annotations().is_empty());
        assert_eq!(&f.recording.channel(0)[..off], &subj[r].channel(0)[cs..ce]);
    }

    #[test]
    fn deterministic_per_seed() {
        let subj = subject();
        let a = select_data(&subj, 10.0, 9).unwrap();
        let b = select_data(&subj, 10.0, 9).unwrap();
        assert_eq!(a, b);
        let c = select_data(&subj, 10.0, 10).unwrap();
        assert_ne!(a[0].source, c[0].source);
    }

    #[test]
    fn ratio_zero_is_seizure_only() {
        let folds = select_data(&subject(), 0.0, 1).unwrap();
        assert!(folds.iter().all(|f| f.degenerate));
        assert_eq!(folds[0].recording.duration_s(), 60.0);
    }

    #[test]
    fn insufficient_data_reports_durations() {
        match select_data(&subject(), 30.0, 1) {
            Err(Error::InsufficientData {
                required_s,
                available_s,
            }) => {
                assert_eq!(required_s, 900.0);
                assert_eq!(available_s, 800.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
