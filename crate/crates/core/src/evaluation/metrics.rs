use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::labels::{runs_of_ones, LabelSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub truth_episodes: u64,
    pub pred_episodes: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

/// Sensitivity, predictivity and their geometric mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub tpr: f64,
    pub ppv: f64,
    pub f1: f64,
}

/// Rates whose denominator was empty (reported as 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degenerate {
    EpisodeTpr,
    EpisodePpv,
    DurationTpr,
    DurationPpv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episode: Rates,
    pub duration: Rates,
    pub f1de_gmean: f64,
    pub episode_counts: EpisodeCounts,
    pub window_counts: WindowCounts,
    pub degenerate: Vec<Degenerate>,
}

/// Metric used to rank features and choose subset sizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    F1e,
    F1d,
    #[default]
    F1de,
}

impl Metric {
    pub fn of(self, r: &EvalReport) -> f64 {
        match self {
            Metric::F1e => r.episode.f1,
            Metric::F1d => r.duration.f1,
            Metric::F1de => r.f1de_gmean,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::F1e => "f1e",
            Metric::F1d => "f1d",
            Metric::F1de => "f1de",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1e" => Ok(Metric::F1e),
            "f1d" => Ok(Metric::F1d),
            "f1de" => Ok(Metric::F1de),
            _ => Err(Error::invalid(format!("unknown metric {s:?} (f1e, f1d, f1de)"))),
        }
    }
}

fn check_pair(truth: &[u8], pred: &[u8]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(Error::invalid(format!(
            "truth has {} windows, prediction {}",
            truth.len(),
            pred.len()
        )));
    }
    Ok(())
}

/// A truth episode is detected if any predicted episode overlaps it; a
/// predicted episode overlapping no truth episode is one false positive.
pub fn episode_counts(truth: &[u8], pred: &[u8]) -> Result<EpisodeCounts> {
    check_pair(truth, pred)?;
    let t_runs = runs_of_ones(truth);
    let p_runs = runs_of_ones(pred);
    let overlaps = |(a0, a1): (usize, usize), (b0, b1): (usize, usize)| a0 < b1 && b0 < a1;
    let tp = t_runs
        .iter()
        .filter(|&&t| p_runs.iter().any(|&p| overlaps(t, p)))
        .count() as u64;
    let fp = p_runs
        .iter()
        .filter(|&&p| !t_runs.iter().any(|&t| overlaps(t, p)))
        .count() as u64;
    Ok(EpisodeCounts {
        tp,
        fp,
        fn_: t_runs.len() as u64 - tp,
        truth_episodes: t_runs.len() as u64,
        pred_episodes: p_runs.len() as u64,
    })
}

pub fn window_counts(truth: &[u8], pred: &[u8]) -> Result<WindowCounts> {
    check_pair(truth, pred)?;
    let mut c = WindowCounts::default();
    for (&t, &p) in truth.iter().zip(pred) {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (1, 0) => c.fn_ += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn episode_metrics(truth: &LabelSeries, pred: &LabelSeries) -> Result<EpisodeCounts> {
    check_steps(truth, pred)?;
    episode_counts(truth.labels(), pred.labels())
}

pub fn duration_metrics(truth: &LabelSeries, pred: &LabelSeries) -> Result<WindowCounts> {
    check_steps(truth, pred)?;
    window_counts(truth.labels(), pred.labels())
}

fn check_steps(truth: &LabelSeries, pred: &LabelSeries) -> Result<()> {
    if (truth.step_s() - pred.step_s()).abs() > 1e-12 {
        return Err(Error::invalid("truth and prediction use different steps"));
    }
    Ok(())
}

fn ratio(num: u64, den: u64, flag: Degenerate, flags: &mut Vec<Degenerate>) -> f64 {
    if den == 0 {
        flags.push(flag);
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn rates(tpr: f64, ppv: f64) -> Rates {
    Rates {
        tpr,
        ppv,
        f1: (tpr * ppv).sqrt(),
    }
}

impl EvalReport {
    pub fn from_counts(ep: EpisodeCounts, win: WindowCounts) -> Self {
        let mut flags = Vec::new();
        let episode = rates(
            ratio(ep.tp, ep.tp + ep.fn_, Degenerate::EpisodeTpr, &mut flags),
            ratio(ep.tp, ep.tp + ep.fp, Degenerate::EpisodePpv, &mut flags),
        );
        let duration = rates(
            ratio(win.tp, win.tp + win.fn_, Degenerate::DurationTpr, &mut flags),
            ratio(win.tp, win.tp + win.fp, Degenerate::DurationPpv, &mut flags),
        );
        Self {
            episode,
            duration,
            f1de_gmean: (episode.f1 * duration.f1).sqrt(),
            episode_counts: ep,
            window_counts: win,
            degenerate: flags,
        }
    }

    pub fn evaluate(truth: &[u8], pred: &[u8]) -> Result<Self> {
        Ok(Self::from_counts(
            episode_counts(truth, pred)?,
            window_counts(truth, pred)?,
        ))
    }

    /// Arithmetic mean of the rates; counts are summed and flags merged.
    pub fn mean(reports: &[EvalReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::invalid("no reports to average"));
        }
        let n = reports.len() as f64;
        let avg = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let mut ep = EpisodeCounts::default();
        let mut win = WindowCounts::default();
        let mut flags = Vec::new();
        for r in reports {
            ep.tp += r.episode_counts.tp;
            ep.fp += r.episode_counts.fp;
            ep.fn_ += r.episode_counts.fn_;
            ep.truth_episodes += r.episode_counts.truth_episodes;
            ep.pred_episodes += r.episode_counts.pred_episodes;
            win.tp += r.window_counts.tp;
            win.fp += r.window_counts.fp;
            win.fn_ += r.window_counts.fn_;
            win.tn += r.window_counts.tn;
            flags.extend_from_slice(&r.degenerate);
        }
        flags.sort();
        flags.dedup();
        Ok(Self {
            episode: Rates {
                tpr: avg(&|r| r.episode.tpr),
                ppv: avg(&|r| r.episode.ppv),
                f1: avg(&|r| r.episode.f1),
            },
            duration: Rates {
                tpr: avg(&|r| r.duration.tpr),
                ppv: avg(&|r| r.duration.ppv),
                f1: avg(&|r| r.duration.f1),
            },
            f1de_gmean: avg(&|r| r.f1de_gmean),
            episode_counts: ep,
            window_counts: win,
            degenerate: flags,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(s: &str) -> Vec<u8> {
        s.bytes().filter(|b| !b.is_ascii_whitespace()).map(|b| b - b'0').collect()
    }

    #[test]
    fn episode_examples() {
        let c = episode_counts(&lab("0011100"), &lab("0011100")).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_), (1, 0, 0));
        let c = episode_counts(&lab("0011100"), &lab("0000000")).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_), (0, 0, 1));
        let c = episode_counts(&lab("00111000"), &lab("00100001")).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_), (1, 1, 0));
    }

    #[test]
    fn duplicates_collapse() {
        let c = episode_counts(&lab("0111110"), &lab("0101010")).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.pred_episodes), (1, 0, 0, 3));
    }

    #[test]
    fn duration_example() {
        let c = window_counts(&lab("1100"), &lab("1010")).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1, 1, 1, 1));
        let r = EvalReport::from_counts(EpisodeCounts::default(), c);
        assert_eq!((r.duration.tpr, r.duration.ppv), (0.5, 0.5));
        assert!((r.duration.f1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominators_flagged() {
        let r = EvalReport::evaluate(&lab("0000"), &lab("0000")).unwrap();
        assert_eq!(r.f1de_gmean, 0.0);
        assert_eq!(r.degenerate.len(), 4);
        assert!(EvalReport::evaluate(&lab("01"), &lab("011")).is_err());
    }

    #[test]
    fn mean_is_arithmetic() {
        let a = EvalReport::evaluate(&lab("0110"), &lab("0110")).unwrap();
        let b = EvalReport::evaluate(&lab("0110"), &lab("0000")).unwrap();
        let m = EvalReport::mean(&[a, b]).unwrap();
        assert_eq!(m.f1de_gmean, 0.5);
        assert_eq!(m.window_counts.tp, 2);
        assert_eq!(m.degenerate, vec![Degenerate::EpisodePpv, Degenerate::DurationPpv]);
    }

    #[test]
    fn metric_names() {
        for m in [Metric::F1e, Metric::F1d, Metric::F1de] {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("auc".parse::<Metric>().is_err());
    }
}
