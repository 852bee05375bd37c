//! CSV tables of per-feature metrics, orderings and performance curves.

use super::selection::{PerFeatureMetrics, SelectionResult};
use crate::error::{Error, Result};

fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.6}")
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn row<I, S>(w: &mut csv::Writer<Vec<u8>>, fields: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).map_err(|e| Error::invalid(format!("csv: {e}")))
}

/// `feature,name,separability,confidence,f1e,f1d,f1de,js_divergence`.
pub fn per_feature_csv(metrics: &[PerFeatureMetrics], js: Option<&[f64]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    row(
        &mut w,
        ["feature", "name", "separability", "confidence", "f1e", "f1d", "f1de", "js_divergence"],
    )?;
    for (i, m) in metrics.iter().enumerate() {
        row(
            &mut w,
            [
                m.feature.to_string(),
                m.name.clone(),
                num(m.separability),
                num(m.confidence),
                num(m.perf.episode.f1),
                num(m.perf.duration.f1),
                num(m.perf.f1de_gmean),
                js.and_then(|j| j.get(i)).map_or(String::new(), |&v| num(v)),
            ],
        )?;
    }
    finish(w)
}

/// `rank,feature,name,chosen`.
pub fn ordering_csv(result: &SelectionResult, names: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    row(&mut w, ["rank", "feature", "name", "chosen"])?;
    for (rank, &f) in result.ordering.iter().enumerate() {
        row(
            &mut w,
            [
                (rank + 1).to_string(),
                f.to_string(),
                names.get(f).cloned().unwrap_or_default(),
                u8::from(rank < result.chosen_n).to_string(),
            ],
        )?;
    }
    finish(w)
}

/// `n,train_f1e,train_f1d,train_f1de,test_f1e,test_f1d,test_f1de`; test
/// columns are empty without a test curve.
pub fn curve_csv(result: &SelectionResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    row(
        &mut w,
        ["n", "train_f1e", "train_f1d", "train_f1de", "test_f1e", "test_f1d", "test_f1de"],
    )?;
    for (i, tr) in result.perf_curve_train.iter().enumerate() {
        let te = result.perf_curve_test.get(i);
        let t = |f: fn(&crate::evaluation::EvalReport) -> f64| te.map_or(String::new(), |r| num(f(r)));
        row(
            &mut w,
            [
                (i + 1).to_string(),
                num(tr.episode.f1),
                num(tr.duration.f1),
                num(tr.f1de_gmean),
                t(|r| r.episode.f1),
                t(|r| r.duration.f1),
                t(|r| r.f1de_gmean),
            ],
        )?;
    }
    finish(w)
}

/// Square matrix with a header row and a name column.
pub fn correlation_csv(matrix: &[Vec<f64>], names: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    row(&mut w, std::iter::once("feature".to_string()).chain(names.iter().cloned()))?;
    for (name, r) in names.iter().zip(matrix) {
        row(&mut w, std::iter::once(name.clone()).chain(r.iter().map(|&v| num(v))))?;
    }
    finish(w)
}
