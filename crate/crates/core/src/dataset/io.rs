//! Recording and annotation file formats.
//!
//! * `rawbin`: `"HDSG"`, version u16, sample rate f64, channel count u32,
//!   sample count u64, then per channel a u16 name length and UTF-8 name,
//!   then f32 samples channel by channel. Little-endian throughout.
//! * `csv`: header row of channel names, one row per sample; an optional
//!   leading `time`/`time_s` column is used to infer the sample rate.
//! * annotations: CSV lines `start_s,end_s`, optionally with that header.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::{Annotation, Recording, DEFAULT_WINDOW_S};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFormat {
    Csv,
    #[default]
    Rawbin,
}

impl SignalFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SignalFormat::Csv => "csv",
            SignalFormat::Rawbin => "bin",
        }
    }
}

const RAW_MAGIC: &[u8; 4] = b"HDSG";
const RAW_VERSION: u16 = 1;

/// Channel names, sample rate and samples as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSignal {
    pub sample_rate: f64,
    pub channels: Vec<String>,
    /// `data[channel][t]`.
    pub data: Vec<Vec<f32>>,
}

pub fn write_rawbin<T: Scalar>(rec: &Recording<T>, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(RAW_MAGIC).map_err(io)?;
    w.write_all(&RAW_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&rec.sample_rate().to_le_bytes()).map_err(io)?;
    w.write_all(&(rec.num_channels() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(rec.num_samples() as u64).to_le_bytes()).map_err(io)?;
    for name in rec.channels() {
        let bytes = name.as_bytes();
        let len = u16::try_from(bytes.len())
            .map_err(|_| Error::invalid(format!("channel name too long: {name}")))?;
        w.write_all(&len.to_le_bytes()).map_err(io)?;
        w.write_all(bytes).map_err(io)?;
    }
    for ch in rec.data() {
        for &v in ch {
            w.write_all(&(v.as_f64() as f32).to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::parse(
                self.path,
                format!("byte {}", self.pos),
                format!("truncated file while reading {what}"),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().unwrap())
    }
}

pub fn read_rawbin(path: &Path) -> Result<RawSignal> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut c = Cursor {
        bytes: &bytes,
        pos: 0,
        path,
    };
    if &c.array::<4>("magic")? != RAW_MAGIC {
        return Err(Error::parse(path, "byte 0", "bad magic, expected HDSG"));
    }
    let version = u16::from_le_bytes(c.array("version")?);
    if version != RAW_VERSION {
        return Err(Error::parse(path, "byte 4", format!("unsupported version {version}")));
    }
    let sample_rate = f64::from_le_bytes(c.array("sample rate")?);
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::parse(path, "byte 6", format!("invalid sample rate {sample_rate}")));
    }
    let num_ch = u32::from_le_bytes(c.array("channel count")?) as usize;
    if num_ch == 0 {
        return Err(Error::parse(path, "byte 14", "zero channels"));
    }
    let num_samples = u64::from_le_bytes(c.array("sample count")?) as usize;
    let mut channels = Vec::with_capacity(num_ch);
    for i in 0..num_ch {
        let at = c.pos;
        let len = u16::from_le_bytes(c.array("channel name length")?) as usize;
        let name = std::str::from_utf8(c.take(len, "channel name")?)
            .map_err(|_| Error::parse(path, format!("byte {at}"), format!("channel {i} name is not UTF-8")))?;
        channels.push(name.to_string());
    }
    let body = num_ch
        .checked_mul(num_samples)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::parse(path, "byte 14", "sample count overflows"))?;
    if bytes.len() - c.pos != body {
        return Err(Error::parse(
            path,
            format!("byte {}", c.pos),
            format!("expected {body} sample bytes, found {}", bytes.len() - c.pos),
        ));
    }
    let start = c.pos;
    let mut data = Vec::with_capacity(num_ch);
    for ch in 0..num_ch {
        let base = start + ch * num_samples * 4;
        let samples = bytes[base..base + num_samples * 4]
            .chunks_exact(4)
            .enumerate()
            .map(|(i, b)| {
                let v = f32::from_le_bytes(b.try_into().unwrap());
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::parse(
                        path,
                        format!("byte {}", base + i * 4),
                        format!("non-finite sample in channel {ch}"),
                    ))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        data.push(samples);
    }
    Ok(RawSignal {
        sample_rate,
        channels,
        data,
    })
}

pub fn write_csv_signal<T: Scalar>(rec: &Recording<T>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut header = vec!["time_s".to_string()];
    header.extend(rec.channels().iter().cloned());
    w.write_record(&header).map_err(|e| csv_io(path, e))?;
    let fs = rec.sample_rate();
    let mut row = Vec::with_capacity(header.len());
    for t in 0..rec.num_samples() {
        row.clear();
        row.push(format!("{}", t as f64 / fs));
        row.extend(rec.data().iter().map(|c| format!("{}", c[t].as_f64() as f32)));
        w.write_record(&row).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    let location = e
        .position()
        .map_or("start".to_string(), |p| format!("line {}", p.line()));
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::parse(path, location, e.to_string())
    }
}

fn is_time_column(name: &str) -> bool {
    matches!(name.trim().to_ascii_lowercase().as_str(), "time" | "time_s" | "t")
}

/// Reads a CSV signal. Without a time column `sample_rate` is required;
/// with one, it is inferred if not given.
pub fn read_csv_signal(path: &Path, sample_rate: Option<f64>) -> Result<RawSignal> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_io(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_io(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let has_time = header.first().is_some_and(|h| is_time_column(h));
    let channels: Vec<String> = header[usize::from(has_time)..].to_vec();
    if channels.is_empty() {
        return Err(Error::parse(path, "line 1", "no channel columns"));
    }
    let mut data = vec![Vec::new(); channels.len()];
    let mut times = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_io(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut fields = rec.iter();
        if has_time {
            let t = fields.next().unwrap_or("");
            times.push(t.parse::<f64>().map_err(|_| {
                Error::parse(path, format!("line {line}"), format!("invalid time {t:?}"))
            })?);
        }
        for (ch, field) in fields.enumerate() {
            let v: f32 = field.parse().map_err(|_| {
                Error::parse(path, format!("line {line}"), format!("invalid sample {field:?}"))
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path,
                    format!("line {line}"),
                    format!("non-finite sample in column {}", channels[ch]),
                ));
            }
            data[ch].push(v);
        }
    }
    let sample_rate = match (sample_rate, times.len()) {
        (Some(fs), _) => fs,
        (None, n) if n >= 2 => {
            let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
            if !(dt > 0.0) {
                return Err(Error::parse(path, "time column", "time is not increasing"));
            }
            1.0 / dt
        }
        _ => {
            return Err(Error::parse(
                path,
                "line 1",
                "sample rate unknown: no time column and none given",
            ))
        }
    };
    Ok(RawSignal {
        sample_rate,
        channels,
        data,
    })
}

pub fn write_annotations(path: &Path, annotations: &[Annotation]) -> Result<()> {
    let mut text = String::from("start_s,end_s\n");
    for a in annotations {
        text.push_str(&format!("{},{}\n", a.start_s, a.end_s));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses annotation lines; intervals must be increasing and disjoint.
pub fn read_annotations(path: &Path) -> Result<Vec<Annotation>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text, path)
}

pub(crate) fn parse_annotations(text: &str, path: &Path) -> Result<Vec<Annotation>> {
    let mut out: Vec<Annotation> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let nums: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        let here = || format!("line {line_no}");
        let nums = match nums {
            Some(n) if n.len() == 2 => n,
            None if out.is_empty() && i == 0 => continue, // header
            _ => {
                return Err(Error::parse(path, here(), format!("expected start_s,end_s, got {line:?}")))
            }
        };
        let a = Annotation::new(nums[0], nums[1]);
        if !(a.start_s.is_finite() && a.end_s.is_finite() && a.start_s >= 0.0) {
            return Err(Error::parse(path, here(), "annotation times must be finite and non-negative"));
        }
        if a.start_s >= a.end_s {
            return Err(Error::parse(
                path,
                here(),
                format!("start {} is not before end {}", a.start_s, a.end_s),
            ));
        }
        if let Some(prev) = out.last() {
            if a.start_s < prev.end_s {
                return Err(Error::parse(
                    path,
                    here(),
                    format!("annotation starting at {} overlaps or precedes the previous one", a.start_s),
                ));
            }
        }
        out.push(a);
    }
    Ok(out)
}

/// How to read a recording from disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub format: SignalFormat,
    /// Required for CSV files without a time column; checked against the
    /// file header otherwise.
    pub sample_rate: Option<f64>,
    /// Recordings shorter than this are rejected.
    pub min_duration_s: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            format: SignalFormat::Rawbin,
            sample_rate: None,
            min_duration_s: DEFAULT_WINDOW_S,
        }
    }
}

pub fn load_recording<T: Scalar>(
    signal_path: &Path,
    annotation_path: Option<&Path>,
    opts: &LoadOptions,
) -> Result<Recording<T>> {
    let raw = match opts.format {
        SignalFormat::Rawbin => {
            let raw = read_rawbin(signal_path)?;
            if let Some(fs) = opts.sample_rate {
                if (fs - raw.sample_rate).abs() > 1e-9 * fs {
                    return Err(Error::parse(
                        signal_path,
                        "byte 6",
                        format!("sample rate {} differs from expected {fs}", raw.sample_rate),
                    ));
                }
            }
            raw
        }
        SignalFormat::Csv => read_csv_signal(signal_path, opts.sample_rate)?,
    };
    let n = raw.data.first().map_or(0, Vec::len);
    let duration = n as f64 / raw.sample_rate;
    if duration < opts.min_duration_s {
        return Err(Error::DegenerateInput(format!(
            "{}: recording of {n} samples ({duration:.3} s) is shorter than one {} s analysis window",
            signal_path.display(),
            opts.min_duration_s
        )));
    }
    let annotations = match annotation_path {
        Some(p) => read_annotations(p)?,
        None => Vec::new(),
    };
    if let Some(a) = annotations.iter().find(|a| a.end_s > duration + 1e-9) {
        return Err(Error::parse(
            annotation_path.unwrap(),
            "annotations",
            format!("interval [{}, {}] exceeds the recording duration {duration} s", a.start_s, a.end_s),
        ));
    }
    let data = raw
        .data
        .into_iter()
        .map(|c| c.into_iter().map(|v| T::of_f64(v as f64)).collect())
        .collect();
    Recording::new(raw.sample_rate, raw.channels, data, annotations)
}

/// Writes the signal in `format` and, if given, the annotations.
pub fn save_recording<T: Scalar>(
    rec: &Recording<T>,
    signal_path: &Path,
    annotation_path: Option<&Path>,
    format: SignalFormat,
) -> Result<()> {
    match format {
        SignalFormat::Rawbin => write_rawbin(rec, signal_path)?,
        SignalFormat::Csv => write_csv_signal(rec, signal_path)?,
    }
    if let Some(p) = annotation_path {
        write_annotations(p, rec.annotations())?;
    }
    Ok(())
}
