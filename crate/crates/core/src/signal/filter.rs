//! Zero-phase Butterworth band-pass filtering.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::recording::Recording;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Second-order section `b0 + b1 z^-1 + b2 z^-2 / 1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad<T> {
    pub b: [T; 3],
    pub a: [T; 2],
}

impl<T: Scalar> Biquad<T> {
    fn dc_gain(&self) -> T {
        let num = self.b[0] + self.b[1] + self.b[2];
        let den = T::one() + self.a[0] + self.a[1];
        num / den
    }

    /// Transposed direct form II over `x` in place, starting from `state`.
    fn run(&self, x: &mut [T], mut state: [T; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + state[0];
            state[0] = b1 * input - a1 * y + state[1];
            state[1] = b2 * input - a2 * y;
            *v = y;
        }
    }
}

/// Digital Butterworth band-pass as a cascade of biquads.
///
/// `order` is the order of the low-pass prototype, so the band-pass has
/// `order` sections and `2 * order` poles.
#[derive(Debug, Clone, PartialEq)]
pub struct Bandpass<T> {
    sections: Vec<Biquad<T>>,
    sample_rate: f64,
    low_hz: f64,
    high_hz: f64,
}

impl<T: Scalar> Bandpass<T> {
    pub fn design(low_hz: f64, high_hz: f64, order: usize, sample_rate: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("filter order must be positive"));
        }
        if !(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate / 2.0) {
            return Err(Error::invalid(format!(
                "band [{low_hz}, {high_hz}] Hz invalid for sample rate {sample_rate} Hz"
            )));
        }
        let fs2 = 2.0 * sample_rate;
        let warp = |f: f64| fs2 * (PI * f / sample_rate).tan();
        let (wl, wh) = (warp(low_hz), warp(high_hz));
        let bw = wh - wl;
        let w0 = (wl * wh).sqrt();

        let mut poles = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta);
            let half = p * (bw / 2.0);
            let root = (half * half - w0 * w0).sqrt();
            for s in [half + root, half - root] {
                poles.push((fs2 + s) / (fs2 - s));
            }
        }

        let tol = 1e-10;
        let mut denominators: Vec<[f64; 2]> = poles
            .iter()
            .filter(|z| z.im > tol)
            .map(|z| [-2.0 * z.re, z.norm_sqr()])
            .collect();
        let mut real: Vec<f64> = poles.iter().filter(|z| z.im.abs() <= tol).map(|z| z.re).collect();
        real.sort_by(f64::total_cmp);
        for pair in real.chunks(2) {
            match pair {
                [a, b] => denominators.push([-(a + b), a * b]),
                _ => return Err(Error::invalid("unpaired real pole in filter design")),
            }
        }
        if denominators.len() != order {
            return Err(Error::invalid("filter design produced an unexpected pole count"));
        }

        // each section carries one zero at z = 1 and one at z = -1
        let mut sections: Vec<[f64; 5]> =
            denominators.iter().map(|a| [1.0, 0.0, -1.0, a[0], a[1]]).collect();

        let omega0 = 2.0 * (w0 / fs2).atan();
        let z = Complex64::from_polar(1.0, omega0);
        let zi = z.inv();
        let gain: Complex64 = sections
            .iter()
            .map(|s| {
                (s[0] + s[1] * zi + s[2] * zi * zi) / (1.0 + s[3] * zi + s[4] * zi * zi)
            })
            .product();
        let g = 1.0 / gain.norm();
        for c in sections[0][..3].iter_mut() {
            *c *= g;
        }

        Ok(Self {
            sections: sections
                .iter()
                .map(|s| Biquad {
                    b: [T::of_f64(s[0]), T::of_f64(s[1]), T::of_f64(s[2])],
                    a: [T::of_f64(s[3]), T::of_f64(s[4])],
                })
                .collect(),
            sample_rate,
            low_hz,
            high_hz,
        })
    }

    pub fn sections(&self) -> &[Biquad<T>] {
        &self.sections
    }

    /// Magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        let zi = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / self.sample_rate);
        self.sections
            .iter()
            .map(|s| {
                let b = s.b.map(|v| v.as_f64());
                let a = s.a.map(|v| v.as_f64());
                (b[0] + b[1] * zi + b[2] * zi * zi) / (1.0 + a[0] * zi + a[1] * zi * zi)
            })
            .product::<Complex64>()
            .norm()
    }

    /// Samples needed for the response to the low cutoff to settle: one
    /// period of the low edge.
    pub fn settling_len(&self) -> usize {
        (self.sample_rate / self.low_hz).ceil() as usize
    }

    /// Single forward pass with steady-state initial conditions scaled to
    /// the first sample.
    pub fn filter(&self, x: &mut [T]) {
        let Some(&first) = x.first() else { return };
        let mut level = first;
        for s in &self.sections {
            let g = s.dc_gain();
            let state = [(g - s.b[0]) * level, (s.b[2] - s.a[1] * g) * level];
            s.run(x, state);
            level = g * level;
        }
    }

    /// Forward-backward filtering with odd-reflection padding.
    pub fn filtfilt(&self, x: &[T]) -> Result<Vec<T>> {
        let n = x.len();
        let min_len = 3 * self.settling_len();
        if n < min_len {
            return Err(Error::DegenerateInput(format!(
                "signal of {n} samples shorter than {min_len} (3x settling length) for a {} Hz low edge",
                self.low_hz
            )));
        }
        let pad = min_len.min(n - 1);
        let two = T::of_f64(2.0);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| two * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| two * x[n - 1] - x[n - 1 - i]));

        self.filter(&mut ext);
        ext.reverse();
        self.filter(&mut ext);
        ext.reverse();
        Ok(ext[pad..pad + n].to_vec())
    }

    pub fn band(&self) -> (f64, f64) {
        (self.low_hz, self.high_hz)
    }
}

/// Zero-phase Butterworth band-pass applied to every channel.
pub fn bandpass_filter<T: Scalar>(
    rec: &Recording<T>,
    low_hz: f64,
    high_hz: f64,
    order: usize,
) -> Result<Recording<T>> {
    let filt = Bandpass::<T>::design(low_hz, high_hz, order, rec.sample_rate())?;
    let data = rec
        .data()
        .iter()
        .map(|c| filt.filtfilt(c))
        .collect::<Result<Vec<_>>>()?;
    rec.with_data(data)
}
