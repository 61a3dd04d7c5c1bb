//! Fourier series of piecewise-constant switching functions over `[0, T]`,
//! with the bandwidth truncation `2πK/T ≤ Δω`.
//!
//! The series convention is
//! `f(t) = c₀/2 + Σₖ [cₖ cos(2πkt/T) + sₖ sin(2πkt/T)]`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bangbang::BangSequence;
use crate::error::{Error, Result};

/// Truncated Fourier expansion of a switching function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierWaveform {
    /// Expansion period.
    pub period: f64,
    /// How long the waveform is played. Equal to `period` except for
    /// [`series_odd_extension`], where it is the gate time.
    pub duration: f64,
    pub c0: f64,
    /// `c_k` for `k = 1..=K`.
    pub cos_coeffs: Vec<f64>,
    /// `s_k` for `k = 1..=K`.
    pub sin_coeffs: Vec<f64>,
    pub order: usize,
    /// Bandwidth the order was chosen for; `2πK/T` when built from an order.
    pub bandwidth: f64,
    /// Mean truncation error `E_K = ½ Σ_{k>K} (c_k² + s_k²)`.
    pub tail_error: f64,
    /// `(2/T) ∫ f² dt` of the source function.
    pub power: f64,
}

/// `K = ⌊Δω T / 2π⌋`.
pub fn order_for_bandwidth(delta_omega: f64, period: f64) -> Result<usize> {
    if !(delta_omega > 0.0) || !delta_omega.is_finite() {
        return Err(Error::NonPositiveInput { name: "bandwidth", value: delta_omega });
    }
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::NonPositiveInput { name: "period", value: period });
    }
    let x = delta_omega * period / (2.0 * PI);
    // absorb rounding when Δω is an exact multiple of 2π/T
    Ok((x * (1.0 + 4.0 * f64::EPSILON)).floor() as usize)
}

/// Closed-form coefficients of `seq` up to order `K`.
pub fn series_of(seq: &BangSequence, order: usize) -> Result<FourierWaveform> {
    series_of_segments(&seq.segments(), order)
}

/// Same as [`series_of`] with the order picked from a bandwidth.
pub fn series_for_bandwidth(seq: &BangSequence, delta_omega: f64) -> Result<FourierWaveform> {
    if seq.total_time <= 0.0 {
        return Err(Error::EmptySequence);
    }
    let k = order_for_bandwidth(delta_omega, seq.total_time)?;
    let mut wf = series_of(seq, k)?;
    wf.bandwidth = delta_omega;
    Ok(wf)
}

/// Coefficients of a piecewise-constant function given as `(value, duration)`
/// segments laid end to end from `t = 0`.
pub fn series_of_segments(segments: &[(f64, f64)], order: usize) -> Result<FourierWaveform> {
    let period: f64 = segments.iter().map(|&(_, d)| d).sum();
    if !(period > 0.0) {
        return Err(Error::EmptySequence);
    }
    let mut cos_coeffs = vec![0.0; order];
    let mut sin_coeffs = vec![0.0; order];
    let mut c0 = 0.0;
    let mut power = 0.0;
    let mut a = 0.0;
    for &(level, dur) in segments {
        let b = a + dur;
        c0 += 2.0 / period * level * dur;
        power += 2.0 / period * level * level * dur;
        if level != 0.0 {
            let mid = 0.5 * (a + b);
            for k in 1..=order {
                let w = 2.0 * PI * k as f64 / period;
                // sin(wb) − sin(wa) and cos(wa) − cos(wb) as products
                let half = (0.5 * w * dur).sin();
                let scale = 2.0 / period * level * 2.0 * half / w;
                cos_coeffs[k - 1] += scale * (w * mid).cos();
                sin_coeffs[k - 1] += scale * (w * mid).sin();
            }
        }
        a = b;
    }
    let partial: f64 =
        cos_coeffs.iter().zip(&sin_coeffs).map(|(c, s)| c * c + s * s).sum::<f64>();
    let tail_error = (0.5 * (power - 0.5 * c0 * c0 - partial)).max(0.0);
    Ok(FourierWaveform {
        period,
        duration: period,
        c0,
        cos_coeffs,
        sin_coeffs,
        order,
        bandwidth: 2.0 * PI * order as f64 / period,
        tail_error,
        power,
    })
}

/// Segments of `seq` followed by one extra bang, a sign-flipped copy of the
/// first, when the result satisfies `f(T' − t) = −f(t)` and so expands in
/// sines only. The equal-bang X sequences, which start and end on the same
/// level, qualify.
pub fn odd_extension(seq: &BangSequence) -> Result<Vec<(f64, f64)>> {
    let mut segs = seq.segments();
    let &(first, d0) = segs.first().ok_or(Error::EmptySequence)?;
    if first == 0.0 {
        return Err(Error::Precondition("odd extension needs a nonzero first bang".into()));
    }
    segs.push((-first, d0));
    let scale = segs.iter().map(|&(_, d)| d).sum::<f64>().max(1.0);
    let odd = segs.iter().zip(segs.iter().rev()).all(|(&(la, da), &(lb, db))| {
        la == -lb && (da - db).abs() <= 1e-12 * scale
    });
    if !odd {
        return Err(Error::Precondition("sequence has no odd one-bang extension".into()));
    }
    Ok(segs)
}

/// Series of the [`odd_extension`] of `seq`, with the order taken from the
/// bandwidth over the extended period `T'`. The waveform is played for the
/// original time `T`.
pub fn series_odd_extension(seq: &BangSequence, delta_omega: f64) -> Result<FourierWaveform> {
    let segs = odd_extension(seq)?;
    let extended: f64 = segs.iter().map(|&(_, d)| d).sum();
    let k = order_for_bandwidth(delta_omega, extended)?;
    let mut wf = series_of_segments(&segs, k)?;
    wf.bandwidth = delta_omega;
    wf.duration = seq.total_time;
    Ok(wf)
}

/// `E_K` of a bang sequence via the Parseval identity (no infinite sum).
pub fn tail_error(seq: &BangSequence, order: usize) -> Result<f64> {
    Ok(series_of(seq, order)?.tail_error)
}

impl FourierWaveform {
    /// `(2/T) ∫ R_K² dt`, which by Parseval is twice [`Self::tail_error`].
    pub fn tail_integral(&self) -> f64 {
        2.0 * self.tail_error
    }

    /// Partial sum at `t` within the played interval `[0, duration]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.duration;
        if !(t >= -slack && t <= self.duration + slack) {
            return Err(Error::OutOfDomain { t, period: self.duration });
        }
        Ok(self.value(t))
    }

    /// Partial sum with the result hard-limited to `[−1, 1]`. This models
    /// hardware saturation and is not part of the truncation analysis.
    pub fn eval_clamped(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.clamp(-1.0, 1.0))
    }

    /// Partial sum without the domain check (the series is `T`-periodic).
    pub fn value(&self, t: f64) -> f64 {
        let phi = 2.0 * PI * t / self.period;
        let (s1, c1) = phi.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        let mut acc = 0.5 * self.c0;
        for (c, s) in self.cos_coeffs.iter().zip(&self.sin_coeffs) {
            let next_c = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next_c;
            acc += c * ck + s * sk;
        }
        acc
    }

    /// Number of harmonics `k ≥ 1` with `c_k² + s_k² > tol²`.
    pub fn nonzero_harmonics(&self, tol: f64) -> usize {
        self.cos_coeffs
            .iter()
            .zip(&self.sin_coeffs)
            .filter(|(c, s)| c.hypot(**s) > tol)
            .count()
    }

    /// `(t, f(t))` at `samples` equally spaced points spanning the played
    /// interval.
    pub fn sample(&self, samples: usize) -> Vec<(f64, f64)> {
        match samples {
            0 => vec![],
            1 => vec![(0.0, self.value(0.0))],
            n => (0..n)
                .map(|i| {
                    let t = self.duration * i as f64 / (n - 1) as f64;
                    (t, self.value(t))
                })
                .collect(),
        }
    }

    /// Largest `|f|` over a uniform sampling.
    pub fn peak(&self, samples: usize) -> f64 {
        self.sample(samples.max(2)).iter().map(|(_, f)| f.abs()).fold(0.0, f64::max)
    }

    /// CSV with header `t,f`, LF line endings.
    pub fn to_csv(&self, samples: usize, clamp: bool) -> String {
        let mut out = String::from("t,f\n");
        for (t, f) in self.sample(samples) {
            let f = if clamp { f.clamp(-1.0, 1.0) } else { f };
            let _ = writeln!(out, "{t},{f}");
        }
        out
    }
}
