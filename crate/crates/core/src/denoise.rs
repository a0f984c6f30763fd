//! Haar wavelet denoising of trajectory coordinate series.
//!
//! A series is split into approximation (scaling) coefficients and per-level
//! detail (wavelet) coefficients. Detail coefficients are soft-thresholded at
//! the universal level `sigma * sqrt(2 ln N)`, with sigma estimated from the
//! median absolute finest-level detail, and the series is rebuilt.

use crate::error::DenoiseError;
use crate::geometry::Vec2;
use crate::trajectory::{derive_heading, lane_of, SiteGeometry, VehicleTrack};

pub const DEFAULT_LEVELS: usize = 3;

/// Median absolute deviation to Gaussian sigma.
const MAD_TO_SIGMA: f64 = 0.6745;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub levels: usize,
    pub approximation: Vec<f64>,
    /// `details[0]` is the finest level.
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
    /// Input length at each level before odd-length padding, finest first.
    level_lengths: Vec<usize>,
}

impl WaveletDecomposition {
    pub fn coefficient_energy(&self) -> f64 {
        self.approximation
            .iter()
            .chain(self.details.iter().flatten())
            .map(|c| c * c)
            .sum()
    }

    /// Same shape with every coefficient set to zero.
    pub fn zeroed(&self) -> Self {
        Self {
            approximation: vec![0.0; self.approximation.len()],
            details: self.details.iter().map(|d| vec![0.0; d.len()]).collect(),
            ..self.clone()
        }
    }
}

/// Multi-level Haar analysis. Odd-length levels are padded by repeating the
/// last sample.
pub fn dwt_forward(series: &[f64], levels: usize) -> Result<WaveletDecomposition, DenoiseError> {
    if levels == 0 {
        return Err(DenoiseError::ZeroLevels);
    }
    let need = 1usize.checked_shl(levels as u32).unwrap_or(usize::MAX);
    if series.len() < need {
        return Err(DenoiseError::TooShort {
            len: series.len(),
            levels,
            need,
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut current = series.to_vec();
    let mut details = Vec::with_capacity(levels);
    let mut level_lengths = Vec::with_capacity(levels);
    for _ in 0..levels {
        level_lengths.push(current.len());
        if current.len() % 2 == 1 {
            current.push(*current.last().expect("non-empty level"));
        }
        let (approx, detail): (Vec<f64>, Vec<f64>) = current
            .chunks_exact(2)
            .map(|p| ((p[0] + p[1]) * s, (p[0] - p[1]) * s))
            .unzip();
        details.push(detail);
        current = approx;
    }
    Ok(WaveletDecomposition {
        levels,
        approximation: current,
        details,
        original_length: series.len(),
        level_lengths,
    })
}

/// Haar synthesis, truncating each level back to its unpadded length.
pub fn dwt_inverse(decomp: &WaveletDecomposition) -> Vec<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut current = decomp.approximation.clone();
    for (detail, &len) in decomp.details.iter().zip(&decomp.level_lengths).rev() {
        let mut next = Vec::with_capacity(2 * current.len());
        for (a, d) in current.iter().zip(detail) {
            next.push((a + d) * s);
            next.push((a - d) * s);
        }
        next.truncate(len);
        current = next;
    }
    current
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRule {
    /// Soft threshold at sigma * sqrt(2 ln N), sigma = median(|finest|) / 0.6745.
    UniversalSoft,
}

pub fn soft_threshold(x: f64, lambda: f64) -> f64 {
    x.signum() * (x.abs() - lambda).max(0.0)
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Universal threshold for a decomposition.
pub fn universal_threshold(decomp: &WaveletDecomposition) -> f64 {
    let mut finest: Vec<f64> = decomp
        .details
        .first()
        .map(|d| d.iter().map(|c| c.abs()).collect())
        .unwrap_or_default();
    let sigma = median(&mut finest) / MAD_TO_SIGMA;
    let n = decomp.original_length.max(2) as f64;
    sigma * (2.0 * n.ln()).sqrt()
}

/// Soft-thresholds every detail coefficient at `lambda`; the approximation
/// is left alone.
pub fn threshold_details_with(decomp: &WaveletDecomposition, lambda: f64) -> WaveletDecomposition {
    WaveletDecomposition {
        details: decomp
            .details
            .iter()
            .map(|d| d.iter().map(|&c| soft_threshold(c, lambda)).collect())
            .collect(),
        ..decomp.clone()
    }
}

pub fn threshold_details(decomp: &WaveletDecomposition, rule: ThresholdRule) -> WaveletDecomposition {
    match rule {
        ThresholdRule::UniversalSoft => threshold_details_with(decomp, universal_threshold(decomp)),
    }
}

/// Least-squares line through the samples, as (intercept, slope) over index.
fn linear_fit(series: &[f64]) -> (f64, f64) {
    let n = series.len() as f64;
    let mean_i = (n - 1.0) / 2.0;
    let mean_v = series.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in series.iter().enumerate() {
        let di = i as f64 - mean_i;
        sxy += di * (v - mean_v);
        sxx += di * di;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (mean_v - slope * mean_i, slope)
}

/// Wavelet-denoises one coordinate series. The least-squares line is removed
/// first and added back afterwards: Haar details of a ramp are not zero, and
/// a vehicle's longitudinal position is mostly ramp.
pub fn denoise_series(series: &[f64], levels: usize) -> Result<Vec<f64>, DenoiseError> {
    let (b0, b1) = linear_fit(series);
    let trend = |i: usize| b0 + b1 * i as f64;
    let residual: Vec<f64> = series.iter().enumerate().map(|(i, v)| v - trend(i)).collect();
    let decomp = dwt_forward(&residual, levels)?;
    let cleaned = dwt_inverse(&threshold_details(&decomp, ThresholdRule::UniversalSoft));
    Ok(cleaned.iter().enumerate().map(|(i, v)| v + trend(i)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoisedTrack {
    pub track: VehicleTrack,
    /// Set when the track was too short and is returned unchanged.
    pub skipped: bool,
}

/// Central differences over frame numbers; one-sided at the ends.
fn differentiate(values: &[f64], frames: &[f64], frame_rate: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            if lo == hi {
                0.0
            } else {
                (values[hi] - values[lo]) / ((frames[hi] - frames[lo]) / frame_rate)
            }
        })
        .collect()
}

/// Denoises x(t) and y(t) of one track and recomputes velocity and heading
/// from the smoothed positions.
pub fn denoise_track(track: &VehicleTrack, levels: usize, site: &SiteGeometry) -> DenoisedTrack {
    let xs: Vec<f64> = track.states.iter().map(|s| s.x).collect();
    let ys: Vec<f64> = track.states.iter().map(|s| s.y).collect();
    let (xs, ys) = match (denoise_series(&xs, levels), denoise_series(&ys, levels)) {
        (Ok(x), Ok(y)) => (x, y),
        _ => {
            tracing::warn!(id = track.id, len = track.states.len(), levels, "track too short to denoise");
            return DenoisedTrack {
                track: track.clone(),
                skipped: true,
            };
        }
    };
    let frames: Vec<f64> = track.states.iter().map(|s| s.frame as f64).collect();
    let vxs = differentiate(&xs, &frames, site.frame_rate());
    let vys = differentiate(&ys, &frames, site.frame_rate());
    let mut out = track.clone();
    for (k, s) in out.states.iter_mut().enumerate() {
        s.x = xs[k];
        s.y = ys[k];
        s.vx = vxs[k];
        s.vy = vys[k];
        let position = Vec2::new(s.x, s.y);
        let lane = s.lane.or_else(|| lane_of(s, site));
        s.heading = derive_heading(position, Vec2::new(s.vx, s.vy), lane, site);
    }
    DenoisedTrack {
        track: out,
        skipped: false,
    }
}
