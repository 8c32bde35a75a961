//! Deterministic multichannel microphone-signal synthesis.
//!
//! Each channel is a fractional-delay copy of a seeded white-noise source
//! signal, delayed by the exact spherical-wave propagation time from the
//! source to that microphone, scaled by 1/r spreading, plus independent
//! sensor noise at a configured SNR.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::array::{MicArrayGeometry, MIC_COUNT, SPEED_OF_SOUND};
use crate::error::{Error, Result};
use crate::geom::{Pose, Vec3};

/// Default audio sample rate, Hz.
pub const DEFAULT_SAMPLE_RATE: f64 = 16_000.0;

/// Default analysis frame length, samples.
pub const DEFAULT_FRAME_LEN: usize = 1024;

/// Default hop between frames, samples.
pub const DEFAULT_HOP: usize = 512;

/// Half-width of the windowed-sinc interpolation kernel, samples.
/// The kernel spans 32 samples (FIR order 31).
const SINC_HALF_WIDTH: i64 = 16;

/// One synthesis request: a source at a known map position observed by an
/// array at a known pose, for one frame.
#[derive(Debug, Clone, Copy)]
pub struct SceneFrame {
    pub source_position: Vec3,
    pub array_pose: Pose,
    /// Hz.
    pub sample_rate: f64,
    /// Samples; must be a power of two.
    pub frame_len: usize,
    /// Per-channel SNR of clean signal over sensor noise. `f64::INFINITY`
    /// disables sensor noise.
    pub snr_db: f64,
    pub rng_seed: u64,
    /// Frame start time, seconds.
    pub timestamp: f64,
}

impl SceneFrame {
    fn validate(&self, geometry: &MicArrayGeometry) -> Result<()> {
        if !(self.sample_rate > 0.0) {
            return Err(Error::InvalidScene {
                reason: format!("sample rate {} must be positive", self.sample_rate),
            });
        }
        if self.frame_len == 0 || !self.frame_len.is_power_of_two() {
            return Err(Error::InvalidScene {
                reason: format!("frame length {} is not a power of two", self.frame_len),
            });
        }
        if !self.source_position.is_finite() {
            return Err(Error::NonFinite {
                context: "source position",
            });
        }
        // Conservative hull check: require the source outside the array's
        // bounding sphere in the body frame.
        let body = to_body_frame(self.source_position, &self.array_pose);
        let radius = geometry.bounding_radius();
        if body.norm() <= radius {
            return Err(Error::SourceInsideArray {
                distance: body.norm(),
                radius,
            });
        }
        Ok(())
    }
}

/// Sixteen equal-length channels of dimensionless amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelFrame {
    pub channels: Vec<Vec<f64>>,
    /// Frame start time, seconds.
    pub timestamp: f64,
}

fn to_body_frame(point_map: Vec3, pose: &Pose) -> Vec3 {
    pose.orientation.conjugate().rotate(point_map - pose.position)
}

/// Windowed-sinc interpolation kernel value at offset `t` samples from the
/// desired read position (Hann window over +/- SINC_HALF_WIDTH).
fn sinc_kernel(t: f64) -> f64 {
    let w = SINC_HALF_WIDTH as f64;
    if t.abs() >= w {
        return 0.0;
    }
    let sinc = if t == 0.0 {
        1.0
    } else {
        let pt = std::f64::consts::PI * t;
        pt.sin() / pt
    };
    let hann = 0.5 * (1.0 + (std::f64::consts::PI * t / w).cos());
    sinc * hann
}

/// Read `signal` at the fractional position `pos` (samples) by windowed-sinc
/// interpolation; out-of-range taps read zero.
fn interpolate_at(signal: &[f64], pos: f64) -> f64 {
    let center = pos.floor() as i64;
    let mut acc = 0.0;
    for k in (center - SINC_HALF_WIDTH + 1)..=(center + SINC_HALF_WIDTH) {
        if k < 0 || k as usize >= signal.len() {
            continue;
        }
        acc += signal[k as usize] * sinc_kernel(pos - k as f64);
    }
    acc
}

/// Delay a signal by `delay` seconds using windowed-sinc interpolation.
/// Integer-sample delays reduce to an exact shift. Positive delay moves the
/// signal later in time; samples shifted in from outside the buffer are zero.
pub fn fractional_delay(signal: &[f64], delay: f64, sample_rate: f64) -> Result<Vec<f64>> {
    let duration = signal.len() as f64 / sample_rate;
    if delay.abs() >= duration {
        return Err(Error::DelayOutOfRange {
            delay_s: delay,
            duration_s: duration,
        });
    }
    let shift = delay * sample_rate;
    let rounded = shift.round();
    if (shift - rounded).abs() < 1e-12 {
        // Integer shift: exact.
        let n = signal.len() as i64;
        let s = rounded as i64;
        return Ok((0..n)
            .map(|i| {
                let j = i - s;
                if j < 0 || j >= n {
                    0.0
                } else {
                    signal[j as usize]
                }
            })
            .collect());
    }
    Ok((0..signal.len())
        .map(|i| interpolate_at(signal, i as f64 - shift))
        .collect())
}

/// Synthesize one frame of 16-channel audio for the scene.
///
/// The source emits seeded white Gaussian noise. Each channel is the source
/// signal delayed by the exact spherical propagation time to that
/// microphone (true geometry, not the far-field approximation), scaled by
/// 1/r, plus independent sensor noise at `snr_db`. Deterministic given the
/// seed.
pub fn synthesize_frame(
    scene: &SceneFrame,
    geometry: &MicArrayGeometry,
) -> Result<MultichannelFrame> {
    scene.validate(geometry)?;

    let source_body = to_body_frame(scene.source_position, &scene.array_pose);
    let distances: Vec<f64> = geometry
        .mics()
        .iter()
        .map(|m| source_body.distance(*m))
        .collect();
    let max_delay_samples =
        (distances.iter().cloned().fold(0.0, f64::max) / SPEED_OF_SOUND * scene.sample_rate)
            .ceil() as usize;

    // Master source signal, long enough that every channel's read window
    // (including the sinc kernel support) stays inside it.
    let margin = max_delay_samples + 2 * SINC_HALF_WIDTH as usize + 2;
    let master_len = scene.frame_len + 2 * margin;
    let mut rng = ChaCha8Rng::seed_from_u64(scene.rng_seed);
    let master: Vec<f64> = (0..master_len)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();

    // Reference range for amplitude normalization: distance to the body
    // origin, so channel gains stay O(1).
    let ref_range = source_body.norm();

    let mut channels = Vec::with_capacity(MIC_COUNT);
    for (mic_idx, (_, dist)) in geometry.mics().iter().zip(&distances).enumerate() {
        let delay_samples = dist / SPEED_OF_SOUND * scene.sample_rate;
        let gain = ref_range / dist;
        let mut chan: Vec<f64> = (0..scene.frame_len)
            .map(|n| {
                let pos = (n + margin) as f64 - delay_samples;
                gain * interpolate_at(&master, pos)
            })
            .collect();

        if scene.snr_db.is_finite() {
            let clean_rms =
                (chan.iter().map(|s| s * s).sum::<f64>() / chan.len() as f64).sqrt();
            let noise_std = clean_rms * 10f64.powf(-scene.snr_db / 20.0);
            let mut noise_rng = ChaCha8Rng::seed_from_u64(
                scene
                    .rng_seed
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(mic_idx as u64 + 1),
            );
            for s in &mut chan {
                *s += noise_std * noise_rng.sample::<f64, _>(StandardNormal);
            }
        }
        channels.push(chan);
    }

    Ok(MultichannelFrame {
        channels,
        timestamp: scene.timestamp,
    })
}

/// Write channels as a PCM float32 WAV file.
pub fn write_wav_f32(path: &Path, channels: &[Vec<f64>], sample_rate: u32) -> Result<()> {
    let n_channels = channels.len();
    let frame_count = channels.first().map_or(0, Vec::len);
    if channels.iter().any(|c| c.len() != frame_count) {
        return Err(Error::InvalidScene {
            reason: "channels differ in length".into(),
        });
    }
    let spec = hound::WavSpec {
        channels: n_channels as u16,
        sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| Error::Wav {
        path: path.into(),
        reason: e.to_string(),
    })?;
    for n in 0..frame_count {
        for chan in channels {
            writer
                .write_sample(chan[n] as f32)
                .map_err(|e| Error::Wav {
                    path: path.into(),
                    reason: e.to_string(),
                })?;
        }
    }
    writer.finalize().map_err(|e| Error::Wav {
        path: path.into(),
        reason: e.to_string(),
    })?;
    Ok(())
}

/// Read a float or integer PCM WAV file into per-channel f64 samples.
/// Returns (channels, sample_rate).
pub fn read_wav(path: &Path) -> Result<(Vec<Vec<f64>>, u32)> {
    let mut reader = hound::WavReader::open(path).map_err(|e| Error::Wav {
        path: path.into(),
        reason: e.to_string(),
    })?;
    let spec = reader.spec();
    let n_channels = spec.channels as usize;
    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); n_channels];
    let mut idx = 0usize;
    match spec.sample_format {
        hound::SampleFormat::Float => {
            for s in reader.samples::<f32>() {
                let s = s.map_err(|e| Error::Wav {
                    path: path.into(),
                    reason: e.to_string(),
                })?;
                channels[idx % n_channels].push(s as f64);
                idx += 1;
            }
        }
        hound::SampleFormat::Int => {
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            for s in reader.samples::<i32>() {
                let s = s.map_err(|e| Error::Wav {
                    path: path.into(),
                    reason: e.to_string(),
                })?;
                channels[idx % n_channels].push(s as f64 / scale);
                idx += 1;
            }
        }
    }
    Ok((channels, spec.sample_rate))
}
