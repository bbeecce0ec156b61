//! Line-of-sight channel coefficients between a single-antenna source and
//! every element of the planar array.
//!
//! Two models are provided:
//!
//! * [`ChannelModel::Exact`] integrates the received power over each
//!   patch in closed form and takes the phase from the true
//!   source-to-antenna distance, so it captures spherical wavefronts in the
//!   radiative near-field.
//! * [`ChannelModel::FarField`] assumes a plane wave: one common amplitude
//!   for all antennas and a linear phase ramp given by the arrival
//!   direction.
//!
//! Both use the convention `h = |h| e^{-jφ}`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{ArrayGeometry, SourceLocation, Vec3};
use crate::linalg;

/// Sources closer than this many wavelengths to any antenna are rejected.
pub const MIN_RANGE_WAVELENGTHS: f64 = 10.0;

const PARALLEL_CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Exact,
    FarField,
}

impl ChannelModel {
    pub const ALL: [ChannelModel; 2] = [ChannelModel::Exact, ChannelModel::FarField];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelModel::Exact => "exact",
            ChannelModel::FarField => "far_field",
        }
    }
}

impl std::fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(ChannelModel::Exact),
            "far_field" | "farfield" | "far-field" | "ff" | "mismatched" => {
                Ok(ChannelModel::FarField)
            }
            other => Err(Error::Config(format!("unknown channel model '{other}'"))),
        }
    }
}

/// Channel of one UE across all `N` antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    coefficients: Vec<Complex64>,
    model: ChannelModel,
    wavelength: f64,
}

impl ChannelVector {
    pub fn new(coefficients: Vec<Complex64>, model: ChannelModel, wavelength: f64) -> Self {
        Self {
            coefficients,
            model,
            wavelength,
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Total channel gain `‖h‖²`.
    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.coefficients)
    }
}

/// `|a^H b| / (‖a‖ ‖b‖)`.
pub fn normalized_correlation(a: &ChannelVector, b: &ChannelVector) -> f64 {
    let ab = linalg::dot(a.coefficients(), b.coefficients()).norm();
    ab / (a.norm_sqr() * b.norm_sqr()).sqrt()
}

/// The eight summands of the closed-form patch gain, first the four
/// algebraic terms then the four arctangent terms, each already scaled by
/// its `1/(12π)` or `1/(6π)` prefactor.
///
/// `offset` is the source position relative to the antenna centre. `z = 0`
/// is evaluated as the limit `z → 0⁺`.
pub fn exact_gain_summands(offset: Vec3, antenna_area: f64) -> [f64; 8] {
    let half_side = antenna_area.sqrt() / 2.0;
    let gx = [half_side + offset.x, half_side - offset.x];
    let gy = [half_side + offset.y, half_side - offset.y];
    let z = offset.z.abs();
    let z2 = z * z;

    let mut out = [0.0; 8];
    for i in 0..2 {
        for j in 0..2 {
            let (a, b) = (gx[i], gy[j]);
            let r = (a * a + b * b + z2).sqrt();
            let slot = 2 * i + j;
            out[slot] = if z == 0.0 {
                0.0
            } else {
                a * b * z / ((b * b + z2) * r) / (12.0 * PI)
            };
            let num = a * b;
            let angle = if z == 0.0 {
                match num.partial_cmp(&0.0) {
                    Some(std::cmp::Ordering::Greater) => FRAC_PI_2,
                    Some(std::cmp::Ordering::Less) => -FRAC_PI_2,
                    _ => 0.0,
                }
            } else {
                (num / (z * r)).atan()
            };
            out[4 + slot] = angle / (6.0 * PI);
        }
    }
    out
}

/// Free-space gain `ζ` collected by a square patch of area `antenna_area`
/// centred at the origin from an isotropic Y-polarized source at `offset`.
pub fn exact_gain_at(offset: Vec3, antenna_area: f64) -> f64 {
    exact_gain_summands(offset, antenna_area).iter().sum()
}

/// Free-space channel gain from `source` to the patch at `antenna_position`.
pub fn exact_gain(
    source: &SourceLocation,
    antenna_position: Vec3,
    antenna_area: f64,
) -> Result<f64> {
    if !antenna_position.is_finite() {
        return Err(Error::InvalidArgument(
            "antenna position must be finite".into(),
        ));
    }
    if !(antenna_area.is_finite() && antenna_area > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "antenna area must be positive, got {antenna_area}"
        )));
    }
    Ok(exact_gain_at(
        source.position() - antenna_position,
        antenna_area,
    ))
}

/// Phase `2π·frac(distance/λ)` in `[0, 2π)`.
pub fn propagation_phase(distance: f64, wavelength: f64) -> f64 {
    let cycles = distance / wavelength;
    let phase = TAU * (cycles - cycles.floor());
    if phase >= TAU {
        0.0
    } else {
        phase
    }
}

fn check_range(source: &SourceLocation, geometry: &ArrayGeometry, wavelength: f64) -> Result<()> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let min_m = MIN_RANGE_WAVELENGTHS * wavelength;
    let s = source.position();
    for (antenna, r) in geometry.positions().iter().enumerate() {
        let distance_m = (s - *r).norm();
        if distance_m < min_m {
            return Err(Error::ReactiveNearField {
                antenna,
                distance_m,
                min_m,
            });
        }
    }
    Ok(())
}

/// Exact near-field channel: `h_n = √ζ_n · e^{-j 2π frac(‖s − r_n‖/λ)}`.
pub fn exact_channel(
    source: &SourceLocation,
    geometry: &ArrayGeometry,
    wavelength: f64,
) -> Result<ChannelVector> {
    check_range(source, geometry, wavelength)?;
    let area = geometry.antenna_area();
    let s = source.position();
    let positions = geometry.positions();
    let coefficients = exec::map_range_chunked(positions.len(), PARALLEL_CHUNK, |n| {
        let offset = s - positions[n];
        let gain = exact_gain_at(offset, area);
        let phase = propagation_phase(offset.norm(), wavelength);
        Complex64::from_polar(gain.sqrt(), -phase)
    });
    Ok(ChannelVector::new(
        coefficients,
        ChannelModel::Exact,
        wavelength,
    ))
}

/// Common amplitude `√(A cos φ / (4π d²))` of the plane-wave model.
pub fn farfield_amplitude(source: &SourceLocation, antenna_area: f64) -> f64 {
    (antenna_area * source.azimuth().cos() / (4.0 * PI * source.distance().powi(2))).sqrt()
}

/// Plane-wave channel built from the source's range and arrival angles.
///
/// Antenna `n` gets phase `e^{+j k·r_n}` with `k = (2π/λ)·û` and `û` the unit
/// vector toward the source. This is the first-order expansion of the
/// exact phase `-2π‖s − r_n‖/λ ≈ -2πd/λ + k·r_n`, with the common `d` term
/// dropped.
pub fn farfield_channel(
    source: &SourceLocation,
    geometry: &ArrayGeometry,
    wavelength: f64,
) -> Result<ChannelVector> {
    check_range(source, geometry, wavelength)?;
    let amplitude = farfield_amplitude(source, geometry.antenna_area());
    let k = source.direction() * (TAU / wavelength);
    let positions = geometry.positions();
    let coefficients = exec::map_range_chunked(positions.len(), PARALLEL_CHUNK, |n| {
        Complex64::from_polar(amplitude, k.dot(positions[n]))
    });
    Ok(ChannelVector::new(
        coefficients,
        ChannelModel::FarField,
        wavelength,
    ))
}

/// Builds the channel of `source` under `model`.
pub fn channel(
    model: ChannelModel,
    source: &SourceLocation,
    geometry: &ArrayGeometry,
    wavelength: f64,
) -> Result<ChannelVector> {
    match model {
        ChannelModel::Exact => exact_channel(source, geometry, wavelength),
        ChannelModel::FarField => farfield_channel(source, geometry, wavelength),
    }
}

/// Per-antenna difference between the exact and plane-wave channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub antenna: usize,
    /// `20 log10(|h_n|/|h_n^FF|)` minus the same quantity at the reference.
    pub amplitude_db: f64,
    /// `φ_n − φ_n^FF` minus the same quantity at the reference, wrapped to
    /// `[-π, π)`.
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationProfile {
    pub reference_antenna: usize,
    pub records: Vec<Deviation>,
}

fn wrap_phase(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Amplitude and phase deviation of the plane-wave model across the array,
/// referenced to the antenna nearest the array centre.
pub fn deviation_profile(
    source: &SourceLocation,
    geometry: &ArrayGeometry,
    wavelength: f64,
) -> Result<DeviationProfile> {
    check_range(source, geometry, wavelength)?;
    let area = geometry.antenna_area();
    let s = source.position();
    let ff_amplitude_db = 20.0 * farfield_amplitude(source, area).log10();
    let k = source.direction() * (TAU / wavelength);
    let positions = geometry.positions();

    // (amplitude ratio dB, φ - φ_FF) before referencing.
    let raw = exec::map_range_chunked(positions.len(), PARALLEL_CHUNK, |n| {
        let offset = s - positions[n];
        let amp_db = 10.0 * exact_gain_at(offset, area).log10() - ff_amplitude_db;
        let exact_phase = propagation_phase(offset.norm(), wavelength);
        let ff_phase = -k.dot(positions[n]);
        (amp_db, wrap_phase(exact_phase - ff_phase))
    });

    let reference_antenna = geometry.center_antenna();
    let (ref_amp, ref_phase) = raw[reference_antenna];
    let records = raw
        .into_iter()
        .enumerate()
        .map(|(antenna, (amp, phase))| Deviation {
            antenna,
            amplitude_db: amp - ref_amp,
            phase_rad: wrap_phase(phase - ref_phase),
        })
        .collect();
    Ok(DeviationProfile {
        reference_antenna,
        records,
    })
}
