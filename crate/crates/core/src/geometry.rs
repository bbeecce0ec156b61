//! Planar array layout and source positions.
//!
//! The array lies in the XY-plane, centered on the origin, with boresight
//! along +Z. Antennas are square patches of area `A` separated by gaps
//! `d_H` (horizontal) and `d_V` (vertical), so neighbouring centres are
//! `√A + d_H` and `√A + d_V` apart. Storage order runs left to right within
//! a row and rows from bottom to top.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or displacement in array coordinates, metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }
}

/// Uniform rectangular planar array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    n_h: usize,
    n_v: usize,
    antenna_area: f64,
    spacing_h: f64,
    spacing_v: f64,
    positions: Vec<Vec3>,
}

impl ArrayGeometry {
    /// Builds an `n_h` x `n_v` array of patches with area `antenna_area`
    /// and edge-to-edge gaps `spacing_h`, `spacing_v`.
    ///
    /// The channel model only holds when each gap is at least the patch
    /// side `√A`; smaller gaps are rejected.
    pub fn new(
        n_h: usize,
        n_v: usize,
        antenna_area: f64,
        spacing_h: f64,
        spacing_v: f64,
    ) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(Error::InvalidGeometry(format!(
                "antenna counts must be positive, got n_h={n_h}, n_v={n_v}"
            )));
        }
        if !(antenna_area.is_finite() && antenna_area > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "antenna area must be positive and finite, got {antenna_area}"
            )));
        }
        let side = antenna_area.sqrt();
        // Tolerate rounding when spacings are given as multiples of the side.
        let min_spacing = side * (1.0 - 1e-12);
        for (name, s) in [("spacing_h", spacing_h), ("spacing_v", spacing_v)] {
            if !s.is_finite() || s < min_spacing {
                return Err(Error::InvalidGeometry(format!(
                    "{name} = {s} m is below the antenna side {side} m"
                )));
            }
        }

        let step_h = side + spacing_h;
        let step_v = side + spacing_v;
        let offset_h = (n_h as f64 - 1.0) / 2.0;
        let offset_v = (n_v as f64 - 1.0) / 2.0;
        let positions = (0..n_h * n_v)
            .map(|idx| {
                let col = (idx % n_h) as f64;
                let row = (idx / n_h) as f64;
                Vec3::new(step_h * (col - offset_h), step_v * (row - offset_v), 0.0)
            })
            .collect();

        Ok(Self {
            n_h,
            n_v,
            antenna_area,
            spacing_h,
            spacing_v,
            positions,
        })
    }

    /// Builds the largest array with the given element parameters that fits
    /// inside a `length_h` x `length_v` aperture.
    pub fn fit_aperture(
        length_h: f64,
        length_v: f64,
        antenna_area: f64,
        spacing_h: f64,
        spacing_v: f64,
    ) -> Result<Self> {
        let side = antenna_area.sqrt();
        let n_h = antennas_for_length(length_h, side, spacing_h);
        let n_v = antennas_for_length(length_v, side, spacing_v);
        Self::new(n_h, n_v, antenna_area, spacing_h, spacing_v)
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    /// Total number of antennas `N = n_h * n_v`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn antenna_area(&self) -> f64 {
        self.antenna_area
    }

    pub fn spacing_h(&self) -> f64 {
        self.spacing_h
    }

    pub fn spacing_v(&self) -> f64 {
        self.spacing_v
    }

    /// Centre-to-centre pitch along X.
    pub fn pitch_h(&self) -> f64 {
        self.antenna_area.sqrt() + self.spacing_h
    }

    /// Centre-to-centre pitch along Y.
    pub fn pitch_v(&self) -> f64 {
        self.antenna_area.sqrt() + self.spacing_v
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn length_h(&self) -> f64 {
        self.n_h as f64 * self.antenna_area.sqrt() + (self.n_h as f64 - 1.0) * self.spacing_h
    }

    pub fn length_v(&self) -> f64 {
        self.n_v as f64 * self.antenna_area.sqrt() + (self.n_v as f64 - 1.0) * self.spacing_v
    }

    /// Index of the antenna closest to the array centre; ties go to the
    /// lowest index.
    pub fn center_antenna(&self) -> usize {
        let col = (self.n_h - 1) / 2;
        let row = (self.n_v - 1) / 2;
        row * self.n_h + col
    }
}

/// Number of patches of side `side` with gap `spacing` that fit in `length`.
pub fn antennas_for_length(length: f64, side: f64, spacing: f64) -> usize {
    // Small relative slack so that exact fits are not lost to rounding.
    let n = ((length + spacing) / (side + spacing) * (1.0 + 1e-12)).floor();
    if n.is_finite() && n >= 1.0 {
        n as usize
    } else {
        1
    }
}

/// Conventional far-field boundary `2(L_H² + L_V²)/λ` of a planar aperture.
pub fn fraunhofer_distance_from_lengths(length_h: f64, length_v: f64, wavelength: f64) -> f64 {
    2.0 * (length_h * length_h + length_v * length_v) / wavelength
}

/// Fraunhofer distance of `geometry` at the given wavelength.
pub fn fraunhofer_distance(geometry: &ArrayGeometry, wavelength: f64) -> f64 {
    fraunhofer_distance_from_lengths(geometry.length_h(), geometry.length_v(), wavelength)
}

/// A single-antenna UE position with its range and arrival angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceLocation {
    position: Vec3,
    distance: f64,
    azimuth: f64,
    elevation: f64,
}

impl SourceLocation {
    /// Derives range, azimuth `atan(x/z)` and elevation
    /// `atan(y/√(x²+z²))`. The source must be strictly in front of the
    /// array (`z > 0`).
    pub fn from_position(position: Vec3) -> Result<Self> {
        let Vec3 { x, y, z } = position;
        if !position.is_finite() {
            return Err(Error::InvalidSource {
                x,
                y,
                z,
                reason: "coordinates must be finite",
            });
        }
        if z <= 0.0 {
            return Err(Error::InvalidSource {
                x,
                y,
                z,
                reason: "source must be in front of the array (z > 0)",
            });
        }
        Ok(Self {
            position,
            distance: position.norm(),
            azimuth: (x / z).atan(),
            elevation: (y / x.hypot(z)).atan(),
        })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    /// Unit vector from the array centre toward the source.
    pub fn direction(&self) -> Vec3 {
        let (sin_az, cos_az) = self.azimuth.sin_cos();
        let (sin_el, cos_el) = self.elevation.sin_cos();
        Vec3::new(cos_el * sin_az, sin_el, cos_el * cos_az)
    }
}
