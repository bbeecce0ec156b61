//! Receive combiners.
//!
//! The constructors are model-agnostic: passing exact channels yields the
//! matched design, passing far-field reconstructions yields the mismatched
//! one. The design model is recorded on the resulting [`CombinerSet`].
//!
//! MMSE combining solves `(Σ p_i h_i h_i^H + σ² I) v_k = h_k`. With
//! `B = [√p_1 h_1, …, √p_K h_K]` the push-through identity gives
//! `(B B^H + σ² I)^{-1} B = B (B^H B + σ² I_K)^{-1}`, so all `K` solutions
//! come from one Cholesky factorization of the `K × K` matrix
//! `M = B^H B + σ² I_K` instead of the `N × N` system matrix. The Gram
//! matrix `B^H B` is accumulated entry by entry as inner products over the
//! antennas (upper triangle, mirrored).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, ChannelVector};
use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::{self, Cholesky, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CombinerScheme {
    #[serde(rename = "mr")]
    Mr,
    #[serde(rename = "mmse")]
    Mmse,
}

impl CombinerScheme {
    pub const ALL: [CombinerScheme; 2] = [CombinerScheme::Mmse, CombinerScheme::Mr];

    pub fn as_str(self) -> &'static str {
        match self {
            CombinerScheme::Mr => "mr",
            CombinerScheme::Mmse => "mmse",
        }
    }
}

impl std::fmt::Display for CombinerScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CombinerScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mr" | "mrc" => Ok(CombinerScheme::Mr),
            "mmse" => Ok(CombinerScheme::Mmse),
            other => Err(Error::Config(format!("unknown combining scheme '{other}'"))),
        }
    }
}

/// Powers and noise level used to design an MMSE combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct MmseParameters {
    pub powers: Vec<f64>,
    pub noise_power: f64,
}

/// One combining vector per UE, plus how they were designed.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerSet {
    vectors: Vec<Vec<Complex64>>,
    scheme: CombinerScheme,
    design_model: ChannelModel,
    mmse: Option<MmseParameters>,
}

impl CombinerSet {
    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn scheme(&self) -> CombinerScheme {
        self.scheme
    }

    pub fn design_model(&self) -> ChannelModel {
        self.design_model
    }

    pub fn mmse_parameters(&self) -> Option<&MmseParameters> {
        self.mmse.as_ref()
    }
}

fn common_model(channels: &[ChannelVector]) -> Result<ChannelModel> {
    let first = channels
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one channel is required".into()))?;
    for h in channels {
        if h.len() != first.len() {
            return Err(Error::DimensionMismatch(format!(
                "channels have lengths {} and {}",
                first.len(),
                h.len()
            )));
        }
        if h.model() != first.model() {
            return Err(Error::InvalidArgument(
                "all design channels must come from the same model".into(),
            ));
        }
    }
    Ok(first.model())
}

/// Maximum-ratio combining `v_k = h_k / ‖h_k‖`.
pub fn mr_combiner(channels: &[ChannelVector]) -> Result<CombinerSet> {
    let design_model = common_model(channels)?;
    let vectors = channels
        .iter()
        .map(|h| {
            let norm = h.norm_sqr().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::ZeroVector("channel"));
            }
            Ok(h.coefficients().iter().map(|c| c / norm).collect())
        })
        .collect::<Result<_>>()?;
    Ok(CombinerSet {
        vectors,
        scheme: CombinerScheme::Mr,
        design_model,
        mmse: None,
    })
}

fn check_mmse_inputs(
    channels: &[ChannelVector],
    powers: &[f64],
    noise_power: f64,
) -> Result<ChannelModel> {
    let model = common_model(channels)?;
    if powers.len() != channels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} powers for {} channels",
            powers.len(),
            channels.len()
        )));
    }
    if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "UE powers must be finite and nonnegative, got {p}"
        )));
    }
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    Ok(model)
}

/// MMSE combining `v_k = (Σ_i p_i h_i h_i^H + σ² I)^{-1} h_k`.
pub fn mmse_combiner(
    channels: &[ChannelVector],
    powers: &[f64],
    noise_power: f64,
) -> Result<CombinerSet> {
    let design_model = check_mmse_inputs(channels, powers, noise_power)?;
    let k_count = channels.len();
    let amplitudes: Vec<f64> = powers.iter().map(|p| p.sqrt()).collect();
    let cols: Vec<&[Complex64]> = channels.iter().map(|h| h.coefficients()).collect();

    // M = diag(√p) G diag(√p) + σ² I with G the Gram matrix of the channels.
    let gram = scaled_gram(&cols, &amplitudes);
    let mut m = gram.clone();
    m.add_to_diagonal(noise_power);
    let chol = Cholesky::factor(&m)?;

    let n = cols[0].len();
    let vectors = exec::map_range(k_count, |k| {
        let (weights, offset, scale) = if powers[k] > 0.0 {
            // v_k = B M^{-1} e_k / √p_k
            let mut e = vec![Complex64::new(0.0, 0.0); k_count];
            e[k] = Complex64::new(1.0, 0.0);
            let c = chol.solve(&e);
            (c, false, 1.0 / amplitudes[k])
        } else {
            // Zero-power UE: v_k = (h_k − B M^{-1} B^H h_k) / σ²
            let w: Vec<Complex64> = (0..k_count)
                .map(|i| linalg::dot(cols[i], cols[k]) * amplitudes[i])
                .collect();
            (chol.solve(&w), true, 1.0 / noise_power)
        };
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for (i, col) in cols.iter().enumerate() {
            let wi = weights[i] * amplitudes[i];
            if wi == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (vn, hn) in v.iter_mut().zip(col.iter()) {
                *vn += wi * hn;
            }
        }
        if offset {
            for (vn, hn) in v.iter_mut().zip(cols[k].iter()) {
                *vn = (*hn - *vn) * scale;
            }
        } else {
            for vn in v.iter_mut() {
                *vn *= scale;
            }
        }
        v
    });

    Ok(CombinerSet {
        vectors,
        scheme: CombinerScheme::Mmse,
        design_model,
        mmse: Some(MmseParameters {
            powers: powers.to_vec(),
            noise_power,
        }),
    })
}

/// MMSE combining by factoring the full `N × N` system matrix.
///
/// Same result as [`mmse_combiner`] at `O(N³)` cost; meant for small arrays
/// and cross-checks.
pub fn mmse_combiner_direct(
    channels: &[ChannelVector],
    powers: &[f64],
    noise_power: f64,
) -> Result<CombinerSet> {
    let design_model = check_mmse_inputs(channels, powers, noise_power)?;
    let n = channels[0].len();
    let mut a = Matrix::zeros(n);
    for (h, &p) in channels.iter().zip(powers) {
        let c = h.coefficients();
        for i in 0..n {
            for j in 0..=i {
                a.set(i, j, a.get(i, j) + c[i] * c[j].conj() * p);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            a.set(j, i, a.get(i, j).conj());
        }
    }
    a.add_to_diagonal(noise_power);
    let chol = Cholesky::factor(&a)?;
    let vectors = channels
        .iter()
        .map(|h| chol.solve(h.coefficients()))
        .collect();
    Ok(CombinerSet {
        vectors,
        scheme: CombinerScheme::Mmse,
        design_model,
        mmse: Some(MmseParameters {
            powers: powers.to_vec(),
            noise_power,
        }),
    })
}

fn scaled_gram(cols: &[&[Complex64]], amplitudes: &[f64]) -> Matrix {
    let k = cols.len();
    let rows = exec::map_range(k, |i| {
        (i..k)
            .map(|j| {
                let v = if i == j {
                    Complex64::new(linalg::norm_sqr(cols[i]), 0.0)
                } else {
                    linalg::dot(cols[i], cols[j])
                };
                v * (amplitudes[i] * amplitudes[j])
            })
            .collect::<Vec<_>>()
    });
    let mut g = Matrix::zeros(k);
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let j = i + offset;
            g.set(i, j, v);
            g.set(j, i, v.conj());
        }
    }
    g
}

/// Builds the combiner set for `scheme` from the given design channels.
pub fn design_combiners(
    scheme: CombinerScheme,
    channels: &[ChannelVector],
    powers: &[f64],
    noise_power: f64,
) -> Result<CombinerSet> {
    match scheme {
        CombinerScheme::Mr => mr_combiner(channels),
        CombinerScheme::Mmse => mmse_combiner(channels, powers, noise_power),
    }
}
