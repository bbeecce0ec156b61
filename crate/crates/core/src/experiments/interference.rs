//! Interference gain seen by a fixed UE 1 as a second UE sweeps a grid.
//!
//! For every cell, UE 2 is placed at `[x, y, z]`, the combiner of UE 1 is
//! designed from the two design-model channels, and the normalized gain
//! `|v_1ᴴh_2|²/‖v_1‖²` is measured on the exact channel of UE 2. Cells that
//! cannot host a UE (`z ≤ 0`, or closer than the reactive-range guard to
//! any antenna) are reported as `NaN`.
//!
//! `interference_map` columns: `scheme, design_model, x_m, z_m,
//! interference_gain`.
//! `interference_zoom` columns: `scheme, design_model, dx_wavelengths,
//! dz_wavelengths, x_m, z_m, interference_gain`, with offsets measured
//! from UE 1.

use crate::channel::{exact_channel, farfield_channel, ChannelModel, ChannelVector};
use crate::combining::{design_combiners, CombinerScheme};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{ArrayGeometry, SourceLocation, Vec3};
use crate::metrics::normalized_gain;

use super::{ExperimentResult, RecordTable};

/// Rectangular sampling grid in the `x`-`z` plane at fixed height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub z_range: (f64, f64),
    /// Samples along `x` and `z`.
    pub resolution: (usize, usize),
    pub fixed_y: f64,
}

impl GridSpec {
    pub fn new(
        x_range: (f64, f64),
        z_range: (f64, f64),
        resolution: (usize, usize),
        fixed_y: f64,
    ) -> Result<Self> {
        let finite = [x_range.0, x_range.1, z_range.0, z_range.1, fixed_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || x_range.1 <= x_range.0 || z_range.1 <= z_range.0 {
            return Err(Error::InvalidArgument(format!(
                "grid ranges must be finite and increasing, got x {x_range:?}, z {z_range:?}"
            )));
        }
        if resolution.0 < 2 || resolution.1 < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 samples per axis, got {resolution:?}"
            )));
        }
        Ok(Self {
            x_range,
            z_range,
            resolution,
            fixed_y,
        })
    }

    /// Square window of side `side` centred on `(center.x, center.z)`.
    pub fn centered(center: Vec3, side: f64, samples: usize) -> Result<Self> {
        let h = side / 2.0;
        Self::new(
            (center.x - h, center.x + h),
            (center.z - h, center.z + h),
            (samples, samples),
            center.y,
        )
    }

    pub fn len(&self) -> usize {
        self.resolution.0 * self.resolution.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(range: (f64, f64), n: usize, i: usize) -> f64 {
        if i + 1 == n {
            range.1
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    /// Cell `index` in row-major order (`x` fastest).
    pub fn point(&self, index: usize) -> Vec3 {
        let (nx, nz) = self.resolution;
        Vec3::new(
            Self::axis(self.x_range, nx, index % nx),
            self.fixed_y,
            Self::axis(self.z_range, nz, index / nx),
        )
    }
}

/// Precomputed channels of UE 1, shared by every cell.
struct Context<'a> {
    geometry: &'a ArrayGeometry,
    wavelength: f64,
    powers: [f64; 2],
    noise: f64,
    ue1_exact: ChannelVector,
    ue1_far_field: ChannelVector,
}

fn is_unplaceable(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidSource { .. } | Error::ReactiveNearField { .. }
    )
}

impl Context<'_> {
    /// Gains for each (scheme, design model) pair at one UE 2 position.
    fn cell(&self, position: Vec3, pairs: &[(CombinerScheme, ChannelModel)]) -> Result<Vec<f64>> {
        let nan = || Ok(vec![f64::NAN; pairs.len()]);
        let source = match SourceLocation::from_position(position) {
            Ok(s) => s,
            Err(e) if is_unplaceable(&e) => return nan(),
            Err(e) => return Err(e),
        };
        let h2 = match exact_channel(&source, self.geometry, self.wavelength) {
            Ok(h) => h,
            Err(e) if is_unplaceable(&e) => return nan(),
            Err(e) => return Err(e),
        };
        let h2_far_field = if pairs.iter().any(|p| p.1 == ChannelModel::FarField) {
            Some(farfield_channel(&source, self.geometry, self.wavelength)?)
        } else {
            None
        };
        pairs
            .iter()
            .map(|&(scheme, model)| {
                let design = match model {
                    ChannelModel::Exact => [self.ue1_exact.clone(), h2.clone()],
                    ChannelModel::FarField => [
                        self.ue1_far_field.clone(),
                        h2_far_field.clone().expect("far-field channel"),
                    ],
                };
                let v = design_combiners(scheme, &design, &self.powers, self.noise)?;
                normalized_gain(v.vector(0), &h2)
            })
            .collect()
    }

    fn grid(
        &self,
        grid: &GridSpec,
        pairs: &[(CombinerScheme, ChannelModel)],
    ) -> Result<Vec<Vec<f64>>> {
        exec::try_map_range(grid.len(), |i| self.cell(grid.point(i), pairs))
    }
}

fn pairs_of(config: &RunConfig) -> Vec<(CombinerScheme, ChannelModel)> {
    let i = &config.interference;
    i.schemes
        .iter()
        .flat_map(|&s| i.design_models.iter().map(move |&m| (s, m)))
        .collect()
}

/// Default full grid from the configuration.
pub fn configured_grid(config: &RunConfig) -> Result<GridSpec> {
    let i = &config.interference;
    GridSpec::new(
        (i.x_min_m, i.x_max_m),
        (i.z_min_m, i.z_max_m),
        (i.nx, i.nz),
        i.ue1_position_m[1],
    )
}

/// Magnified window around `ue1` from the configuration.
pub fn configured_zoom(config: &RunConfig, ue1: Vec3) -> Result<GridSpec> {
    let i = &config.interference;
    GridSpec::centered(
        ue1,
        i.zoom_side_wavelengths * config.scenario.wavelength(),
        i.zoom_n,
    )
}

fn build(
    config: &RunConfig,
    ue1: Vec3,
    grid: &GridSpec,
    zoom: Option<&GridSpec>,
    pairs: &[(CombinerScheme, ChannelModel)],
) -> Result<ExperimentResult> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::Config(
            "interference map needs at least one scheme and design model".into(),
        ));
    }
    let geometry = config.scenario.geometry()?;
    let wavelength = config.scenario.wavelength();
    let source = SourceLocation::from_position(ue1)?;
    let p = config.scenario.ue_power_w();
    let ctx = Context {
        geometry: &geometry,
        wavelength,
        powers: [p, p],
        noise: config.scenario.noise_power_w(),
        ue1_exact: exact_channel(&source, &geometry, wavelength)?,
        ue1_far_field: farfield_channel(&source, &geometry, wavelength)?,
    };

    let mut result = ExperimentResult::new("interference_map", config);
    let gains = ctx.grid(grid, pairs)?;
    let mut table = RecordTable::new(
        "interference_map",
        &["scheme", "design_model", "x_m", "z_m", "interference_gain"],
    );
    for (j, &(scheme, model)) in pairs.iter().enumerate() {
        for (i, g) in gains.iter().enumerate() {
            let pt = grid.point(i);
            table.push(vec![
                scheme.as_str().into(),
                model.as_str().into(),
                pt.x.into(),
                pt.z.into(),
                g[j].into(),
            ]);
        }
    }
    result.tables.push(table);

    if let Some(zoom) = zoom {
        let gains = ctx.grid(zoom, pairs)?;
        let mut table = RecordTable::new(
            "interference_zoom",
            &[
                "scheme",
                "design_model",
                "dx_wavelengths",
                "dz_wavelengths",
                "x_m",
                "z_m",
                "interference_gain",
            ],
        );
        for (j, &(scheme, model)) in pairs.iter().enumerate() {
            for (i, g) in gains.iter().enumerate() {
                let pt = zoom.point(i);
                table.push(vec![
                    scheme.as_str().into(),
                    model.as_str().into(),
                    ((pt.x - ue1.x) / wavelength).into(),
                    ((pt.z - ue1.z) / wavelength).into(),
                    pt.x.into(),
                    pt.z.into(),
                    g[j].into(),
                ]);
            }
        }
        result.tables.push(table);
    }
    result
        .summary
        .insert("num_antennas".into(), geometry.len().into());
    result
        .summary
        .insert("wavelength_m".into(), wavelength.into());
    Ok(result)
}

/// One (scheme, design model) heat map over `grid`.
pub fn run_interference_map(
    config: &RunConfig,
    ue1: Vec3,
    grid: &GridSpec,
    scheme: CombinerScheme,
    design_model: ChannelModel,
) -> Result<ExperimentResult> {
    build(config, ue1, grid, None, &[(scheme, design_model)])
}

/// Every configured (scheme, design model) pair over the configured grid
/// and its magnified window around UE 1.
pub fn run_interference_maps(config: &RunConfig) -> Result<ExperimentResult> {
    let ue1 = Vec3::from(config.interference.ue1_position_m);
    let grid = configured_grid(config)?;
    let zoom = configured_zoom(config, ue1)?;
    build(config, ue1, &grid, Some(&zoom), &pairs_of(config))
}
