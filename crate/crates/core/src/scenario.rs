//! Single-cell multi-UE drops and the matched/mismatched evaluation
//! protocol.
//!
//! Combiners may be designed from either channel model, but link metrics
//! are always computed on the exact channels: the far-field model is only
//! what the receiver believes, the exact model is what the air does.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{channel, ChannelModel, ChannelVector};
use crate::combining::{design_combiners, CombinerScheme, CombinerSet};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{ArrayGeometry, SourceLocation, Vec3};
use crate::metrics::{link_metrics, LinkMetrics};
use crate::units::{dbm_to_watts, wavelength};

/// Array layout expressed relative to the carrier wavelength, so the same
/// description can be reused across a frequency sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    /// Horizontal aperture used when `n_h` is not given.
    pub length_h_m: f64,
    /// Vertical aperture used when `n_v` is not given.
    pub length_v_m: f64,
    pub n_h: Option<usize>,
    pub n_v: Option<usize>,
    /// Patch side `√A` in wavelengths.
    pub element_side_wavelengths: f64,
    /// Gap between horizontal neighbours in wavelengths.
    pub spacing_h_wavelengths: f64,
    /// Gap between vertical neighbours in wavelengths.
    pub spacing_v_wavelengths: f64,
}

impl Default for ArraySpec {
    fn default() -> Self {
        Self {
            length_h_m: 0.5,
            length_v_m: 1.0,
            n_h: None,
            n_v: None,
            element_side_wavelengths: 0.25,
            spacing_h_wavelengths: 0.5,
            spacing_v_wavelengths: 2.0,
        }
    }
}

impl ArraySpec {
    pub fn build(&self, wavelength: f64) -> Result<ArrayGeometry> {
        let side = self.element_side_wavelengths * wavelength;
        let spacing_h = self.spacing_h_wavelengths * wavelength;
        let spacing_v = self.spacing_v_wavelengths * wavelength;
        let n_h = self.n_h.unwrap_or_else(|| {
            crate::geometry::antennas_for_length(self.length_h_m, side, spacing_h)
        });
        let n_v = self.n_v.unwrap_or_else(|| {
            crate::geometry::antennas_for_length(self.length_v_m, side, spacing_v)
        });
        ArrayGeometry::new(n_h, n_v, side * side, spacing_h, spacing_v)
    }
}

/// Physical and Monte Carlo parameters of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_power_dbm: f64,
    pub ue_power_dbm: f64,
    pub bs_height_m: f64,
    pub num_ues: usize,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub sector_halfwidth_rad: f64,
    pub array: ArraySpec,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 28e9,
            bandwidth_hz: 100e6,
            noise_power_dbm: -87.0,
            ue_power_dbm: 20.0,
            bs_height_m: 10.0,
            num_ues: 100,
            cell_radius_m: 230.0,
            min_distance_m: 15.0,
            sector_halfwidth_rad: std::f64::consts::FRAC_PI_3,
            array: ArraySpec::default(),
            seed: 1,
            trials: 200,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_positive = [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("cell_radius_m", self.cell_radius_m),
            ("sector_halfwidth_rad", self.sector_halfwidth_rad),
            (
                "array.element_side_wavelengths",
                self.array.element_side_wavelengths,
            ),
            ("array.length_h_m", self.array.length_h_m),
            ("array.length_v_m", self.array.length_v_m),
        ];
        for (name, v) in finite_positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("noise_power_dbm", self.noise_power_dbm),
            ("ue_power_dbm", self.ue_power_dbm),
            ("bs_height_m", self.bs_height_m),
            ("min_distance_m", self.min_distance_m),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.min_distance_m < 0.0 || self.min_distance_m >= self.cell_radius_m {
            return Err(Error::Config(format!(
                "need 0 <= min_distance_m < cell_radius_m, got {} and {}",
                self.min_distance_m, self.cell_radius_m
            )));
        }
        if self.sector_halfwidth_rad >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Config(
                "sector_halfwidth_rad must be below π/2 (UEs must be in front of the array)".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.num_ues == 0 {
            return Err(Error::Config("num_ues must be at least 1".into()));
        }
        if self.array.n_h == Some(0) || self.array.n_v == Some(0) {
            return Err(Error::Config(
                "array.n_h and array.n_v must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_hz)
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    pub fn ue_power_w(&self) -> f64 {
        dbm_to_watts(self.ue_power_dbm)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        self.array.build(self.wavelength())
    }
}

/// UE positions of one Monte Carlo drop.
#[derive(Debug, Clone, PartialEq)]
pub struct UeDrop {
    pub sources: Vec<SourceLocation>,
    pub seed_used: u64,
    pub trial_index: u64,
}

/// Random generator for trial `trial_index`: the base seed selects the key,
/// the trial selects an independent ChaCha stream.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Draws `num_ues` UEs uniformly over the sector annulus at ground level
/// (`y = −bs_height_m`).
///
/// Azimuth is uniform on `[−halfwidth, +halfwidth)` and the ground radius
/// has density proportional to `r` on `[min_distance, R]`.
pub fn drop_ues(config: &ScenarioConfig, trial_index: u64) -> Result<UeDrop> {
    config.validate()?;
    let mut rng = trial_rng(config.seed, trial_index);
    let h = config.sector_halfwidth_rad;
    let r2_min = config.min_distance_m.powi(2);
    let r2_max = config.cell_radius_m.powi(2);
    let sources = (0..config.num_ues)
        .map(|_| {
            let azimuth: f64 = rng.random_range(-h..h);
            let u: f64 = rng.random();
            let r = (r2_min + u * (r2_max - r2_min)).sqrt();
            let (s, c) = azimuth.sin_cos();
            SourceLocation::from_position(Vec3::new(r * s, -config.bs_height_m, r * c))
        })
        .collect::<Result<_>>()?;
    Ok(UeDrop {
        sources,
        seed_used: config.seed,
        trial_index,
    })
}

/// Channels known to come from the exact model; the only input accepted
/// for metric evaluation.
#[derive(Debug, Clone)]
pub struct ExactChannels(Vec<ChannelVector>);

impl ExactChannels {
    pub fn new(channels: Vec<ChannelVector>) -> Result<Self> {
        if let Some(i) = channels
            .iter()
            .position(|h| h.model() != ChannelModel::Exact)
        {
            return Err(Error::InvalidArgument(format!(
                "channel {i} is {}; metrics must be evaluated on exact channels",
                channels[i].model()
            )));
        }
        Ok(Self(channels))
    }

    pub fn as_slice(&self) -> &[ChannelVector] {
        &self.0
    }

    pub fn evaluate(
        &self,
        combiners: &CombinerSet,
        powers: &[f64],
        noise_power: f64,
    ) -> Result<Vec<LinkMetrics>> {
        if combiners.len() != self.0.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} combiners for {} UEs",
                combiners.len(),
                self.0.len()
            )));
        }
        (0..self.0.len())
            .map(|k| link_metrics(combiners.vector(k), &self.0, powers, noise_power, k))
            .collect()
    }
}

/// Reusable evaluation context: the scenario plus the array it implies.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: ScenarioConfig,
    geometry: ArrayGeometry,
    wavelength: f64,
}

/// Metrics of one drop under one (scheme, design model) pair.
#[derive(Debug, Clone)]
pub struct DropEvaluation {
    pub scheme: CombinerScheme,
    pub design_model: ChannelModel,
    pub metrics: Vec<LinkMetrics>,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let geometry = config.geometry()?;
        let wavelength = config.wavelength();
        Ok(Self {
            config,
            geometry,
            wavelength,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn drop_ues(&self, trial_index: u64) -> Result<UeDrop> {
        drop_ues(&self.config, trial_index)
    }

    pub fn channels(&self, drop: &UeDrop, model: ChannelModel) -> Result<Vec<ChannelVector>> {
        exec::try_map_range(drop.sources.len(), |k| {
            channel(model, &drop.sources[k], &self.geometry, self.wavelength)
        })
    }

    fn powers(&self, k: usize) -> Vec<f64> {
        vec![self.config.ue_power_w(); k]
    }

    /// Designs combiners from `design_model` channels and evaluates them on
    /// the exact channels.
    pub fn evaluate_drop(
        &self,
        drop: &UeDrop,
        scheme: CombinerScheme,
        design_model: ChannelModel,
    ) -> Result<Vec<LinkMetrics>> {
        let exact = ExactChannels::new(self.channels(drop, ChannelModel::Exact)?)?;
        let design = match design_model {
            ChannelModel::Exact => exact.as_slice().to_vec(),
            ChannelModel::FarField => self.channels(drop, ChannelModel::FarField)?,
        };
        self.evaluate_with(&exact, &design, scheme)
    }

    /// Evaluates every (scheme, design model) pair on one drop, computing
    /// each channel set once.
    pub fn evaluate_drop_all(
        &self,
        drop: &UeDrop,
        schemes: &[CombinerScheme],
        design_models: &[ChannelModel],
    ) -> Result<Vec<DropEvaluation>> {
        let exact = ExactChannels::new(self.channels(drop, ChannelModel::Exact)?)?;
        let far_field = if design_models.contains(&ChannelModel::FarField) {
            Some(self.channels(drop, ChannelModel::FarField)?)
        } else {
            None
        };
        let mut out = Vec::with_capacity(schemes.len() * design_models.len());
        for &scheme in schemes {
            for &design_model in design_models {
                let design = match design_model {
                    ChannelModel::Exact => exact.as_slice(),
                    ChannelModel::FarField => far_field.as_deref().expect("far-field channels"),
                };
                out.push(DropEvaluation {
                    scheme,
                    design_model,
                    metrics: self.evaluate_with(&exact, design, scheme)?,
                });
            }
        }
        Ok(out)
    }

    fn evaluate_with(
        &self,
        exact: &ExactChannels,
        design: &[ChannelVector],
        scheme: CombinerScheme,
    ) -> Result<Vec<LinkMetrics>> {
        let powers = self.powers(design.len());
        let noise = self.config.noise_power_w();
        let combiners = design_combiners(scheme, design, &powers, noise)?;
        exact.evaluate(&combiners, &powers, noise)
    }
}

/// One-shot form of [`Simulation::evaluate_drop`].
pub fn evaluate_drop(
    drop: &UeDrop,
    config: &ScenarioConfig,
    scheme: CombinerScheme,
    design_model: ChannelModel,
) -> Result<Vec<LinkMetrics>> {
    Simulation::new(config.clone())?.evaluate_drop(drop, scheme, design_model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::farfield_channel;

    fn small_config(k: usize) -> ScenarioConfig {
        ScenarioConfig {
            num_ues: k,
            array: ArraySpec {
                n_h: Some(8),
                n_v: Some(4),
                ..ArraySpec::default()
            },
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn defaults_are_valid() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        let g = c.geometry().unwrap();
        assert_eq!((g.n_h(), g.n_v()), (62, 42));
        assert!((c.noise_power_w() - 10f64.powf(-11.7)).abs() < 1e-24);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = ScenarioConfig::default();
        c.min_distance_m = 300.0;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::default();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::default();
        c.noise_power_dbm = f64::NAN;
        assert!(c.validate().is_err());
    }

    #[test]
    fn drops_are_deterministic_and_distinct() {
        let c = small_config(5);
        let a = drop_ues(&c, 3).unwrap();
        let b = drop_ues(&c, 3).unwrap();
        assert_eq!(a, b);
        let other = drop_ues(&c, 4).unwrap();
        assert_ne!(a.sources, other.sources);
    }

    #[test]
    fn degenerate_annulus_pins_the_radius() {
        let mut c = small_config(1);
        c.min_distance_m = c.cell_radius_m - 1e-9;
        let d = drop_ues(&c, 0).unwrap();
        let p = d.sources[0].position();
        assert!((p.x.hypot(p.z) - c.cell_radius_m).abs() < 1e-6);
    }

    #[test]
    fn drops_stay_in_the_sector() {
        let c = small_config(2000);
        let d = drop_ues(&c, 9).unwrap();
        for s in &d.sources {
            let p = s.position();
            let r = p.x.hypot(p.z);
            assert!(r >= c.min_distance_m - 1e-9 && r <= c.cell_radius_m + 1e-9);
            assert!(s.azimuth() >= -c.sector_halfwidth_rad && s.azimuth() < c.sector_halfwidth_rad);
            assert_eq!(p.y, -c.bs_height_m);
        }
    }

    #[test]
    fn ground_radius_is_area_uniform() {
        let c = small_config(100_000);
        let d = drop_ues(&c, 0).unwrap();
        let (a, b) = (c.min_distance_m.powi(2), c.cell_radius_m.powi(2));
        let mut u: Vec<f64> = d
            .sources
            .iter()
            .map(|s| {
                let p = s.position();
                (p.x * p.x + p.z * p.z - a) / (b - a)
            })
            .collect();
        u.sort_by(f64::total_cmp);
        let n = u.len() as f64;
        let ks = u
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS statistic {ks}");
    }

    #[test]
    fn single_user_mmse_se_is_snr_limited() {
        let c = small_config(1);
        let sim = Simulation::new(c.clone()).unwrap();
        let d = sim.drop_ues(0).unwrap();
        let m = sim
            .evaluate_drop(&d, CombinerScheme::Mmse, ChannelModel::Exact)
            .unwrap();
        let h = &sim.channels(&d, ChannelModel::Exact).unwrap()[0];
        let expected =
            (c.ue_power_w() * h.norm_sqr() / c.noise_power_w()).ln_1p() / std::f64::consts::LN_2;
        assert!((m[0].se - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn metrics_reject_far_field_channels() {
        let c = small_config(2);
        let sim = Simulation::new(c).unwrap();
        let d = sim.drop_ues(1).unwrap();
        let ff: Vec<_> = d
            .sources
            .iter()
            .map(|s| farfield_channel(s, sim.geometry(), sim.wavelength()).unwrap())
            .collect();
        assert!(ExactChannels::new(ff).is_err());
    }

    #[test]
    fn permuting_ues_permutes_metrics() {
        let c = small_config(4);
        let sim = Simulation::new(c).unwrap();
        let d = sim.drop_ues(2).unwrap();
        let mut rev = d.clone();
        rev.sources.reverse();
        for scheme in CombinerScheme::ALL {
            for model in ChannelModel::ALL {
                let a = sim.evaluate_drop(&d, scheme, model).unwrap();
                let b = sim.evaluate_drop(&rev, scheme, model).unwrap();
                for (x, y) in a.iter().zip(b.iter().rev()) {
                    assert!((x.sinr / y.sinr - 1.0).abs() < 1e-9, "{scheme} {model}");
                }
            }
        }
    }

    #[test]
    fn matched_mmse_beats_every_other_combiner() {
        let c = small_config(6);
        let sim = Simulation::new(c).unwrap();
        for t in 0..5 {
            let d = sim.drop_ues(t).unwrap();
            let all = sim
                .evaluate_drop_all(&d, &CombinerScheme::ALL, &ChannelModel::ALL)
                .unwrap();
            let best = all
                .iter()
                .find(|e| e.scheme == CombinerScheme::Mmse && e.design_model == ChannelModel::Exact)
                .unwrap();
            for e in &all {
                for (b, o) in best.metrics.iter().zip(&e.metrics) {
                    assert!(b.sinr >= o.sinr * (1.0 - 1e-9));
                }
            }
        }
    }

    #[test]
    fn shared_and_single_evaluation_agree() {
        let c = small_config(3);
        let sim = Simulation::new(c.clone()).unwrap();
        let d = sim.drop_ues(7).unwrap();
        let all = sim
            .evaluate_drop_all(&d, &CombinerScheme::ALL, &ChannelModel::ALL)
            .unwrap();
        for e in all {
            let single = evaluate_drop(&d, &c, e.scheme, e.design_model).unwrap();
            assert_eq!(single, e.metrics);
        }
    }
}
