//! Single-UE normalized channel gain versus distance.
//!
//! UE 1 sits at `[0, −b, d]` for log-spaced `d`. The MR combiner is designed
//! either from the exact channel (which attains `‖h‖²`) or from the
//! far-field reconstruction, and its gain `|vᴴh|²/‖v‖²` is measured on the
//! exact channel.
//!
//! `gain_vs_distance` columns: `carrier_hz, distance_m, design_model,
//! normalized_gain`.
//! `gain_fraunhofer` columns: `carrier_hz, wavelength_m, n_h, n_v,
//! num_antennas, length_h_m, length_v_m, fraunhofer_m, fraunhofer_nominal_m`.
//! The nominal distance uses the configured aperture lengths rather than
//! the fitted array.

use crate::channel::{exact_channel, farfield_channel, ChannelModel};
use crate::combining::mr_combiner;
use crate::config::RunConfig;
use crate::error::Result;
use crate::exec;
use crate::geometry::{
    fraunhofer_distance, fraunhofer_distance_from_lengths, SourceLocation, Vec3,
};
use crate::metrics::normalized_gain;
use crate::units::wavelength;

use super::{ExperimentResult, RecordTable};

/// `count` points from `min` to `max`, equally spaced in log scale.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Vec<f64> {
    let ratio = (max / min).ln();
    (0..count)
        .map(|i| {
            if i + 1 == count {
                max
            } else {
                min * (ratio * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Largest interior local maximum of a sampled curve, as `(index, value)`.
pub fn local_maximum(values: &[f64]) -> Option<(usize, f64)> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .map(|i| (i, values[i]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

pub fn run_gain_vs_distance(config: &RunConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let params = &config.gain;
    let distances = log_spaced(
        params.distance_min_m,
        params.distance_max_m,
        params.num_distances,
    );
    let geometries = params
        .carriers_hz
        .iter()
        .map(|&f| config.scenario.array.build(wavelength(f)))
        .collect::<Result<Vec<_>>>()?;

    let height = config.scenario.bs_height_m;
    let n_d = distances.len();
    let gains = exec::try_map_range(geometries.len() * n_d, |task| {
        let (c, i) = (task / n_d, task % n_d);
        let lambda = wavelength(params.carriers_hz[c]);
        let source = SourceLocation::from_position(Vec3::new(0.0, -height, distances[i]))?;
        let h = exact_channel(&source, &geometries[c], lambda)?;
        let ff = farfield_channel(&source, &geometries[c], lambda)?;
        let matched = mr_combiner(std::slice::from_ref(&h))?;
        let mismatched = mr_combiner(std::slice::from_ref(&ff))?;
        Ok::<_, crate::Error>([
            normalized_gain(matched.vector(0), &h)?,
            normalized_gain(mismatched.vector(0), &h)?,
        ])
    })?;

    let mut result = ExperimentResult::new("gain_vs_distance", config);
    let mut table = RecordTable::new(
        "gain_vs_distance",
        &[
            "carrier_hz",
            "distance_m",
            "design_model",
            "normalized_gain",
        ],
    );
    for (task, pair) in gains.iter().enumerate() {
        let (c, i) = (task / n_d, task % n_d);
        for (model, g) in ChannelModel::ALL.iter().zip(pair) {
            table.push(vec![
                params.carriers_hz[c].into(),
                distances[i].into(),
                model.as_str().into(),
                (*g).into(),
            ]);
        }
    }

    let mut fraunhofer = RecordTable::new(
        "gain_fraunhofer",
        &[
            "carrier_hz",
            "wavelength_m",
            "n_h",
            "n_v",
            "num_antennas",
            "length_h_m",
            "length_v_m",
            "fraunhofer_m",
            "fraunhofer_nominal_m",
        ],
    );
    for (&f, g) in params.carriers_hz.iter().zip(&geometries) {
        let lambda = wavelength(f);
        fraunhofer.push(vec![
            f.into(),
            lambda.into(),
            g.n_h().into(),
            g.n_v().into(),
            g.len().into(),
            g.length_h().into(),
            g.length_v().into(),
            fraunhofer_distance(g, lambda).into(),
            fraunhofer_distance_from_lengths(
                config.scenario.array.length_h_m,
                config.scenario.array.length_v_m,
                lambda,
            )
            .into(),
        ]);
    }
    result.tables.push(table);
    result.tables.push(fraunhofer);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spacing_hits_endpoints() {
        let d = log_spaced(10.0, 500.0, 200);
        assert_eq!(d.len(), 200);
        assert_eq!(d[0], 10.0);
        assert_eq!(d[199], 500.0);
        let r0 = d[1] / d[0];
        assert!(d.windows(2).all(|w| (w[1] / w[0] / r0 - 1.0).abs() < 1e-9));
    }

    #[test]
    fn local_maximum_ignores_edges() {
        assert_eq!(local_maximum(&[3.0, 2.0, 1.0]), None);
        assert_eq!(local_maximum(&[1.0, 3.0, 2.0, 5.0]), Some((1, 3.0)));
        assert_eq!(local_maximum(&[1.0, 3.0, 2.0, 4.0, 1.0]), Some((3, 4.0)));
    }

    #[test]
    fn mismatched_gain_never_exceeds_matched() {
        let mut config = RunConfig::default();
        config.gain.carriers_hz = vec![28e9];
        config.gain.num_distances = 20;
        let r = run_gain_vs_distance(&config).unwrap();
        let t = r.table("gain_vs_distance").unwrap();
        let g = t.column_f64("normalized_gain");
        for pair in g.chunks(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12));
        }
        // Below the Fraunhofer distance at 28 GHz the mismatch costs gain.
        assert!(g[1] < 0.9 * g[0]);
        let f = r.table("gain_fraunhofer").unwrap();
        assert_eq!(f.column_f64("num_antennas"), vec![2604.0]);
    }
}
