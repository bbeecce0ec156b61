//! Monte Carlo uplink SE over random UE drops.
//!
//! Each trial drops `K` UEs in the sector, designs MR and MMSE combiners
//! from exact and far-field channels, and evaluates the per-UE SE on the
//! exact channels. Trials run in parallel and are reassembled in trial
//! order.
//!
//! `se_samples` columns: `carrier_hz, num_ues, scheme, design_model, trial,
//! ue, sinr, se_bps_hz`.
//! `se_cdf` columns: `carrier_hz, num_ues, scheme, design_model, rank,
//! se_bps_hz, cdf`, with `cdf = rank / samples` over ascending SE.
//! `se_summary` columns: `carrier_hz, num_ues, scheme, design_model,
//! samples, mean_se_bps_hz, p5_se_bps_hz, median_se_bps_hz`.
//! `se_vs_k` columns: `num_ues, scheme, design_model, samples,
//! mean_se_bps_hz`.

use crate::channel::ChannelModel;
use crate::combining::CombinerScheme;
use crate::config::RunConfig;
use crate::error::Result;
use crate::exec;
use crate::scenario::{DropEvaluation, Simulation};

use super::{ExperimentResult, RecordTable};

/// Pooled SE samples of one (carrier, K, scheme, design model) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SeSamples {
    pub carrier_hz: f64,
    pub num_ues: usize,
    pub scheme: CombinerScheme,
    pub design_model: ChannelModel,
    /// `(trial, ue, sinr, se)` in trial-major order.
    pub samples: Vec<(u64, usize, f64, f64)>,
}

impl SeSamples {
    pub fn se_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.3).collect()
    }

    pub fn sorted_se(&self) -> Vec<f64> {
        let mut v = self.se_values();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn mean_se(&self) -> f64 {
        self.samples.iter().map(|s| s.3).sum::<f64>() / self.samples.len() as f64
    }
}

/// Linear-interpolation quantile of ascending `sorted` at `q ∈ [0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Runs every trial for one (carrier, K) and pools the samples per
/// (scheme, design model).
pub fn collect_samples(
    config: &RunConfig,
    carrier_hz: f64,
    num_ues: usize,
) -> Result<Vec<SeSamples>> {
    let mut scenario = config.scenario.clone();
    scenario.carrier_hz = carrier_hz;
    scenario.num_ues = num_ues;
    let sim = Simulation::new(scenario)?;
    let schemes = CombinerScheme::ALL;
    let models = ChannelModel::ALL;
    let trials: Vec<Vec<DropEvaluation>> = exec::try_map_range(sim.config().trials, |t| {
        let drop = sim.drop_ues(t as u64)?;
        sim.evaluate_drop_all(&drop, &schemes, &models)
    })?;

    let mut out: Vec<SeSamples> = schemes
        .iter()
        .flat_map(|&scheme| {
            models.iter().map(move |&design_model| SeSamples {
                carrier_hz,
                num_ues,
                scheme,
                design_model,
                samples: Vec::new(),
            })
        })
        .collect();
    for (t, evaluations) in trials.iter().enumerate() {
        for (cell, evaluation) in out.iter_mut().zip(evaluations) {
            debug_assert_eq!(
                (cell.scheme, cell.design_model),
                (evaluation.scheme, evaluation.design_model)
            );
            cell.samples.extend(
                evaluation
                    .metrics
                    .iter()
                    .enumerate()
                    .map(|(k, m)| (t as u64, k, m.sinr, m.se)),
            );
        }
    }
    Ok(out)
}

fn key_cells(s: &SeSamples) -> [super::Cell; 4] {
    [
        s.carrier_hz.into(),
        s.num_ues.into(),
        s.scheme.as_str().into(),
        s.design_model.as_str().into(),
    ]
}

/// SE samples, empirical CDFs and summaries for every configured carrier
/// and UE count.
pub fn run_se_cdf(config: &RunConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut result = ExperimentResult::new("se_cdf", config);
    let mut samples_table = RecordTable::new(
        "se_samples",
        &[
            "carrier_hz",
            "num_ues",
            "scheme",
            "design_model",
            "trial",
            "ue",
            "sinr",
            "se_bps_hz",
        ],
    );
    let mut cdf_table = RecordTable::new(
        "se_cdf",
        &[
            "carrier_hz",
            "num_ues",
            "scheme",
            "design_model",
            "rank",
            "se_bps_hz",
            "cdf",
        ],
    );
    let mut summary_table = RecordTable::new(
        "se_summary",
        &[
            "carrier_hz",
            "num_ues",
            "scheme",
            "design_model",
            "samples",
            "mean_se_bps_hz",
            "p5_se_bps_hz",
            "median_se_bps_hz",
        ],
    );
    for &carrier in &config.se.carriers_hz {
        for &k in &config.se.k_values {
            for cell in collect_samples(config, carrier, k)? {
                let key = key_cells(&cell);
                for &(trial, ue, sinr, se) in &cell.samples {
                    let mut row = key.to_vec();
                    row.extend([trial.into(), ue.into(), sinr.into(), se.into()]);
                    samples_table.push(row);
                }
                let sorted = cell.sorted_se();
                let n = sorted.len();
                for (i, &se) in sorted.iter().enumerate() {
                    let mut row = key.to_vec();
                    row.extend([
                        (i + 1).into(),
                        se.into(),
                        ((i + 1) as f64 / n as f64).into(),
                    ]);
                    cdf_table.push(row);
                }
                let mut row = key.to_vec();
                row.extend([
                    n.into(),
                    cell.mean_se().into(),
                    quantile(&sorted, 0.05).into(),
                    quantile(&sorted, 0.5).into(),
                ]);
                summary_table.push(row);
            }
        }
    }
    result
        .tables
        .extend([samples_table, cdf_table, summary_table]);
    Ok(result)
}

/// Mean per-UE SE against the number of UEs at the scenario carrier.
pub fn run_se_vs_k(config: &RunConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut result = ExperimentResult::new("se_vs_k", config);
    let mut table = RecordTable::new(
        "se_vs_k",
        &[
            "num_ues",
            "scheme",
            "design_model",
            "samples",
            "mean_se_bps_hz",
        ],
    );
    for &k in &config.se_vs_k.k_values {
        for cell in collect_samples(config, config.scenario.carrier_hz, k)? {
            table.push(vec![
                k.into(),
                cell.scheme.as_str().into(),
                cell.design_model.as_str().into(),
                cell.samples.len().into(),
                cell.mean_se().into(),
            ]);
        }
    }
    result.tables.push(table);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        let mut c = RunConfig::default();
        c.scenario.array.n_h = Some(16);
        c.scenario.array.n_v = Some(8);
        c.scenario.trials = 3;
        c.se.carriers_hz = vec![28e9];
        c.se.k_values = vec![4];
        c.se_vs_k.k_values = vec![1, 4];
        c
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert!((quantile(&v, 0.05) - 1.2).abs() < 1e-12);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn tables_have_expected_sizes() {
        let r = run_se_cdf(&small()).unwrap();
        assert_eq!(r.table("se_samples").unwrap().len(), 4 * 3 * 4);
        assert_eq!(r.table("se_cdf").unwrap().len(), 4 * 3 * 4);
        assert_eq!(r.table("se_summary").unwrap().len(), 4);
        let cdf = r.table("se_cdf").unwrap().column_f64("cdf");
        assert_eq!(cdf[11], 1.0);
        let se = r.table("se_cdf").unwrap().column_f64("se_bps_hz");
        assert!(se[..12].windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn single_ue_exact_design_coincides() {
        let r = run_se_vs_k(&small()).unwrap();
        let t = r.table("se_vs_k").unwrap();
        let k = t.column_f64("num_ues");
        let se = t.column_f64("mean_se_bps_hz");
        let model = t.column_index("design_model").unwrap();
        let exact: Vec<f64> = t
            .rows
            .iter()
            .zip(k.iter().zip(&se))
            .filter(|(r, (k, _))| **k == 1.0 && r[model].as_str() == Some("exact"))
            .map(|(_, (_, se))| *se)
            .collect();
        assert_eq!(exact.len(), 2);
        assert!((exact[0] - exact[1]).abs() < 1e-9 * exact[0]);
    }

    #[test]
    fn samples_are_reproducible() {
        let a = collect_samples(&small(), 28e9, 4).unwrap();
        let b = collect_samples(&small(), 28e9, 4).unwrap();
        assert_eq!(a, b);
    }
}
