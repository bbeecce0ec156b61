use std::path::Path;

use nearfield_core::config::{self, RunConfig};
use nearfield_core::experiments::{self, ExperimentResult};

fn small() -> RunConfig {
    let mut c = RunConfig::default();
    c.scenario.array.n_h = Some(10);
    c.scenario.array.n_v = Some(6);
    c.scenario.trials = 3;
    c.scenario.seed = 11;
    c.deviation.carriers_hz = vec![28e9];
    c.gain.carriers_hz = vec![5e9, 71e9];
    c.gain.num_distances = 12;
    c.interference.nx = 6;
    c.interference.nz = 5;
    c.interference.zoom_n = 3;
    c.se.carriers_hz = vec![28e9];
    c.se.k_values = vec![5];
    c.se_vs_k.k_values = vec![2, 5];
    c
}

fn run_all(config: &RunConfig) -> Vec<ExperimentResult> {
    vec![
        experiments::run_deviation_study(config).unwrap(),
        experiments::run_gain_vs_distance(config).unwrap(),
        experiments::run_interference_maps(config).unwrap(),
        experiments::run_se_cdf(config).unwrap(),
        experiments::run_se_vs_k(config).unwrap(),
    ]
}

fn csv(results: &[ExperimentResult]) -> Vec<Vec<u8>> {
    results
        .iter()
        .flat_map(|r| r.tables.iter().map(|t| t.to_csv().unwrap()))
        .collect()
}

fn header(dir: &Path, table: &str) -> String {
    std::fs::read_to_string(dir.join(format!("{table}.csv")))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn sidecars_reload_to_identical_results() {
    let config = small();
    let dir = tempfile::tempdir().unwrap();
    for result in run_all(&config) {
        result.write(dir.path()).unwrap();
        let sidecar = dir.path().join(format!("{}.json", result.experiment_id));
        let reloaded = config::load(&sidecar, &[], None).unwrap();
        assert_eq!(reloaded, config, "{}", result.experiment_id);
    }
    let again = run_all(&config::load(&dir.path().join("se_cdf.json"), &[], None).unwrap());
    assert_eq!(csv(&again), csv(&run_all(&config)));
}

#[test]
fn column_layouts_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    for result in run_all(&small()) {
        result.write(dir.path()).unwrap();
    }
    let expected = [
        ("deviation", "carrier_hz,antenna,x_m,y_m,amplitude_db,phase_rad"),
        (
            "deviation_summary",
            "carrier_hz,num_antennas,reference_antenna,fraunhofer_m,max_abs_amplitude_db,max_abs_phase_rad",
        ),
        ("gain_vs_distance", "carrier_hz,distance_m,design_model,normalized_gain"),
        (
            "gain_fraunhofer",
            "carrier_hz,wavelength_m,n_h,n_v,num_antennas,length_h_m,length_v_m,fraunhofer_m,fraunhofer_nominal_m",
        ),
        ("interference_map", "scheme,design_model,x_m,z_m,interference_gain"),
        (
            "interference_zoom",
            "scheme,design_model,dx_wavelengths,dz_wavelengths,x_m,z_m,interference_gain",
        ),
        ("se_samples", "carrier_hz,num_ues,scheme,design_model,trial,ue,sinr,se_bps_hz"),
        ("se_cdf", "carrier_hz,num_ues,scheme,design_model,rank,se_bps_hz,cdf"),
        (
            "se_summary",
            "carrier_hz,num_ues,scheme,design_model,samples,mean_se_bps_hz,p5_se_bps_hz,median_se_bps_hz",
        ),
        ("se_vs_k", "num_ues,scheme,design_model,samples,mean_se_bps_hz"),
    ];
    for (table, columns) in expected {
        assert_eq!(header(dir.path(), table), columns, "{table}");
    }
}

#[test]
fn seed_changes_monte_carlo_output_only() {
    let a = small();
    let mut b = small();
    b.scenario.seed = 12;
    let (ra, rb) = (run_all(&a), run_all(&b));
    for (x, y) in ra.iter().zip(&rb) {
        let same = csv(std::slice::from_ref(x)) == csv(std::slice::from_ref(y));
        let monte_carlo = x.experiment_id.starts_with("se_");
        assert_eq!(same, !monte_carlo, "{}", x.experiment_id);
    }
}
