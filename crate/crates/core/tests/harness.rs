use wealth_game::config::Config;
use wealth_game::harness::{grid, simulate_point, sweep};

fn small_sweep() -> Config {
    let mut c = Config::default();
    c.apply_overrides(&[
        "steps=1000",
        "n_agents=31",
        "sweep.gamma=0.2,0.5,0.8",
        "sweep.beta=0.3,0.5,0.7",
        "sweep.n_agents=31",
        "sweep.samples=2",
        "seed=12",
    ])
    .unwrap();
    c
}

#[test]
fn three_by_three_sweep_has_nine_points() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = sweep(&small_sweep(), dir.path()).unwrap();
    assert_eq!(outcome.summaries.len(), 9);
    assert_eq!(outcome.resumed, 0);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn points_do_not_depend_on_scheduling() {
    let config = small_sweep();
    let points = grid(&config);
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let wide = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let forward: Vec<_> = serial.install(|| {
        points
            .iter()
            .map(|p| simulate_point(&config, p).unwrap())
            .collect()
    });
    let backward: Vec<_> = wide.install(|| {
        points
            .iter()
            .rev()
            .map(|p| simulate_point(&config, p).unwrap())
            .collect()
    });
    for (a, b) in forward.iter().zip(backward.iter().rev()) {
        assert_eq!(a, b);
    }
}

#[test]
fn scaling_report_needs_several_sizes() {
    let mut config = small_sweep();
    config
        .apply_overrides(&[
            "sweep.gamma=0.5",
            "sweep.beta=0.5",
            "sweep.n_agents=11,31,61",
        ])
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = sweep(&config, dir.path()).unwrap();
    assert_eq!(outcome.scaling.len(), 1);
    assert!(dir.path().join("scaling.csv").exists());
    assert!(outcome.scaling[0].volatility_slope.is_finite());
}
