#![no_main]

use libfuzzer_sys::fuzz_target;
use wealth_game::series::{parse_series, SeriesSpec};

fuzz_target!(|data: &[u8]| {
    for spec in [
        SeriesSpec::default(),
        SeriesSpec {
            date_column: None,
            ..SeriesSpec::default()
        },
    ] {
        if let Ok(series) = parse_series(data, &spec) {
            assert!(series.closes.iter().all(|c| c.is_finite() && *c > 0.0));
            if let Some(dates) = &series.dates {
                assert_eq!(dates.len(), series.closes.len());
                assert!(dates.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
});
