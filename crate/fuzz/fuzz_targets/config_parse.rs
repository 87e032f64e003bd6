#![no_main]

use libfuzzer_sys::fuzz_target;
use wealth_game::config::Config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = Config::from_text(text) {
        // rendering must parse back to the same configuration
        let again = Config::from_text(&config.to_text()).expect("rendered config parses");
        assert_eq!(again, config);
        let _ = config.validate();
    }
});
