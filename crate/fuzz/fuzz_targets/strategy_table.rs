#![no_main]

use libfuzzer_sys::fuzz_target;
use wealth_game::strategy::parse_strategy_table;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = parse_strategy_table(text) {
        let rows: Vec<String> = table.iter().map(|s| s.to_row()).collect();
        let again = parse_strategy_table(&rows.join("\n")).expect("rendered table parses");
        assert_eq!(again, table);
    }
});
