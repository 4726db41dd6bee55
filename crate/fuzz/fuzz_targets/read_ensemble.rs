#![no_main]

use kinetic_wealth::agents::AgentEnsemble;
use kinetic_wealth::io::read_ensemble_money;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(money) = read_ensemble_money(data) {
        assert!(money.iter().all(|m| m.is_finite() && *m >= 0.0));
        if let Ok(mut e) = AgentEnsemble::from_money(money, 0) {
            e.run_transactions(16);
        }
    }
});
