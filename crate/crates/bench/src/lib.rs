//! Shared input builders for the benchmark targets.

use grometrics::{CountPair, FieldId, WorldBaseline};

/// A fixed 22-field baseline large enough to exercise the log-domain
/// index paths without file IO in benches.
pub fn baseline() -> WorldBaseline {
    let by_field = FieldId::ALL
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let n = 150_000 + 90_000 * (i as u64 % 7);
            let c = n * (6 + (i as u64 % 23));
            (f, CountPair::new(n, c))
        })
        .collect();
    let totals = CountPair::new(12_000_000, 210_000_000);
    WorldBaseline { totals, by_field }
}
