//! Reading dB values off BER curves.

use ftn_core::sim::BerRecord;

/// `(Eb/N0 dB, BER)` pairs of a sweep.
pub fn curve(records: &[BerRecord]) -> Vec<(f64, f64)> {
    records.iter().map(|r| (r.ebn0_db, r.ber)).collect()
}

/// Eb/N0 where the curve first falls through `target`, interpolating
/// `log10(BER)` linearly in dB between the bracketing points.
///
/// `None` when no pair of points brackets the target with a positive lower
/// BER, i.e. the curve never reached it or dropped straight to zero errors.
pub fn crossing(points: &[(f64, f64)], target: f64) -> Option<f64> {
    if let Some(&(x, _)) = points.iter().find(|p| p.1 == target) {
        return Some(x);
    }
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if !(y0 > target && y1 < target && y1 > 0.0) {
            return None;
        }
        let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
        Some(x0 + (lt - l0) / (l1 - l0) * (x1 - x0))
    })
}

/// Horizontal distance `a − b` in dB at `target`.
pub fn gap(a: &[(f64, f64)], b: &[(f64, f64)], target: f64) -> Option<f64> {
    Some(crossing(a, target)? - crossing(b, target)?)
}
