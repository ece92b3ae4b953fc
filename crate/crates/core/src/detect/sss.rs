use super::{quantize, DetectorConfig, SoftEstimates};
use crate::{Error, Result};

/// Successive symbol-by-symbol sequence estimation with go-back-K.
///
/// Step `k` first estimates symbol `k` by cancelling the ISI of the `L − 1`
/// preceding symbols using their latest hard decisions. It then goes back to
/// symbol `k − K` and re-estimates it, cancelling both its preceding ISI and
/// the ISI of its `K` successors `k − K + 1 ..= k`. Cancellation always uses
/// hard decisions; the reported value of a symbol is the last soft value
/// computed for it. Symbols outside the frame are zero.
pub fn sss_gbk_estimate(y: &[f64], cfg: &DetectorConfig) -> Result<SoftEstimates> {
    cfg.validate()?;
    let g = cfg.taps.as_slice();
    let l = g.len();
    let k_back = if l > 1 { cfg.go_back } else { 0 };
    if k_back >= l && k_back > 0 {
        return Err(Error::GoBack {
            k: cfg.go_back,
            taps: l,
        });
    }
    let n = y.len();
    let mut soft = vec![0.0; n];
    let mut hard = vec![0.0; n];

    let past_isi = |hard: &[f64], j: usize| -> f64 {
        let reach = (l - 1).min(j);
        (1..=reach).map(|d| g[d] * hard[j - d]).sum()
    };

    for k in 0..n {
        let est = (y[k] - past_isi(&hard, k)) / g[0];
        soft[k] = est;
        hard[k] = quantize(est, cfg.modulation);

        if k_back > 0 && k >= k_back {
            let j = k - k_back;
            let upcoming: f64 = (1..=k_back).map(|d| g[d] * hard[j + d]).sum();
            let est = (y[j] - past_isi(&hard, j) - upcoming) / g[0];
            soft[j] = est;
            hard[j] = quantize(est, cfg.modulation);
        }
    }
    Ok(SoftEstimates { soft, hard })
}
