//! Polar codes built on the binary erasure channel.
//!
//! Bit-channel capacities follow the BEC recursion
//! `I(W_N^(2i-1)) = I(W_{N/2}^(i))²`, `I(W_N^(2i)) = 2I - I²`. Codewords are
//! `x = d·H` with `H = F^⊗s`, `F = [[1,0],[1,1]]`, in natural order (no
//! bit-reversal permutation), and decoding is successive cancellation in the
//! same natural order.

use crate::{Error, Result};

/// Magnitude at which LLRs are clamped.
pub const LLR_MAX: f64 = 300.0;

/// Polarized symmetric capacities `I(W_n^(i))`, `i = 1..=n`, stored zero-based.
pub fn polarize(n: usize, epsilon: f64) -> Result<Vec<f64>> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ErasureProbability(epsilon));
    }
    let mut caps = vec![1.0 - epsilon];
    while caps.len() < n {
        caps = caps
            .iter()
            .flat_map(|&c| [c * c, 2.0 * c - c * c])
            .collect();
    }
    Ok(caps)
}

/// Frozen mask (true = frozen) keeping the `m` largest capacities free.
/// Equal capacities favor the larger index.
pub fn select_frozen(capacities: &[f64], m: usize) -> Result<Vec<bool>> {
    let n = capacities.len();
    if m > n {
        return Err(Error::MessageTooLong { m, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        capacities[b]
            .total_cmp(&capacities[a])
            .then_with(|| b.cmp(&a))
    });
    let mut frozen = vec![true; n];
    for &i in &order[..m] {
        frozen[i] = false;
    }
    Ok(frozen)
}

/// f-node rule used by the SC decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FNode {
    /// `sign(a)·sign(b)·min(|a|, |b|)`.
    #[default]
    MinSum,
    /// `2·atanh(tanh(a/2)·tanh(b/2))`.
    Exact,
}

impl FNode {
    #[inline]
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            FNode::MinSum => {
                let m = a.abs().min(b.abs());
                if (a < 0.0) != (b < 0.0) {
                    -m
                } else {
                    m
                }
            }
            FNode::Exact => {
                let p = (0.5 * a).tanh() * (0.5 * b).tanh();
                (2.0 * p.atanh()).clamp(-LLR_MAX, LLR_MAX)
            }
        }
    }
}

/// Channel LLRs `log P(bit=0)/P(bit=1)`, clamped to `±LLR_MAX`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    /// Clamps every value into `[-LLR_MAX, LLR_MAX]`. NaN maps to 0.
    pub fn new(mut values: Vec<f64>) -> Self {
        for v in &mut values {
            *v = if v.is_nan() {
                0.0
            } else {
                v.clamp(-LLR_MAX, LLR_MAX)
            };
        }
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Hard decisions: 0 iff LLR ≥ 0.
    pub fn hard_bits(&self) -> Vec<u8> {
        self.0.iter().map(|&v| u8::from(v < 0.0)).collect()
    }
}

/// Output of [`sc_decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScOutput {
    /// Decoded information bits û.
    pub message: Vec<u8>,
    /// Full decoded input word d̂ including frozen zeros.
    pub word: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    n: usize,
    m: usize,
    epsilon: f64,
    capacities: Vec<f64>,
    frozen: Vec<bool>,
    free: Vec<usize>,
}

impl PolarCode {
    pub fn new(n: usize, m: usize, epsilon: f64) -> Result<Self> {
        let capacities = polarize(n, epsilon)?;
        let frozen = select_frozen(&capacities, m)?;
        let free = (0..n).filter(|&i| !frozen[i]).collect();
        Ok(Self {
            n,
            m,
            epsilon,
            capacities,
            frozen,
            free,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rate(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    /// Zero-based indices of the free (information) positions, ascending.
    pub fn free_positions(&self) -> &[usize] {
        &self.free
    }

    /// Builds `d` by placing `u` on the free positions and zeros elsewhere.
    pub fn scatter(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.m {
            return Err(Error::Length {
                what: "message bits",
                expected: self.m,
                got: u.len(),
            });
        }
        let mut d = vec![0u8; self.n];
        for (&pos, &bit) in self.free.iter().zip(u) {
            d[pos] = bit & 1;
        }
        Ok(d)
    }

    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        let mut x = self.scatter(u)?;
        transform(&mut x);
        Ok(x)
    }

    pub fn decode(&self, llr: &LlrVector, fnode: FNode) -> Result<ScOutput> {
        sc_decode(llr, self, fnode)
    }
}

/// In-place `x ← x·F^⊗s` over GF(2). The transform is its own inverse.
pub fn transform(x: &mut [u8]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in x.chunks_exact_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (p, q) in a.iter_mut().zip(b.iter()) {
                *p ^= *q;
            }
        }
        h *= 2;
    }
}

/// Successive cancellation decoding.
///
/// At a node of size `2h` with input LLRs `λ`, the left child receives
/// `f(λ_j, λ_{j+h})` and, once its partial sums `v̂` are known, the right
/// child receives `λ_{j+h} + (-1)^{v̂_j} λ_j`. Leaves decide 0 when frozen,
/// otherwise 0 iff the LLR is non-negative.
pub fn sc_decode(llr: &LlrVector, code: &PolarCode, fnode: FNode) -> Result<ScOutput> {
    let n = code.n;
    if llr.len() != n {
        return Err(Error::Length {
            what: "channel LLRs",
            expected: n,
            got: llr.len(),
        });
    }
    // Node LLRs for a node of size s live in buf[s..2s].
    let mut buf = vec![0.0; 2 * n];
    buf[n..].copy_from_slice(llr.as_slice());
    let mut partial = vec![0u8; n];
    let mut word = Vec::with_capacity(n);
    decode_node(&mut buf, n, &code.frozen, &mut partial, &mut word, fnode);
    let message = code.free.iter().map(|&i| word[i]).collect();
    Ok(ScOutput { message, word })
}

fn decode_node(
    buf: &mut [f64],
    size: usize,
    frozen: &[bool],
    partial: &mut [u8],
    word: &mut Vec<u8>,
    fnode: FNode,
) {
    if size == 1 {
        let bit = if frozen[0] { 0 } else { u8::from(buf[1] < 0.0) };
        word.push(bit);
        partial[0] = bit;
        return;
    }
    let h = size / 2;
    let (lower, upper) = buf.split_at_mut(size);
    let node = &upper[..size];
    let (p_left, p_right) = partial.split_at_mut(h);

    for j in 0..h {
        lower[h + j] = fnode.combine(node[j], node[j + h]);
    }
    decode_node(&mut lower[..size], h, &frozen[..h], p_left, word, fnode);

    for j in 0..h {
        let a = node[j];
        let b = node[j + h];
        lower[h + j] = if p_left[j] == 0 { b + a } else { b - a };
    }
    decode_node(&mut lower[..size], h, &frozen[h..], p_right, word, fnode);

    for (l, r) in p_left.iter_mut().zip(p_right.iter()) {
        *l ^= *r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_channel() {
        assert_eq!(polarize(1, 0.5).unwrap(), vec![0.5]);
    }

    #[test]
    fn two_channels() {
        assert_eq!(polarize(2, 0.5).unwrap(), vec![0.25, 0.75]);
    }

    #[test]
    fn four_channel_worked_example() {
        assert_eq!(
            polarize(4, 0.5).unwrap(),
            vec![0.0625, 0.4375, 0.5625, 0.9375]
        );
        let code = PolarCode::new(4, 2, 0.5).unwrap();
        assert_eq!(code.frozen(), &[true, true, false, false]);
        assert_eq!(code.scatter(&[1, 1]).unwrap(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(polarize(12, 0.5), Err(Error::NotPowerOfTwo(12))));
        assert!(polarize(8, 0.0).is_err());
        assert!(polarize(8, 1.0).is_err());
        assert!(matches!(
            select_frozen(&[0.5; 4], 5),
            Err(Error::MessageTooLong { m: 5, n: 4 })
        ));
        let code = PolarCode::new(8, 4, 0.5).unwrap();
        assert!(code.encode(&[1, 0, 1]).is_err());
        assert!(code.decode(&LlrVector::new(vec![1.0; 4]), FNode::MinSum).is_err());
    }

    #[test]
    fn ties_prefer_larger_index() {
        assert_eq!(
            select_frozen(&[0.5, 0.5, 0.5, 0.5], 2).unwrap(),
            vec![true, true, false, false]
        );
    }

    #[test]
    fn frozen_extremes() {
        let caps = polarize(16, 0.5).unwrap();
        assert!(select_frozen(&caps, 16).unwrap().iter().all(|f| !f));
        assert!(select_frozen(&caps, 0).unwrap().iter().all(|&f| f));
    }

    #[test]
    fn all_frozen_decodes_to_zero() {
        let code = PolarCode::new(16, 0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let llr = LlrVector::new((0..16).map(|_| rng.random_range(-5.0..5.0)).collect());
        let out = code.decode(&llr, FNode::MinSum).unwrap();
        assert!(out.message.is_empty());
        assert_eq!(out.word, vec![0; 16]);
    }

    #[test]
    fn llr_vector_clamps() {
        let v = LlrVector::new(vec![f64::INFINITY, f64::NEG_INFINITY, 1e9, -2.0, f64::NAN]);
        assert_eq!(v.as_slice(), &[LLR_MAX, -LLR_MAX, LLR_MAX, -2.0, 0.0]);
        assert_eq!(v.hard_bits(), vec![0, 1, 0, 1, 0]);
    }

    #[test]
    fn exact_fnode_agrees_in_sign_with_min_sum() {
        for &(a, b) in &[(1.0, 2.0), (-3.0, 0.5), (4.0, -4.0), (-0.1, -7.0)] {
            let ms = FNode::MinSum.combine(a, b);
            let ex = FNode::Exact.combine(a, b);
            assert_eq!(ms < 0.0, ex < 0.0);
            assert!(ex.abs() <= ms.abs() + 1e-12);
        }
    }
}
