//! CRC-aided polar code with successive-cancellation list decoding.
//!
//! Transform convention: `x = u F^{(x)n}` with `F = [[1, 0], [1, 1]]` and
//! no bit reversal, i.e. `enc(u) = [enc(a) ^ enc(b), enc(b)]` for
//! `u = [a, b]`. Frozen positions carry zeros.

use super::{Crc, LlrVector};

#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    n: usize,
    payload_len: usize,
    crc: Crc,
    /// Positions carrying `[payload, crc]`, ascending.
    info_positions: Vec<usize>,
    frozen: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarDecodeOutput {
    pub payload: Vec<u8>,
    pub crc_ok: bool,
}

impl PolarCode {
    /// Frozen set from Gaussian-approximation density evolution at the
    /// given linear design SNR `Es/N0` (channel LLR mean `4 Es/N0`).
    pub fn design(n: usize, payload_len: usize, crc: Crc, design_snr: f64) -> Self {
        assert!(n.is_power_of_two(), "polar length must be a power of two");
        let k = payload_len + crc.width();
        assert!(k <= n, "payload + CRC exceeds block length");
        let means = ga_means(n, 4.0 * design_snr);
        let mut order: Vec<usize> = (0..n).collect();
        // most reliable first; ties go to the larger index
        order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(b.cmp(&a)));
        let mut info_positions: Vec<usize> = order[..k].to_vec();
        info_positions.sort_unstable();
        Self::with_info_positions(n, payload_len, crc, info_positions)
    }

    pub fn with_info_positions(n: usize, payload_len: usize, crc: Crc, info_positions: Vec<usize>) -> Self {
        assert_eq!(info_positions.len(), payload_len + crc.width());
        let mut frozen = vec![true; n];
        for &p in &info_positions {
            frozen[p] = false;
        }
        Self {
            n,
            payload_len,
            crc,
            info_positions,
            frozen,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn crc(&self) -> &Crc {
        &self.crc
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Frozen index set, ascending.
    pub fn frozen_positions(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.frozen[i]).collect()
    }

    /// Appends the CRC and polar-transforms.
    pub fn encode(&self, payload: &[u8]) -> Vec<u8> {
        assert_eq!(payload.len(), self.payload_len, "payload length");
        let word = self.crc.append(payload);
        let mut u = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(&word) {
            u[pos] = b;
        }
        polar_transform(&mut u);
        u
    }

    /// CRC-aided SCL decoding. Returns the most likely CRC-passing path, or
    /// the most likely path with `crc_ok = false` when none passes.
    pub fn decode(&self, llr: &LlrVector, list_size: usize) -> PolarDecodeOutput {
        assert_eq!(llr.len(), self.n, "LLR length");
        assert!(list_size >= 1);
        let levels = self.n.trailing_zeros() as usize;
        let mut root = Path::new(levels, self.n);
        root.alpha[levels].copy_from_slice(llr.values());
        let mut paths = vec![root];
        self.node(&mut paths, levels, 0, list_size);

        paths.sort_by(|a, b| a.metric.total_cmp(&b.metric));
        let extract = |p: &Path| -> Vec<u8> { self.info_positions.iter().map(|&i| p.u[i]).collect() };
        for p in &paths {
            let word = extract(p);
            if self.crc.check(&word) {
                return PolarDecodeOutput {
                    payload: word[..self.payload_len].to_vec(),
                    crc_ok: true,
                };
            }
        }
        let word = extract(&paths[0]);
        PolarDecodeOutput {
            payload: word[..self.payload_len].to_vec(),
            crc_ok: false,
        }
    }

    fn node(&self, paths: &mut Vec<Path>, level: usize, leaf_start: usize, list_size: usize) {
        if level == 0 {
            self.leaf(paths, leaf_start, list_size);
            return;
        }
        let half = 1usize << (level - 1);
        for p in paths.iter_mut() {
            let (lower, upper) = p.alpha.split_at_mut(level);
            let parent = &upper[0];
            for (i, child) in lower[level - 1].iter_mut().enumerate() {
                *child = boxplus(parent[i], parent[i + half]);
            }
        }
        self.node(paths, level - 1, leaf_start, list_size);
        for p in paths.iter_mut() {
            let left = std::mem::take(&mut p.out[level - 1]);
            p.left[level - 1].copy_from_slice(&left);
            p.out[level - 1] = left;
            let (lower, upper) = p.alpha.split_at_mut(level);
            let parent = &upper[0];
            for (i, child) in lower[level - 1].iter_mut().enumerate() {
                let s = if p.left[level - 1][i] == 0 { 1.0 } else { -1.0 };
                *child = parent[i + half] + s * parent[i];
            }
        }
        self.node(paths, level - 1, leaf_start + half, list_size);
        for p in paths.iter_mut() {
            let (lower, upper) = p.out.split_at_mut(level);
            let right = &lower[level - 1];
            let left = &p.left[level - 1];
            let dst = &mut upper[0];
            for i in 0..half {
                dst[i] = left[i] ^ right[i];
                dst[i + half] = right[i];
            }
        }
    }

    fn leaf(&self, paths: &mut Vec<Path>, index: usize, list_size: usize) {
        if self.frozen[index] {
            for p in paths.iter_mut() {
                let l = p.alpha[0][0];
                p.metric += softplus(-l);
                p.u[index] = 0;
                p.out[0][0] = 0;
            }
            return;
        }
        let mut candidates: Vec<(f64, usize, u8)> = Vec::with_capacity(2 * paths.len());
        for (pi, p) in paths.iter().enumerate() {
            let l = p.alpha[0][0];
            candidates.push((p.metric + softplus(-l), pi, 0));
            candidates.push((p.metric + softplus(l), pi, 1));
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        candidates.truncate(list_size);
        candidates.sort_by(|a, b| a.1.cmp(&b.1).then(a.2.cmp(&b.2)));

        let old = std::mem::take(paths);
        let mut keep: Vec<Option<Path>> = old.into_iter().map(Some).collect();
        for (idx, &(metric, pi, bit)) in candidates.iter().enumerate() {
            let reused_later = candidates[idx + 1..].iter().any(|c| c.1 == pi);
            let mut p = if reused_later {
                keep[pi].as_ref().expect("path alive").clone()
            } else {
                keep[pi].take().expect("path alive")
            };
            p.metric = metric;
            p.u[index] = bit;
            p.out[0][0] = bit;
            paths.push(p);
        }
    }
}

#[derive(Debug, Clone)]
struct Path {
    /// `alpha[l]`: LLRs entering the current node at level `l` (len `2^l`).
    alpha: Vec<Vec<f64>>,
    /// `left[l]`: saved output of the left child at level `l`.
    left: Vec<Vec<u8>>,
    /// `out[l]`: partial sums produced by the last node at level `l`.
    out: Vec<Vec<u8>>,
    u: Vec<u8>,
    metric: f64,
}

impl Path {
    fn new(levels: usize, n: usize) -> Self {
        let sized = |l: usize| 1usize << l;
        Self {
            alpha: (0..=levels).map(|l| vec![0.0; sized(l)]).collect(),
            left: (0..=levels).map(|l| vec![0; sized(l)]).collect(),
            out: (0..=levels).map(|l| vec![0; sized(l)]).collect(),
            u: vec![0; n],
            metric: 0.0,
        }
    }
}

/// In-place `u F^{(x)n}`.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    let mut step = 1;
    while step < n {
        for block in (0..n).step_by(2 * step) {
            for i in block..block + step {
                bits[i] ^= bits[i + step];
            }
        }
        step *= 2;
    }
}

/// Exact check-node combination `2 atanh(tanh(a/2) tanh(b/2))`.
pub(crate) fn boxplus(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln phi(x)` for the Gaussian-approximation density evolution.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        -0.4527 * x.powf(0.86) + 0.0218
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

fn inv_ln_phi(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while ln_phi(hi) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLR of each synthetic channel `u_i` under the Gaussian approximation.
fn ga_means(n: usize, channel_mean: f64) -> Vec<f64> {
    fn rec(m: f64, n: usize, out: &mut Vec<f64>) {
        if n == 1 {
            out.push(m);
            return;
        }
        // first half: check combination; second half: variable combination
        let lp = ln_phi(m);
        let check = inv_ln_phi(lp + (2.0 - lp.exp()).ln());
        rec(check, n / 2, out);
        rec(2.0 * m, n / 2, out);
    }
    let mut out = Vec::with_capacity(n);
    rec(channel_mean, n, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CRC11_POLY;
    use crate::rng::StreamKey;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn code() -> PolarCode {
        PolarCode::design(512, 88, Crc::new(CRC11_POLY, 11), 0.3)
    }

    fn noiseless_llr(word: &[u8]) -> LlrVector {
        LlrVector::new(word.iter().map(|&b| if b == 0 { 40.0 } else { -40.0 }))
    }

    /// Plain recursive SC decoder: returns (u_hat, x_hat) for one subtree.
    fn sc_reference(llr: &[f64], frozen: &[bool]) -> (Vec<u8>, Vec<u8>) {
        let n = llr.len();
        if n == 1 {
            let u = if frozen[0] { 0 } else { (llr[0] < 0.0) as u8 };
            return (vec![u], vec![u]);
        }
        let h = n / 2;
        let la: Vec<f64> = (0..h).map(|i| boxplus(llr[i], llr[i + h])).collect();
        let (ua, xa) = sc_reference(&la, &frozen[..h]);
        let lb: Vec<f64> = (0..h)
            .map(|i| llr[i + h] + if xa[i] == 0 { llr[i] } else { -llr[i] })
            .collect();
        let (ub, xb) = sc_reference(&lb, &frozen[h..]);
        let mut x: Vec<u8> = (0..h).map(|i| xa[i] ^ xb[i]).collect();
        x.extend_from_slice(&xb);
        ([ua, ub].concat(), x)
    }

    #[test]
    fn transform_is_an_involution() {
        let mut rng = StreamKey::public(2, "pt").rng();
        let orig: Vec<u8> = (0..64).map(|_| rng.random::<bool>() as u8).collect();
        let mut x = orig.clone();
        polar_transform(&mut x);
        polar_transform(&mut x);
        assert_eq!(x, orig);
    }

    #[test]
    fn ga_ordering_prefers_late_indices() {
        let c = code();
        assert_eq!(c.info_positions().len(), 99);
        assert!(c.info_positions().contains(&511));
        assert!(!c.info_positions().contains(&0));
        assert_eq!(c.frozen_positions().len(), 512 - 99);
    }

    #[test]
    fn noiseless_round_trip() {
        let c = code();
        let mut rng = StreamKey::public(5, "polar-rt").rng();
        for _ in 0..50 {
            let payload: Vec<u8> = (0..88).map(|_| rng.random::<bool>() as u8).collect();
            let out = c.decode(&noiseless_llr(&c.encode(&payload)), 8);
            assert!(out.crc_ok);
            assert_eq!(out.payload, payload);
        }
    }

    #[test]
    fn zero_payload_encodes_to_zero_word() {
        let c = code();
        assert_eq!(c.encode(&[0; 88]), vec![0; 512]);
    }

    #[test]
    fn list_of_one_matches_plain_sc() {
        let c = code();
        let mut frozen = vec![false; 512];
        for p in c.frozen_positions() {
            frozen[p] = true;
        }
        let mut rng = StreamKey::public(9, "sc-vs-scl").rng();
        for _ in 0..40 {
            let payload: Vec<u8> = (0..88).map(|_| rng.random::<bool>() as u8).collect();
            let word = c.encode(&payload);
            let llr: Vec<f64> = word
                .iter()
                .map(|&b| {
                    let s = if b == 0 { 1.0 } else { -1.0 };
                    let n: f64 = rng.sample(StandardNormal);
                    2.0 * (s + 0.9 * n) / 0.81
                })
                .collect();
            let (u_ref, _) = sc_reference(&llr, &frozen);
            let ref_payload: Vec<u8> = c.info_positions()[..88].iter().map(|&i| u_ref[i]).collect();
            let out = c.decode(&LlrVector::new(llr), 1);
            assert_eq!(out.payload, ref_payload);
        }
    }

    #[test]
    fn list_decoding_beats_sc_on_noisy_blocks() {
        let c = code();
        let mut rng = StreamKey::public(10, "scl-gain").rng();
        let (mut ok1, mut ok8) = (0, 0);
        for _ in 0..200 {
            let payload: Vec<u8> = (0..88).map(|_| rng.random::<bool>() as u8).collect();
            let word = c.encode(&payload);
            let sigma = 1.1;
            let llr = LlrVector::new(word.iter().map(|&b| {
                let s = if b == 0 { 1.0 } else { -1.0 };
                let n: f64 = rng.sample(StandardNormal);
                2.0 * (s + sigma * n) / (sigma * sigma)
            }));
            let a = c.decode(&llr, 1);
            let b = c.decode(&llr, 8);
            ok1 += (a.payload == payload) as usize;
            ok8 += (b.crc_ok && b.payload == payload) as usize;
        }
        assert!(ok8 >= ok1, "list 8: {ok8}, list 1: {ok1}");
    }

    #[test]
    fn inverted_payload_fails_crc() {
        // frozen LLRs correct, information LLRs sign-flipped
        let c = code();
        let payload: Vec<u8> = (0..88).map(|i| (i % 5 == 0) as u8).collect();
        let mut u = vec![0u8; 512];
        let word = c.crc().append(&payload);
        for (&p, &b) in c.info_positions().iter().zip(&word) {
            u[p] = b ^ 1;
        }
        polar_transform(&mut u);
        let out = c.decode(&noiseless_llr(&u), 8);
        assert!(!out.crc_ok);
    }
}
