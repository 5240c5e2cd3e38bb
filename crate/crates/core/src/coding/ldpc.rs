//! Systematic binary LDPC code: progressive-edge-growth construction,
//! GF(2) systematic encoding, and flooding sum-product decoding.

use rand::Rng;

use super::{LlrVector, LLR_CLAMP};

/// Largest tanh product magnitude fed to `atanh` in the check update.
const TANH_LIMIT: f64 = 1.0 - 1e-15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    n: usize,
    k: usize,
    /// Variables attached to each check, ascending.
    check_vars: Vec<Vec<usize>>,
    /// `parity_map[i][j]`: parity bit `j` depends on key bit `i`.
    parity_map: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcDecodeOutput {
    /// Hard decisions on the full codeword.
    pub codeword: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

impl LdpcDecodeOutput {
    /// First `k` hard decisions: the systematic (key) part.
    pub fn systematic(&self, k: usize) -> &[u8] {
        &self.codeword[..k]
    }
}

impl LdpcCode {
    /// Builds an `(n, k)` code with column weight `min(col_weight, n - k)`
    /// by progressive edge growth, then permutes variables so the last
    /// `n - k` columns of H are invertible. Tie-breaks draw from `rng`; the
    /// construction is repeated until H has full row rank.
    pub fn peg<R: Rng + ?Sized>(n: usize, k: usize, col_weight: usize, rng: &mut R) -> Self {
        assert!(k < n, "LDPC needs k < n");
        let m = n - k;
        let dv = col_weight.min(m).max(1);
        loop {
            let check_vars = peg_graph(n, m, dv, rng);
            if let Some(code) = Self::systematize(n, k, &check_vars) {
                return code;
            }
        }
    }

    fn systematize(n: usize, k: usize, check_vars: &[Vec<usize>]) -> Option<Self> {
        let m = n - k;
        let mut h = vec![vec![0u8; n]; m];
        for (c, vars) in check_vars.iter().enumerate() {
            for &v in vars {
                h[c][v] = 1;
            }
        }
        // Pivot search from the right so the original tail columns become
        // parity positions whenever they are independent.
        let mut work = h.clone();
        let mut pivots = Vec::with_capacity(m);
        let mut row = 0;
        for col in (0..n).rev() {
            if row == m {
                break;
            }
            let Some(p) = (row..m).find(|&r| work[r][col] == 1) else {
                continue;
            };
            work.swap(row, p);
            let pivot_row = work[row].clone();
            for (r, other) in work.iter_mut().enumerate() {
                if r != row && other[col] == 1 {
                    for (x, y) in other.iter_mut().zip(&pivot_row) {
                        *x ^= y;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        if pivots.len() < m {
            return None;
        }
        pivots.sort_unstable();
        let info: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        // new column order: info columns, then pivot columns
        let order: Vec<usize> = info.iter().chain(pivots.iter()).copied().collect();
        let mut position = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let check_vars: Vec<Vec<usize>> = check_vars
            .iter()
            .map(|vars| {
                let mut v: Vec<usize> = vars.iter().map(|&x| position[x]).collect();
                v.sort_unstable();
                v
            })
            .collect();

        // Solve [A | Bm] -> [Bm^-1 A | I] on the permuted matrix.
        let mut aug: Vec<Vec<u8>> = (0..m)
            .map(|c| {
                let mut r = vec![0u8; n];
                for &v in &check_vars[c] {
                    r[v] = 1;
                }
                r
            })
            .collect();
        for i in 0..m {
            let col = k + i;
            let p = (i..m).find(|&r| aug[r][col] == 1)?;
            aug.swap(i, p);
            let pivot_row = aug[i].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != i && row[col] == 1 {
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x ^= y;
                    }
                }
            }
        }
        // Row i now reads p_i + sum_j aug[i][j] s_j = 0.
        let parity_map: Vec<Vec<u8>> = (0..k)
            .map(|j| (0..m).map(|i| aug[i][j]).collect())
            .collect();
        Some(Self {
            n,
            k,
            check_vars,
            parity_map,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parity_len(&self) -> usize {
        self.n - self.k
    }

    pub fn check_vars(&self) -> &[Vec<usize>] {
        &self.check_vars
    }

    /// Dense parity-check matrix, `(n - k) x n`.
    pub fn parity_check_matrix(&self) -> Vec<Vec<u8>> {
        self.check_vars
            .iter()
            .map(|vars| {
                let mut row = vec![0u8; self.n];
                for &v in vars {
                    row[v] = 1;
                }
                row
            })
            .collect()
    }

    /// Dense systematic generator `[I_k | parity_map]`, `k x n`.
    pub fn generator_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.k)
            .map(|i| {
                let mut row = vec![0u8; self.n];
                row[i] = 1;
                row[self.k..].copy_from_slice(&self.parity_map[i]);
                row
            })
            .collect()
    }

    /// Parity bits of the systematic codeword `[key, parity]`.
    pub fn parity(&self, key: &[u8]) -> Vec<u8> {
        assert_eq!(key.len(), self.k, "key length");
        let mut p = vec![0u8; self.n - self.k];
        for (bit, row) in key.iter().zip(&self.parity_map) {
            if *bit == 1 {
                for (x, y) in p.iter_mut().zip(row) {
                    *x ^= y;
                }
            }
        }
        p
    }

    /// Returns `(systematic, parity)`; `systematic` is a copy of `key`.
    pub fn encode(&self, key: &[u8]) -> (Vec<u8>, Vec<u8>) {
        (key.to_vec(), self.parity(key))
    }

    pub fn syndrome_ok(&self, word: &[u8]) -> bool {
        self.check_vars
            .iter()
            .all(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ word[v]) == 0)
    }

    /// Flooding sum-product decoding. `converged` is set only when every
    /// check is satisfied and no posterior LLR is exactly zero.
    pub fn decode(&self, llr: &LlrVector, max_iters: usize) -> LdpcDecodeOutput {
        let channel = llr.values();
        assert_eq!(channel.len(), self.n, "LLR length");

        let mut var_edges: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        let mut edge_var = Vec::new();
        for vars in &self.check_vars {
            for &v in vars {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
        }
        let n_edges = edge_var.len();
        let mut to_check: Vec<f64> = edge_var.iter().map(|&v| channel[v]).collect();
        let mut to_var = vec![0.0f64; n_edges];
        let mut posterior = channel.to_vec();

        let decided = |post: &[f64]| -> Option<Vec<u8>> {
            if post.contains(&0.0) {
                return None;
            }
            let word: Vec<u8> = post.iter().map(|&l| (l < 0.0) as u8).collect();
            self.syndrome_ok(&word).then_some(word)
        };

        if let Some(codeword) = decided(&posterior) {
            return LdpcDecodeOutput {
                codeword,
                converged: true,
                iterations: 0,
            };
        }

        let mut tanh_buf = Vec::new();
        for it in 1..=max_iters {
            let mut e0 = 0;
            for vars in &self.check_vars {
                let deg = vars.len();
                tanh_buf.clear();
                tanh_buf.extend(to_check[e0..e0 + deg].iter().map(|&q| (q / 2.0).tanh()));
                // exclusive products via prefix/suffix scans
                let mut prefix = 1.0;
                for i in 0..deg {
                    to_var[e0 + i] = prefix;
                    prefix *= tanh_buf[i];
                }
                let mut suffix = 1.0;
                for i in (0..deg).rev() {
                    let prod = (to_var[e0 + i] * suffix).clamp(-TANH_LIMIT, TANH_LIMIT);
                    to_var[e0 + i] = 2.0 * prod.atanh();
                    suffix *= tanh_buf[i];
                }
                e0 += deg;
            }
            for v in 0..self.n {
                let total = channel[v] + var_edges[v].iter().map(|&e| to_var[e]).sum::<f64>();
                posterior[v] = total;
                for &e in &var_edges[v] {
                    to_check[e] = (total - to_var[e]).clamp(-2.0 * LLR_CLAMP, 2.0 * LLR_CLAMP);
                }
            }
            if let Some(codeword) = decided(&posterior) {
                return LdpcDecodeOutput {
                    codeword,
                    converged: true,
                    iterations: it,
                };
            }
        }
        LdpcDecodeOutput {
            codeword: posterior.iter().map(|&l| (l < 0.0) as u8).collect(),
            converged: false,
            iterations: max_iters,
        }
    }
}

/// Progressive edge growth: each new edge of variable `v` goes to the
/// lowest-degree check among those farthest from `v` in the current graph.
fn peg_graph<R: Rng + ?Sized>(n: usize, m: usize, dv: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut check_vars: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut var_checks: Vec<Vec<usize>> = vec![Vec::new(); n];

    let pick_min_degree = |candidates: &[usize], check_vars: &[Vec<usize>], rng: &mut R| {
        let min = candidates.iter().map(|&c| check_vars[c].len()).min().unwrap();
        let ties: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&c| check_vars[c].len() == min)
            .collect();
        ties[rng.random_range(0..ties.len())]
    };

    for v in 0..n {
        for t in 0..dv {
            let chosen = if t == 0 {
                let all: Vec<usize> = (0..m).collect();
                pick_min_degree(&all, &check_vars, rng)
            } else {
                let mut reached = vec![false; m];
                let mut seen_var = vec![false; n];
                seen_var[v] = true;
                let mut frontier_checks: Vec<usize> = var_checks[v].clone();
                for &c in &frontier_checks {
                    reached[c] = true;
                }
                let mut count = frontier_checks.len();
                let mut previous = reached.clone();
                loop {
                    previous.copy_from_slice(&reached);
                    let mut next = Vec::new();
                    for &c in &frontier_checks {
                        for &u in &check_vars[c] {
                            if seen_var[u] {
                                continue;
                            }
                            seen_var[u] = true;
                            for &c2 in &var_checks[u] {
                                if !reached[c2] {
                                    reached[c2] = true;
                                    next.push(c2);
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        // tree stopped growing: unreached checks are candidates
                        break;
                    }
                    count += next.len();
                    if count == m {
                        // the last layer covered everything: use the checks
                        // not reached before it
                        reached.copy_from_slice(&previous);
                        break;
                    }
                    frontier_checks = next;
                }
                let candidates: Vec<usize> = (0..m)
                    .filter(|&c| !reached[c] && !var_checks[v].contains(&c))
                    .collect();
                if candidates.is_empty() {
                    let free: Vec<usize> = (0..m).filter(|c| !var_checks[v].contains(c)).collect();
                    pick_min_degree(&free, &check_vars, rng)
                } else {
                    pick_min_degree(&candidates, &check_vars, rng)
                }
            };
            check_vars[chosen].push(v);
            var_checks[v].push(chosen);
        }
    }
    for vars in &mut check_vars {
        vars.sort_unstable();
    }
    check_vars
}
