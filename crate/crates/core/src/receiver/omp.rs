//! Multiple-measurement-vector OMP over the pilot codebook.

use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub pilot_index: usize,
    /// Least-squares channel estimate over the selected atom set, length `M`.
    pub h_hat: CVector,
}

/// Greedy OMP with rows of `pilots` as atoms.
///
/// Each pass picks the atom maximizing `||R p^H||^2 / ||p||^2`, projects the
/// residual off the span of everything selected so far, and stops after
/// `max_atoms` selections or once `||R||^2 < residual_ratio * ||Y||^2`.
/// Channels are refit jointly by least squares over the final set.
pub fn omp_detect(y_p: &CMatrix, pilots: &CMatrix, max_atoms: usize, residual_ratio: f64) -> Vec<Detection> {
    let m = y_p.nrows();
    let np = y_p.ncols();
    let kc = pilots.nrows();
    assert_eq!(pilots.ncols(), np, "pilot length");

    let total: f64 = y_p.norm_squared();
    if total == 0.0 || max_atoms == 0 {
        return Vec::new();
    }
    let pil = pilots.as_slice();
    let ys = y_p.as_slice();

    let energy: Vec<f64> = (0..kc).map(|j| pilots.row(j).norm_squared()).collect();

    // corr[a * kc + j] = (R P^H)[a, j]
    let mut corr = vec![C64::new(0.0, 0.0); m * kc];
    for t in 0..np {
        let pcol = &pil[t * kc..(t + 1) * kc];
        for a in 0..m {
            let y = ys[t * m + a];
            let row = &mut corr[a * kc..(a + 1) * kc];
            for (c, p) in row.iter_mut().zip(pcol) {
                *c += y * p.conj();
            }
        }
    }
    let initial_corr = corr.clone();

    let mut selected: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut residual = total;
    let mut w = vec![C64::new(0.0, 0.0); kc];

    while selected.len() < max_atoms.min(kc) && residual >= residual_ratio * total {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..kc {
            if energy[j] == 0.0 || selected.contains(&j) {
                continue;
            }
            let s: f64 = (0..m).map(|a| corr[a * kc + j].norm_sqr()).sum::<f64>() / energy[j];
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        let Some((j, score)) = best else { break };
        if score <= 0.0 {
            break;
        }

        // orthonormalize the new atom against the current basis (twice)
        let mut q: Vec<C64> = (0..np).map(|t| pil[t * kc + j]).collect();
        for _ in 0..2 {
            for b in &basis {
                let coef: C64 = q.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                for (x, y) in q.iter_mut().zip(b) {
                    *x -= coef * y;
                }
            }
        }
        let norm = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        selected.push(j);
        if norm <= 1e-12 * energy[j].sqrt() {
            continue;
        }
        for z in q.iter_mut() {
            *z /= norm;
        }

        // y_q = Y q^H, w = P conj(q)
        let y_q: Vec<C64> = (0..m)
            .map(|a| (0..np).map(|t| ys[t * m + a] * q[t].conj()).sum())
            .collect();
        w.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for t in 0..np {
            let cq = q[t].conj();
            let pcol = &pil[t * kc..(t + 1) * kc];
            for (acc, p) in w.iter_mut().zip(pcol) {
                *acc += p * cq;
            }
        }
        for a in 0..m {
            let ya = y_q[a];
            let row = &mut corr[a * kc..(a + 1) * kc];
            for (c, wj) in row.iter_mut().zip(&w) {
                *c -= ya * wj.conj();
            }
        }
        residual -= y_q.iter().map(|z| z.norm_sqr()).sum::<f64>();
        basis.push(q);
    }

    if selected.is_empty() {
        return Vec::new();
    }
    let k = selected.len();
    // H_S = (Y P_S^H) (P_S P_S^H)^-1
    let b = CMatrix::from_fn(m, k, |a, i| initial_corr[a * kc + selected[i]]);
    let gram = CMatrix::from_fn(k, k, |r, c| {
        (0..np)
            .map(|t| pil[t * kc + selected[r]] * pil[t * kc + selected[c]].conj())
            .sum()
    });
    let h = solve_right_hermitian(&b, &gram);
    selected
        .iter()
        .enumerate()
        .map(|(i, &pilot_index)| Detection {
            pilot_index,
            h_hat: h.column(i).into_owned(),
        })
        .collect()
}

/// `B G^{-1}` for Hermitian positive (semi)definite `G`; falls back to a
/// pseudo-inverse when Cholesky fails.
pub(crate) fn solve_right_hermitian(b: &CMatrix, g: &CMatrix) -> CMatrix {
    let rhs = b.adjoint();
    let x = match g.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => {
            let pinv = g.clone().pseudo_inverse(1e-12).expect("pseudo-inverse");
            pinv * rhs
        }
    };
    x.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal_matrix, complex_normal_vector, StreamKey};

    fn codebook(rows: usize, np: usize, seed: u64) -> CMatrix {
        let mut p = complex_normal_matrix(&mut StreamKey::public(seed, "p").rng(), rows, np, 1.0);
        for mut r in p.row_iter_mut() {
            let n = r.norm();
            r *= C64::new((np as f64 * 0.3).sqrt() / n, 0.0);
        }
        p
    }

    #[test]
    fn noiseless_single_user_is_exact() {
        let p = codebook(64, 50, 1);
        let h = complex_normal_vector(&mut StreamKey::public(1, "h").rng(), 6, 1.0);
        let y = &h * p.row(17);
        let d = omp_detect(&y, &p, 2, 0.05);
        assert_eq!(d[0].pilot_index, 17);
        assert!((&d[0].h_hat - &h).norm() < 1e-8);
        assert_eq!(d.len(), 1, "residual ratio stops after the exact fit");
    }

    #[test]
    fn zero_observation_detects_nothing() {
        let p = codebook(16, 20, 2);
        assert!(omp_detect(&CMatrix::zeros(4, 20), &p, 4, 0.05).is_empty());
    }

    #[test]
    fn two_orthogonal_pilots_are_both_found() {
        // rows 3 and 9 made exactly orthogonal
        let mut p = codebook(16, 40, 3);
        let a = p.row(3).into_owned();
        let b = p.row(9).into_owned();
        let coef = (b.clone() * a.adjoint())[(0, 0)] / a.norm_squared();
        let mut b2 = b - a.clone() * coef;
        b2 *= C64::new(a.norm() / b2.norm(), 0.0);
        p.set_row(9, &b2);

        let mut rng = StreamKey::public(3, "h").rng();
        let h1 = complex_normal_vector(&mut rng, 8, 1.0);
        let h2 = complex_normal_vector(&mut rng, 8, 1.0);
        let noise = complex_normal_matrix(&mut rng, 8, 40, 1e-6);
        let y = &h1 * p.row(3) + &h2 * p.row(9) + noise;
        let d = omp_detect(&y, &p, 4, 0.05);
        let found: Vec<usize> = d.iter().map(|x| x.pilot_index).collect();
        assert!(found.contains(&3) && found.contains(&9), "{found:?}");
        let e1 = d.iter().find(|x| x.pilot_index == 3).unwrap();
        let e2 = d.iter().find(|x| x.pilot_index == 9).unwrap();
        assert!((&e1.h_hat - &h1).norm() < 1e-2);
        assert!((&e2.h_hat - &h2).norm() < 1e-2);
    }

    #[test]
    fn batch_cap_is_respected() {
        let p = codebook(32, 30, 4);
        let y = complex_normal_matrix(&mut StreamKey::public(4, "y").rng(), 4, 30, 1.0);
        assert_eq!(omp_detect(&y, &p, 5, 0.0).len(), 5);
    }
}
