//! Brute-force oracles shared by the integration suites. Everything here
//! is deliberately independent of the library's SVD/evaluation paths: the
//! reduced density matrix is built as an explicit Gram matrix and
//! diagonalized with a hand-rolled complex Jacobi sweep.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)] // the oracles stay deliberately index-explicit

use num_complex::Complex64;
use qnnent::neural::DbmSpec;
use qnnent::state::{Alphabet, Bipartition, DenseState, SpinConfiguration};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A random normalized dense state with a fixed seed.
pub fn random_state(n: usize, seed: u64) -> DenseState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    DenseState::new(n, amps).unwrap().normalize().unwrap()
}

/// Explicit reduced density matrix `rho_A[r][r'] = sum_c psi(r,c) conj(psi(r',c))`
/// over the same row/column gathering as the Schmidt reshape.
pub fn reduced_density_matrix(state: &DenseState, part: &Bipartition) -> Vec<Vec<Complex64>> {
    let a = part.region_a();
    let b = part.complement();
    let rows = 1usize << a.len();
    let cols = 1usize << b.len();
    let mut reshaped = vec![vec![Complex64::default(); cols]; rows];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let mut r = 0usize;
        for (t, &s) in a.iter().enumerate() {
            r |= ((idx >> s) & 1) << t;
        }
        let mut col = 0usize;
        for (t, &s) in b.iter().enumerate() {
            col |= ((idx >> s) & 1) << t;
        }
        reshaped[r][col] = *amp;
    }
    let mut rho = vec![vec![Complex64::default(); rows]; rows];
    for r1 in 0..rows {
        for r2 in 0..rows {
            let mut acc = Complex64::default();
            for col in 0..cols {
                acc += reshaped[r1][col] * reshaped[r2][col].conj();
            }
            rho[r1][r2] = acc;
        }
    }
    rho
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// returned in non-increasing order.
pub fn hermitian_eigenvalues(matrix: &[Vec<Complex64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut m: Vec<Vec<Complex64>> = matrix.to_vec();
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p][q].norm_sqr();
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = m[p][q];
                let babs = b.norm();
                if babs < 1e-300 {
                    continue;
                }
                let phase = b / babs;
                let a = m[p][p].re;
                let d = m[q][q].re;
                // Small root of t^2 - 2 tau t - 1 = 0 (inner rotation angle
                // at most pi/4), which guarantees monotone convergence.
                let tau = (d - a) / (2.0 * babs);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = t * cos;
                // Column update: (M R) with R[p][p]=c, R[q][p]=s e^{-i phi},
                // R[p][q]=-s e^{i phi}, R[q][q]=c.
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = cos * mkp + sin * phase.conj() * mkq;
                    m[k][q] = -sin * phase * mkp + cos * mkq;
                }
                // Row update with R^dagger.
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = cos * mpk + sin * phase * mqk;
                    m[q][k] = -sin * phase.conj() * mpk + cos * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i].re).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

/// Eigenvalues of the reduced density matrix, the partial-trace route.
pub fn reduced_spectrum(state: &DenseState, part: &Bipartition) -> Vec<f64> {
    hermitian_eigenvalues(&reduced_density_matrix(state, part))
}

/// Rényi entropy straight from a probability spectrum.
pub fn renyi_from_probabilities(probs: &[f64], alpha: f64) -> f64 {
    let probs: Vec<f64> = probs.iter().copied().filter(|&p| p > 1e-16).collect();
    if (alpha - 1.0).abs() < 1e-14 {
        -probs.iter().map(|p| p * p.ln()).sum::<f64>()
    } else {
        probs.iter().map(|p| p.powf(alpha)).sum::<f64>().ln() / (1.0 - alpha)
    }
}

/// Graph state by direct phase accumulation over CZ gates on |+>^n:
/// `amp(bits) = 2^{-n/2} (-1)^{sum_{(i,j)} b_i b_j}`.
pub fn cz_circuit_graph_state(edges: &[(usize, usize)], n: usize) -> DenseState {
    let norm = (1u64 << n) as f64;
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|bits| {
            let mut parity = 0u32;
            for &(i, j) in edges {
                parity ^= ((bits >> i) & (bits >> j) & 1) as u32;
            }
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            c(sign / norm.sqrt(), 0.0)
        })
        .collect();
    DenseState::new(n, amps).unwrap().normalize().unwrap()
}

/// `|<a|b>|` of two normalized states.
pub fn fidelity(a: &DenseState, b: &DenseState) -> f64 {
    a.inner(b).unwrap().norm()
}

/// Seeded random graph over `n` vertices, each edge kept with p = 0.45.
pub fn random_graph(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_range(0.0..1.0) < 0.45 {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// DBM amplitude by the full triple sum over both hidden layers:
/// `sum_h sum_g exp{ a.v + c.g + sum_j h_j (b_j + sum_i W_ij v_i + sum_k W_kj g_k) }`.
pub fn dbm_brute_force_amplitude(spec: &DbmSpec, v: &SpinConfiguration) -> Complex64 {
    let n = spec.n_visible();
    let m = spec.n_shallow();
    let l = spec.n_deep();
    let mut visible_part = Complex64::default();
    for i in 0..n {
        visible_part += spec.visible_bias()[i] * v.value(i);
    }
    let mut total = Complex64::default();
    for h in 0..1u64 << m {
        for g in 0..1u64 << l {
            let mut exponent = visible_part;
            for k in 0..l {
                exponent += spec.deep_bias()[k] * spec.deep_alphabet().value(((g >> k) & 1) as u8);
            }
            for j in 0..m {
                let hj = spec.shallow_alphabet().value(((h >> j) & 1) as u8);
                if hj == 0.0 {
                    continue;
                }
                let mut z = spec.shallow_bias()[j];
                for i in 0..n {
                    if spec.vh().connected(i, j) {
                        z += spec.vh().get(i, j) * v.value(i);
                    }
                }
                for k in 0..l {
                    if spec.hg().connected(j, k) {
                        z += spec.hg().get(j, k) * spec.deep_alphabet().value(((g >> k) & 1) as u8);
                    }
                }
                exponent += z * hj;
            }
            total += exponent.exp();
        }
    }
    total
}

/// Convenience: configuration from a basis index with the spin alphabet.
pub fn spin_config(n: usize, index: u64) -> SpinConfiguration {
    SpinConfiguration::from_index(n, index, Alphabet::PlusMinus).unwrap()
}
