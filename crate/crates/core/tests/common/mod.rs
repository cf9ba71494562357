//! Test-only oracles and generators, independent of the library's solvers.
#![allow(dead_code)]

use colsel::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn jacobi_max(m: &[Vec<f64>]) -> f64 {
    *jacobi_eigenvalues(m).last().expect("nonempty")
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r)
        .map(|i| (0..c).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

/// Spectral norm via the eigenvalues of `A^T A`.
pub fn jacobi_spectral_norm(a: &[Vec<f64>]) -> f64 {
    let g = matmul(&transpose(a), a);
    jacobi_max(&g).max(0.0).sqrt()
}

/// Condition number via the eigenvalues of `A^T A`; infinite if rank deficient.
pub fn jacobi_condition(a: &[Vec<f64>]) -> f64 {
    let ev = jacobi_eigenvalues(&matmul(&transpose(a), a));
    let (lo, hi) = (ev[0], *ev.last().unwrap());
    if a.len() < a[0].len() || lo <= 1e-12 * hi {
        f64::INFINITY
    } else {
        (hi / lo).sqrt()
    }
}

pub fn gaussian(m: usize, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect())
        .collect()
}

pub fn standardized_gaussian(m: usize, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut a = gaussian(m, n, rng);
    for j in 0..n {
        let norm = (0..m).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        for row in a.iter_mut() {
            row[j] /= norm;
        }
    }
    a
}

pub fn symmetric_gaussian(n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let g = gaussian(n, n, rng);
    (0..n)
        .map(|i| (0..n).map(|j| (g[i][j] + g[j][i]) / 2.0).collect())
        .collect()
}

/// `[I_m  I_m]`.
pub fn double_identity(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| (0..2 * m).map(|j| if j == i || j == i + m { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn dense(a: &[Vec<f64>]) -> DenseMatrix {
    DenseMatrix::from_rows(a).expect("finite test matrix")
}

/// `[[-alpha F, G], [G, -alpha F]]` with `F = diag(f)`.
pub fn block_matrix(g: &[Vec<f64>], f: &[f64], alpha: f64) -> Vec<Vec<f64>> {
    let s = g.len();
    let mut out = vec![vec![0.0; 2 * s]; 2 * s];
    for i in 0..s {
        for j in 0..s {
            out[i][j + s] = g[i][j];
            out[i + s][j] = g[i][j];
        }
        out[i][i] = -alpha * f[i];
        out[i + s][i + s] = -alpha * f[i];
    }
    out
}

/// Random point of the simplex with positive entries.
pub fn random_simplex(s: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..s).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Maximum of `||B x||_2` over all sign vectors, by plain enumeration.
pub fn brute_inf2(b: &[Vec<f64>]) -> f64 {
    let (m, n) = (b.len(), b[0].len());
    let mut best: f64 = 0.0;
    for mask in 0u64..(1 << n) {
        let mut sq = 0.0;
        for i in 0..m {
            let v: f64 = (0..n).map(|j| if mask >> j & 1 == 1 { -b[i][j] } else { b[i][j] }).sum();
            sq += v * v;
        }
        best = best.max(sq.sqrt());
    }
    best
}

/// Maximum of `||G x||_1` over all sign vectors, by plain enumeration.
pub fn brute_inf1(g: &[Vec<f64>]) -> f64 {
    let n = g[0].len();
    let mut best: f64 = 0.0;
    for mask in 0u64..(1 << n) {
        let total: f64 = g
            .iter()
            .map(|row| {
                (0..n)
                    .map(|j| if mask >> j & 1 == 1 { -row[j] } else { row[j] })
                    .sum::<f64>()
                    .abs()
            })
            .sum();
        best = best.max(total);
    }
    best
}

/// Tolerance for the semidefinite and factor-norm checks.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

/// Random weights with some exact zeros, and a matching zero pattern in `B`.
fn weights_and_matrix(rng: &mut impl Rng) -> (Vec<f64>, Vec<Vec<f64>>) {
    let s = rng.random_range(2..=8);
    let m = rng.random_range(1..=6);
    let mut b = gaussian(m, s, rng);
    let mut f = random_simplex(s, rng);
    for j in 0..s {
        if rng.random_bool(0.15) && f.iter().filter(|&&x| x > 0.0).count() > 1 {
            f[j] = 0.0;
            b.iter_mut().for_each(|row| row[j] = 0.0);
        }
    }
    let total: f64 = f.iter().sum();
    f.iter_mut().for_each(|x| *x /= total);
    (f, b)
}

fn pinv_sqrt(f: &[f64]) -> Vec<f64> {
    f.iter().map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 }).collect()
}

/// Draws `alpha` on one side of `t_norm`, away from the boundary.
fn alpha_for(t_norm: f64, feasible: bool, rng: &mut impl Rng) -> f64 {
    if feasible {
        t_norm * rng.random_range(1.01..2.0)
    } else {
        t_norm * rng.random_range(0.3..0.99)
    }
}

/// Random instance on one side of the factor-norm bound. Returns whether the
/// assembled matrix is negative semidefinite and whether the factor norm is
/// within `alpha`.
pub fn pietsch_equivalence_case(rng: &mut impl Rng, feasible: bool) -> (bool, bool) {
    let (f, b) = weights_and_matrix(rng);
    let dinv = pinv_sqrt(&f);
    let t: Vec<Vec<f64>> = b.iter().map(|row| row.iter().zip(&dinv).map(|(x, d)| x * d).collect()).collect();
    let t_norm = jacobi_spectral_norm(&t);
    let alpha = alpha_for(t_norm, feasible, rng);
    let mut m = matmul(&transpose(&b), &b);
    for j in 0..f.len() {
        m[j][j] -= alpha * alpha * f[j];
    }
    let scale = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    (jacobi_max(&m) <= EQUIVALENCE_TOL * scale, t_norm <= alpha * (1.0 + EQUIVALENCE_TOL))
}

/// Block-matrix analogue of [`pietsch_equivalence_case`].
pub fn groth_equivalence_case(rng: &mut impl Rng, feasible: bool) -> (bool, bool) {
    let (f, _) = weights_and_matrix(rng);
    let s = f.len();
    let mut g = symmetric_gaussian(s, rng);
    for j in 0..s {
        if f[j] == 0.0 {
            for k in 0..s {
                g[j][k] = 0.0;
                g[k][j] = 0.0;
            }
        }
    }
    let dinv = pinv_sqrt(&f);
    let t: Vec<Vec<f64>> = (0..s).map(|i| (0..s).map(|j| dinv[i] * g[i][j] * dinv[j]).collect()).collect();
    let t_norm = jacobi_spectral_norm(&t);
    if t_norm == 0.0 {
        return (true, true);
    }
    let alpha = alpha_for(t_norm, feasible, rng);
    let block = block_matrix(&g, &f, alpha);
    let scale = block.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    (jacobi_max(&block) <= EQUIVALENCE_TOL * scale, t_norm <= alpha * (1.0 + EQUIVALENCE_TOL))
}
