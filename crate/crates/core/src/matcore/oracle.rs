//! Exact `(inf,2)` and `(inf,1)` norms by enumerating sign vectors.
//!
//! Both norms maximize a convex function over the cube `[-1, 1]^s`, so the
//! maximum is attained at a vertex. A Gray-code walk visits all `2^(s-1)`
//! vertices with `x_0 = +1` (the norms are even in `x`), updating `y = A x`
//! with a single column per step.

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Largest column count accepted by the exact oracles.
pub const ENUMERATION_CAP: usize = 22;

/// Refresh `y = A x` from scratch this often to bound drift in the running sum.
const REFRESH_EVERY: u64 = 1 << 12;

/// `max ||B x||_2` over sign vectors, with an attaining `x`.
pub fn norm_inf2_exact(b: &DenseMatrix) -> Result<(f64, Vec<i8>)> {
    norm_inf2_exact_capped(b, ENUMERATION_CAP)
}

/// `max ||G x||_1` over sign vectors, with an attaining `x`.
pub fn norm_inf1_exact(g: &DenseMatrix) -> Result<(f64, Vec<i8>)> {
    norm_inf1_exact_capped(g, ENUMERATION_CAP)
}

pub fn norm_inf2_exact_capped(b: &DenseMatrix, cap: usize) -> Result<(f64, Vec<i8>)> {
    let (sq, x) = enumerate(b, cap, |y| y.iter().map(|v| v * v).sum())?;
    Ok((sq.sqrt(), x))
}

pub fn norm_inf1_exact_capped(g: &DenseMatrix, cap: usize) -> Result<(f64, Vec<i8>)> {
    enumerate(g, cap, |y| y.iter().map(|v| v.abs()).sum())
}

/// `||B x||_2` for a sign vector.
pub fn inf2_at(b: &DenseMatrix, x: &[i8]) -> f64 {
    let y = b.apply(&to_f64(x));
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `||G x||_1` for a sign vector.
pub fn inf1_at(g: &DenseMatrix, x: &[i8]) -> f64 {
    g.apply(&to_f64(x)).iter().map(|v| v.abs()).sum()
}

/// Sign pattern of a real vector, with zeros mapped to `+1`.
pub fn sign_vector(v: &[f64]) -> Vec<i8> {
    v.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect()
}

pub(crate) fn to_f64(x: &[i8]) -> Vec<f64> {
    x.iter().map(|&s| f64::from(s)).collect()
}

fn enumerate<F>(a: &DenseMatrix, cap: usize, score: F) -> Result<(f64, Vec<i8>)>
where
    F: Fn(&[f64]) -> f64,
{
    let s = a.ncols();
    let cap = cap.min(ENUMERATION_CAP);
    if s > cap {
        return Err(Error::EnumerationCap { cols: s, cap });
    }
    if s == 0 {
        return Ok((0.0, Vec::new()));
    }
    let cols: Vec<Vec<f64>> = (0..s).map(|j| a.column(j)).collect();
    let mut x = vec![1.0_f64; s];
    let mut y = a.apply(&x);
    let mut best = score(&y);
    let mut best_x = x.clone();

    let steps: u64 = 1 << (s - 1);
    for k in 1..steps {
        let j = k.trailing_zeros() as usize + 1;
        let xj = x[j];
        for (yi, cij) in y.iter_mut().zip(&cols[j]) {
            *yi -= 2.0 * xj * cij;
        }
        x[j] = -xj;
        if k % REFRESH_EVERY == 0 {
            y = a.apply(&x);
        }
        let val = score(&y);
        if val > best {
            best = val;
            best_x.copy_from_slice(&x);
        }
    }
    let witness = best_x.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
    Ok((best, witness))
}

/// One-flip hill climbing on a sign vector; never lowers `score`.
pub(crate) fn local_ascent<F>(x: &mut [i8], score: F) -> f64
where
    F: Fn(&[i8]) -> f64,
{
    let mut best = score(x);
    loop {
        let mut improved = false;
        for j in 0..x.len() {
            x[j] = -x[j];
            let v = score(x);
            if v > best * (1.0 + 1e-14) {
                best = v;
                improved = true;
            } else {
                x[j] = -x[j];
            }
        }
        if !improved {
            return best;
        }
    }
}
