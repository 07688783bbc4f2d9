//! Savitzky-Golay smoothing of control sequences.
//!
//! Interior samples are filtered with the usual least-squares convolution
//! kernel; samples near the edges are re-fit on the window truncated to the
//! sequence, which keeps the filter exact on polynomials everywhere without
//! inventing phantom samples.

use crate::error::MppiError;
use crate::sequence::ControlSequence;
use sim_world::ControlInput;

/// Solves the small SPD normal-equation system by Gaussian elimination.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        for row in (col + 1)..n {
            let f = a[row][col] / p;
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Least-squares smoothing coefficients for offsets `t`, evaluated at 0.
///
/// `c` satisfies: fitted polynomial value at offset 0 equals `sum c_j y_j`.
fn fit_coefficients(offsets: &[i64], poly_order: usize) -> Vec<f64> {
    let p = poly_order + 1;
    // Normal equations (A^T A) z = e_0 with A_jk = t_j^k, then c = A z.
    let mut ata = vec![vec![0.0; p]; p];
    for &t in offsets {
        let mut powers = vec![1.0; 2 * p - 1];
        for k in 1..2 * p - 1 {
            powers[k] = powers[k - 1] * t as f64;
        }
        for i in 0..p {
            for j in 0..p {
                ata[i][j] += powers[i + j];
            }
        }
    }
    let mut e0 = vec![0.0; p];
    e0[0] = 1.0;
    let z = solve(ata, e0);
    offsets
        .iter()
        .map(|&t| {
            let mut acc = 0.0;
            let mut tp = 1.0;
            for &zk in &z {
                acc += zk * tp;
                tp *= t as f64;
            }
            acc
        })
        .collect()
}

/// Central convolution kernel of the filter (window length `window`).
pub fn sg_kernel(window: usize, poly_order: usize) -> Result<Vec<f64>, MppiError> {
    if window % 2 == 0 {
        return Err(MppiError::EvenWindow(window));
    }
    if window <= poly_order {
        return Err(MppiError::WindowTooShort {
            window,
            order: poly_order,
        });
    }
    let half = (window / 2) as i64;
    let offsets: Vec<i64> = (-half..=half).collect();
    Ok(fit_coefficients(&offsets, poly_order))
}

/// Filters both control channels.
pub fn sg_filter(
    seq: &ControlSequence,
    poly_order: usize,
    window: usize,
) -> Result<ControlSequence, MppiError> {
    let n = seq.len();
    if window > n {
        return Err(MppiError::WindowTooLong { window, len: n });
    }
    let kernel = sg_kernel(window, poly_order)?;
    let half = window / 2;

    let mut controls = Vec::with_capacity(n);
    for i in 0..n {
        let coeffs;
        let lo;
        if i >= half && i + half < n {
            lo = i - half;
            coeffs = kernel.clone();
        } else {
            // Truncated one-sided window at the boundary.
            lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let offsets: Vec<i64> = (lo..=hi).map(|t| t as i64 - i as i64).collect();
            coeffs = fit_coefficients(&offsets, poly_order);
        }
        let mut v = 0.0;
        let mut w = 0.0;
        for (c, u) in coeffs.iter().zip(&seq.controls[lo..lo + coeffs.len()]) {
            v += c * u.v;
            w += c * u.omega;
        }
        controls.push(ControlInput::new(v, w));
    }
    Ok(ControlSequence {
        controls,
        dt: seq.dt,
    })
}
