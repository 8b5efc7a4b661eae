//! FFT plumbing tying the discrete transform to the continuous convention
//! `Ff(xi) = (2 pi)^(-d/2) int e^(-i x.xi) f(x) dx` on centered grids.
//!
//! Space samples live on `x_j = -X + j h`; frequency samples on
//! `xi_k = (k - n/2) dxi` with `dxi = pi/X`. Both layouts are index-centered,
//! which turns the continuous transform pair into a plain DFT conjugated by
//! `(-1)^j` sign masks (n is a multiple of 4 by the grid invariants).

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

use crate::grid::GridSpec;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    PLANNER.with(|p| {
        let fft = if inverse {
            p.borrow_mut().plan_fft_inverse(n)
        } else {
            p.borrow_mut().plan_fft_forward(n)
        };
        fft.process(data);
    });
}

/// Apply an in-place length-n transform along every axis of the row-major
/// `n^d` array.
fn transform_axes(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    match grid.dim() {
        1 => fft_in_place(data, inverse),
        _ => {
            for row in data.chunks_mut(n) {
                fft_in_place(row, inverse);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for jy in 0..n {
                for jx in 0..n {
                    col[jx] = data[jx * n + jy];
                }
                fft_in_place(&mut col, inverse);
                for jx in 0..n {
                    data[jx * n + jy] = col[jx];
                }
            }
        }
    }
}

fn checkerboard(grid: &GridSpec, data: &mut [Complex64]) {
    for i in 0..data.len() {
        let [ix, iy] = grid.split_index(i);
        if (ix + iy) % 2 == 1 {
            data[i] = -data[i];
        }
    }
}

/// Continuous-convention forward transform of space samples.
pub fn space_to_freq(grid: &GridSpec, space: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(space.len(), grid.len());
    let mut data = space.to_vec();
    checkerboard(grid, &mut data);
    transform_axes(grid, &mut data, false);
    checkerboard(grid, &mut data);
    let scale = (grid.spacing() / (2.0 * std::f64::consts::PI).sqrt()).powi(grid.dim() as i32);
    for v in &mut data {
        *v *= scale;
    }
    data
}

/// Continuous-convention inverse transform back to space samples.
pub fn freq_to_space(grid: &GridSpec, freq: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(freq.len(), grid.len());
    let mut data = freq.to_vec();
    checkerboard(grid, &mut data);
    transform_axes(grid, &mut data, true);
    checkerboard(grid, &mut data);
    let scale =
        (grid.freq_spacing() / (2.0 * std::f64::consts::PI).sqrt()).powi(grid.dim() as i32);
    for v in &mut data {
        *v *= scale;
    }
    data
}

/// Chirp-Z evaluation of `X_k = sum_j x_j e^(i j a) e^(-i j k theta)` for
/// `k = 0..n-1` (Bluestein; three FFTs of padded size).
fn czt(x: &[Complex64], a: f64, theta: f64) -> Vec<Complex64> {
    let n = x.len();
    let l = (2 * n - 1).next_power_of_two();
    let half = theta / 2.0;
    let chirp = |m: i64| -> Complex64 {
        // e^{+i m^2 theta/2}; reduce the angle for large m^2.
        let ang = (m as f64) * (m as f64) * half;
        Complex64::from_polar(1.0, ang.rem_euclid(2.0 * std::f64::consts::PI))
    };
    let mut u = vec![Complex64::new(0.0, 0.0); l];
    for j in 0..n {
        let phase = Complex64::from_polar(1.0, (j as f64 * a).rem_euclid(2.0 * std::f64::consts::PI));
        u[j] = x[j] * phase * chirp(j as i64).conj();
    }
    let mut v = vec![Complex64::new(0.0, 0.0); l];
    for m in -(n as i64 - 1)..=(n as i64 - 1) {
        let idx = m.rem_euclid(l as i64) as usize;
        v[idx] = chirp(m);
    }
    fft_in_place(&mut u, false);
    fft_in_place(&mut v, false);
    for (a, b) in u.iter_mut().zip(&v) {
        *a *= b;
    }
    fft_in_place(&mut u, true);
    let inv_l = 1.0 / l as f64;
    (0..n).map(|k| u[k] * inv_l * chirp(k as i64).conj()).collect()
}

/// Evaluate the continuous transform of the trig interpolant at scaled
/// frequencies: returns `G(t xi_k)` on the centered frequency layout, where
/// `G(omega) = (2 pi)^(-d/2) h^d sum_j f(x_j) e^(-i x_j omega)`.
///
/// This is exact band-limited interpolation of the stored frequency samples
/// (for box-supported signals the sampling theorem applies at spacing pi/X).
pub fn freq_at_scale(grid: &GridSpec, space: &[Complex64], t: f64) -> Vec<Complex64> {
    debug_assert_eq!(space.len(), grid.len());
    let n = grid.n();
    let theta = t * 2.0 * std::f64::consts::PI / n as f64;
    let a = (n as f64) * theta / 2.0;
    // Per-axis outer phase e^{+i X t dxi (k - n/2)}.
    let outer: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = grid.extent() * t * grid.freq_spacing() * (k as f64 - n as f64 / 2.0);
            Complex64::from_polar(1.0, ang.rem_euclid(2.0 * std::f64::consts::PI))
        })
        .collect();
    let axis = |row: &[Complex64]| -> Vec<Complex64> {
        let mut out = czt(row, a, theta);
        for (k, v) in out.iter_mut().enumerate() {
            *v *= outer[k];
        }
        out
    };
    let scale = (grid.spacing() / (2.0 * std::f64::consts::PI).sqrt()).powi(grid.dim() as i32);
    let mut data = space.to_vec();
    match grid.dim() {
        1 => {
            data = axis(&data);
        }
        _ => {
            for jx in 0..n {
                let row = axis(&data[jx * n..(jx + 1) * n]);
                data[jx * n..(jx + 1) * n].copy_from_slice(&row);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for ky in 0..n {
                for jx in 0..n {
                    col[jx] = data[jx * n + ky];
                }
                let out = axis(&col);
                for kx in 0..n {
                    data[kx * n + ky] = out[kx];
                }
            }
        }
    }
    for v in &mut data {
        *v *= scale;
    }
    data
}
