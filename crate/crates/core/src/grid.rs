//! Uniform torus grids and spectral (Fourier) interpolation on them.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::algebra::C64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub sizes: Vec<usize>,
}

impl TorusGrid {
    pub fn new(sizes: Vec<usize>) -> Self {
        assert!(sizes.iter().all(|n| *n > 0), "grid sizes must be positive");
        Self { sizes }
    }

    pub fn uniform(d: usize, n: usize) -> Self {
        Self::new(vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major multi-index of a flat index.
    pub fn index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            idx[j] = flat % self.sizes[j];
            flat /= self.sizes[j];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.index(flat).iter().zip(&self.sizes).map(|(i, n)| *i as f64 / *n as f64).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.sizes.iter().map(|n| 1.0 / *n as f64).collect()
    }
}

fn fft_axis(data: &mut [C64], sizes: &[usize], axis: usize, inverse: bool, planner: &mut FftPlanner<f64>) {
    let n = sizes[axis];
    let stride: usize = sizes[axis + 1..].iter().product();
    let outer: usize = sizes[..axis].iter().product();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut line = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[base + k * stride];
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                data[base + k * stride] = *v;
            }
        }
    }
}

/// Unnormalized d-dimensional DFT, in place.
pub fn fftn(data: &mut [C64], sizes: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    for axis in 0..sizes.len() {
        fft_axis(data, sizes, axis, inverse, &mut planner);
    }
}

/// Signed frequency of DFT bin k for length n.
pub fn signed_freq(k: usize, n: usize) -> i64 {
    if 2 * k <= n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Values of the trigonometric interpolant at grid + shift. The Nyquist mode of
/// even-length axes is treated as a cosine so real data stays real.
pub fn fourier_shift(values: &[C64], grid: &TorusGrid, shift: &[f64]) -> Vec<C64> {
    let mut data = values.to_vec();
    fftn(&mut data, &grid.sizes, false);
    let total = grid.len() as f64;
    let per_axis: Vec<Vec<C64>> = grid
        .sizes
        .iter()
        .zip(shift)
        .map(|(&n, &s)| {
            (0..n)
                .map(|k| {
                    if n % 2 == 0 && 2 * k == n {
                        C64::from((PI * n as f64 * s).cos())
                    } else {
                        C64::from_polar(1.0, 2.0 * PI * signed_freq(k, n) as f64 * s)
                    }
                })
                .collect()
        })
        .collect();
    for (flat, v) in data.iter_mut().enumerate() {
        let idx = grid.index(flat);
        let mut f = C64::new(1.0 / total, 0.0);
        for (j, i) in idx.iter().enumerate() {
            f *= per_axis[j][*i];
        }
        *v *= f;
    }
    fftn(&mut data, &grid.sizes, true);
    data
}

/// Fourier coefficients ĉ_k (normalized) with signed multi-indices.
pub fn fourier_coefficients(values: &[C64], grid: &TorusGrid) -> Vec<(Vec<i64>, C64)> {
    let mut data = values.to_vec();
    fftn(&mut data, &grid.sizes, false);
    let total = grid.len() as f64;
    data.iter()
        .enumerate()
        .map(|(flat, v)| {
            let k = grid.index(flat).iter().zip(&grid.sizes).map(|(i, n)| signed_freq(*i, *n)).collect();
            (k, *v / total)
        })
        .collect()
}
