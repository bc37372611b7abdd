use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::GridSpec;

/// FFT plans and wavenumbers for one grid.
///
/// Coefficients follow the unnormalized forward transform
/// `f_hat[n] = sum_j f_j e^{-2 pi i n j / N}`, so that
/// `int_0^L f conj(g) dx = (L / N^2) sum_n f_hat[n] conj(g_hat[n])`.
#[derive(Clone)]
pub struct FourierGrid {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kappa: Vec<f64>,
    kappa2: Vec<f64>,
    keep: Vec<bool>,
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid").field("grid", &self.grid).finish()
    }
}

impl FourierGrid {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let base = 2.0 * std::f64::consts::PI / grid.l();
        let mut kappa = Vec::with_capacity(n);
        let mut kappa2 = Vec::with_capacity(n);
        let mut keep = Vec::with_capacity(n);
        for j in 0..n {
            let s = signed_index(j, n);
            let k = base * s as f64;
            // the Nyquist mode has no odd derivative
            kappa.push(if 2 * j == n { 0.0 } else { k });
            kappa2.push(k * k);
            keep.push(3 * s.unsigned_abs() < n as u64);
        }
        Self {
            grid,
            forward,
            inverse,
            kappa,
            kappa2,
            keep,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn l(&self) -> f64 {
        self.grid.l()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn kappa2(&self) -> &[f64] {
        &self.kappa2
    }

    /// Modes kept by the 2/3 rule.
    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn fft(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = x.to_vec();
        self.forward.process(&mut out);
        out
    }

    pub fn fft_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.forward.process(&mut out);
        out
    }

    pub fn ifft(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = x.to_vec();
        self.ifft_in_place(&mut out);
        out
    }

    pub fn ifft_in_place(&self, x: &mut [Complex64]) {
        self.inverse.process(x);
        let scale = 1.0 / self.n() as f64;
        x.iter_mut().for_each(|z| *z *= scale);
    }

    pub fn fft_in_place(&self, x: &mut [Complex64]) {
        self.forward.process(x);
    }

    /// Real part of the inverse transform.
    pub fn ifft_real(&self, x: &[Complex64]) -> Vec<f64> {
        self.ifft(x).iter().map(|z| z.re).collect()
    }

    pub fn dealias(&self, x: &mut [Complex64]) {
        for (z, &k) in x.iter_mut().zip(&self.keep) {
            if !k {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `int f conj(g)` from coefficients.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let s: Complex64 = f.iter().zip(g).map(|(a, b)| a * b.conj()).sum();
        s * self.quad_scale()
    }

    /// `int f' conj(g') + nu f conj(g)` from coefficients.
    pub fn inner_h1(&self, f: &[Complex64], g: &[Complex64], nu: f64) -> Complex64 {
        let s: Complex64 = f
            .iter()
            .zip(g)
            .zip(&self.kappa2)
            .map(|((a, b), k2)| a * b.conj() * (k2 + nu))
            .sum();
        s * self.quad_scale()
    }

    pub fn norm2(&self, f: &[Complex64]) -> f64 {
        f.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.quad_scale()
    }

    pub fn norm2_h1(&self, f: &[Complex64], nu: f64) -> f64 {
        f.iter()
            .zip(&self.kappa2)
            .map(|(z, k2)| z.norm_sqr() * (k2 + nu))
            .sum::<f64>()
            * self.quad_scale()
    }

    /// `L / N^2`
    pub fn quad_scale(&self) -> f64 {
        self.l() / (self.n() as f64).powi(2)
    }

    /// Coefficients of `f(x + y)`.
    pub fn shift(&self, f: &[Complex64], y: f64) -> Vec<Complex64> {
        f.iter()
            .zip(&self.kappa)
            .map(|(z, k)| z * Complex64::from_polar(1.0, k * y))
            .collect()
    }

    /// Coefficients of `f'`.
    pub fn derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        f.iter()
            .zip(&self.kappa)
            .map(|(z, k)| z * Complex64::new(0.0, *k))
            .collect()
    }
}

/// `j` for `j <= N/2`, `j - N` above.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if 2 * j <= n {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
