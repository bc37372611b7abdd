//! Pseudo-spectral evolution of the first-order Zakharov system
//!
//! ```text
//! v_t = -V_x,   V_t = -(v + |u|^2)_x,   i u_t + u_xx = u v
//! ```
//!
//! on a periodic interval, together with the conserved quantities and the
//! orbital-stability experiment built on them.

mod experiment;
mod fourier;
mod invariants;
mod orbital;
mod perturb;
mod stepper;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use experiment::{
    compatible_length, run_ensemble, solitary_experiment, stability_experiment, ExperimentConfig,
    ExperimentRecord, RecordSummary, BlowUpInfo, RunMeta, WaveKind, WaveMeta,
    RECORD_CSV_HEADER,
};
pub use fourier::{signed_index, FourierGrid};
pub use invariants::{functional_b, invariants, uv_momentum, ZakInvariants};
pub use orbital::{
    best_shift_distance, omega_functional, orbital_distance, shift_distance, stationarity_check,
    OrbitalFit, Stationarity, TorusWave,
};
pub use perturb::{perturbed_state, Perturbation};
pub use stepper::{
    default_dt, evolve, rhs, step_rk4, Evolution, Integrator, Rate, SpectralState, Stepper,
};

pub const MIN_POINTS: usize = 64;

/// Uniform periodic grid `x_j = j L / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    n: usize,
}

impl GridSpec {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput(format!("period L = {l} must be positive")));
        }
        if n % 2 != 0 || n < MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "grid size N = {n} must be even and at least {MIN_POINTS}"
            )));
        }
        Ok(Self { l, n })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 * self.h()).collect()
    }
}

/// Grid samples of `(v, V, u)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub v: Vec<f64>,
    #[serde(rename = "V")]
    pub big_v: Vec<f64>,
    pub u: Vec<Complex64>,
}

impl FieldState {
    pub fn zeros(n: usize) -> Self {
        Self {
            t: 0.0,
            v: vec![0.0; n],
            big_v: vec![0.0; n],
            u: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn check(&self, grid: &GridSpec) -> Result<()> {
        let n = grid.n();
        if self.v.len() != n || self.big_v.len() != n || self.u.len() != n {
            return Err(Error::InvalidInput(format!(
                "state has ({}, {}, {}) samples, grid has {n}",
                self.v.len(),
                self.big_v.len(),
                self.u.len()
            )));
        }
        let finite = self.v.iter().chain(&self.big_v).all(|x| x.is_finite())
            && self.u.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::InvalidInput("state contains non-finite samples".into()));
        }
        Ok(())
    }

    /// Largest of the three sup norms.
    pub fn sup_norm(&self) -> f64 {
        let a = self.v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let b = self.big_v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let c = self.u.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        a.max(b).max(c)
    }

    pub fn mean_v(&self) -> f64 {
        self.v.iter().sum::<f64>() / self.v.len() as f64
    }

    pub fn mean_big_v(&self) -> f64 {
        self.big_v.iter().sum::<f64>() / self.big_v.len() as f64
    }
}
