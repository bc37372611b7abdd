use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::invariants::{functional_b, uv_momentum_spectral, ZakInvariants};
use super::orbital::{best_shift_distance, orbital_distance, shift_distance, TorusWave};
use super::perturb::{perturbed_state, Perturbation};
use super::stepper::{default_dt, Evolution, Integrator, SpectralState};
use super::{FieldState, GridSpec};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::wavefamily::{solitary_wave, DnoidalWave, TravelingWave, WaveParams};

pub const RECORD_CSV_HEADER: &str = "t,E,Q1,Q2,B,rho_nu,y_star,theta_star,dist_v,dist_V";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub t_end: f64,
    /// `None` selects [`default_dt`].
    pub dt: Option<f64>,
    /// Time between recorded samples.
    pub save_interval: f64,
    pub integrator: Integrator,
    pub perturbation: Perturbation,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 256,
            t_end: 5.0,
            dt: None,
            save_interval: 0.05,
            integrator: Integrator::Rk4,
            perturbation: Perturbation {
                delta: 0.0,
                seed: 0,
                respect_mean_condition: true,
                renormalize: false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveKind {
    Dnoidal,
    Solitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveMeta {
    pub kind: WaveKind,
    pub c: f64,
    pub omega: f64,
    pub nu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<WaveParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_factor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub grid: GridSpec,
    pub dt: f64,
    pub steps: u64,
    pub save_every: u64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub perturbation: Perturbation,
    pub wave: WaveMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUpInfo {
    pub t: f64,
    pub reason: String,
}

/// Time series from one evolution run. All series share the length of `times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub meta: RunMeta,
    pub times: Vec<f64>,
    #[serde(rename = "E")]
    pub energy: Vec<f64>,
    #[serde(rename = "Q1")]
    pub q1: Vec<f64>,
    #[serde(rename = "Q2")]
    pub q2: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    pub rho_nu: Vec<f64>,
    /// Unwrapped in time.
    pub y_star: Vec<f64>,
    /// Unwrapped in time.
    pub theta_star: Vec<f64>,
    /// at `y_star`
    pub dist_v: Vec<f64>,
    #[serde(rename = "dist_V")]
    pub dist_big_v: Vec<f64>,
    /// at the shift minimizing the `v` distance alone
    pub dist_v_best: Vec<f64>,
    #[serde(rename = "dist_V_best")]
    pub dist_big_v_best: Vec<f64>,
    /// `int u V + Im(u_x conj u)`
    pub q1_uv_re: Vec<f64>,
    pub q1_uv_im: Vec<f64>,
    /// `B(t) - B(wave)`
    pub delta_b: Vec<f64>,
    pub b_wave: f64,
    pub blow_up: Option<BlowUpInfo>,
    /// Fields at the last saved time; not serialized.
    #[serde(skip)]
    pub last_state: Option<FieldState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecordSummary {
    pub samples: usize,
    pub t_final: f64,
    pub drift_e: f64,
    pub drift_q1: f64,
    pub drift_q2: f64,
    pub drift_q1_uv: f64,
    pub sup_rho: f64,
    pub delta_b0: f64,
    /// `max_t |dB(t) - dB(0)|`
    pub delta_b_change: f64,
    pub blow_up_t: Option<f64>,
}

fn max_rel(series: &[f64]) -> f64 {
    let r = series[0].abs().max(f64::MIN_POSITIVE);
    series.iter().map(|x| (x - series[0]).abs() / r).fold(0.0, f64::max)
}

/// Representative of `x` modulo `period` closest to `prev`.
fn unwrap_near(x: f64, prev: f64, period: f64) -> f64 {
    x + period * ((prev - x) / period).round()
}

impl ExperimentRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn summary(&self) -> RecordSummary {
        let p0 = num_complex::Complex64::new(self.q1_uv_re[0], self.q1_uv_im[0]);
        let drift_q1_uv = self
            .q1_uv_re
            .iter()
            .zip(&self.q1_uv_im)
            .map(|(&re, &im)| (num_complex::Complex64::new(re, im) - p0).norm())
            .fold(0.0, f64::max)
            / p0.norm().max(f64::MIN_POSITIVE);
        RecordSummary {
            samples: self.len(),
            t_final: *self.times.last().unwrap_or(&0.0),
            drift_e: max_rel(&self.energy),
            drift_q1: max_rel(&self.q1),
            drift_q2: max_rel(&self.q2),
            drift_q1_uv,
            sup_rho: self.rho_nu.iter().copied().fold(0.0, f64::max),
            delta_b0: self.delta_b[0],
            delta_b_change: self.delta_b.iter().map(|d| (d - self.delta_b[0]).abs()).fold(0.0, f64::max),
            blow_up_t: self.blow_up.as_ref().map(|b| b.t),
        }
    }

    /// The record itself, or the blow-up it ended with.
    pub fn into_result(self) -> Result<Self> {
        match &self.blow_up {
            Some(b) => Err(Error::BlowUp {
                t: b.t,
                reason: b.reason.clone(),
            }),
            None => Ok(self),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(200 * (self.len() + 1));
        out.push_str(RECORD_CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let row = [
                self.times[i],
                self.energy[i],
                self.q1[i],
                self.q2[i],
                self.b[i],
                self.rho_nu[i],
                self.y_star[i],
                self.theta_star[i],
                self.dist_v[i],
                self.dist_big_v[i],
            ];
            let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    fn push(&mut self, tw: &TorusWave, evo: &Evolution) -> Result<()> {
        let fg = evo.fourier();
        let t = evo.t();
        let fields = evo.fields();
        let inv = ZakInvariants::of_spectral(fg, evo.state());
        let fit = orbital_distance(tw, &fields.u, t)?;
        let l = fg.l();
        let (y, theta) = match (self.y_star.last(), self.theta_star.last()) {
            (Some(&py), Some(&pt)) => (
                unwrap_near(fit.y_star, py, l),
                unwrap_near(fit.theta_star, pt, 2.0 * PI),
            ),
            _ => (unwrap_near(fit.y_star, 0.0, l), unwrap_near(fit.theta_star, 0.0, 2.0 * PI)),
        };
        let b = functional_b(&inv, tw.c, tw.omega);
        let uv = uv_momentum_spectral(fg, evo.state());
        self.times.push(t);
        self.energy.push(inv.e);
        self.q1.push(inv.q1);
        self.q2.push(inv.q2);
        self.b.push(b);
        self.delta_b.push(b - self.b_wave);
        self.rho_nu.push(fit.rho);
        self.y_star.push(y);
        self.theta_star.push(theta);
        self.dist_v.push(shift_distance(fg, &fields.v, tw.psi_hat(), fit.y_star));
        self.dist_big_v.push(shift_distance(fg, &fields.big_v, tw.varphi_hat(), fit.y_star));
        self.dist_v_best.push(best_shift_distance(fg, &fields.v, tw.psi_hat()).0);
        self.dist_big_v_best.push(best_shift_distance(fg, &fields.big_v, tw.varphi_hat()).0);
        self.q1_uv_re.push(uv.re);
        self.q1_uv_im.push(uv.im);
        Ok(())
    }
}

fn run(tw: &TorusWave, cfg: &ExperimentConfig, wave: WaveMeta) -> Result<ExperimentRecord> {
    if !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("t_end = {} must be positive", cfg.t_end)));
    }
    if !(cfg.save_interval > 0.0) {
        return Err(Error::InvalidInput("save interval must be positive".into()));
    }
    let grid = tw.grid();
    let requested = cfg.dt.unwrap_or_else(|| default_dt(&grid));
    if !(requested > 0.0) {
        return Err(Error::InvalidInput(format!("dt = {requested} must be positive")));
    }
    let steps = (cfg.t_end / requested - 1e-9).ceil().max(1.0) as u64;
    let dt = cfg.t_end / steps as f64;
    let save_every = ((cfg.save_interval / dt).round() as u64).max(1);

    let initial = perturbed_state(tw, &cfg.perturbation)?;
    let mut evo = Evolution::new(&grid, &initial, dt, cfg.integrator)?;
    let fg = evo.fourier().clone();
    let reference = SpectralState::from_fields_dealiased(&fg, &tw.initial_state());
    let b_wave = functional_b(&ZakInvariants::of_spectral(&fg, &reference), tw.c, tw.omega);

    let mut record = ExperimentRecord {
        meta: RunMeta {
            grid,
            dt,
            steps,
            save_every,
            t_end: cfg.t_end,
            integrator: cfg.integrator,
            perturbation: cfg.perturbation,
            wave,
        },
        times: Vec::new(),
        energy: Vec::new(),
        q1: Vec::new(),
        q2: Vec::new(),
        b: Vec::new(),
        rho_nu: Vec::new(),
        y_star: Vec::new(),
        theta_star: Vec::new(),
        dist_v: Vec::new(),
        dist_big_v: Vec::new(),
        dist_v_best: Vec::new(),
        dist_big_v_best: Vec::new(),
        q1_uv_re: Vec::new(),
        q1_uv_im: Vec::new(),
        delta_b: Vec::new(),
        b_wave,
        blow_up: None,
        last_state: None,
    };
    record.push(tw, &evo)?;
    let mut done = 0;
    while done < steps {
        let chunk = save_every.min(steps - done);
        match evo.advance(chunk) {
            Ok(()) => {}
            Err(Error::BlowUp { t, reason }) => {
                log::warn!("blow-up at t = {t}: {reason}");
                record.blow_up = Some(BlowUpInfo { t, reason });
                break;
            }
            Err(e) => return Err(e),
        }
        done += chunk;
        record.push(tw, &evo)?;
    }
    record.last_state = Some(evo.fields());
    Ok(record)
}

/// Perturb a dnoidal wave and track its distance to the wave's orbit.
///
/// The period must satisfy `c L / (4 pi) in Z` so that the envelope
/// `e^{i c x/2} phi(x)` lives on the torus.
pub fn stability_experiment(wave: &DnoidalWave, cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let grid = GridSpec::new(wave.period(), cfg.n)?;
    let tw = TorusWave::sample(wave, grid)?;
    let meta = WaveMeta {
        kind: WaveKind::Dnoidal,
        c: wave.speed(),
        omega: wave.omega(),
        nu: wave.nu(),
        params: Some(*wave.params()),
        box_factor: None,
    };
    run(&tw, cfg, meta)
}

/// Smallest `L >= min_len` with `c L / (4 pi)` an integer.
pub fn compatible_length(min_len: f64, c: f64) -> f64 {
    if c == 0.0 {
        return min_len;
    }
    let unit = 4.0 * PI / c.abs();
    let q = (min_len / unit - 1e-12).ceil().max(1.0);
    q * unit
}

/// Same pipeline on the sech-profile wave, periodized on a box of at least
/// `box_factor / sqrt(-4 omega - c^2)`.
pub fn solitary_experiment(omega: f64, c: f64, box_factor: f64, cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    if !(box_factor > 0.0) {
        return Err(Error::InvalidInput(format!("box factor {box_factor} must be positive")));
    }
    let wave = solitary_wave(omega, c)?;
    if box_factor < 80.0 {
        log::warn!("box factor {box_factor} < 80: truncated tails are above 1e-14");
    }
    let l = compatible_length(box_factor / wave.width(), c);
    let tw = TorusWave::sample(&wave, GridSpec::new(l, cfg.n)?)?;
    let meta = WaveMeta {
        kind: WaveKind::Solitary,
        c,
        omega,
        nu: wave.nu(),
        params: None,
        box_factor: Some(box_factor),
    };
    run(&tw, cfg, meta)
}

/// Independent runs over `(seed, delta)` keys, returned in key order.
pub fn run_ensemble(
    wave: &DnoidalWave,
    base: &ExperimentConfig,
    keys: &[(u64, f64)],
) -> Result<Vec<ExperimentRecord>> {
    let mut keys = keys.to_vec();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    keys.par_iter()
        .map(|&(seed, delta)| {
            let cfg = ExperimentConfig {
                perturbation: Perturbation {
                    seed,
                    delta,
                    ..base.perturbation
                },
                ..*base
            };
            stability_experiment(wave, &cfg)
        })
        .collect()
}
