use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fourier::FourierGrid;
use super::{FieldState, GridSpec};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `dt * kappa_max^2` accepted by the explicit stepper; the RK4
/// stability interval on the imaginary axis is `2 sqrt 2`.
pub const RK4_IMAG_LIMIT: f64 = 2.8;
pub const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Rk4,
    /// `i u_xx` integrated exactly in Fourier space (Lawson RK4).
    IntegratingFactor,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "integrating-factor" | "if" => Ok(Self::IntegratingFactor),
            other => Err(Error::InvalidInput(format!("unknown integrator '{other}'"))),
        }
    }
}

/// `1e-4 (L / 2 pi)^2 (256 / N)^2`
pub fn default_dt(grid: &GridSpec) -> f64 {
    let a = grid.l() / (2.0 * std::f64::consts::PI);
    let b = 256.0 / grid.n() as f64;
    1e-4 * a * a * b * b
}

/// Fourier coefficients of `(v, V, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub t: f64,
    pub v: Vec<Complex64>,
    pub big_v: Vec<Complex64>,
    pub u: Vec<Complex64>,
}

impl SpectralState {
    pub fn from_fields(fg: &FourierGrid, s: &FieldState) -> Self {
        Self {
            t: s.t,
            v: fg.fft_real(&s.v),
            big_v: fg.fft_real(&s.big_v),
            u: fg.fft(&s.u),
        }
    }

    /// Transform and apply the 2/3 rule.
    pub fn from_fields_dealiased(fg: &FourierGrid, s: &FieldState) -> Self {
        let mut out = Self::from_fields(fg, s);
        fg.dealias(&mut out.v);
        fg.dealias(&mut out.big_v);
        fg.dealias(&mut out.u);
        out
    }

    pub fn to_fields(&self, fg: &FourierGrid) -> FieldState {
        FieldState {
            t: self.t,
            v: fg.ifft_real(&self.v),
            big_v: fg.ifft_real(&self.big_v),
            u: fg.ifft(&self.u),
        }
    }

    fn is_finite(&self) -> bool {
        self.v
            .iter()
            .chain(&self.big_v)
            .chain(&self.u)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Time derivative of a [`FieldState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rate {
    pub v: Vec<f64>,
    pub big_v: Vec<f64>,
    pub u: Vec<Complex64>,
}

#[derive(Clone)]
struct Stage {
    v: Vec<Complex64>,
    big_v: Vec<Complex64>,
    u: Vec<Complex64>,
}

impl Stage {
    fn zeros(n: usize) -> Self {
        Self {
            v: vec![ZERO; n],
            big_v: vec![ZERO; n],
            u: vec![ZERO; n],
        }
    }

    fn of(s: &SpectralState) -> Self {
        Self {
            v: s.v.clone(),
            big_v: s.big_v.clone(),
            u: s.u.clone(),
        }
    }

    /// `self = base + h * k`
    fn set_axpy(&mut self, base: &Stage, h: f64, k: &Stage) {
        for (dst, (b, d)) in [
            (&mut self.v, (&base.v, &k.v)),
            (&mut self.big_v, (&base.big_v, &k.big_v)),
            (&mut self.u, (&base.u, &k.u)),
        ] {
            for ((x, y), z) in dst.iter_mut().zip(b.iter()).zip(d.iter()) {
                *x = y + z * h;
            }
        }
    }
}

/// Fixed-step integrator on one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    fg: FourierGrid,
    dt: f64,
    integrator: Integrator,
    /// `e^{-i kappa^2 dt / 2}`
    half: Vec<Complex64>,
}

impl Stepper {
    pub fn new(fg: FourierGrid, dt: f64, integrator: Integrator) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step dt = {dt} must be positive")));
        }
        let k2max = fg
            .kappa2()
            .iter()
            .zip(fg.keep())
            .filter(|(_, &k)| k)
            .map(|(k2, _)| *k2)
            .fold(0.0, f64::max);
        if integrator == Integrator::Rk4 && dt * k2max > RK4_IMAG_LIMIT {
            return Err(Error::InvalidInput(format!(
                "dt = {dt} exceeds the explicit limit {:.3e} for this grid; \
                 reduce dt or use the integrating factor",
                RK4_IMAG_LIMIT / k2max
            )));
        }
        if dt * k2max.sqrt() > RK4_IMAG_LIMIT {
            return Err(Error::InvalidInput(format!("dt = {dt} exceeds the acoustic limit")));
        }
        let half = fg
            .kappa2()
            .iter()
            .map(|k2| Complex64::from_polar(1.0, -0.5 * k2 * dt))
            .collect();
        Ok(Self {
            fg,
            dt,
            integrator,
            half,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn fourier(&self) -> &FourierGrid {
        &self.fg
    }

    fn rate(&self, s: &Stage, out: &mut Stage, dispersion: bool) {
        let fg = &self.fg;
        let u = fg.ifft(&s.u);
        let v = fg.ifft(&s.v);
        let mut prod: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a * b.re).collect();
        let mut mod2: Vec<Complex64> = u.iter().map(|a| Complex64::new(a.norm_sqr(), 0.0)).collect();
        fg.fft_in_place(&mut prod);
        fg.fft_in_place(&mut mod2);
        fg.dealias(&mut prod);
        fg.dealias(&mut mod2);
        let kappa = fg.kappa();
        let kappa2 = fg.kappa2();
        for j in 0..fg.n() {
            let ik = I * kappa[j];
            out.v[j] = -ik * s.big_v[j];
            out.big_v[j] = -ik * (s.v[j] + mod2[j]);
            out.u[j] = -I * prod[j];
            if dispersion {
                out.u[j] -= I * kappa2[j] * s.u[j];
            }
        }
    }

    /// Advance one step in place.
    pub fn step(&self, s: &mut SpectralState) {
        let n = self.fg.n();
        let h = self.dt;
        let base = Stage::of(s);
        let mut k1 = Stage::zeros(n);
        let mut k2 = Stage::zeros(n);
        let mut k3 = Stage::zeros(n);
        let mut k4 = Stage::zeros(n);
        let mut tmp = Stage::zeros(n);
        match self.integrator {
            Integrator::Rk4 => {
                self.rate(&base, &mut k1, true);
                tmp.set_axpy(&base, 0.5 * h, &k1);
                self.rate(&tmp, &mut k2, true);
                tmp.set_axpy(&base, 0.5 * h, &k2);
                self.rate(&tmp, &mut k3, true);
                tmp.set_axpy(&base, h, &k3);
                self.rate(&tmp, &mut k4, true);
                let w = h / 6.0;
                for (dst, (a, b, c, d)) in [
                    (&mut s.v, (&k1.v, &k2.v, &k3.v, &k4.v)),
                    (&mut s.big_v, (&k1.big_v, &k2.big_v, &k3.big_v, &k4.big_v)),
                    (&mut s.u, (&k1.u, &k2.u, &k3.u, &k4.u)),
                ] {
                    for j in 0..n {
                        dst[j] += (a[j] + (b[j] + c[j]) * 2.0 + d[j]) * w;
                    }
                }
            }
            Integrator::IntegratingFactor => {
                let p = &self.half;
                self.rate(&base, &mut k1, false);
                tmp.set_axpy(&base, 0.5 * h, &k1);
                tmp.u.iter_mut().zip(p).for_each(|(z, e)| *z *= e);
                self.rate(&tmp, &mut k2, false);
                tmp.set_axpy(&base, 0.5 * h, &k2);
                for j in 0..n {
                    tmp.u[j] = p[j] * base.u[j] + 0.5 * h * k2.u[j];
                }
                self.rate(&tmp, &mut k3, false);
                tmp.set_axpy(&base, h, &k3);
                for j in 0..n {
                    tmp.u[j] = p[j] * (p[j] * base.u[j] + h * k3.u[j]);
                }
                self.rate(&tmp, &mut k4, false);
                let w = h / 6.0;
                for j in 0..n {
                    s.v[j] += (k1.v[j] + (k2.v[j] + k3.v[j]) * 2.0 + k4.v[j]) * w;
                    s.big_v[j] += (k1.big_v[j] + (k2.big_v[j] + k3.big_v[j]) * 2.0 + k4.big_v[j]) * w;
                    let p2 = p[j] * p[j];
                    s.u[j] = p2 * base.u[j]
                        + (p2 * k1.u[j] + p[j] * (k2.u[j] + k3.u[j]) * 2.0 + k4.u[j]) * w;
                }
            }
        }
        s.t += h;
    }
}

/// Right-hand side on grid samples, with the quadratic terms dealiased.
pub fn rhs(grid: &GridSpec, s: &FieldState) -> Result<Rate> {
    s.check(grid)?;
    let fg = FourierGrid::new(*grid);
    let stepper = Stepper {
        half: Vec::new(),
        fg: fg.clone(),
        dt: 0.0,
        integrator: Integrator::Rk4,
    };
    let stage = Stage::of(&SpectralState::from_fields(&fg, s));
    let mut out = Stage::zeros(grid.n());
    stepper.rate(&stage, &mut out, true);
    Ok(Rate {
        v: fg.ifft_real(&out.v),
        big_v: fg.ifft_real(&out.big_v),
        u: fg.ifft(&out.u),
    })
}

/// A running solution with blow-up monitoring.
#[derive(Debug, Clone)]
pub struct Evolution {
    stepper: Stepper,
    state: SpectralState,
    t0: f64,
    steps: u64,
    initial_sup: f64,
}

impl Evolution {
    /// The initial data are projected onto the dealiased modes.
    pub fn new(grid: &GridSpec, initial: &FieldState, dt: f64, integrator: Integrator) -> Result<Self> {
        initial.check(grid)?;
        let fg = FourierGrid::new(*grid);
        let state = SpectralState::from_fields_dealiased(&fg, initial);
        let initial_sup = state.to_fields(&fg).sup_norm();
        Ok(Self {
            stepper: Stepper::new(fg, dt, integrator)?,
            t0: initial.t,
            state,
            steps: 0,
            initial_sup,
        })
    }

    pub fn t(&self) -> f64 {
        self.t0 + self.steps as f64 * self.stepper.dt
    }

    pub fn state(&self) -> &SpectralState {
        &self.state
    }

    pub fn fields(&self) -> FieldState {
        self.state.to_fields(&self.stepper.fg)
    }

    pub fn fourier(&self) -> &FourierGrid {
        &self.stepper.fg
    }

    pub fn dt(&self) -> f64 {
        self.stepper.dt
    }

    pub fn advance(&mut self, steps: u64) -> Result<()> {
        let limit = BLOW_UP_FACTOR * self.initial_sup.max(f64::MIN_POSITIVE);
        for _ in 0..steps {
            self.stepper.step(&mut self.state);
            self.steps += 1;
            self.state.t = self.t();
            if !self.state.is_finite() {
                return Err(Error::BlowUp {
                    t: self.t(),
                    reason: "non-finite Fourier coefficients".into(),
                });
            }
            let sup = self.fields().sup_norm();
            if sup > limit {
                return Err(Error::BlowUp {
                    t: self.t(),
                    reason: format!("sup norm {sup:.3e} exceeds {BLOW_UP_FACTOR:e} times initial"),
                });
            }
        }
        Ok(())
    }
}

/// One classical RK4 step from grid samples.
pub fn step_rk4(grid: &GridSpec, s: &FieldState, dt: f64) -> Result<FieldState> {
    let mut e = Evolution::new(grid, s, dt, Integrator::Rk4)?;
    e.advance(1)?;
    Ok(e.fields())
}

/// Integrate to `t_end` with a step no larger than `dt`.
pub fn evolve(
    grid: &GridSpec,
    s: &FieldState,
    dt: f64,
    t_end: f64,
    integrator: Integrator,
) -> Result<FieldState> {
    let span = t_end - s.t;
    if !(span >= 0.0) {
        return Err(Error::InvalidInput(format!("t_end = {t_end} precedes t = {}", s.t)));
    }
    let steps = (span / dt - 1e-9).ceil().max(0.0) as u64;
    if steps == 0 {
        return Ok(s.clone());
    }
    let mut e = Evolution::new(grid, s, span / steps as f64, integrator)?;
    e.advance(steps)?;
    Ok(e.fields())
}
