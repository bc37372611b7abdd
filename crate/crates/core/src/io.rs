//! Output formats shared by the library and the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{FieldState, GridSpec};
use crate::error::{Error, Result};
use crate::wavefamily::{build_wave, eval_profiles, DnoidalWave, OdeResiduals, TravelingWave, WaveParams};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const WAVE_CSV_HEADER: &str = "x,phi,psi,varphi,phi_prime";

/// A constructed wave with its residuals and profiles on `x_j = j L / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveDocument {
    pub params: WaveParams,
    pub residuals: OdeResiduals,
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub varphi: Vec<f64>,
    pub phi_prime: Vec<f64>,
}

impl WaveDocument {
    pub fn new(wave: &DnoidalWave, n: usize) -> Result<Self> {
        let residuals = wave.ode_residuals(n.max(64))?;
        let l = wave.period();
        let x: Vec<f64> = (0..n).map(|j| j as f64 * l / n as f64).collect();
        let p = eval_profiles(wave, &x);
        Ok(Self {
            params: *wave.params(),
            residuals,
            phi_prime: x.iter().map(|&x| wave.phi_prime(x)).collect(),
            phi: p.phi,
            psi: p.psi,
            varphi: p.varphi,
            x,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(WAVE_CSV_HEADER);
        out.push('\n');
        for j in 0..self.x.len() {
            let row = [self.x[j], self.phi[j], self.psi[j], self.varphi[j], self.phi_prime[j]].map(fmt_f64);
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Rebuild the wave from `(L, c, nu)` and check it against the stored parameters.
    pub fn rebuild(&self) -> Result<DnoidalWave> {
        let p = &self.params;
        let w = build_wave(p.l, p.c, p.nu)?;
        let q = w.params();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300);
        if !(close(q.eta1, p.eta1) && close(q.eta2, p.eta2) && close(q.omega, p.omega)) {
            return Err(Error::InvalidInput(format!(
                "stored parameters (eta1 = {}, eta2 = {}) disagree with the rebuilt wave ({}, {})",
                p.eta1, p.eta2, q.eta1, q.eta2
            )));
        }
        Ok(w)
    }
}

/// Sidecar describing a binary field snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    /// Always `"f64-le"`.
    pub dtype: String,
    /// `[fields, N]`, field-major.
    pub shape: [usize; 2],
    pub fields: Vec<String>,
    pub t: f64,
    pub grid: GridSpec,
}

const SNAPSHOT_FIELDS: [&str; 4] = ["v", "V", "u_re", "u_im"];

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Write `v, V, Re u, Im u` as little-endian `f64` rows, plus a JSON sidecar
/// at `<path>.json`.
pub fn write_snapshot(path: &Path, grid: &GridSpec, s: &FieldState) -> Result<PathBuf> {
    s.check(grid)?;
    let n = grid.n();
    let mut bytes = Vec::with_capacity(4 * n * 8);
    let rows: [Vec<f64>; 4] = [
        s.v.clone(),
        s.big_v.clone(),
        s.u.iter().map(|z| z.re).collect(),
        s.u.iter().map(|z| z.im).collect(),
    ];
    for row in &rows {
        for x in row {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    let meta = SnapshotMeta {
        dtype: "f64-le".into(),
        shape: [4, n],
        fields: SNAPSHOT_FIELDS.iter().map(|s| s.to_string()).collect(),
        t: s.t,
        grid: *grid,
    };
    let side = sidecar_path(path);
    fs::write(&side, serde_json::to_string_pretty(&meta)?)?;
    Ok(side)
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotMeta, FieldState)> {
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let bytes = fs::read(path)?;
    let [rows, n] = meta.shape;
    if meta.dtype != "f64-le" || rows != 4 || bytes.len() != rows * n * 8 || n != meta.grid.n() {
        return Err(Error::InvalidInput(format!(
            "snapshot {} does not match its sidecar",
            path.display()
        )));
    }
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let row = |i: usize| vals[i * n..(i + 1) * n].to_vec();
    let (re, im) = (row(2), row(3));
    let state = FieldState {
        t: meta.t,
        v: row(0),
        big_v: row(1),
        u: re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
    };
    Ok((meta, state))
}
