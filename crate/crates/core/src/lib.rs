//! Periodic (dnoidal) and solitary traveling waves of the one-dimensional
//! Zakharov system
//!
//! ```text
//! i u_t + u_xx = u v,      v_tt - v_xx = (|u|^2)_xx
//! ```
//!
//! together with the numerical machinery used to check their stability:
//! Jacobi elliptic functions, Fourier discretizations of the linearized Hill
//! operators, constrained Rayleigh quotients and a conservative
//! pseudo-spectral integrator for the first-order form of the system.

pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod io;
pub mod spectral;
pub mod wavefamily;


pub use elliptic::{complete_e, complete_k, jacobi_sn_cn_dn, JacobiTriple, Modulus};
pub use dynamics::{ExperimentRecord, FieldState, GridSpec, ZakInvariants};
pub use error::{Error, Result};

pub use spectral::{Boundary, HillOperator, HillSpectrum};
pub use wavefamily::{DnoidalWave, FamilyTable, SolitaryWave, TravelingWave, WaveParams};
