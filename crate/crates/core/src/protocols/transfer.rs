//! Transfer of an `L`-site entangled pattern from sites `0..L` to `L..2L`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::star::{StarNetwork, StarPropagator, SubspaceState};

const SCAN_POINTS: usize = 4096;

#[derive(Debug, Clone)]
pub struct TransferProgram {
    pub l: usize,
    /// Real amplitudes `c_i` of the initial pattern, unit norm.
    pub amplitudes: Vec<f64>,
    pub network: StarNetwork,
    /// First time the target fidelity peaks.
    pub t_transfer: f64,
}

impl TransferProgram {
    pub fn n(&self) -> usize {
        self.network.n()
    }

    fn pattern(&self, offset: usize) -> SubspaceState {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.network.dim()];
        for (i, &c) in self.amplitudes.iter().enumerate() {
            amps[offset + i] = Complex64::new(c, 0.0);
        }
        SubspaceState::new(amps).expect("unit-norm pattern")
    }

    /// `sum_i c_i |psi_i>` on sites `0..L`.
    pub fn initial_state(&self) -> SubspaceState {
        self.pattern(0)
    }

    /// The same pattern on sites `L..2L`.
    pub fn target_state(&self) -> SubspaceState {
        self.pattern(self.l)
    }
}

/// Couplings `gamma_scale * c_i` on sites `i` and `L + i`, zero beyond `2L`.
/// Active sites get `delta = c / gamma - 1`; decoupled sites get `delta = -1`.
pub fn make_transfer_program(
    n: usize,
    l: usize,
    amplitudes: &[f64],
    gamma_scale: f64,
    c: f64,
) -> Result<TransferProgram> {
    if l == 0 || amplitudes.len() != l {
        return Err(Error::InvalidInput(format!(
            "need L >= 1 amplitudes, got L = {l} with {} amplitudes",
            amplitudes.len()
        )));
    }
    if n < 1 || 2 * l > n - 1 {
        return Err(Error::InvalidInput(format!("L = {l} exceeds (N - 1) / 2 for N = {n}")));
    }
    if amplitudes.iter().any(|&a| a == 0.0 || !a.is_finite()) {
        return Err(Error::InvalidInput(
            "transfer amplitudes must be finite and non-zero".into(),
        ));
    }
    let norm2: f64 = amplitudes.iter().map(|a| a * a).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "amplitudes have squared norm {norm2}, expected 1"
        )));
    }
    if !(gamma_scale.is_finite() && gamma_scale != 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput("gamma scale must be finite and non-zero".into()));
    }

    let mut gammas = vec![0.0; n];
    for (i, &a) in amplitudes.iter().enumerate() {
        gammas[i] = gamma_scale * a;
        gammas[l + i] = gamma_scale * a;
    }
    let network = if c == 0.0 {
        StarNetwork::constrained(gammas, 0.0)?
    } else {
        let deltas = gammas
            .iter()
            .map(|&g| if g == 0.0 { -1.0 } else { c / g - 1.0 })
            .collect();
        StarNetwork::new(gammas, deltas)?
    };
    let mut program = TransferProgram {
        l,
        amplitudes: amplitudes.to_vec(),
        network,
        t_transfer: 0.0,
    };
    program.t_transfer = first_transfer_peak(&program)?;
    Ok(program)
}

/// Scans two bright-mode periods, then refines the first grid maximum by
/// golden-section search.
fn first_transfer_peak(program: &TransferProgram) -> Result<f64> {
    let prop = StarPropagator::new(&program.network)?;
    let start = program.initial_state();
    let target = program.target_state();
    let f = |t: f64| -> Result<f64> { Ok(target.fidelity(&prop.evolve(&start, t)?)) };

    let horizon = 8.0 * PI / program.network.omega();
    let dt = horizon / (SCAN_POINTS - 1) as f64;
    let values: Vec<f64> = (0..SCAN_POINTS)
        .into_par_iter()
        .map(|j| f(j as f64 * dt))
        .collect::<Result<_>>()?;
    let best = values.iter().cloned().fold(0.0, f64::max);
    let j = values.iter().position(|&v| v >= best - 1e-6).expect("non-empty scan");
    // climb to the local maximum of this first peak
    let mut j = j;
    while j + 1 < values.len() && values[j + 1] > values[j] {
        j += 1;
    }
    let (mut lo, mut hi) = (
        j.saturating_sub(1) as f64 * dt,
        (j + 1).min(SCAN_POINTS - 1) as f64 * dt,
    );
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone)]
pub struct FidelityCurve {
    pub times: Vec<f64>,
    /// `|<Phi(t)|Phi(0)>|^2`.
    pub return_fidelity: Vec<f64>,
    /// `|<Phi_target|Phi(t)>|^2`.
    pub target_fidelity: Vec<f64>,
    /// Total population on the decoupled sites beyond `2L`.
    pub idle_population: Vec<f64>,
}

pub fn fidelity_curve(program: &TransferProgram, times: &[f64]) -> Result<FidelityCurve> {
    let prop = StarPropagator::new(&program.network)?;
    let start = program.initial_state();
    let target = program.target_state();
    let idle = 2 * program.l..program.n();
    let rows: Vec<(f64, f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let s = prop.evolve(&start, t)?;
            let pops = s.populations();
            Ok((
                start.fidelity(&s).min(1.0),
                target.fidelity(&s).min(1.0),
                pops[idle.clone()].iter().sum(),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(FidelityCurve {
        times: times.to_vec(),
        return_fidelity: rows.iter().map(|r| r.0).collect(),
        target_fidelity: rows.iter().map(|r| r.1).collect(),
        idle_population: rows.iter().map(|r| r.2).collect(),
    })
}
