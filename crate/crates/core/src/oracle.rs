//! Brute-force checks of the star model in the full `2^(N+1)`-dimensional
//! space of `N + 1` qubits.
//!
//! Qubit `q` (circumjacent rings `0..N`, center `N`) is bit `N - q` of the
//! basis index, so `|psi_q>` sits at index `1 << (N - q)`. `|1>` is the
//! excited state with `S^z = +1/2` (or `+1` in the Pauli convention).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, norm, ComplexMatrix};
use crate::star::{closed_form_from_center, closed_form_from_site, StarNetwork, StarPropagator, SubspaceState};

/// Largest full-space dimension (14 qubits). A dense matrix at the cap takes 4 GiB.
pub const FULL_SPACE_CAP: usize = 16384;

/// Threshold above which the single-excitation block is considered to leak.
pub const LEAKAGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZConvention {
    /// `S^z = +-1/2`.
    #[default]
    HalfSpin,
    /// `S^z = +-1`.
    Pauli,
}

impl ZConvention {
    fn magnitude(self) -> f64 {
        match self {
            ZConvention::HalfSpin => 0.5,
            ZConvention::Pauli => 1.0,
        }
    }
}

fn full_dim(net: &StarNetwork) -> Result<usize> {
    let qubits = net.dim();
    if qubits >= usize::BITS as usize || (1usize << qubits) > FULL_SPACE_CAP {
        return Err(Error::DimensionCap {
            dim: 1usize.checked_shl(qubits as u32).unwrap_or(usize::MAX),
            cap: FULL_SPACE_CAP,
        });
    }
    Ok(1 << qubits)
}

/// Index of `|psi_q>` in the product basis of `n + 1` qubits.
pub fn excitation_index(n: usize, q: usize) -> usize {
    1 << (n - q)
}

/// Sparse form of the flip-flop plus `S^z S^z` star interaction.
#[derive(Debug, Clone)]
pub struct FullSpaceOperator {
    n: usize,
    diagonal: Vec<f64>,
    /// `(bit mask of ring i, gamma_i / 2)` for every coupled ring.
    flips: Vec<(usize, f64)>,
}

impl FullSpaceOperator {
    pub fn new(net: &StarNetwork, convention: ZConvention) -> Result<Self> {
        let dim = full_dim(net)?;
        let n = net.n();
        let z = convention.magnitude();
        let center_mask = 1usize;
        let diagonal = (0..dim)
            .map(|b| {
                let zc = if b & center_mask != 0 { z } else { -z };
                net.gammas()
                    .iter()
                    .zip(net.products())
                    .enumerate()
                    .map(|(i, (_, &p))| {
                        let zi = if b & (1 << (n - i)) != 0 { z } else { -z };
                        0.5 * p * zi * zc
                    })
                    .sum()
            })
            .collect();
        let flips = net
            .gammas()
            .iter()
            .enumerate()
            .filter(|(_, &g)| g != 0.0)
            .map(|(i, &g)| (1 << (n - i), g / 2.0))
            .collect();
        Ok(Self { n, diagonal, flips })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = v.iter().zip(&self.diagonal).map(|(z, d)| z * d).collect();
        for (b, o) in out.iter_mut().enumerate() {
            let center = b & 1;
            for &(mask, coeff) in &self.flips {
                if ((b & mask) != 0) as usize != center {
                    *o += v[b ^ mask ^ 1] * coeff;
                }
            }
        }
        out
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let diag = self.diagonal.iter().map(|d| d.abs()).fold(0.0, f64::max);
        diag + self.flips.iter().map(|(_, c)| c.abs()).sum::<f64>()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut h = ComplexMatrix::zeros(dim, dim);
        for b in 0..dim {
            h[(b, b)] = Complex64::new(self.diagonal[b], 0.0);
            for &(mask, coeff) in &self.flips {
                if ((b & mask) != 0) as usize != (b & 1) {
                    h[(b, b ^ mask ^ 1)] += Complex64::new(coeff, 0.0);
                }
            }
        }
        h
    }

    /// `exp(-i H t) v` by Taylor-series steps with `|H| dt <= 1/2`.
    pub fn propagate(&self, v: &[Complex64], t: f64) -> Vec<Complex64> {
        let steps = (t.abs() * self.norm_bound() / 0.5).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut state = v.to_vec();
        for _ in 0..steps {
            let mut term = state.clone();
            for k in 1..=60 {
                let factor = Complex64::new(0.0, -dt / k as f64);
                term = self.apply(&term).into_iter().map(|z| z * factor).collect();
                for (s, t) in state.iter_mut().zip(&term) {
                    *s += t;
                }
                if norm(&term) < 1e-18 {
                    break;
                }
            }
        }
        state
    }

    fn qubits(&self) -> usize {
        self.n + 1
    }
}

/// Dense full-space Hamiltonian.
pub fn full_space_hamiltonian(net: &StarNetwork, convention: ZConvention) -> Result<ComplexMatrix> {
    Ok(FullSpaceOperator::new(net, convention)?.to_dense())
}

/// The `(N+1) x (N+1)` block on the single-excitation states, in site order.
pub fn subspace_block(h_full: &ComplexMatrix) -> Result<ComplexMatrix> {
    h_full.require_square()?;
    let dim = h_full.rows();
    if !dim.is_power_of_two() || dim < 4 {
        return Err(Error::InvalidInput(format!(
            "dimension {dim} is not 2^(N+1) with N >= 1"
        )));
    }
    let n = dim.trailing_zeros() as usize - 1;
    let index: Vec<usize> = (0..=n).map(|q| excitation_index(n, q)).collect();
    let tolerance = LEAKAGE_TOLERANCE * h_full.max_abs().max(1.0);
    let mut leak = 0.0f64;
    for &col in &index {
        for row in 0..dim {
            if row.count_ones() != 1 {
                leak = leak.max(h_full[(row, col)].norm()).max(h_full[(col, row)].norm());
            }
        }
    }
    if leak > tolerance {
        return Err(Error::SubspaceLeakage(leak));
    }
    Ok(ComplexMatrix::from_fn(n + 1, n + 1, |i, j| {
        h_full[(index[i], index[j])]
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullSpaceState {
    amplitudes: Vec<Complex64>,
}

impl FullSpaceState {
    pub fn from_subspace(state: &SubspaceState) -> Result<Self> {
        let n = state.dim() - 1;
        let qubits = state.dim();
        if (1usize << qubits) > FULL_SPACE_CAP {
            return Err(Error::DimensionCap {
                dim: 1 << qubits,
                cap: FULL_SPACE_CAP,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        for (q, &a) in state.amplitudes().iter().enumerate() {
            amplitudes[excitation_index(n, q)] = a;
        }
        Ok(Self { amplitudes })
    }

    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() || amplitudes.len() < 4 {
            return Err(Error::InvalidState("length must be 2^(N+1) with N >= 1".into()));
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("norm is {n}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    fn n(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize - 1
    }

    /// Amplitudes on the single-excitation states, not renormalized.
    pub fn single_excitation(&self) -> Vec<Complex64> {
        let n = self.n();
        (0..=n).map(|q| self.amplitudes[excitation_index(n, q)]).collect()
    }

    /// Population outside the single-excitation sector.
    pub fn leakage(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| b.count_ones() != 1)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    pub fn evolve(&self, op: &FullSpaceOperator, t: f64) -> Result<Self> {
        if op.dim() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                found: self.amplitudes.len(),
            });
        }
        debug_assert_eq!(op.qubits(), self.n() + 1);
        Ok(Self {
            amplitudes: op.propagate(&self.amplitudes, t),
        })
    }
}

/// Evolves a subspace state through the full space and returns the
/// single-excitation amplitudes together with the leaked population.
pub fn propagate_full_space(
    net: &StarNetwork,
    convention: ZConvention,
    state: &SubspaceState,
    t: f64,
) -> Result<(Vec<Complex64>, f64)> {
    let op = FullSpaceOperator::new(net, convention)?;
    let out = FullSpaceState::from_subspace(state)?.evolve(&op, t)?;
    Ok((out.single_excitation(), out.leakage()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: &'static str,
    pub max_deviation: f64,
    /// `None` when the value is reported without a bound.
    pub threshold: Option<f64>,
}

impl CheckRow {
    pub fn pass(&self) -> Option<bool> {
        self.threshold.map(|t| self.max_deviation <= t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<CheckRow>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass() != Some(false))
    }

    pub fn row(&self, check: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.check == check)
    }
}

pub const ANALYTIC_VS_NUMERICAL: &str = "analytic_vs_numerical";
pub const NUMERICAL_VS_FULL_SPACE: &str = "numerical_vs_full_space";
pub const FULL_SPACE_LEAKAGE: &str = "full_space_leakage";

/// Compares the analytic, numerical and full-space propagations of
/// `initial` over `times` (which must be strictly increasing).
pub fn cross_validate(
    net: &StarNetwork,
    initial: &SubspaceState,
    times: &[f64],
    convention: ZConvention,
) -> Result<ValidationReport> {
    if initial.dim() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            found: initial.dim(),
        });
    }
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be non-empty and strictly increasing".into(),
        ));
    }
    let numerical = StarPropagator::numerical(net)?;
    let op = FullSpaceOperator::new(net, convention)?;
    let basis_source = initial.amplitudes().iter().position(|z| (z.norm() - 1.0).abs() < 1e-14);

    let analytic = match StarPropagator::new(net)? {
        p @ StarPropagator::Analytic(_) => Some(p),
        StarPropagator::Numerical(_) => None,
    };

    let mut rows = Vec::with_capacity(3);
    let mut analytic_dev = 0.0f64;
    let mut full_dev = 0.0f64;
    let mut leak = 0.0f64;
    let mut full = FullSpaceState::from_subspace(initial)?;
    let mut t_prev = 0.0;
    for &t in times {
        let num = numerical.evolve(initial, t)?;
        if let Some(a) = &analytic {
            analytic_dev = analytic_dev.max(max_abs_diff(a.evolve(initial, t)?.amplitudes(), num.amplitudes()));
            let closed = match basis_source {
                Some(q) if q == net.center() => Some(closed_form_from_center(net, t)?),
                Some(q) => Some(closed_form_from_site(net, q, t)?),
                None => None,
            };
            if let Some(s) = closed {
                let phase = initial.amplitudes()[basis_source.unwrap()];
                let scaled: Vec<Complex64> = s.amplitudes().iter().map(|z| z * phase).collect();
                analytic_dev = analytic_dev.max(max_abs_diff(&scaled, num.amplitudes()));
            }
        }
        full = full.evolve(&op, t - t_prev)?;
        t_prev = t;
        full_dev = full_dev.max(max_abs_diff(&full.single_excitation(), num.amplitudes()));
        leak = leak.max(full.leakage());
    }

    if analytic.is_some() {
        rows.push(CheckRow {
            check: ANALYTIC_VS_NUMERICAL,
            max_deviation: analytic_dev,
            threshold: Some(1e-9),
        });
    }
    let zero_c = net.products().iter().all(|p| p.abs() <= 1e-12);
    rows.push(CheckRow {
        check: NUMERICAL_VS_FULL_SPACE,
        max_deviation: full_dev,
        threshold: zero_c.then_some(1e-9),
    });
    rows.push(CheckRow {
        check: FULL_SPACE_LEAKAGE,
        max_deviation: leak,
        threshold: Some(1e-12),
    });
    Ok(ValidationReport { rows })
}
