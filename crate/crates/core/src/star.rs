//! Single-excitation dynamics of `N` circumjacent qubits coupled to one
//! central qubit.
//!
//! In the basis `|psi_i> = |1_i> (x) prod_{k != i} |0_k>`, with the central
//! ring at index `N`, the effective Hamiltonian is
//!
//! ```text
//! H[i][i] = gamma_i (1 + delta_i) (N - 2) / 4        i < N
//! H[N][N] = -sum_i gamma_i (1 + delta_i) / 4
//! H[i][N] = H[N][i] = gamma_i / 2
//! ```
//!
//! When every product `gamma_i (1 + delta_i)` equals a common `C` the spectrum
//! is known in closed form: `N - 1` states at `C (N - 2) / 4` and a bright
//! pair at `(-C +- sqrt(4 Omega^2 + C^2 (N - 1)^2)) / 4`.

use num_complex::Complex64;

use crate::coupling::EffectivePair;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, norm, ComplexMatrix, EigenSystem};

/// Relative tolerance of the `gamma_i (1 + delta_i) = C` test.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

/// Unit-norm tolerance for [`SubspaceState`].
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StarNetwork {
    gammas: Vec<f64>,
    deltas: Vec<f64>,
    products: Vec<f64>,
    common: f64,
    constrained: bool,
    omega: f64,
}

impl StarNetwork {
    pub fn new(gammas: Vec<f64>, deltas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidNetwork("need at least one circumjacent ring".into()));
        }
        if gammas.len() != deltas.len() {
            return Err(Error::InvalidNetwork(format!(
                "{} couplings but {} anisotropies",
                gammas.len(),
                deltas.len()
            )));
        }
        if gammas.iter().chain(&deltas).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite coupling".into()));
        }
        let products: Vec<f64> = gammas.iter().zip(&deltas).map(|(g, d)| g * (1.0 + d)).collect();
        let common = products.iter().sum::<f64>() / products.len() as f64;
        Ok(Self::assemble(gammas, deltas, products, common))
    }

    /// Couplings `gammas` with anisotropies chosen so every product equals `c`.
    /// Sites with `gamma = 0` get `delta = -1` and require `c = 0`.
    pub fn constrained(gammas: Vec<f64>, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidNetwork("non-finite C".into()));
        }
        let mut deltas = Vec::with_capacity(gammas.len());
        for &g in &gammas {
            if g == 0.0 {
                if c != 0.0 {
                    return Err(Error::InvalidNetwork(
                        "a decoupled site (gamma = 0) cannot satisfy gamma (1 + delta) = C != 0".into(),
                    ));
                }
                deltas.push(-1.0);
            } else {
                deltas.push(c / g - 1.0);
            }
        }
        let net = Self::new(gammas, deltas)?;
        let products = net.products.clone();
        Ok(Self::assemble(net.gammas, net.deltas, products, c))
    }

    pub fn uniform(n: usize, gamma: f64, delta: f64) -> Result<Self> {
        Self::new(vec![gamma; n], vec![delta; n])
    }

    pub fn from_pairs(pairs: &[EffectivePair]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|p| p.gamma).collect(),
            pairs.iter().map(|p| p.delta).collect(),
        )
    }

    fn assemble(gammas: Vec<f64>, deltas: Vec<f64>, products: Vec<f64>, common: f64) -> Self {
        let omega = gammas.iter().map(|g| g * g).sum::<f64>().sqrt();
        let deviation = products.iter().map(|p| (p - common).abs()).fold(0.0, f64::max);
        let scale = gammas.iter().map(|g| g.abs()).fold(common.abs(), f64::max);
        Self {
            constrained: deviation <= CONSTRAINT_TOLERANCE * scale,
            gammas,
            deltas,
            products,
            common,
            omega,
        }
    }

    /// Same couplings, but site `site` now has `gamma (1 + delta) = product`
    /// with its `gamma` unchanged.
    pub fn with_product(&self, site: usize, product: f64) -> Result<Self> {
        let g = *self
            .gammas
            .get(site)
            .ok_or_else(|| Error::InvalidNetwork(format!("no site {site}")))?;
        if g == 0.0 {
            return Err(Error::InvalidNetwork(format!("site {site} is decoupled")));
        }
        let mut deltas = self.deltas.clone();
        deltas[site] = product / g - 1.0;
        let mut products = self.products.clone();
        products[site] = product;
        let common = products.iter().sum::<f64>() / products.len() as f64;
        Ok(Self::assemble(self.gammas.clone(), deltas, products, common))
    }

    /// Number of circumjacent rings `N`.
    pub fn n(&self) -> usize {
        self.gammas.len()
    }

    /// Dimension `N + 1` of the single-excitation space.
    pub fn dim(&self) -> usize {
        self.gammas.len() + 1
    }

    pub fn center(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// `gamma_i (1 + delta_i)` per site.
    pub fn products(&self) -> &[f64] {
        &self.products
    }

    /// The common product `C` (the mean product when the constraint fails).
    pub fn c(&self) -> f64 {
        self.common
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn satisfies_constraint(&self) -> bool {
        self.constrained
    }

    pub fn constraint_deviation(&self) -> f64 {
        self.products
            .iter()
            .map(|p| (p - self.common).abs())
            .fold(0.0, f64::max)
    }

    fn require_constraint(&self) -> Result<()> {
        if self.constrained {
            Ok(())
        } else {
            Err(Error::ConstraintViolated {
                deviation: self.constraint_deviation(),
            })
        }
    }

    fn require_coupled(&self) -> Result<()> {
        if self.omega > 0.0 {
            Ok(())
        } else {
            Err(Error::ZeroCoupling)
        }
    }
}

/// Amplitudes over `|psi_1>, ..., |psi_N>, |psi_{N+1}>` (zero-based, center last).
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceState {
    amplitudes: Vec<Complex64>,
}

impl SubspaceState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidState("need at least two amplitudes".into()));
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("norm is {n}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= n);
        Self::new(amplitudes)
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    /// The equal-weight W state over the `n` circumjacent sites.
    pub fn w_state(n: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n + 1];
        amplitudes[n] = Complex64::new(0.0, 0.0);
        Self { amplitudes }
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &SubspaceState) -> f64 {
        crate::linalg::inner(&self.amplitudes, &other.amplitudes).norm_sqr()
    }
}

pub fn build_effective_hamiltonian(net: &StarNetwork) -> ComplexMatrix {
    let n = net.n();
    let center = net.center();
    let mut h = ComplexMatrix::zeros(n + 1, n + 1);
    let diag_factor = (n as f64 - 2.0) / 4.0;
    for (i, (&g, &p)) in net.gammas.iter().zip(&net.products).enumerate() {
        h[(i, i)] = Complex64::new(p * diag_factor, 0.0);
        h[(i, center)] = Complex64::new(g / 2.0, 0.0);
        h[(center, i)] = Complex64::new(g / 2.0, 0.0);
    }
    h[(center, center)] = Complex64::new(-net.products.iter().sum::<f64>() / 4.0, 0.0);
    h
}

/// Closed-form eigenpairs of the constrained star Hamiltonian.
#[derive(Debug, Clone)]
pub struct AnalyticEigenSystem {
    /// Shared eigenvalue `C (N - 2) / 4` of the dark family.
    pub degenerate_value: f64,
    /// `N - 1` real orthonormal vectors, decoupled sites first then the
    /// nested-sum family over the coupled sites.
    pub degenerate_vectors: Vec<Vec<f64>>,
    /// `(lambda_+, v_+)` then `(lambda_-, v_-)`.
    pub bright: [(f64, Vec<f64>); 2],
}

impl AnalyticEigenSystem {
    /// All `N + 1` eigenpairs, unsorted.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.degenerate_vectors
            .iter()
            .map(move |v| (self.degenerate_value, v.as_slice()))
            .chain(self.bright.iter().map(|(l, v)| (*l, v.as_slice())))
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pairs().map(|(l, _)| l).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn propagate(&self, t: f64, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (lambda, phi) in self.pairs() {
            let overlap: Complex64 = phi.iter().zip(v).map(|(&p, &z)| p * z).sum();
            let coeff = overlap * Complex64::from_polar(1.0, -lambda * t);
            for (o, &p) in out.iter_mut().zip(phi) {
                *o += coeff * p;
            }
        }
        out
    }
}

pub fn analytic_eigensystem(net: &StarNetwork) -> Result<AnalyticEigenSystem> {
    net.require_constraint()?;
    net.require_coupled()?;
    let n = net.n();
    let dim = net.dim();
    let c = net.c();
    let nf = n as f64;
    let g = net.gammas();

    let mut degenerate_vectors = Vec::with_capacity(n.saturating_sub(1));
    let (decoupled, coupled): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| g[i] == 0.0);
    for &site in &decoupled {
        let mut v = vec![0.0; dim];
        v[site] = 1.0;
        degenerate_vectors.push(v);
    }
    // v_i ~ (g_1 g_{i+1}, ..., g_i g_{i+1}, -G_i, 0, ...), |v_i|^2 = G_i G_{i+1}
    let mut partial = 0.0;
    for w in 0..coupled.len().saturating_sub(1) {
        partial += g[coupled[w]] * g[coupled[w]];
        let next = coupled[w + 1];
        let next_partial = partial + g[next] * g[next];
        let scale = (partial * next_partial).sqrt();
        let mut v = vec![0.0; dim];
        for &site in &coupled[..=w] {
            v[site] = g[site] * g[next] / scale;
        }
        v[next] = -partial / scale;
        degenerate_vectors.push(v);
    }

    let omega2 = net.omega() * net.omega();
    let b = c * (nf - 1.0);
    let root = (4.0 * omega2 + b * b).sqrt();
    let bright_vector = |y: f64| -> Vec<f64> {
        let scale = (omega2 + y * y).sqrt();
        let mut v: Vec<f64> = g.iter().map(|gi| gi / scale).collect();
        v.push(y / scale);
        v
    };
    // y = 2 lambda - C (N - 2) / 2 = (+-root - b) / 2, rationalized on the cancelling side.
    let y_plus = if b > 0.0 {
        2.0 * omega2 / (root + b)
    } else {
        0.5 * (root - b)
    };
    let y_minus = if b < 0.0 {
        -2.0 * omega2 / (root - b)
    } else {
        -0.5 * (root + b)
    };
    Ok(AnalyticEigenSystem {
        degenerate_value: c * (nf - 2.0) / 4.0,
        degenerate_vectors,
        bright: [
            (0.25 * (-c + root), bright_vector(y_plus)),
            (0.25 * (-c - root), bright_vector(y_minus)),
        ],
    })
}

/// Reusable propagator: closed-form when the constraint holds, numerical
/// spectral decomposition otherwise.
#[derive(Debug, Clone)]
pub enum StarPropagator {
    Analytic(AnalyticEigenSystem),
    Numerical(EigenSystem),
}

impl StarPropagator {
    pub fn new(net: &StarNetwork) -> Result<Self> {
        if net.satisfies_constraint() && net.omega() > 0.0 {
            Ok(StarPropagator::Analytic(analytic_eigensystem(net)?))
        } else {
            Self::numerical(net)
        }
    }

    pub fn numerical(net: &StarNetwork) -> Result<Self> {
        Ok(StarPropagator::Numerical(hermitian_eigendecompose(
            &build_effective_hamiltonian(net),
        )?))
    }

    pub fn dim(&self) -> usize {
        match self {
            StarPropagator::Analytic(a) => a.bright[0].1.len(),
            StarPropagator::Numerical(e) => e.dim(),
        }
    }

    pub fn evolve(&self, state: &SubspaceState, t: f64) -> Result<SubspaceState> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let out = match self {
            StarPropagator::Analytic(a) => a.propagate(t, state.amplitudes()),
            StarPropagator::Numerical(e) => e.propagate(t, state.amplitudes())?,
        };
        Ok(SubspaceState::from_raw(out))
    }
}

pub fn evolve_subspace(net: &StarNetwork, state: &SubspaceState, t: f64) -> Result<SubspaceState> {
    StarPropagator::new(net)?.evolve(state, t)
}

/// The auxiliary quantities of the closed-form evolutions at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAngles {
    pub a: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Dark-family phase `exp(-i C (N - 2) t / 4)`.
    pub lambda: Complex64,
}

impl PhaseAngles {
    /// `R = Lambda (e^{i theta1} + A^2 e^{-i theta2}) / (1 + A^2)`.
    pub fn r(&self) -> Complex64 {
        let a2 = self.a * self.a;
        self.lambda * (Complex64::from_polar(1.0, self.theta1) + a2 * Complex64::from_polar(1.0, -self.theta2))
            / (1.0 + a2)
    }

    /// `S = -A Lambda (e^{i theta1} - e^{-i theta2}) / (1 + A^2)`.
    pub fn s(&self) -> Complex64 {
        -self.a * self.lambda * (Complex64::from_polar(1.0, self.theta1) - Complex64::from_polar(1.0, -self.theta2))
            / (1.0 + self.a * self.a)
    }
}

/// `A = C (N - 1) / (2 Omega) - sqrt(1 + C^2 (N - 1)^2 / (4 Omega^2))`.
pub fn mixing_parameter(n: usize, c: f64, omega: f64) -> f64 {
    let r = c * (n as f64 - 1.0) / (2.0 * omega);
    let root = r.hypot(1.0);
    if r > 0.0 {
        -1.0 / (r + root)
    } else {
        r - root
    }
}

/// Closed-form angles for a network; the constraint must hold.
pub fn phase_angles(net: &StarNetwork, t: f64) -> Result<PhaseAngles> {
    net.require_constraint()?;
    net.require_coupled()?;
    let omega = net.omega();
    let a = mixing_parameter(net.n(), net.c(), omega);
    Ok(PhaseAngles {
        a,
        theta1: omega * a * t / 2.0,
        theta2: omega * t / (2.0 * a),
        lambda: Complex64::from_polar(1.0, -net.c() * (net.n() as f64 - 2.0) * t / 4.0),
    })
}

/// State at time `t` after starting on circumjacent site `i`.
pub fn closed_form_from_site(net: &StarNetwork, i: usize, t: f64) -> Result<SubspaceState> {
    if i >= net.n() {
        return Err(Error::InvalidState(format!(
            "source {i} is not a circumjacent site of a {}-ring network",
            net.n()
        )));
    }
    let angles = phase_angles(net, t)?;
    let (r, s, lambda) = (angles.r(), angles.s(), angles.lambda);
    let omega = net.omega();
    let omega2 = omega * omega;
    let g = net.gammas();
    let mut out: Vec<Complex64> = g.iter().map(|gm| gm * g[i] / omega2 * (r - lambda)).collect();
    out[i] = lambda - g[i] * g[i] / omega2 * (lambda - r);
    out.push(g[i] / omega * s);
    Ok(SubspaceState::from_raw(out))
}

/// State at time `t` after starting on the central ring.
pub fn closed_form_from_center(net: &StarNetwork, t: f64) -> Result<SubspaceState> {
    let angles = phase_angles(net, t)?;
    let s = angles.s();
    let a2 = angles.a * angles.a;
    let omega = net.omega();
    let mut out: Vec<Complex64> = net.gammas().iter().map(|gm| gm / omega * s).collect();
    out.push(
        angles.lambda * (a2 * Complex64::from_polar(1.0, angles.theta1) + Complex64::from_polar(1.0, -angles.theta2))
            / (1.0 + a2),
    );
    Ok(SubspaceState::from_raw(out))
}
