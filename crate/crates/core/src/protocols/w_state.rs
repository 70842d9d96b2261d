//! W-state generation on a star network, from the center or from one
//! circumjacent site.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::star::{evolve_subspace, mixing_parameter, StarNetwork, StarPropagator, SubspaceState};

/// Largest winding tried when the caller does not fix `k`.
pub const MAX_WINDING: u32 = 64;

/// Equal-population tolerance a solved plan must meet.
pub const W_TOLERANCE: f64 = 1e-8;

const RATIO_SCAN_RANGE: (f64, f64) = (1e-8, 1e8);
const RATIO_SCAN_POINTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WSource {
    Center,
    Site(usize),
}

/// Sign in front of the discriminant of the coupling-ratio equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Which coupling keeps the requested value while the ratio is solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatioAnchor {
    /// `gamma_i` of the source site is fixed; the others are `sqrt(p) gamma_i`.
    #[default]
    Source,
    /// All non-source couplings are fixed; `gamma_i = gamma_m / sqrt(p)`.
    Others,
}

#[derive(Debug, Clone)]
pub struct WGenerationPlan {
    pub source: WSource,
    pub t_w: f64,
    pub k: u32,
    /// `gamma_m^2 / gamma_i^2`, site-sourced plans only.
    pub p: Option<f64>,
    /// Phase to remove from the source site after evolving.
    pub chi: f64,
    /// Generation error of the corrected state at `t_w`.
    pub predicted_error: f64,
    pub network: StarNetwork,
}

impl WGenerationPlan {
    pub fn initial_state(&self) -> SubspaceState {
        let index = match self.source {
            WSource::Center => self.network.center(),
            WSource::Site(i) => i,
        };
        SubspaceState::basis(self.network.dim(), index).expect("source inside network")
    }

    /// Evolves the source state to `t_w` and applies the phase correction.
    pub fn generate(&self) -> Result<SubspaceState> {
        let raw = evolve_subspace(&self.network, &self.initial_state(), self.t_w)?;
        self.correct(raw)
    }

    fn correct(&self, state: SubspaceState) -> Result<SubspaceState> {
        match self.source {
            WSource::Center => Ok(state),
            WSource::Site(i) => apply_phase_correction(&state, i, self.chi),
        }
    }

    /// `theta_1 + theta_2` at `t_w`.
    pub fn phase_sum(&self) -> Result<f64> {
        let angles = crate::star::phase_angles(&self.network, self.t_w)?;
        Ok(angles.theta1 + angles.theta2)
    }
}

/// Center-sourced plan for `n` equal couplings `gamma` with `delta = -1`.
pub fn plan_w_from_center(n: usize, gamma: f64, k: u32) -> Result<WGenerationPlan> {
    plan_w_from_center_network(&StarNetwork::uniform(n, gamma, -1.0)?, k)
}

/// Center-sourced plan on an explicit network, which must have equal
/// couplings and `delta = -1` everywhere.
pub fn plan_w_from_center_network(net: &StarNetwork, k: u32) -> Result<WGenerationPlan> {
    let g0 = net.gammas()[0];
    if g0 == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if net.gammas().iter().any(|g| (g - g0).abs() > 1e-12 * g0.abs()) {
        return Err(Error::Infeasible(
            "center-sourced W generation needs equal couplings".into(),
        ));
    }
    if net.deltas().iter().any(|d| (d + 1.0).abs() > 1e-12) {
        return Err(Error::Infeasible(
            "center-sourced W generation needs delta = -1 on every site".into(),
        ));
    }
    let net = StarNetwork::constrained(net.gammas().to_vec(), 0.0)?;
    let t_w = (2 * k + 1) as f64 * PI / net.omega();
    let mut plan = WGenerationPlan {
        source: WSource::Center,
        t_w,
        k,
        p: None,
        chi: 0.0,
        predicted_error: 0.0,
        network: net,
    };
    plan.predicted_error = generation_error(&plan.generate()?);
    Ok(plan)
}

#[derive(Debug, Clone, Copy)]
pub struct SiteWRequest {
    pub n: usize,
    pub source: usize,
    /// Common product `C` of every site.
    pub c: f64,
    /// Value of the anchored coupling.
    pub gamma: f64,
    pub anchor: RatioAnchor,
    /// Winding; `None` picks the smallest feasible one.
    pub k: Option<u32>,
    pub branch: Branch,
}

impl SiteWRequest {
    fn gammas(&self, p: f64) -> Vec<f64> {
        let (source, others) = match self.anchor {
            RatioAnchor::Source => (self.gamma, self.gamma * p.sqrt()),
            RatioAnchor::Others => (self.gamma / p.sqrt(), self.gamma),
        };
        let mut g = vec![others; self.n];
        g[self.source] = source;
        g
    }

    fn omega(&self, p: f64) -> f64 {
        let nf = self.n as f64;
        match self.anchor {
            RatioAnchor::Source => self.gamma.abs() * (1.0 + (nf - 1.0) * p).sqrt(),
            RatioAnchor::Others => self.gamma.abs() * ((nf - 1.0) + 1.0 / p).sqrt(),
        }
    }

    /// Winding time that empties the center for ratio `p`.
    fn time(&self, p: f64, k: u32) -> f64 {
        let omega = self.omega(p);
        let b = self.c * (self.n as f64 - 1.0);
        4.0 * k as f64 * PI / (4.0 * omega * omega + b * b).sqrt()
    }

    /// `p - p_branch(cos theta_1(p))`, `None` where the ratio equation has
    /// no real non-negative solution.
    fn residual(&self, p: f64, k: u32) -> Option<f64> {
        let a = mixing_parameter(self.n, self.c, self.omega(p));
        let a2 = a * a;
        let theta1 = -2.0 * k as f64 * PI * a2 / (1.0 + a2);
        let target = ratio_from_phase(self.n, theta1.cos(), self.branch)?;
        Some(p - target)
    }
}

/// Coupling ratio `p` for which all circumjacent populations are equal once
/// the center is empty, at a given `cos theta_1`.
pub fn ratio_from_phase(n: usize, cos_theta1: f64, branch: Branch) -> Option<f64> {
    let nf = n as f64;
    let sin2 = 1.0 - cos_theta1 * cos_theta1;
    let disc = 2.0 * nf * (1.0 - cos_theta1) - nf * nf * sin2;
    if disc < 0.0 {
        return None;
    }
    let p = ((1.0 - nf * cos_theta1) + branch.sign() * disc.sqrt()) / ((nf - 1.0) * (nf - 1.0));
    (p >= 0.0).then_some(p)
}

fn bisect(f: impl Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Option<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Some(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// First root in `p` of the self-consistent ratio condition at winding `k`.
fn solve_ratio(req: &SiteWRequest, k: u32) -> Option<f64> {
    let (lo, hi) = RATIO_SCAN_RANGE;
    let step = (hi / lo).ln() / (RATIO_SCAN_POINTS - 1) as f64;
    let f = |p: f64| req.residual(p, k);
    let mut prev: Option<(f64, f64)> = None;
    for j in 0..RATIO_SCAN_POINTS {
        let p = lo * (step * j as f64).exp();
        let Some(fp) = f(p) else {
            prev = None;
            continue;
        };
        if fp == 0.0 {
            return Some(p);
        }
        if let Some((p0, f0)) = prev {
            if (f0 < 0.0) != (fp < 0.0) {
                let root = bisect(f, p0, p, f0)?;
                let res = f(root)?;
                if res.abs() <= 1e-10 * root.max(1.0) {
                    return Some(root);
                }
            }
        }
        prev = Some((p, fp));
    }
    None
}

/// Site-sourced plan: solves for the ratio `p` and winding time at which the
/// evolved state is an equal-population W state up to a phase on the source.
pub fn plan_w_from_site(req: &SiteWRequest) -> Result<WGenerationPlan> {
    if req.n < 2 {
        return Err(Error::InvalidNetwork("site-sourced W generation needs N >= 2".into()));
    }
    if req.source >= req.n {
        return Err(Error::InvalidNetwork(format!(
            "source {} outside 0..{}",
            req.source, req.n
        )));
    }
    if !(req.gamma.is_finite() && req.gamma != 0.0 && req.c.is_finite()) {
        return Err(Error::InvalidInput(
            "anchored coupling must be finite and non-zero".into(),
        ));
    }
    let (k, p) = match req.k {
        Some(0) => return Err(Error::InvalidInput("winding k must be at least 1".into())),
        Some(k) => (k, solve_ratio(req, k)),
        None => (1..=MAX_WINDING)
            .find_map(|k| solve_ratio(req, k).map(|p| (k, Some(p))))
            .unwrap_or((0, None)),
    };
    let p = p.ok_or_else(|| {
        Error::Infeasible(match req.k {
            Some(k) => format!("no coupling ratio satisfies the W condition at k = {k}"),
            None => format!("no coupling ratio satisfies the W condition for k <= {MAX_WINDING}"),
        })
    })?;

    let network = StarNetwork::constrained(req.gammas(p), req.c)?;
    let t_w = req.time(p, k);
    let raw = evolve_subspace(&network, &SubspaceState::basis(req.n + 1, req.source)?, t_w)?;
    let other = if req.source == 0 { 1 } else { 0 };
    let chi = raw.amplitudes()[req.source].arg() - raw.amplitudes()[other].arg();
    let mut plan = WGenerationPlan {
        source: WSource::Site(req.source),
        t_w,
        k,
        p: Some(p),
        chi,
        predicted_error: 0.0,
        network,
    };
    let corrected = plan.correct(raw)?;
    let target = 1.0 / req.n as f64;
    let worst = corrected
        .populations()
        .iter()
        .take(req.n)
        .map(|q| (q - target).abs())
        .fold(corrected.populations()[req.n], f64::max);
    if worst > W_TOLERANCE {
        return Err(Error::Infeasible(format!(
            "ratio root does not yield equal populations (deviation {worst:e})"
        )));
    }
    plan.predicted_error = generation_error(&corrected);
    Ok(plan)
}

/// Multiplies the amplitude on `site` by `exp(-i chi)`.
pub fn apply_phase_correction(state: &SubspaceState, site: usize, chi: f64) -> Result<SubspaceState> {
    if site >= state.dim() {
        return Err(Error::InvalidState(format!(
            "site {site} outside dimension {}",
            state.dim()
        )));
    }
    let mut amps = state.amplitudes().to_vec();
    amps[site] *= Complex64::from_polar(1.0, -chi);
    SubspaceState::new(amps)
}

/// `1 - |<W|state>|^2` with `W` the equal superposition of the circumjacent sites.
pub fn generation_error(state: &SubspaceState) -> f64 {
    let n = state.dim() - 1;
    let w = SubspaceState::w_state(n);
    (1.0 - w.fidelity(state)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationPoint {
    pub delta: f64,
    pub error: f64,
}

/// Generation error when the product on `site` is `C (1 + delta)` instead of
/// `C`, evolving to the unperturbed `t_w` and applying the unperturbed
/// correction.
pub fn fluctuation_sweep(plan: &WGenerationPlan, site: usize, deltas: &[f64]) -> Result<Vec<FluctuationPoint>> {
    if site >= plan.network.n() {
        return Err(Error::InvalidNetwork(format!("no site {site}")));
    }
    if let Some(d) = deltas.iter().find(|d| !(d.is_finite() && d.abs() < 1.0)) {
        return Err(Error::InvalidInput(format!("fluctuation {d} outside (-1, 1)")));
    }
    let c = plan.network.c();
    let start = plan.initial_state();
    deltas
        .par_iter()
        .map(|&delta| {
            let net = plan.network.with_product(site, c * (1.0 + delta))?;
            let raw = StarPropagator::new(&net)?.evolve(&start, plan.t_w)?;
            Ok(FluctuationPoint {
                delta,
                error: generation_error(&plan.correct(raw)?),
            })
        })
        .collect()
}
