//! Effective intermolecular coupling between two encoded rings.
//!
//! For a set of linkers `(m, n, J_mn)` joining site `m` of a circumjacent ring
//! to site `n` of the central ring,
//!
//! ```text
//! gamma = sum J_mn <1|tau_m^x|0>_A <0|tau_n^x|1>_C
//! delta = 1 - [sum J_mn <0|tau_m^z|0>_A <0|tau_n^z|0>_C] / [sum J_mn <1|tau_m^x|0>_A <0|tau_n^x|1>_C]
//! ```
//!
//! Both sums carry the linker weights.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ring::{encode_ring, BondVariant, EncodedRing, RingSpec, SiteMatrixElements};

/// Relative size of the transverse sum below which the anisotropy is treated as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-12;

/// One exchange bridge between a circumjacent ring and the central ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linker {
    pub circumjacent_site: usize,
    pub central_site: usize,
    pub exchange: f64,
}

impl Linker {
    pub fn new(circumjacent_site: usize, central_site: usize, exchange: f64) -> Self {
        Self {
            circumjacent_site,
            central_site,
            exchange,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePair {
    pub gamma: f64,
    pub delta: f64,
}

/// The J-weighted transverse and longitudinal doublet sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSums {
    pub transverse: Complex64,
    pub longitudinal: f64,
}

pub fn coupling_sums(
    circumjacent: &SiteMatrixElements,
    central: &SiteMatrixElements,
    linkers: &[Linker],
) -> Result<CouplingSums> {
    if linkers.is_empty() {
        return Err(Error::InvalidInput("linker list is empty".into()));
    }
    let mut transverse = Complex64::new(0.0, 0.0);
    let mut longitudinal = 0.0;
    for l in linkers {
        if l.circumjacent_site >= circumjacent.len() || l.central_site >= central.len() {
            return Err(Error::InvalidInput(format!(
                "linker ({}, {}) is outside rings of {} and {} sites",
                l.circumjacent_site,
                l.central_site,
                circumjacent.len(),
                central.len()
            )));
        }
        if !l.exchange.is_finite() {
            return Err(Error::InvalidInput("non-finite linker exchange".into()));
        }
        // <0_c|tau^x|1_c> = conj(<1_c|tau^x|0_c>)
        transverse += l.exchange * circumjacent.x10[l.circumjacent_site] * central.x10[l.central_site].conj();
        longitudinal += l.exchange * (circumjacent.z00[l.circumjacent_site] * central.z00[l.central_site]).re;
    }
    Ok(CouplingSums {
        transverse,
        longitudinal,
    })
}

pub fn effective_coupling(
    circumjacent: &SiteMatrixElements,
    central: &SiteMatrixElements,
    linkers: &[Linker],
) -> Result<EffectivePair> {
    effective_coupling_scaled(circumjacent, central, linkers, 1.0)
}

/// As [`effective_coupling`], with `gamma` multiplied by `gamma_scale`.
/// Both encodings must be gauge-fixed so the transverse sum is real.
pub fn effective_coupling_scaled(
    circumjacent: &SiteMatrixElements,
    central: &SiteMatrixElements,
    linkers: &[Linker],
    gamma_scale: f64,
) -> Result<EffectivePair> {
    let sums = coupling_sums(circumjacent, central, linkers)?;
    let max_exchange = linkers.iter().map(|l| l.exchange.abs()).fold(0.0, f64::max);
    pair_from_sums(sums, max_exchange, gamma_scale)
}

fn pair_from_sums(sums: CouplingSums, max_exchange: f64, gamma_scale: f64) -> Result<EffectivePair> {
    let x = sums.transverse.re;
    let threshold = DIVERGENCE_THRESHOLD * max_exchange;
    if x.abs() < threshold || x == 0.0 {
        return Err(Error::AnisotropyDivergence {
            denominator: x,
            threshold,
        });
    }
    Ok(EffectivePair {
        gamma: gamma_scale * x,
        delta: 1.0 - sums.longitudinal / x,
    })
}

/// Parameters of a Cr<sub>x</sub>Ni ring used as a sweep template.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrNiParams {
    pub chromium: usize,
    pub j: f64,
    pub a: f64,
    pub d: f64,
    pub variant: BondVariant,
}

impl CrNiParams {
    pub fn spec(&self) -> Result<RingSpec> {
        RingSpec::cr_ni(self.chromium, self.j, self.a, self.d, self.variant)
    }
}

/// Marks one linker whose exchange is `b` times that of a reference linker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkerRatio {
    pub scaled: usize,
    pub reference: usize,
}

/// Two identical rings joined by `linkers`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropyTemplate {
    pub ring: CrNiParams,
    pub linkers: Vec<Linker>,
    pub ratio: Option<LinkerRatio>,
    pub gamma_scale: f64,
}

impl AnisotropyTemplate {
    fn ratio_value(&self) -> Option<f64> {
        self.ratio
            .map(|r| self.linkers[r.scaled].exchange / self.linkers[r.reference].exchange)
    }

    fn linkers_at(&self, b: f64) -> Result<Vec<Linker>> {
        let ratio = self
            .ratio
            .ok_or_else(|| Error::InvalidInput("a linker-ratio sweep needs a scaled linker".into()))?;
        let mut linkers = self.linkers.clone();
        linkers[ratio.scaled].exchange = b * self.linkers[ratio.reference].exchange;
        Ok(linkers)
    }

    fn validate(&self) -> Result<()> {
        if self.linkers.is_empty() {
            return Err(Error::InvalidInput("linker list is empty".into()));
        }
        if let Some(r) = self.ratio {
            if r.scaled >= self.linkers.len() || r.reference >= self.linkers.len() || r.scaled == r.reference {
                return Err(Error::InvalidInput("linker ratio indices are invalid".into()));
            }
        }
        Ok(())
    }

    fn pair(&self, ring: &EncodedRing, linkers: &[Linker]) -> Result<(CouplingSums, EffectivePair)> {
        let sums = coupling_sums(&ring.elements, &ring.elements, linkers)?;
        let max_exchange = linkers.iter().map(|l| l.exchange.abs()).fold(0.0, f64::max);
        Ok((sums, pair_from_sums(sums, max_exchange, self.gamma_scale)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    /// `(a, d)` points; both rings are rebuilt at each point.
    RingParameters(Vec<(f64, f64)>),
    /// Values of the linker ratio `b` on the template's rings.
    LinkerRatio(Vec<f64>),
}

impl SweepGrid {
    /// Cartesian product of `a` and `d` values, `a` varying slowest.
    pub fn ring_product(a: &[f64], d: &[f64]) -> Self {
        SweepGrid::RingParameters(a.iter().flat_map(|&a| d.iter().map(move |&d| (a, d))).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            SweepGrid::RingParameters(p) => p.len(),
            SweepGrid::LinkerRatio(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub gamma: f64,
    pub delta: f64,
    pub gap: f64,
}

/// One grid point; failures are kept in place rather than dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub d: f64,
    pub b: Option<f64>,
    pub outcome: std::result::Result<SweepPoint, Error>,
}

pub fn anisotropy_sweep(template: &AnisotropyTemplate, grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    template.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    let rows = match grid {
        SweepGrid::RingParameters(points) => points
            .par_iter()
            .map(|&(a, d)| {
                let params = CrNiParams { a, d, ..template.ring };
                let outcome = params.spec().and_then(|spec| encode_ring(&spec)).and_then(|ring| {
                    let (_, pair) = template.pair(&ring, &template.linkers)?;
                    Ok(SweepPoint {
                        gamma: pair.gamma,
                        delta: pair.delta,
                        gap: ring.encoding.gap,
                    })
                });
                SweepRow {
                    a,
                    d,
                    b: template.ratio_value(),
                    outcome,
                }
            })
            .collect(),
        SweepGrid::LinkerRatio(values) => {
            template.linkers_at(1.0)?;
            let ring = template.ring.spec().and_then(|spec| encode_ring(&spec));
            values
                .par_iter()
                .map(|&b| {
                    let outcome = ring.clone().and_then(|ring| {
                        let (_, pair) = template.pair(&ring, &template.linkers_at(b)?)?;
                        Ok(SweepPoint {
                            gamma: pair.gamma,
                            delta: pair.delta,
                            gap: ring.encoding.gap,
                        })
                    });
                    SweepRow {
                        a: template.ring.a,
                        d: template.ring.d,
                        b: Some(b),
                        outcome,
                    }
                })
                .collect()
        }
    };
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    /// `delta` passes through the level continuously.
    Continuous,
    /// The transverse sum changes sign and `delta` jumps through infinity.
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelCrossing {
    pub kind: CrossingKind,
    /// Bracketing grid values.
    pub lower: f64,
    pub upper: f64,
    /// Bisected location.
    pub location: f64,
    /// `delta - level` goes from negative to positive with increasing `b`.
    pub rising: bool,
}

/// Locates every crossing of `delta = level` along a linker-ratio grid.
pub fn linker_ratio_crossings(template: &AnisotropyTemplate, grid: &[f64], level: f64) -> Result<Vec<LevelCrossing>> {
    template.validate()?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    let ring = encode_ring(&template.ring.spec()?)?;
    let sample = |b: f64| -> Option<(f64, f64)> {
        let linkers = template.linkers_at(b).ok()?;
        let (sums, pair) = template.pair(&ring, &linkers).ok()?;
        Some((pair.delta - level, sums.transverse.re))
    };
    let samples: Vec<(f64, f64, f64)> = grid.iter().filter_map(|&b| sample(b).map(|(f, x)| (b, f, x))).collect();

    let mut crossings = Vec::new();
    for w in samples.windows(2) {
        let ((b0, f0, x0), (b1, f1, _)) = (w[0], w[1]);
        if f0.signum() == f1.signum() && f0 != 0.0 {
            continue;
        }
        let x1 = w[1].2;
        let kind = if x0.signum() != x1.signum() {
            CrossingKind::Pole
        } else {
            CrossingKind::Continuous
        };
        let (mut lo, mut hi) = (b0, b1);
        let lo_sign = match kind {
            CrossingKind::Continuous => f0.signum(),
            CrossingKind::Pole => x0.signum(),
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let value = match kind {
                CrossingKind::Continuous => sample(mid).map(|(f, _)| f),
                CrossingKind::Pole => {
                    let linkers = template.linkers_at(mid)?;
                    Some(coupling_sums(&ring.elements, &ring.elements, &linkers)?.transverse.re)
                }
            };
            match value {
                Some(v) if v.signum() == lo_sign && v != 0.0 => lo = mid,
                Some(_) => hi = mid,
                None => break,
            }
        }
        crossings.push(LevelCrossing {
            kind,
            lower: b0,
            upper: b1,
            location: 0.5 * (lo + hi),
            rising: f0 < 0.0 && f1 > 0.0 || (f0 == 0.0 && f1 > 0.0),
        });
    }
    Ok(crossings)
}
