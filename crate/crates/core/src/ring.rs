//! Microscopic spin Hamiltonian of a substituted antiferromagnetic ring and
//! extraction of its ground-doublet qubit.
//!
//! The ring Hamiltonian is
//!
//! ```text
//! H = sum_k J_k tau_k . tau_{k+1} + d_k [tau_{k,z}^2 - s_k (s_k + 1) / 3]
//! ```
//!
//! with bond `k` coupling sites `k` and `(k + 1) mod len`. Intramolecular
//! dipolar terms are not modelled.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, inner, kron, norm, ComplexMatrix};

/// Largest ring Hilbert space built by default.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// Ground-multiplet identification window, relative to the max-entry norm of `H`.
pub const DOUBLET_TOLERANCE: f64 = 1e-8;

/// A spin quantum number, stored as `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin(u32);

impl Spin {
    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !twice.is_finite() || twice < 0.0 || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// `m` of local basis index `j`; index 0 is `m = s`.
    pub fn projection(self, j: usize) -> f64 {
        self.value() - j as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinComponent {
    X,
    Y,
    Z,
}

/// Angular-momentum matrices in the `|s, m>` basis ordered `m = s, s-1, ..., -s`.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub z: ComplexMatrix,
}

impl SpinOperators {
    pub fn component(&self, c: SpinComponent) -> &ComplexMatrix {
        match c {
            SpinComponent::X => &self.x,
            SpinComponent::Y => &self.y,
            SpinComponent::Z => &self.z,
        }
    }
}

pub fn spin_operators(s: f64) -> Result<SpinOperators> {
    Ok(operators_for(Spin::new(s)?))
}

fn operators_for(spin: Spin) -> SpinOperators {
    let s = spin.value();
    let n = spin.dim();
    // <m+1| S+ |m> = sqrt(s(s+1) - m(m+1)), sitting at (j-1, j).
    let mut plus = ComplexMatrix::zeros(n, n);
    for j in 1..n {
        let m = spin.projection(j);
        plus[(j - 1, j)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let x = &(&plus + &minus) * 0.5;
    let y = (&plus - &minus).scale(Complex64::new(0.0, -0.5));
    let z = ComplexMatrix::diagonal(&(0..n).map(|j| spin.projection(j)).collect::<Vec<_>>());
    SpinOperators { x, y, z }
}

/// Which bonds adjacent to the Ni site carry the reduced coupling `a J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BondVariant {
    /// Only the closing bond (Ni to the first Cr) is `a J`.
    #[default]
    Literal,
    /// Both Ni bonds are `a J`.
    Symmetric,
}

/// Microscopic description of one ring.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSpec {
    spins: Vec<Spin>,
    bonds: Vec<f64>,
    crystal_fields: Vec<f64>,
}

impl RingSpec {
    /// A general ring. `bonds[k]` couples sites `k` and `(k + 1) % len`, so a
    /// two-site ring counts its single physical bond twice.
    pub fn new(spins: &[f64], bonds: Vec<f64>, crystal_fields: Vec<f64>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidRing("ring has no sites".into()));
        }
        if bonds.len() != spins.len() || crystal_fields.len() != spins.len() {
            return Err(Error::InvalidRing(format!(
                "{} sites need {} bonds and crystal fields, got {} and {}",
                spins.len(),
                spins.len(),
                bonds.len(),
                crystal_fields.len()
            )));
        }
        if bonds.iter().chain(&crystal_fields).any(|v| !v.is_finite()) {
            return Err(Error::InvalidRing("non-finite coupling".into()));
        }
        let spins = spins.iter().map(|&s| Spin::new(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spins,
            bonds,
            crystal_fields,
        })
    }

    /// A Cr<sub>x</sub>Ni ring: `chromium` sites with `s = 3/2` followed by one
    /// Ni site with `s = 1`. Bonds are `j` except the Ni-adjacent ones selected
    /// by `variant`, which are `a * j`. The crystal field `d` is uniform.
    pub fn cr_ni(chromium: usize, j: f64, a: f64, d: f64, variant: BondVariant) -> Result<Self> {
        if chromium == 0 {
            return Err(Error::InvalidRing("CrxNi needs at least one Cr site".into()));
        }
        let len = chromium + 1;
        let mut spins = vec![1.5; chromium];
        spins.push(1.0);
        let mut bonds = vec![j; len];
        bonds[len - 1] = a * j;
        if variant == BondVariant::Symmetric {
            bonds[len - 2] = a * j;
        }
        Self::new(&spins, bonds, vec![d; len])
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn bonds(&self) -> &[f64] {
        &self.bonds
    }

    pub fn crystal_fields(&self) -> &[f64] {
        &self.crystal_fields
    }

    pub fn hilbert_dim(&self) -> usize {
        self.spins.iter().map(|s| s.dim()).product()
    }

    /// Product of single-site operators embedded in the ring Hilbert space;
    /// operators landing on the same site are multiplied in order.
    pub fn embed(&self, factors: &[(usize, &ComplexMatrix)]) -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(1);
        for (site, spin) in self.spins.iter().enumerate() {
            let mut local = ComplexMatrix::identity(spin.dim());
            for (_, op) in factors.iter().filter(|(s, _)| *s == site) {
                local = &local * *op;
            }
            out = kron(&out, &local);
        }
        out
    }

    pub fn site_operator(&self, site: usize, component: SpinComponent) -> ComplexMatrix {
        let ops = operators_for(self.spins[site]);
        self.embed(&[(site, ops.component(component))])
    }

    pub fn total_sz(&self) -> ComplexMatrix {
        let dim = self.hilbert_dim();
        let mut diag = vec![0.0; dim];
        for (index, value) in diag.iter_mut().enumerate() {
            let mut rest = index;
            for spin in self.spins.iter().rev() {
                *value += spin.projection(rest % spin.dim());
                rest /= spin.dim();
            }
        }
        ComplexMatrix::diagonal(&diag)
    }
}

pub fn build_ring_hamiltonian(spec: &RingSpec) -> Result<ComplexMatrix> {
    build_ring_hamiltonian_with_cap(spec, DEFAULT_DIMENSION_CAP)
}

pub fn build_ring_hamiltonian_with_cap(spec: &RingSpec, cap: usize) -> Result<ComplexMatrix> {
    let dim = spec.hilbert_dim();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let ops: Vec<SpinOperators> = spec.spins.iter().map(|&s| operators_for(s)).collect();
    let len = spec.len();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for k in 0..len {
        let l = (k + 1) % len;
        let j = spec.bonds[k];
        if j != 0.0 {
            for c in [SpinComponent::X, SpinComponent::Y, SpinComponent::Z] {
                let term = spec.embed(&[(k, ops[k].component(c)), (l, ops[l].component(c))]);
                h = &h + &(&term * j);
            }
        }
        let d = spec.crystal_fields[k];
        if d != 0.0 {
            let s = spec.spins[k].value();
            let offset = ComplexMatrix::identity(ops[k].z.rows()).scale(Complex64::new(s * (s + 1.0) / 3.0, 0.0));
            let local = &(&ops[k].z * &ops[k].z) - &offset;
            h = &h + &(&spec.embed(&[(k, &local)]) * d);
        }
    }
    Ok(h)
}

/// The ground doublet `{|0>, |1>}` of a ring.
#[derive(Debug, Clone)]
pub struct QubitEncoding {
    pub ket0: Vec<Complex64>,
    pub ket1: Vec<Complex64>,
    /// Distance from the doublet to the next level; infinite when the ring has
    /// no third state.
    pub gap: f64,
    /// Total `S_z` of `ket0` and `ket1`.
    pub total_sz: [f64; 2],
    pub ground_energy: f64,
}

impl QubitEncoding {
    /// Re-phases `ket1` so that `<1|reference|0>` is real and non-negative.
    /// Leaves the encoding untouched when that element vanishes.
    pub fn fix_gauge(&mut self, reference: &ComplexMatrix) -> Result<()> {
        let x = reference.sandwich(&self.ket1, &self.ket0)?;
        if x.norm() > 1e-12 {
            let phase = x / x.norm();
            self.ket1.iter_mut().for_each(|z| *z *= phase);
        }
        Ok(())
    }

    /// Multiplies the kets by `exp(i phi0)` and `exp(i phi1)`.
    pub fn rephase(&mut self, phi0: f64, phi1: f64) {
        let (p0, p1) = (Complex64::from_polar(1.0, phi0), Complex64::from_polar(1.0, phi1));
        self.ket0.iter_mut().for_each(|z| *z *= p0);
        self.ket1.iter_mut().for_each(|z| *z *= p1);
    }
}

/// Finds the two lowest eigenstates of `h` and resolves them into the
/// `S_z = -1/2` (`ket0`) and `S_z = +1/2` (`ket1`) sectors.
pub fn ground_doublet(h: &ComplexMatrix, sz_total: &ComplexMatrix) -> Result<QubitEncoding> {
    h.require_square()?;
    if sz_total.rows() != h.rows() || sz_total.cols() != h.cols() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: sz_total.rows(),
        });
    }
    let scale = h.max_abs().max(1.0);
    let residual = h.commutator(sz_total)?.max_abs();
    if residual > 1e-9 * scale {
        return Err(Error::SymmetryBroken(residual));
    }

    let es = hermitian_eigendecompose(h)?;
    let values = es.values();
    if values.len() < 2 {
        return Err(Error::InvalidDoublet("Hilbert space has fewer than two states".into()));
    }
    let e0 = values[0];
    let window = DOUBLET_TOLERANCE * h.max_abs();
    let multiplicity = values.iter().take_while(|&&e| e - e0 <= window).count();
    if multiplicity != 2 {
        return Err(Error::InvalidDoublet(format!(
            "ground multiplet has {multiplicity} states"
        )));
    }

    let (v0, v1) = (es.vector(0), es.vector(1));
    let proj = |a: &[Complex64], b: &[Complex64]| sz_total.sandwich(a, b);
    let block = ComplexMatrix::from_row_major(
        2,
        2,
        vec![proj(&v0, &v0)?, proj(&v0, &v1)?, proj(&v1, &v0)?, proj(&v1, &v1)?],
    )?;
    let sectors = hermitian_eigendecompose(&block)?;
    let labels = [sectors.values()[0], sectors.values()[1]];
    if (labels[0] + 0.5).abs() > DOUBLET_TOLERANCE || (labels[1] - 0.5).abs() > DOUBLET_TOLERANCE {
        return Err(Error::InvalidDoublet(format!(
            "doublet carries S_z = {:.6}, {:.6}",
            labels[0], labels[1]
        )));
    }
    let combine = |k: usize| -> Vec<Complex64> {
        let u = sectors.vector(k);
        let mut ket: Vec<Complex64> = v0.iter().zip(&v1).map(|(a, b)| a * u[0] + b * u[1]).collect();
        canonical_phase(&mut ket);
        ket
    };

    Ok(QubitEncoding {
        ket0: combine(0),
        ket1: combine(1),
        gap: values.get(2).map_or(f64::INFINITY, |e2| e2 - e0),
        total_sz: labels,
        ground_energy: e0,
    })
}

/// Rotates the first largest-modulus component onto the positive real axis.
fn canonical_phase(v: &mut [Complex64]) {
    let largest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(pivot) = v.iter().find(|z| z.norm() >= largest * (1.0 - 1e-9)).copied() {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
    let n = norm(v);
    v.iter_mut().for_each(|z| *z /= n);
}

/// Per-site doublet matrix elements `<1|tau^x|0>`, `<0|tau^z|0>`, `<1|tau^z|1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMatrixElements {
    pub x10: Vec<Complex64>,
    pub z00: Vec<Complex64>,
    pub z11: Vec<Complex64>,
}

impl SiteMatrixElements {
    pub fn len(&self) -> usize {
        self.x10.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x10.is_empty()
    }
}

pub fn doublet_matrix_elements(enc: &QubitEncoding, spec: &RingSpec) -> Result<SiteMatrixElements> {
    let dim = spec.hilbert_dim();
    for ket in [&enc.ket0, &enc.ket1] {
        if ket.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: ket.len(),
            });
        }
    }
    let mut out = SiteMatrixElements {
        x10: Vec::with_capacity(spec.len()),
        z00: Vec::with_capacity(spec.len()),
        z11: Vec::with_capacity(spec.len()),
    };
    for site in 0..spec.len() {
        let x = spec.site_operator(site, SpinComponent::X);
        let z = spec.site_operator(site, SpinComponent::Z);
        out.x10.push(x.sandwich(&enc.ket1, &enc.ket0)?);
        let z_ket0 = z.mul_vec(&enc.ket0)?;
        let z_ket1 = z.mul_vec(&enc.ket1)?;
        out.z00.push(inner(&enc.ket0, &z_ket0));
        out.z11.push(inner(&enc.ket1, &z_ket1));
    }
    Ok(out)
}

/// A ring with its gauge-fixed qubit encoding and matrix elements.
#[derive(Debug, Clone)]
pub struct EncodedRing {
    pub spec: RingSpec,
    pub encoding: QubitEncoding,
    pub elements: SiteMatrixElements,
}

/// Builds, diagonalizes and encodes a ring, fixing the gauge on site 0.
pub fn encode_ring(spec: &RingSpec) -> Result<EncodedRing> {
    let h = build_ring_hamiltonian(spec)?;
    let mut encoding = ground_doublet(&h, &spec.total_sz())?;
    encoding.fix_gauge(&spec.site_operator(0, SpinComponent::X))?;
    let elements = doublet_matrix_elements(&encoding, spec)?;
    Ok(EncodedRing {
        spec: spec.clone(),
        encoding,
        elements,
    })
}
