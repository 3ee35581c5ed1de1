//! Transfer-matrix engine: exact 2x2 matrices per element, unit-cell and
//! full-structure matrices, Bloch phase, Chebyshev powers, transmission, pass
//! band detection and perfect-transmission-resonance (PTR) finding.
//!
//! Internal propagation uses the (psi, psi') basis, which stays well
//! conditioned under evanescence inside barriers; conversion to the
//! traveling-wave basis e^{+-ikx} happens only at the leads. In the
//! traveling-wave basis the matrix maps the local wave amplitudes at the left
//! edge to those at the right edge, so the transmission amplitude is 1/m22
//! and the left-incidence reflection amplitude is -m21/m22.

use num_complex::Complex64;
use thiserror::Error;

use crate::potential::{build_periodic, FlatStructure, Segment, UnitCell};
use crate::roots::{brent, golden_min, RootError};
use crate::special::{cos_sqrt, sinc_sqrt};

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("transmission pole: |m22| = {0} at real frequency (non-physical for real potentials)")]
    TransmissionPole(f64),
    #[error("basis mismatch: expected {expected:?}, got {got:?}")]
    BasisMismatch { expected: Basis, got: Basis },
    #[error("interval [{0}, {1}] straddles a band gap")]
    BandStraddlesGap(f64, f64),
    #[error("PTR root for n = {n} not bracketed in [{lo}, {hi}] (interval too narrow)")]
    RootNotBracketed { n: usize, lo: f64, hi: f64 },
    #[error("root refinement failed: {0}")]
    Root(#[from] RootError),
    #[error("PTR verification failed at k = {k}: reflection {reflection} above tolerance")]
    PtrVerification { k: f64, reflection: f64 },
}

/// Which pair of amplitudes the matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// (psi, psi') at a point.
    PsiDpsi,
    /// Locally referenced right/left-going amplitudes at lead wavenumber k.
    Traveling,
}

/// Unimodular 2x2 complex matrix relating wave data on the two sides of a
/// scattering element (or stack of elements).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub basis: Basis,
}

impl TransferMatrix {
    pub fn identity(basis: Basis) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TransferMatrix {
            m11: one,
            m12: zero,
            m21: zero,
            m22: one,
            basis,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    /// Matrix product self * rhs (apply rhs first).
    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        assert_eq!(self.basis, rhs.basis, "transfer-matrix basis mismatch");
        TransferMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
            basis: self.basis,
        }
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.m11 * v.0 + self.m12 * v.1,
            self.m21 * v.0 + self.m22 * v.1,
        )
    }

    /// Conjugate a (psi, psi') matrix into the traveling-wave basis at
    /// wavenumber k: M = W^-1 P W with W = [[1, 1], [ik, -ik]].
    pub fn to_traveling(&self, k: Complex64) -> TransferMatrix {
        assert_eq!(self.basis, Basis::PsiDpsi, "expected a (psi, psi') matrix");
        let i = Complex64::new(0.0, 1.0);
        let (a, b, c, d) = (self.m11, self.m12, self.m21, self.m22);
        let bk = b * i * k;
        let ck = c / (i * k);
        TransferMatrix {
            m11: 0.5 * (a + d + bk + ck),
            m12: 0.5 * (a - d - bk + ck),
            m21: 0.5 * (a - d + bk - ck),
            m22: 0.5 * (a + d - bk - ck),
            basis: Basis::Traveling,
        }
    }
}

/// Scattering amplitudes and coefficients extracted from a traveling-wave
/// matrix at real frequency. `r` is the left-incidence reflection amplitude.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringCoefficients {
    pub t: Complex64,
    pub r: Complex64,
    pub transmission: f64,
    pub reflection: f64,
}

impl ScatteringCoefficients {
    pub fn from_matrix(m: &TransferMatrix) -> Result<Self, TransferError> {
        if m.m22.norm() < 1e-12 {
            return Err(TransferError::TransmissionPole(m.m22.norm()));
        }
        let t = Complex64::new(1.0, 0.0) / m.m22;
        let r = -m.m21 / m.m22;
        Ok(ScatteringCoefficients {
            t,
            r,
            transmission: t.norm_sqr(),
            reflection: r.norm_sqr(),
        })
    }
}

/// Bloch phase of a unit cell: cos(phi) = Tr(M)/2 on the principal branch
/// Re(phi) in [0, pi]; real inside pass bands, complex inside gaps.
#[derive(Debug, Clone, Copy)]
pub struct BlochPhase {
    pub phi: Complex64,
    pub in_passband: bool,
}

/// Propagation through one constant segment in the (psi, psi') basis:
/// [[cos(qL), sin(qL)/q], [-q^2 sin(qL)/q, cos(qL)]] with q^2 = k^2 - V,
/// continued analytically through q = 0.
pub fn segment_matrix(seg: &Segment, k: Complex64) -> TransferMatrix {
    propagation_matrix(seg.length, seg.height, k)
}

fn propagation_matrix(length: f64, height: f64, k: Complex64) -> TransferMatrix {
    let q_sq = k * k - Complex64::new(height, 0.0);
    let z = q_sq * (length * length);
    let c = cos_sqrt(z);
    let s = sinc_sqrt(z) * length;
    TransferMatrix {
        m11: c,
        m12: s,
        m21: -q_sq * s,
        m22: c,
        basis: Basis::PsiDpsi,
    }
}

/// Jump condition of a point scatterer of effective strength c:
/// psi continuous, psi' jumps by c psi.
pub fn delta_matrix(c_eff: f64) -> TransferMatrix {
    let mut m = TransferMatrix::identity(Basis::PsiDpsi);
    m.m21 = Complex64::new(c_eff, 0.0);
    m
}

/// Ordered element walk of a flattened structure, left to right.
#[derive(Debug, Clone, Copy)]
pub enum Element {
    Segment { length: f64, height: f64 },
    Delta { strength: f64 },
}

pub fn elements_of(flat: &FlatStructure) -> Vec<Element> {
    let mut out = Vec::with_capacity(2 * flat.segments.len() + 1);
    if let Some(c) = flat.delta_at(-flat.half_length) {
        out.push(Element::Delta { strength: c });
    }
    for seg in &flat.segments {
        out.push(Element::Segment {
            length: seg.length(),
            height: seg.height,
        });
        if let Some(c) = flat.delta_at(seg.end) {
            out.push(Element::Delta { strength: c });
        }
    }
    out
}

/// (psi, psi') matrix of the whole flattened structure.
pub fn structure_psi_matrix(flat: &FlatStructure, k: Complex64) -> TransferMatrix {
    let mut acc = TransferMatrix::identity(Basis::PsiDpsi);
    for el in elements_of(flat) {
        let m = match el {
            Element::Segment { length, height } => propagation_matrix(length, height, k),
            Element::Delta { strength } => delta_matrix(strength),
        };
        acc = m.mul(&acc);
    }
    acc
}

/// Traveling-wave matrix of the whole flattened structure.
pub fn structure_matrix(flat: &FlatStructure, k: Complex64) -> TransferMatrix {
    structure_psi_matrix(flat, k).to_traveling(k)
}

fn real_k(k: f64) -> Complex64 {
    Complex64::new(k, 0.0)
}

/// Transmission coefficient of the full structure at real frequency.
pub fn transmission(flat: &FlatStructure, k: f64) -> f64 {
    let m = structure_matrix(flat, real_k(k));
    1.0 / m.m22.norm_sqr()
}

/// Left-incidence reflection coefficient; equals 1 - T for real potentials
/// at real frequency but is far better conditioned near T = 1.
pub fn reflection(flat: &FlatStructure, k: f64) -> f64 {
    let m = structure_matrix(flat, real_k(k));
    (m.m21 / m.m22).norm_sqr()
}

fn single_cell_flat(cell: &UnitCell) -> FlatStructure {
    build_periodic(cell.clone(), 1)
        .expect("one cell is always a valid structure")
        .flatten()
}

/// Traveling-wave matrix of one unit cell at (possibly complex) frequency.
pub fn cell_traveling_matrix(cell: &UnitCell, k: Complex64) -> TransferMatrix {
    structure_matrix(&single_cell_flat(cell), k)
}

/// Unit-cell matrix and scattering coefficients at real frequency.
pub fn cell_matrix(
    cell: &UnitCell,
    k: f64,
) -> Result<(TransferMatrix, ScatteringCoefficients), TransferError> {
    let m = cell_traveling_matrix(cell, real_k(k));
    let coeffs = ScatteringCoefficients::from_matrix(&m)?;
    Ok((m, coeffs))
}

/// Traveling-wave matrix of the left half of a mirror-symmetric cell, from
/// the cell's left edge to its center. A scatterer sitting exactly on the
/// center splits into two half-strength jumps, one per half.
pub fn half_cell_traveling_matrix(cell: &UnitCell, k: Complex64) -> TransferMatrix {
    let flat = single_cell_flat(cell);
    let half = cell.period() / 2.0;
    let mut acc = TransferMatrix::identity(Basis::PsiDpsi);
    if let Some(c) = flat.delta_at(-half) {
        acc = delta_matrix(c).mul(&acc);
    }
    for seg in &flat.segments {
        if seg.end <= 1e-15 {
            acc = propagation_matrix(seg.length(), seg.height, k).mul(&acc);
            let c = flat.delta_at(seg.end).unwrap_or(0.0);
            if c != 0.0 {
                let strength = if seg.end.abs() <= 1e-15 { c / 2.0 } else { c };
                acc = delta_matrix(strength).mul(&acc);
            }
        } else if seg.start < -1e-15 {
            // segment straddles the center: propagate only the left part
            acc = propagation_matrix(-seg.start, seg.height, k).mul(&acc);
        }
    }
    acc.to_traveling(k)
}

/// Bloch phase from a traveling-wave unit-cell matrix.
pub fn bloch_phase(m: &TransferMatrix) -> BlochPhase {
    assert_eq!(m.basis, Basis::Traveling, "Bloch phase expects the traveling basis");
    let x = 0.5 * m.trace();
    let phi = if x.im == 0.0 && x.re.abs() <= 1.0 {
        Complex64::new(x.re.acos(), 0.0)
    } else {
        x.acos()
    };
    BlochPhase {
        phi,
        in_passband: phi.im.abs() < 1e-10,
    }
}

/// Chebyshev polynomials of the second kind, (U_{n-1}(x), U_{n-2}(x)),
/// evaluated by the stable forward recurrence. This is the analytic
/// continuation of sin(n phi)/sin(phi) with x = cos(phi), including the
/// band-edge limits U_{n-1} -> +-n.
pub fn chebyshev_u_pair(x: Complex64, n: usize) -> (Complex64, Complex64) {
    let mut u_prev = Complex64::new(0.0, 0.0); // U_{-1}
    let mut u = Complex64::new(1.0, 0.0); // U_0
    if n == 0 {
        return (u_prev, Complex64::new(0.0, 0.0));
    }
    for _ in 1..n {
        let next = 2.0 * x * u - u_prev;
        u_prev = u;
        u = next;
    }
    (u, u_prev)
}

/// N-th power of a unimodular matrix via the Chebyshev identity
/// M^N = U_{N-1} M - U_{N-2} I.
pub fn chebyshev_power(m: &TransferMatrix, n: usize) -> TransferMatrix {
    if n == 0 {
        return TransferMatrix::identity(m.basis);
    }
    let x = 0.5 * m.trace();
    let (u1, u2) = chebyshev_u_pair(x, n);
    TransferMatrix {
        m11: u1 * m.m11 - u2,
        m12: u1 * m.m12,
        m21: u1 * m.m21,
        m22: u1 * m.m22 - u2,
        basis: m.basis,
    }
}

/// Transmission of N identical cells from single-cell data:
/// T_N = 1 / (1 + (1/|t|^2 - 1) sin^2(N phi)/sin^2(phi)), with the
/// sine ratio evaluated as U_{N-1}(Tr M/2).
pub fn transmission_n_cells(cell: &UnitCell, n_cells: usize, k: f64) -> f64 {
    let m = cell_traveling_matrix(cell, real_k(k));
    let x = 0.5 * m.trace();
    let (u1, _) = chebyshev_u_pair(x, n_cells);
    // for real potentials at real k: 1/|t|^2 - 1 = |m12|^2
    let growth = m.m12.norm_sqr() * u1.norm_sqr();
    1.0 / (1.0 + growth)
}

/// One pass band [lo, hi] of the unit-cell dispersion. `index` counts bands
/// from 1 in the scanned range; `lo_is_edge`/`hi_is_edge` tell whether the
/// bound is a refined physical band edge or just the scan boundary.
#[derive(Debug, Clone, Copy)]
pub struct Band {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub lo_is_edge: bool,
    pub hi_is_edge: bool,
}

/// Scan points per unit of k d when detecting pass bands.
const BAND_SCAN_DENSITY: f64 = 2048.0;

/// Locate pass bands (|Tr M/2| <= 1) of the unit cell inside [kmin, kmax]
/// by grid scan plus bisection refinement of the edges.
pub fn detect_bands(cell: &UnitCell, kmin: f64, kmax: f64) -> Vec<Band> {
    assert!(kmax > kmin && kmin > 0.0, "need 0 < kmin < kmax");
    let flat = single_cell_flat(cell);
    let trace_half = |k: f64| -> f64 {
        let m = structure_matrix(&flat, real_k(k));
        0.5 * m.trace().re
    };
    let n = ((kmax - kmin) * BAND_SCAN_DENSITY).ceil() as usize + 1;
    let step = (kmax - kmin) / n as f64;
    let in_band = |k: f64| trace_half(k).abs() <= 1.0;

    let refine = |a: f64, b: f64| -> f64 {
        // bisect the |Tr/2| = 1 crossing between a (inside) and b (outside)
        let g = |k: f64| trace_half(k).abs() - 1.0;
        let (mut lo, mut hi) = (a, b);
        for _ in 0..100 {
            if (hi - lo).abs() < 1e-12 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if g(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let mut bands = Vec::new();
    let mut open: Option<(f64, bool)> = None; // (lo, lo_is_edge)
    let mut prev_k = kmin;
    let mut prev_in = in_band(kmin);
    if prev_in {
        open = Some((kmin, false));
    }
    for i in 1..=n {
        let k = kmin + i as f64 * step;
        let now_in = in_band(k);
        if now_in && !prev_in {
            open = Some((refine(k, prev_k), true));
        } else if !now_in && prev_in {
            let (lo, lo_is_edge) = open.take().expect("band was open");
            bands.push(Band {
                index: bands.len() + 1,
                lo,
                hi: refine(prev_k, k),
                lo_is_edge,
                hi_is_edge: true,
            });
        }
        prev_k = k;
        prev_in = now_in;
    }
    if let Some((lo, lo_is_edge)) = open {
        bands.push(Band {
            index: bands.len() + 1,
            lo,
            hi: kmax,
            lo_is_edge,
            hi_is_edge: false,
        });
    }
    bands
}

/// A perfect transmission resonance of the N-cell structure.
#[derive(Debug, Clone, Copy)]
pub struct PtrRecord {
    /// Band index as numbered by the scan that produced it.
    pub band: usize,
    /// Resonance number within the band, 1..N-1.
    pub n: usize,
    /// Bloch phase n pi / N.
    pub phi: f64,
    /// Resonance frequency in units of 1/d.
    pub k: f64,
}

/// Output of `find_ptrs`: the N-1 Bloch resonances plus any accidental
/// frequencies where the single cell itself is already reflectionless.
#[derive(Debug, Clone)]
pub struct PtrScan {
    pub records: Vec<PtrRecord>,
    pub accidental: Vec<f64>,
}

/// Find the N-1 PTRs of `n_cells` repetitions of `cell` inside one pass
/// band: the roots of cos(phi(k)) = cos(n pi / N). Each root is verified to
/// give reflection below 1e-8. Accidental single-cell PTRs in the band are
/// reported separately (none exist for cells with nowhere-perfect single-cell
/// transmission; a cell reflectionless everywhere reports none).
pub fn find_ptrs(cell: &UnitCell, n_cells: usize, band: &Band) -> Result<PtrScan, TransferError> {
    let flat = single_cell_flat(cell);
    let trace_half = |k: f64| {
        let m = structure_matrix(&flat, real_k(k));
        0.5 * m.trace().re
    };

    // the interval must lie inside a single pass band
    let probes = 257;
    for i in 0..probes {
        let k = band.lo + (band.hi - band.lo) * i as f64 / (probes - 1) as f64;
        if trace_half(k).abs() > 1.0 + 1e-9 {
            return Err(TransferError::BandStraddlesGap(band.lo, band.hi));
        }
    }

    let n_total = n_cells;
    let mut records = Vec::with_capacity(n_total - 1);
    for n in 1..n_total {
        let phi = n as f64 * std::f64::consts::PI / n_total as f64;
        let target = phi.cos();
        let f = |k: f64| trace_half(k) - target;
        let (flo, fhi) = (f(band.lo), f(band.hi));
        if flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
            return Err(TransferError::RootNotBracketed {
                n,
                lo: band.lo,
                hi: band.hi,
            });
        }
        let k = brent(f, band.lo, band.hi, 1e-12, 200)?;
        records.push(PtrRecord {
            band: band.index,
            n,
            phi,
            k,
        });
    }
    records.sort_by(|a, b| a.k.total_cmp(&b.k));

    // verify T = 1 at every root via the N-cell matrix
    for rec in &records {
        let m_cell = structure_matrix(&flat, real_k(rec.k));
        let m_n = chebyshev_power(&m_cell, n_cells);
        let refl = (m_n.m21 / m_n.m22).norm_sqr();
        if refl > 1e-8 {
            return Err(TransferError::PtrVerification {
                k: rec.k,
                reflection: refl,
            });
        }
    }

    // accidental: frequencies where the single cell is itself reflectionless
    let single_r = |k: f64| {
        let m = structure_matrix(&flat, real_k(k));
        (m.m21 / m.m22).norm_sqr()
    };
    let grid = 1024;
    let rs: Vec<f64> = (0..=grid)
        .map(|i| single_r(band.lo + (band.hi - band.lo) * i as f64 / grid as f64))
        .collect();
    let mut accidental = Vec::new();
    if rs.iter().any(|&r| r > 1e-16) {
        for i in 1..grid {
            if rs[i] < rs[i - 1] && rs[i] < rs[i + 1] && rs[i] < 1e-6 {
                let a = band.lo + (band.hi - band.lo) * (i - 1) as f64 / grid as f64;
                let b = band.lo + (band.hi - band.lo) * (i + 1) as f64 / grid as f64;
                let (k, r) = golden_min(single_r, a, b, 1e-12);
                if r < 1e-15 {
                    accidental.push(k);
                }
            }
        }
    }

    Ok(PtrScan {
        records,
        accidental,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::DiracScatterer;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rect_cell() -> UnitCell {
        UnitCell::new(
            vec![
                Segment::new(5.0 / 12.0, 0.0).unwrap(),
                Segment::new(1.0 / 6.0, 27.0).unwrap(),
                Segment::new(5.0 / 12.0, 0.0).unwrap(),
            ],
            vec![],
        )
        .unwrap()
    }

    fn free_cell() -> UnitCell {
        UnitCell::new(vec![Segment::new(1.0, 0.0).unwrap()], vec![]).unwrap()
    }

    /// Fixed-step RK4 integration of psi'' = (V - k^2) psi across a segment.
    /// Independent oracle for the analytic propagation matrix.
    fn ode_matrix(length: f64, height: f64, k: f64, steps: usize) -> [[f64; 2]; 2] {
        let rhs = |psi: f64, dpsi: f64| (dpsi, (height - k * k) * psi);
        let mut cols = [[0.0; 2]; 2];
        for (j, init) in [(1.0, 0.0), (0.0, 1.0)].iter().enumerate() {
            let (mut y, mut yp) = *init;
            let h = length / steps as f64;
            for _ in 0..steps {
                let (k1, k1p) = rhs(y, yp);
                let (k2, k2p) = rhs(y + 0.5 * h * k1, yp + 0.5 * h * k1p);
                let (k3, k3p) = rhs(y + 0.5 * h * k2, yp + 0.5 * h * k2p);
                let (k4, k4p) = rhs(y + h * k3, yp + h * k3p);
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                yp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            }
            cols[0][j] = y;
            cols[1][j] = yp;
        }
        cols
    }

    #[test]
    fn segment_matrix_free_half_period() {
        // L = 1, V = 0, k = pi: cos(pi) = -1, sin(pi) = 0
        let m = segment_matrix(&Segment::new(1.0, 0.0).unwrap(), c(PI, 0.0));
        assert!((m.m11.re + 1.0).abs() < 1e-15);
        assert!(m.m12.norm() < 1e-15);
        assert!(m.m21.norm() < 1e-14);
        assert!((m.m22.re + 1.0).abs() < 1e-15);
        assert!((m.det() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn segment_matrix_matches_ode_oracle() {
        // evanescent barrier: k^2 < V
        let (length, height, k) = (1.0 / 6.0, 27.0, 2.0);
        let m = segment_matrix(&Segment::new(length, height).unwrap(), c(k, 0.0));
        let o = ode_matrix(length, height, k, 8000);
        assert!((m.m11.re - o[0][0]).abs() < 1e-10);
        assert!((m.m12.re - o[0][1]).abs() < 1e-10);
        assert!((m.m21.re - o[1][0]).abs() < 1e-9);
        assert!((m.m22.re - o[1][1]).abs() < 1e-10);
        // entries are hyperbolic: m11 = cosh(|q| L) > 1
        let kappa = (27.0_f64 - 4.0).sqrt();
        assert!((m.m11.re - (kappa / 6.0).cosh()).abs() < 1e-12);

        // propagating segment too
        let (length, height, k) = (0.37, -3.0, 1.3);
        let m = segment_matrix(&Segment::new(length, height).unwrap(), c(k, 0.0));
        let o = ode_matrix(length, height, k, 8000);
        assert!((m.m11.re - o[0][0]).abs() < 1e-10);
        assert!((m.m12.re - o[0][1]).abs() < 1e-10);
    }

    #[test]
    fn segment_matrix_short_length_limit() {
        let m = segment_matrix(&Segment::new(1e-12, 5.0).unwrap(), c(2.0, 0.0));
        assert!((m.m11 - c(1.0, 0.0)).norm() < 1e-11);
        assert!((m.m22 - c(1.0, 0.0)).norm() < 1e-11);
        assert!(m.m12.norm() < 1e-11);
        assert!(m.m21.norm() < 1e-10);
    }

    #[test]
    fn delta_matrix_jump_and_composition() {
        let m = delta_matrix(0.0);
        assert_eq!(m, TransferMatrix::identity(Basis::PsiDpsi));
        let m = delta_matrix(0.48);
        assert!((m.m21.re - 0.48).abs() < 1e-15);
        assert_eq!(m.m11.re, 1.0);
        assert_eq!(m.m12.norm(), 0.0);
        // delta(a) * delta(b) = delta(a + b)
        let ab = delta_matrix(0.3).mul(&delta_matrix(0.7));
        assert_eq!(ab, delta_matrix(1.0));
        assert_eq!(m.det(), c(1.0, 0.0));
    }

    #[test]
    fn free_cell_is_pure_phase() {
        for &k in &[0.7, 1.9, 3.2] {
            let (m, coeffs) = cell_matrix(&free_cell(), k).unwrap();
            assert!((coeffs.t - c(k.cos(), k.sin())).norm() < 1e-13);
            assert!(coeffs.r.norm() < 1e-13);
            assert!((coeffs.transmission - 1.0).abs() < 1e-13);
            assert!((m.m11 - c(k.cos(), k.sin())).norm() < 1e-13);
        }
    }

    #[test]
    fn cell_matrix_unitarity_and_symmetry() {
        for &k in &[0.9, 1.7, 2.2, 3.1, 5.196, 6.4] {
            let (m, coeffs) = cell_matrix(&rect_cell(), k).unwrap();
            assert!((coeffs.transmission + coeffs.reflection - 1.0).abs() < 1e-10);
            assert!((m.det() - c(1.0, 0.0)).norm() < 1e-12);
            // real potential at real k: m22 = conj(m11), m21 = conj(m12)
            assert!((m.m22 - m.m11.conj()).norm() < 1e-12);
            assert!((m.m21 - m.m12.conj()).norm() < 1e-12);
        }
        // generic in-band frequency transmits imperfectly
        let (_, coeffs) = cell_matrix(&rect_cell(), 2.0).unwrap();
        assert!(coeffs.transmission < 1.0 - 1e-6);
    }

    #[test]
    fn bloch_phase_free_and_barrier() {
        let (m, _) = cell_matrix(&free_cell(), PI / 2.0).unwrap();
        let b = bloch_phase(&m);
        assert!(b.in_passband);
        assert!((b.phi.re - PI / 2.0).abs() < 1e-12);

        let (m, _) = cell_matrix(&rect_cell(), 2.2).unwrap();
        let b = bloch_phase(&m);
        assert!(b.in_passband, "k = 2.2 lies in the first pass band");
        assert!(b.phi.im.abs() < 1e-12);

        // deep in the first gap the phase picks up an imaginary part
        let (m, _) = cell_matrix(&rect_cell(), 1.0).unwrap();
        let b = bloch_phase(&m);
        assert!(!b.in_passband);
        assert!(b.phi.im.abs() > 1e-3);
    }

    #[test]
    fn chebyshev_power_small_orders() {
        let (m, _) = cell_matrix(&rect_cell(), 2.1).unwrap();
        let p1 = chebyshev_power(&m, 1);
        assert!((p1.m11 - m.m11).norm() < 1e-14);
        assert!((p1.m12 - m.m12).norm() < 1e-14);

        // free cell: M^8 = diag(e^{8ik}, e^{-8ik})
        let k = 1.3;
        let (m, _) = cell_matrix(&free_cell(), k).unwrap();
        let p = chebyshev_power(&m, 8);
        assert!((p.m11 - c((8.0 * k).cos(), (8.0 * k).sin())).norm() < 1e-12);
        assert!(p.m12.norm() < 1e-12);
    }

    fn fold_power(m: &TransferMatrix, n: usize) -> TransferMatrix {
        let mut acc = TransferMatrix::identity(m.basis);
        for _ in 0..n {
            acc = m.mul(&acc);
        }
        acc
    }

    struct XorShift(u64);
    impl XorShift {
        fn next_f64(&mut self) -> f64 {
            let mut x = self.0;
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            self.0 = x;
            (x >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    #[test]
    fn chebyshev_power_matches_fold_product_for_random_matrices() {
        let mut rng = XorShift(0x9e3779b97f4a7c15);
        for _ in 0..100 {
            // random unimodular matrix of the real-potential form with
            // |Tr/2| < 1 (inside a pass band)
            let x = 2.0 * rng.next_f64() - 1.0;
            let rho = 3.0 * rng.next_f64();
            let theta = 2.0 * PI * rng.next_f64();
            let im11 = (1.0 + rho * rho - x * x).sqrt();
            let m = TransferMatrix {
                m11: c(x, im11),
                m12: c(rho * theta.cos(), rho * theta.sin()),
                m21: c(rho * theta.cos(), -rho * theta.sin()),
                m22: c(x, -im11),
                basis: Basis::Traveling,
            };
            assert!((m.det() - c(1.0, 0.0)).norm() < 1e-12);
            let n = 2 + (rng.next_f64() * 30.0) as usize;
            let a = chebyshev_power(&m, n);
            let b = fold_power(&m, n);
            for (x, y) in [
                (a.m11, b.m11),
                (a.m12, b.m12),
                (a.m21, b.m21),
                (a.m22, b.m22),
            ] {
                let scale = x.norm().max(y.norm()).max(1e-30);
                assert!(
                    (x - y).norm() / scale < 1e-10,
                    "power mismatch at N = {n}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn transmission_three_routes_agree() {
        let cell = rect_cell();
        let flat8 = build_periodic(cell.clone(), 8).unwrap().flatten();
        for i in 0..2000 {
            let k = 0.6 + 3.0 * i as f64 / 1999.0;
            let t_formula = transmission_n_cells(&cell, 8, k);
            let m_cell = cell_traveling_matrix(&cell, c(k, 0.0));
            let t_cheb = 1.0 / chebyshev_power(&m_cell, 8).m22.norm_sqr();
            let t_direct = transmission(&flat8, k);
            let scale = t_formula.abs().max(1e-30);
            assert!((t_formula - t_cheb).abs() / scale < 1e-10);
            assert!((t_formula - t_direct).abs() / scale < 1e-10);
        }
    }

    #[test]
    fn free_cell_transmits_perfectly_for_any_count() {
        for &k in &[0.3, 1.1, 2.9] {
            assert!((transmission_n_cells(&free_cell(), 8, k) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn first_band_has_seven_resonances() {
        let cell = rect_cell();
        let bands = detect_bands(&cell, 1.0, 3.5);
        assert!(!bands.is_empty());
        let band = &bands[0];
        assert!(band.lo_is_edge && band.hi_is_edge);
        let scan = find_ptrs(&cell, 8, band).unwrap();
        assert_eq!(scan.records.len(), 7);
        assert!(scan.accidental.is_empty());
        // frequencies increase with n in this band and T = 1 at each
        let flat8 = build_periodic(cell.clone(), 8).unwrap().flatten();
        for (i, rec) in scan.records.iter().enumerate() {
            assert_eq!(rec.n, i + 1);
            assert!((transmission(&flat8, rec.k) - 1.0).abs() < 1e-8);
            assert!((rec.phi - (i + 1) as f64 * PI / 8.0).abs() < 1e-15);
        }
        // lowest resonance sits just above the band bottom, below k = 2
        assert!(scan.records[0].k > band.lo && scan.records[0].k < 2.0);
    }

    #[test]
    fn free_cell_resonances_are_geometric() {
        let cell = free_cell();
        let band = Band {
            index: 1,
            lo: 0.05,
            hi: PI - 0.05,
            lo_is_edge: false,
            hi_is_edge: false,
        };
        let scan = find_ptrs(&cell, 8, &band).unwrap();
        assert_eq!(scan.records.len(), 7);
        for rec in &scan.records {
            assert!((rec.k - rec.n as f64 * PI / 8.0).abs() < 1e-10);
        }
        // reflection vanishes identically: no accidental list
        assert!(scan.accidental.is_empty());
    }

    #[test]
    fn straddling_interval_is_rejected() {
        let cell = rect_cell();
        let band = Band {
            index: 1,
            lo: 1.0,
            hi: 3.5,
            lo_is_edge: false,
            hi_is_edge: false,
        };
        assert!(matches!(
            find_ptrs(&cell, 8, &band),
            Err(TransferError::BandStraddlesGap(_, _))
        ));
    }

    #[test]
    fn single_cell_structure_has_no_bloch_resonances() {
        let cell = rect_cell();
        let bands = detect_bands(&cell, 1.0, 3.5);
        let scan = find_ptrs(&cell, 1, &bands[0]).unwrap();
        assert!(scan.records.is_empty());
        assert!(scan.accidental.is_empty());
    }

    #[test]
    fn cell_with_scatterers_keeps_unitarity() {
        let cell = UnitCell::new(
            vec![
                Segment::new(0.5, 4.0).unwrap(),
                Segment::new(0.5, 0.0).unwrap(),
            ],
            vec![DiracScatterer::new(-0.25, 2.0).unwrap()],
        )
        .unwrap();
        for &k in &[0.8, 1.9, 3.3] {
            let (_, coeffs) = cell_matrix(&cell, k).unwrap();
            assert!((coeffs.transmission + coeffs.reflection - 1.0).abs() < 1e-10);
        }
    }
}
