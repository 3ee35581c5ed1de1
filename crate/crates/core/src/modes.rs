//! Reflectionless modes: complex frequencies where the structure transmits
//! an incoming wave from the left with no reflection.
//!
//! These are the zeros of the left-reflection numerator of the full transfer
//! matrix, found by Newton iteration in the complex k-plane with derivative
//! by central differences. For real mirror-symmetric structures the spectrum
//! is closed under complex conjugation (the eigenproblem is PT symmetric);
//! mirror-symmetric perturbation sweeps keep the eigenvalues real until two
//! of them coalesce at an exceptional point and split into a conjugate pair.

use num_complex::Complex64;
use thiserror::Error;

use crate::potential::{FlatStructure, Perturbation, StructureSpec};
use crate::transfer::structure_matrix;

#[derive(Debug, Error)]
pub enum ModesError {
    #[error("structure is reflectionless at every frequency; the zero set is the whole plane")]
    TriviallyReflectionless,
    #[error("perturbation must be mirror-symmetric for an exceptional-point trace")]
    AsymmetricPerturbation,
    #[error("epsilon grid must be non-empty and strictly increasing")]
    BadEpsilonGrid,
    #[error("no seed converged")]
    NoConvergedSeeds,
}

/// One converged zero of the left-reflection amplitude.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionlessMode {
    pub k: Complex64,
    /// |r(k)| at convergence.
    pub residual: f64,
    /// |Im k| < 1e-9 |Re k|.
    pub is_real: bool,
}

/// Result of the multi-seed search: converged modes (deduplicated) plus the
/// seeds that failed to converge.
#[derive(Debug, Clone)]
pub struct ModeScan {
    pub modes: Vec<ReflectionlessMode>,
    pub failed_seeds: Vec<Complex64>,
}

const MAX_NEWTON_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-10;
pub const DEFAULT_STEP_REL: f64 = 1e-7;

/// Left-reflection numerator: entry (2,1) of the traveling-wave structure
/// matrix; r = -m21/m22 so its zeros are exactly the reflectionless points.
fn reflection_numerator(flat: &FlatStructure, k: Complex64) -> Complex64 {
    structure_matrix(flat, k).m21
}

fn newton_zero(
    flat: &FlatStructure,
    seed: Complex64,
    step_rel: f64,
) -> Option<Complex64> {
    let mut k = seed;
    for _ in 0..MAX_NEWTON_ITER {
        let f = reflection_numerator(flat, k);
        let h = step_rel * k.norm().max(1e-3);
        let fp = reflection_numerator(flat, k + h) - reflection_numerator(flat, k - h);
        let deriv = fp / (2.0 * h);
        if deriv.norm() < 1e-300 {
            return None;
        }
        let delta = f / deriv;
        k -= delta;
        if delta.norm() < NEWTON_TOL {
            return Some(k);
        }
    }
    None
}

/// Newton search for reflectionless modes from the given seeds, with the
/// derivative step size exposed (the mode set must be insensitive to it).
pub fn reflectionless_modes_with_step(
    spec: &StructureSpec,
    seeds: &[Complex64],
    step_rel: f64,
) -> Result<ModeScan, ModesError> {
    let flat = spec.flatten();

    // reject structures whose reflection vanishes identically
    let probes: Vec<Complex64> = seeds
        .iter()
        .copied()
        .chain(seeds.iter().map(|s| s + Complex64::new(0.731, 0.117)))
        .collect();
    let trivially_zero = !probes.is_empty()
        && probes.iter().all(|&k| {
            let m = structure_matrix(&flat, k);
            m.m21.norm() < 1e-14 * m.m22.norm().max(1.0)
        });
    if trivially_zero {
        return Err(ModesError::TriviallyReflectionless);
    }

    let mut modes: Vec<ReflectionlessMode> = Vec::new();
    let mut failed = Vec::new();
    for &seed in seeds {
        match newton_zero(&flat, seed, step_rel) {
            Some(k) => {
                let m = structure_matrix(&flat, k);
                let residual = (m.m21 / m.m22).norm();
                if residual > RESIDUAL_TOL {
                    failed.push(seed);
                    continue;
                }
                // deflation by deduplication
                if modes.iter().any(|m| (m.k - k).norm() < DEDUP_TOL) {
                    continue;
                }
                modes.push(ReflectionlessMode {
                    k,
                    residual,
                    is_real: k.im.abs() < 1e-9 * k.re.abs(),
                });
            }
            None => failed.push(seed),
        }
    }
    modes.sort_by(|a, b| {
        a.k.re
            .total_cmp(&b.k.re)
            .then(a.k.im.total_cmp(&b.k.im))
    });
    Ok(ModeScan {
        modes,
        failed_seeds: failed,
    })
}

/// Newton search with the default derivative step.
pub fn reflectionless_modes(
    spec: &StructureSpec,
    seeds: &[Complex64],
) -> Result<ModeScan, ModesError> {
    reflectionless_modes_with_step(spec, seeds, DEFAULT_STEP_REL)
}

/// How one mode pairs under k -> conj(k).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtPairing {
    RealSelfPaired,
    ConjugatePartner(usize),
    Unmatched,
}

/// Conjugation-closure report for a mode set.
#[derive(Debug, Clone)]
pub struct PtReport {
    /// False when the structure is not mirror-symmetric; the closure
    /// property is then not expected and the check is skipped.
    pub applicable: bool,
    pub pairings: Vec<PtPairing>,
    pub closed: bool,
}

const PAIR_TOL: f64 = 1e-8;

/// Check that the mode set is closed under complex conjugation, as forced by
/// the parity-times-conjugation symmetry of mirror-symmetric structures.
pub fn pt_pair_check(modes: &[ReflectionlessMode], spec: &StructureSpec) -> PtReport {
    if !spec.is_mirror_symmetric() {
        return PtReport {
            applicable: false,
            pairings: vec![PtPairing::Unmatched; modes.len()],
            closed: false,
        };
    }
    let pairings: Vec<PtPairing> = modes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if m.is_real {
                PtPairing::RealSelfPaired
            } else {
                match modes
                    .iter()
                    .position(|other| (other.k - m.k.conj()).norm() < PAIR_TOL)
                {
                    Some(j) if j != i => PtPairing::ConjugatePartner(j),
                    _ => PtPairing::Unmatched,
                }
            }
        })
        .collect();
    let closed = pairings.iter().all(|p| *p != PtPairing::Unmatched);
    PtReport {
        applicable: true,
        pairings,
        closed,
    }
}

/// Two eigenvalues continued along a mirror-symmetric perturbation sweep.
#[derive(Debug, Clone)]
pub struct EpTrace {
    pub epsilons: Vec<f64>,
    pub k_a: Vec<Complex64>,
    pub k_b: Vec<Complex64>,
    /// First epsilon at which |k_a - k_b| dropped below 1e-6.
    pub coalescence_eps: Option<f64>,
    /// Epsilon at which continuation failed, if it did; the trace stops
    /// just before it.
    pub lost_at: Option<f64>,
}

impl EpTrace {
    pub fn gaps(&self) -> Vec<f64> {
        self.k_a
            .iter()
            .zip(&self.k_b)
            .map(|(a, b)| (a - b).norm())
            .collect()
    }
}

const COALESCENCE_GAP: f64 = 1e-6;
const MAX_HALVINGS: usize = 8;

fn continue_pair(
    flat: &FlatStructure,
    seeds: (Complex64, Complex64),
) -> Option<(Complex64, Complex64)> {
    let gap_before = (seeds.0 - seeds.1).norm();
    let a = newton_zero(flat, seeds.0, DEFAULT_STEP_REL)?;
    let b = newton_zero(flat, seeds.1, DEFAULT_STEP_REL)?;
    // a move far beyond the seed gap means a basin was skipped; refine
    let max_move = (4.0 * gap_before).max(0.02);
    if (a - seeds.0).norm() > max_move || (b - seeds.1).norm() > max_move {
        return None;
    }
    if (a - b).norm() > DEDUP_TOL {
        // keep the labels continuous: pick the assignment closest to the seeds
        let direct = (a - seeds.0).norm() + (b - seeds.1).norm();
        let crossed = (a - seeds.1).norm() + (b - seeds.0).norm();
        return Some(if direct <= crossed { (a, b) } else { (b, a) });
    }
    // both converged to one zero: either the exceptional point was crossed
    // inside this step (the gap closes like a square root, faster than any
    // step refinement) or two still-real roots share a Newton basin;
    // perturbed restarts recover the actual pair
    for off_scale in [1e-5, 1e-4, 1e-3] {
        let off = Complex64::new(0.0, off_scale * a.norm().max(1.0));
        let (up, down) = match (
            newton_zero(flat, a + off, DEFAULT_STEP_REL),
            newton_zero(flat, a - off, DEFAULT_STEP_REL),
        ) {
            (Some(u), Some(d)) => (u, d),
            _ => continue,
        };
        let near = (up - a).norm().max((down - a).norm()) <= (2.0 * gap_before).max(1e-3);
        if (up - down).norm() <= DEDUP_TOL || !near {
            continue;
        }
        if (up - down.conj()).norm() < 1e-6 {
            // conjugate pair: the step crossed the exceptional point
            return Some(if up.im >= 0.0 { (up, down) } else { (down, up) });
        }
        if is_real_pair((up, down)) {
            // distinct real roots recovered; keep the labels continuous
            let direct = (up - seeds.0).norm() + (down - seeds.1).norm();
            let crossed = (up - seeds.1).norm() + (down - seeds.0).norm();
            return Some(if direct <= crossed { (up, down) } else { (down, up) });
        }
    }
    if gap_before <= 1e-3 {
        // degenerate double root right at the exceptional point
        Some((a, a))
    } else {
        None
    }
}

fn is_real_pair(pair: (Complex64, Complex64)) -> bool {
    let real = |k: Complex64| k.im.abs() < 1e-9 * k.re.abs().max(1e-9);
    real(pair.0) && real(pair.1)
}

/// Continue two reflectionless eigenvalues of `spec0 + eps * perturbation`
/// across `eps_grid` (which must be increasing; it may start at 0). Reports
/// the first epsilon where the pair coalesces. Continuation failures are
/// retried with up to 8 grid halvings, then the trace is returned truncated.
pub fn trace_exceptional_point(
    spec0: &StructureSpec,
    perturbation: &Perturbation,
    seeds: (Complex64, Complex64),
    eps_grid: &[f64],
) -> Result<EpTrace, ModesError> {
    if !perturbation.is_mirror_symmetric() || !spec0.cell().is_mirror_symmetric() {
        return Err(ModesError::AsymmetricPerturbation);
    }
    if eps_grid.is_empty() || eps_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModesError::BadEpsilonGrid);
    }
    let flat_at = |eps: f64| -> FlatStructure {
        spec0
            .overlay_perturbation(
                perturbation.deltas.clone(),
                perturbation.height_offsets.clone(),
                eps,
            )
            .expect("perturbation validated by the caller")
            .flatten()
    };

    let mut trace = EpTrace {
        epsilons: Vec::new(),
        k_a: Vec::new(),
        k_b: Vec::new(),
        coalescence_eps: None,
        lost_at: None,
    };
    let step_to = |from_eps: f64, from_pair: (Complex64, Complex64), to_eps: f64| {
        // step-halving continuation from one epsilon to another
        let mut pending: Vec<f64> = vec![to_eps];
        let mut halvings = 0;
        let mut current = from_pair;
        let mut reached = from_eps;
        loop {
            match pending.pop() {
                None => return Some(current),
                Some(e) => match continue_pair(&flat_at(e), current) {
                    Some(next) => {
                        current = next;
                        reached = e;
                    }
                    None => {
                        if halvings >= MAX_HALVINGS {
                            return None;
                        }
                        halvings += 1;
                        pending.push(e);
                        pending.push(0.5 * (reached + e));
                    }
                },
            }
        }
    };
    // the gap closes like sqrt(eps* - eps), so grid stepping jumps across
    // the exceptional point; once the pair turns complex, bisect in epsilon
    // from the last real pair to localize the coalescence
    let refine_coalescence =
        |lo0: f64, lo_pair0: (Complex64, Complex64), hi0: f64| -> f64 {
            let (mut lo, mut lo_pair, mut hi) = (lo0, lo_pair0, hi0);
            for _ in 0..60 {
                if (lo_pair.0 - lo_pair.1).norm() < COALESCENCE_GAP || hi - lo < 1e-12 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                match step_to(lo, lo_pair, mid) {
                    Some(p) if is_real_pair(p) && (p.0 - p.1).norm() > COALESCENCE_GAP => {
                        lo = mid;
                        lo_pair = p;
                    }
                    _ => hi = mid,
                }
            }
            0.5 * (lo + hi)
        };

    let mut pair = seeds;
    let mut prev_eps = 0.0;
    for &eps in eps_grid {
        let next = match step_to(prev_eps, pair, eps) {
            Some(p) => p,
            None => {
                trace.lost_at = Some(eps);
                break;
            }
        };
        if trace.coalescence_eps.is_none() {
            let gap = (next.0 - next.1).norm();
            if gap < COALESCENCE_GAP {
                trace.coalescence_eps = Some(eps);
            } else if is_real_pair(pair) && !is_real_pair(next) {
                trace.coalescence_eps = Some(refine_coalescence(prev_eps, pair, eps));
            }
        }
        pair = next;
        prev_eps = eps;
        trace.epsilons.push(eps);
        trace.k_a.push(pair.0);
        trace.k_b.push(pair.1);
    }
    Ok(trace)
}
