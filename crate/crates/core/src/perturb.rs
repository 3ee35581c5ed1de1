//! First-order perturbation engine and inverse design.
//!
//! The first-order shift of a resonance frequency under a perturbation of the
//! potential is an overlap quotient: the integral of the perturbation against
//! psi^2 over a boundary-plus-volume denominator. With the symmetrizing
//! incident phase the denominator is real, so a resonance survives to first
//! order iff the weighted sum of Re(psi) Im(psi) at the scatterer positions
//! vanishes; that zero condition is the linear system solved here.

use num_complex::Complex64;
use thiserror::Error;

use crate::field::{overlap_integrals, solve_field, symmetrizing_amplitude, FieldError, Side};
use crate::potential::{DiracScatterer, Perturbation, StructureSpec};
use crate::roots::{golden_min, lsq_slope};
use crate::transfer::{cell_traveling_matrix, half_cell_traveling_matrix, reflection, PtrRecord};

/// |Im k1| below this multiple of k0 counts as first-order protected;
/// separates exact zeros of the design condition from incidental smallness.
pub const PROTECT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("base structure must be unperturbed (epsilon = 0)")]
    PerturbedBase,
    #[error("perturbation invalid: {0}")]
    Overlay(#[from] crate::potential::PotentialError),
    #[error("{0}")]
    Field(#[from] FieldError),
    #[error("shift denominator magnitude {0} is numerically degenerate")]
    DegenerateDenominator(f64),
    #[error("design needs at least one fixed strength; the condition is homogeneous and fixes only ratios")]
    NoFixedStrength,
    #[error("design system is not square: {free} free strengths for {targets} target resonances")]
    NotSquare { free: usize, targets: usize },
    #[error("position {index} has Re(psi) Im(psi) below 1e-10 of the row maximum for every target (accidental zero); move it")]
    AccidentalZeroPosition { index: usize },
    #[error("design system is singular or ill-conditioned (condition number {0:.3e}); move the positions")]
    IllConditioned(f64),
    #[error("duplicate or invalid fixed index {0}")]
    BadFixedIndex(usize),
    #[error("analytic product needs a mirror-symmetric unit cell")]
    MirrorRequired,
    #[error("cell index {p} outside {lo}..={hi}")]
    BadCellIndex { p: usize, lo: usize, hi: usize },
    #[error("position {0} does not sit on a cell {1} of the structure")]
    NotOnLattice(f64, &'static str),
    #[error("epsilon grid must be non-empty, positive and strictly increasing")]
    BadEpsilonGrid,
    #[error("tracked resonance number {0} not present in the record list")]
    UnknownResonance(usize),
}

/// First-order frequency shift of one resonance: k = k0 + eps k1 + O(eps^2).
#[derive(Debug, Clone, Copy)]
pub struct ShiftResult {
    pub n: usize,
    pub k0: f64,
    pub k1: Complex64,
    pub protected: bool,
}

fn symmetrized_field(spec0: &StructureSpec, ptr: &PtrRecord) -> crate::field::WaveField {
    let amp = symmetrizing_amplitude(ptr.k, spec0.total_length(), ptr.n);
    solve_field(spec0, ptr.k, Side::Left, amp)
}

/// Evaluate the first-order shift of `ptr` under the unit-strength
/// perturbation (the stored scatterer strengths and height offsets are the
/// coefficient of epsilon).
pub fn first_order_shift(
    spec0: &StructureSpec,
    ptr: &PtrRecord,
    perturbation: &Perturbation,
) -> Result<ShiftResult, PerturbError> {
    if spec0.epsilon() != 0.0 && !spec0.perturbation().is_empty() {
        return Err(PerturbError::PerturbedBase);
    }
    // reuse the overlay validation (positions in range, offset count)
    let _ = spec0.overlay_perturbation(
        perturbation.deltas.clone(),
        perturbation.height_offsets.clone(),
        0.0,
    )?;

    let field = symmetrized_field(spec0, ptr);
    let positions: Vec<f64> = perturbation.deltas.iter().map(|d| d.position).collect();
    let overlap = overlap_integrals(&field, &positions)?;

    let mut numerator = Complex64::default();
    for (d, psi_sq) in perturbation.deltas.iter().zip(&overlap.psi_sq_at) {
        numerator += d.strength * psi_sq;
    }
    if let Some(offsets) = &perturbation.height_offsets {
        let barriers = spec0.flatten().barriers;
        for (off, (a, b)) in offsets.iter().zip(&barriers) {
            if *off != 0.0 {
                numerator += *off * field.psi_sq_integral_over(*a, *b);
            }
        }
    }

    let denominator = overlap.boundary_term + 2.0 * ptr.k * overlap.psi_sq_integral;
    if denominator.norm() < 1e-12 {
        return Err(PerturbError::DegenerateDenominator(denominator.norm()));
    }
    let k1 = numerator / denominator;
    Ok(ShiftResult {
        n: ptr.n,
        k0: ptr.k,
        k1,
        protected: k1.im.abs() < PROTECT_TOL * ptr.k,
    })
}

/// Shifts of a whole record list under one perturbation.
pub fn shift_table(
    spec0: &StructureSpec,
    ptrs: &[PtrRecord],
    perturbation: &Perturbation,
) -> Result<Vec<ShiftResult>, PerturbError> {
    ptrs.iter()
        .map(|p| first_order_shift(spec0, p, perturbation))
        .collect()
}

/// Inverse-design problem: scatterers at fixed positions, some strengths
/// pinned, the rest solved so the target resonances stay protected to first
/// order. Squareness (free strengths = targets) is required.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub spec0: StructureSpec,
    /// Records of the resonances to protect.
    pub targets: Vec<PtrRecord>,
    /// Scatterer positions, global coordinates.
    pub positions: Vec<f64>,
    /// (position index, strength) pairs pinned by the caller.
    pub fixed: Vec<(usize, f64)>,
}

/// Solved design: the full strength vector plus diagnostics.
#[derive(Debug, Clone)]
pub struct DesignResult {
    pub positions: Vec<f64>,
    pub strengths: Vec<f64>,
    /// |sum_m c_m Re(psi) Im(psi)(x_m)| per target.
    pub residuals: Vec<f64>,
    pub condition_number: f64,
}

impl DesignResult {
    pub fn scatterers(&self) -> Vec<DiracScatterer> {
        self.positions
            .iter()
            .zip(&self.strengths)
            .map(|(&position, &strength)| DiracScatterer { position, strength })
            .collect()
    }

    pub fn as_perturbation(&self) -> Perturbation {
        Perturbation {
            deltas: self.scatterers(),
            height_offsets: None,
        }
    }
}

/// Gaussian elimination with partial pivoting; returns (solution, inverse).
fn solve_with_inverse(a: &[Vec<f64>], rhs: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.len();
    // augmented [A | rhs | I]
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.push(rhs[i]);
            for j in 0..n {
                row.push(if i == j { 1.0 } else { 0.0 });
            }
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        let diag = m[col][col];
        for j in col..(2 * n + 1) {
            m[col][j] /= diag;
        }
        for i in 0..n {
            if i != col && m[i][col] != 0.0 {
                let factor = m[i][col];
                for j in col..(2 * n + 1) {
                    m[i][j] -= factor * m[col][j];
                }
            }
        }
    }
    let solution = (0..n).map(|i| m[i][n]).collect();
    let inverse = (0..n)
        .map(|i| (0..n).map(|j| m[i][n + 1 + j]).collect())
        .collect();
    Some((solution, inverse))
}

fn norm_1(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|j| (0..n).map(|i| a[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve the protection system: for every target n,
/// sum_m c_m Re(psi_n) Im(psi_n)(x_m) = 0, with the fixed strengths moved to
/// the right-hand side.
pub fn design_strengths(problem: &DesignProblem) -> Result<DesignResult, PerturbError> {
    let m_total = problem.positions.len();
    if problem.fixed.is_empty() {
        return Err(PerturbError::NoFixedStrength);
    }
    let mut fixed_idx: Vec<usize> = problem.fixed.iter().map(|(i, _)| *i).collect();
    fixed_idx.sort_unstable();
    fixed_idx.dedup();
    if fixed_idx.len() != problem.fixed.len() || fixed_idx.iter().any(|&i| i >= m_total) {
        return Err(PerturbError::BadFixedIndex(
            *fixed_idx.iter().find(|&&i| i >= m_total).unwrap_or(&0),
        ));
    }
    let free: Vec<usize> = (0..m_total).filter(|i| !fixed_idx.contains(i)).collect();
    if free.len() != problem.targets.len() {
        return Err(PerturbError::NotSquare {
            free: free.len(),
            targets: problem.targets.len(),
        });
    }

    // product rows: P[t][m] = Re(psi_t) Im(psi_t) at x_m
    let mut products: Vec<Vec<f64>> = Vec::with_capacity(problem.targets.len());
    for ptr in &problem.targets {
        let field = symmetrized_field(&problem.spec0, ptr);
        let row = problem
            .positions
            .iter()
            .map(|&x| field.value(x).map(|v| v.re * v.im))
            .collect::<Result<Vec<_>, _>>()?;
        products.push(row);
    }

    // a position negligible in every row cannot carry design weight
    for m in 0..m_total {
        let negligible = products.iter().all(|row| {
            let max = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            row[m].abs() < 1e-10 * max
        });
        if negligible {
            return Err(PerturbError::AccidentalZeroPosition { index: m });
        }
    }

    let q = free.len();
    let a: Vec<Vec<f64>> = (0..q)
        .map(|t| free.iter().map(|&m| products[t][m]).collect())
        .collect();
    let rhs: Vec<f64> = (0..q)
        .map(|t| {
            -problem
                .fixed
                .iter()
                .map(|(m, c)| c * products[t][*m])
                .sum::<f64>()
        })
        .collect();

    let (solution, inverse) =
        solve_with_inverse(&a, &rhs).ok_or(PerturbError::IllConditioned(f64::INFINITY))?;
    let condition_number = if q == 0 {
        1.0
    } else {
        norm_1(&a) * norm_1(&inverse)
    };
    if !condition_number.is_finite() || condition_number > 1e12 {
        return Err(PerturbError::IllConditioned(condition_number));
    }

    let mut strengths = vec![0.0; m_total];
    for (m, c) in &problem.fixed {
        strengths[*m] = *c;
    }
    for (j, &m) in free.iter().enumerate() {
        strengths[m] = solution[j];
    }
    let residuals: Vec<f64> = products
        .iter()
        .map(|row| {
            row.iter()
                .zip(&strengths)
                .map(|(p, c)| p * c)
                .sum::<f64>()
                .abs()
        })
        .collect();

    Ok(DesignResult {
        positions: problem.positions.clone(),
        strengths,
        residuals,
        condition_number,
    })
}

/// Where the designed scatterers sit relative to the cell lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Centers,
    Edges,
}

fn parity_sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Re(psi) Im(psi) of the symmetrized resonance field from direct
/// propagation; reference route for the analytic product formulas.
pub fn field_product_at(
    spec0: &StructureSpec,
    ptr: &PtrRecord,
    x: f64,
) -> Result<f64, PerturbError> {
    let field = symmetrized_field(spec0, ptr);
    let v = field.value(x)?;
    Ok(v.re * v.im)
}

/// Analytic Re(psi) Im(psi) at the center of cell p (1-based):
/// sign(n) * f(phi_n) * [sin^2((N-p) phi_n) - sin^2((p-1) phi_n)] with
/// f = Re(w) Im(w) / sin^2((N-1) phi_n) and w the wave value at the first
/// cell center from the half-cell matrix.
pub fn center_product(
    spec0: &StructureSpec,
    ptr: &PtrRecord,
    p: usize,
) -> Result<f64, PerturbError> {
    let cell = spec0.cell();
    let n_cells = spec0.n_cells();
    if !cell.is_mirror_symmetric() {
        return Err(PerturbError::MirrorRequired);
    }
    if p < 1 || p > n_cells {
        return Err(PerturbError::BadCellIndex {
            p,
            lo: 1,
            hi: n_cells,
        });
    }
    let phi = ptr.n as f64 * std::f64::consts::PI / n_cells as f64;
    let sin_edge = ((n_cells - 1) as f64 * phi).sin();
    if sin_edge.abs() < 1e-12 {
        // cannot happen for n in 1..N-1; fall back to direct propagation
        return field_product_at(spec0, ptr, spec0.cell_centers()[p - 1]);
    }
    let half = half_cell_traveling_matrix(cell, Complex64::new(ptr.k, 0.0));
    let w = half.m11 + half.m21;
    let f = w.re * w.im / (sin_edge * sin_edge);
    let sa = ((n_cells - p) as f64 * phi).sin();
    let sb = ((p - 1) as f64 * phi).sin();
    let g = sa * sa - sb * sb;
    Ok(parity_sign(ptr.n) * f * g)
}

/// Analytic Re(psi) Im(psi) at cell edge b_p (p = 0..N):
/// sign(n) * (1/2) (1+lambda)/(1-lambda) * sin(2 p phi_n), lambda being the
/// real eigenvector ratio of the unit-cell matrix.
pub fn edge_product(
    spec0: &StructureSpec,
    ptr: &PtrRecord,
    p: usize,
) -> Result<f64, PerturbError> {
    let cell = spec0.cell();
    let n_cells = spec0.n_cells();
    if !cell.is_mirror_symmetric() {
        return Err(PerturbError::MirrorRequired);
    }
    if p > n_cells {
        return Err(PerturbError::BadCellIndex {
            p,
            lo: 0,
            hi: n_cells,
        });
    }
    let phi = ptr.n as f64 * std::f64::consts::PI / n_cells as f64;
    let m = cell_traveling_matrix(cell, Complex64::new(ptr.k, 0.0));
    let bloch = Complex64::new(0.0, phi).exp();
    // eigenvector ratio from whichever relation is better conditioned
    let den1 = m.m12;
    let den2 = bloch - m.m22;
    let lambda = if den1.norm() >= den2.norm() {
        (bloch - m.m11) / den1
    } else {
        m.m21 / den2
    };
    let lambda = lambda.re; // real for mirror-symmetric cells
    if (1.0 - lambda).abs() < 1e-12 {
        return field_product_at(spec0, ptr, spec0.cell_edges()[p]);
    }
    let f = 0.5 * (1.0 + lambda) / (1.0 - lambda);
    let g = (2.0 * p as f64 * phi).sin();
    Ok(parity_sign(ptr.n) * f * g)
}

/// One row of the pairing report.
#[derive(Debug, Clone, Copy)]
pub struct PairingRow {
    pub n: usize,
    pub k0: f64,
    pub k1: Complex64,
    pub protected: bool,
    /// Whether the placement theorems require this resonance protected.
    pub expected: bool,
}

#[derive(Debug, Clone)]
pub struct PairingReport {
    pub rows: Vec<PairingRow>,
    pub expected_protected: Vec<usize>,
    /// All theorem-required resonances came out protected.
    pub satisfied: bool,
}

fn lattice_index(x: f64, lattice: &[f64]) -> Option<usize> {
    lattice
        .iter()
        .position(|&v| (v - x).abs() <= 1e-9)
}

/// Compute first-order shifts of every resonance in `ptrs` under the design
/// and check the duality set implied by the placement: protecting n at cell
/// centers or edges also protects N - n; same-parity edges of an even-N
/// structure extend the set by N/2 +- n.
pub fn pairing_check(
    spec0: &StructureSpec,
    placement: Placement,
    design: &DesignResult,
    ptrs: &[PtrRecord],
    n: usize,
) -> Result<PairingReport, PerturbError> {
    let n_cells = spec0.n_cells();
    let lattice = match placement {
        Placement::Centers => spec0.cell_centers(),
        Placement::Edges => spec0.cell_edges(),
    };
    let mut indices = Vec::with_capacity(design.positions.len());
    for &x in &design.positions {
        let idx = lattice_index(x, &lattice).ok_or(PerturbError::NotOnLattice(
            x,
            match placement {
                Placement::Centers => "center",
                Placement::Edges => "edge",
            },
        ))?;
        indices.push(idx);
    }

    let mut expected: Vec<usize> = vec![n];
    if n_cells > n && n_cells - n != n {
        expected.push(n_cells - n);
    }
    if placement == Placement::Edges && n_cells % 2 == 0 {
        // edge index p equals the lattice position for cell_edges()
        let same_parity = indices.windows(2).all(|w| (w[0] % 2) == (w[1] % 2));
        if same_parity {
            let half = n_cells / 2;
            for cand in [half.checked_sub(n), half.checked_add(n)] {
                if let Some(m) = cand {
                    if m >= 1 && m <= n_cells - 1 && !expected.contains(&m) {
                        expected.push(m);
                    }
                }
            }
        }
    }
    expected.sort_unstable();

    let pert = design.as_perturbation();
    let mut rows = Vec::with_capacity(ptrs.len());
    for rec in ptrs {
        let shift = first_order_shift(spec0, rec, &pert)?;
        rows.push(PairingRow {
            n: rec.n,
            k0: rec.k,
            k1: shift.k1,
            protected: shift.protected,
            expected: expected.contains(&rec.n),
        });
    }
    let satisfied = rows
        .iter()
        .filter(|r| r.expected)
        .all(|r| r.k1.im.abs() < 1e-10);
    Ok(PairingReport {
        rows,
        expected_protected: expected,
        satisfied,
    })
}

/// Transmission of one tracked peak against the perturbation scale.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    pub peak_k: Vec<f64>,
    pub peak_t: Vec<f64>,
    /// Log-log slope of 1 - T against epsilon over 1e-12 < 1 - T < 0.1.
    pub fitted_slope: Option<f64>,
    /// First epsilon at which the tracked peak was lost, if any; entries
    /// stop just before it.
    pub truncated_at: Option<f64>,
}

/// Rescale the perturbation over `eps_grid` and follow the transmission peak
/// continuously connected to `tracked_n`, by local minimization of the
/// reflection within half the unperturbed resonance spacing of the previous
/// peak.
pub fn epsilon_sweep(
    spec0: &StructureSpec,
    perturbation: &Perturbation,
    ptrs: &[PtrRecord],
    tracked_n: usize,
    eps_grid: &[f64],
) -> Result<SweepResult, PerturbError> {
    if eps_grid.is_empty()
        || eps_grid[0] <= 0.0
        || eps_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(PerturbError::BadEpsilonGrid);
    }
    let tracked = ptrs
        .iter()
        .find(|r| r.n == tracked_n)
        .ok_or(PerturbError::UnknownResonance(tracked_n))?;
    let spacing = ptrs
        .iter()
        .filter(|r| r.n != tracked_n)
        .map(|r| (r.k - tracked.k).abs())
        .fold(f64::INFINITY, f64::min);
    let window = if spacing.is_finite() {
        spacing / 2.0
    } else {
        0.1 * tracked.k
    };

    let mut out = SweepResult {
        epsilons: Vec::new(),
        peak_k: Vec::new(),
        peak_t: Vec::new(),
        fitted_slope: None,
        truncated_at: None,
    };
    let mut prev_k = tracked.k;
    for &eps in eps_grid {
        let spec = spec0.overlay_perturbation(
            perturbation.deltas.clone(),
            perturbation.height_offsets.clone(),
            eps,
        )?;
        let flat = spec.flatten();
        let (lo, hi) = (prev_k - window, prev_k + window);
        let (k_peak, r_min) = golden_min(|k| reflection(&flat, k), lo, hi, 1e-10);
        // a minimum pinned to the window edge means the peak escaped or merged
        let edge = 1e-7 * window.max(1.0);
        if (k_peak - lo).abs() < edge || (k_peak - hi).abs() < edge {
            out.truncated_at = Some(eps);
            break;
        }
        out.epsilons.push(eps);
        out.peak_k.push(k_peak);
        out.peak_t.push(1.0 - r_min);
        prev_k = k_peak;
    }

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (eps, t) in out.epsilons.iter().zip(&out.peak_t) {
        let loss = 1.0 - t;
        if loss > 1e-12 && loss < 0.1 {
            xs.push(eps.ln());
            ys.push(loss.ln());
        }
    }
    if xs.len() >= 2 {
        out.fitted_slope = Some(lsq_slope(&xs, &ys));
    }
    Ok(out)
}
