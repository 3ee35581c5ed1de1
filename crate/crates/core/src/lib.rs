//! 1D scattering through finite periodic potentials built from
//! mirror-symmetric cells: transfer matrices, perfect transmission
//! resonances (PTRs), wave fields, first-order perturbation design that
//! protects chosen resonances under asymmetric point scatterers, and the
//! reflectionless-mode eigenproblem with its PT structure.

pub mod field;
pub mod modes;
pub mod perturb;
pub mod potential;
pub mod roots;
mod special;
pub mod transfer;

pub use field::{
    overlap_integrals, solve_field, symmetrizing_amplitude, FieldError, FieldSample, OverlapIntegrals,
    Side, WaveField,
};
pub use modes::{
    pt_pair_check, reflectionless_modes, trace_exceptional_point, EpTrace, ModeScan, ModesError,
    PtReport, ReflectionlessMode,
};
pub use perturb::{
    center_product, design_strengths, edge_product, epsilon_sweep, first_order_shift,
    pairing_check, shift_table, DesignProblem, DesignResult, PairingReport, PerturbError,
    Placement, ShiftResult, SweepResult,
};
pub use potential::{
    build_periodic, DiracScatterer, Perturbation, PotentialError, SchemaError, Segment,
    StructureJson, StructureSpec, UnitCell,
};
pub use transfer::{
    bloch_phase, cell_matrix, chebyshev_power, delta_matrix, detect_bands, find_ptrs,
    reflection, segment_matrix, transmission, transmission_n_cells, Band, Basis, BlochPhase,
    PtrRecord, PtrScan, ScatteringCoefficients, TransferError, TransferMatrix,
};
