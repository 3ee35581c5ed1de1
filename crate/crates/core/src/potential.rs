//! Piecewise-constant scattering structures with point scatterers.
//!
//! A structure is a mirror-symmetric (or not) unit cell of length d repeated
//! N times, optionally overlaid with a perturbation made of Dirac scatterers
//! and per-barrier height offsets, all scaled by a common factor epsilon.
//! Everything here is immutable after construction; lengths are in units of
//! d, scatterer strengths in 1/d, heights in 1/d^2.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Geometric comparisons (mirror symmetry, junction snapping) use this
/// absolute tolerance. Structures are built symbolically, so it is not
/// load-bearing for exact setups.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("segment length must be strictly positive, got {0}")]
    NonPositiveLength(f64),
    #[error("segment height must be finite, got {0}")]
    NonFiniteHeight(f64),
    #[error("unit cell needs at least one segment")]
    EmptyCell,
    #[error("cell scatterer at {0} lies outside [-d/2, d/2] = [{1}, {2}]")]
    CellScattererOutside(f64, f64, f64),
    #[error("structure needs at least one cell")]
    ZeroCells,
    #[error("scatterer position {0} lies outside the scattering region [{1}, {2}]")]
    ScattererOutside(f64, f64, f64),
    #[error("{got} height offsets supplied but the structure has {expected} barriers")]
    OffsetCountMismatch { got: usize, expected: usize },
    #[error("epsilon must be finite and non-negative, got {0}")]
    BadEpsilon(f64),
    #[error("scatterer strength must be finite, got {0}")]
    NonFiniteStrength(f64),
}

/// One constant-potential slab.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length: f64,
    pub height: f64,
}

impl Segment {
    pub fn new(length: f64, height: f64) -> Result<Self, PotentialError> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(PotentialError::NonPositiveLength(length));
        }
        if !height.is_finite() {
            return Err(PotentialError::NonFiniteHeight(height));
        }
        Ok(Segment { length, height })
    }
}

/// Zero-width scatterer c delta(x - position): psi stays continuous while
/// psi' jumps by c psi(position).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracScatterer {
    pub position: f64,
    pub strength: f64,
}

impl DiracScatterer {
    pub fn new(position: f64, strength: f64) -> Result<Self, PotentialError> {
        if !strength.is_finite() {
            return Err(PotentialError::NonFiniteStrength(strength));
        }
        Ok(DiracScatterer { position, strength })
    }
}

/// The repeated building block. Scatterer positions are cell-local,
/// measured from the cell center, in [-d/2, d/2].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCell {
    segments: Vec<Segment>,
    deltas: Vec<DiracScatterer>,
    period: f64,
}

impl UnitCell {
    pub fn new(segments: Vec<Segment>, deltas: Vec<DiracScatterer>) -> Result<Self, PotentialError> {
        if segments.is_empty() {
            return Err(PotentialError::EmptyCell);
        }
        let period: f64 = segments.iter().map(|s| s.length).sum();
        for d in &deltas {
            if d.position < -period / 2.0 - GEOM_TOL || d.position > period / 2.0 + GEOM_TOL {
                return Err(PotentialError::CellScattererOutside(
                    d.position,
                    -period / 2.0,
                    period / 2.0,
                ));
            }
        }
        let mut deltas = deltas;
        deltas.sort_by(|a, b| a.position.total_cmp(&b.position));
        Ok(UnitCell {
            segments,
            deltas,
            period,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn deltas(&self) -> &[DiracScatterer] {
        &self.deltas
    }

    /// Cell length d (the sum of segment lengths).
    pub fn period(&self) -> f64 {
        self.period
    }

    /// True when the cell is invariant under reflection about its center:
    /// the reversed segment sequence equals itself and the scatterers come
    /// in mirror pairs of equal strength.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.segments.len();
        for i in 0..n {
            let a = &self.segments[i];
            let b = &self.segments[n - 1 - i];
            if (a.length - b.length).abs() > GEOM_TOL || (a.height - b.height).abs() > GEOM_TOL {
                return false;
            }
        }
        // scatterers sorted by position: the mirror image reverses the order
        let m = self.deltas.len();
        for i in 0..m {
            let a = &self.deltas[i];
            let b = &self.deltas[m - 1 - i];
            if (a.position + b.position).abs() > GEOM_TOL
                || (a.strength - b.strength).abs() > GEOM_TOL
            {
                return false;
            }
        }
        true
    }

    /// Merge adjacent segments of equal height. Two cells describe the same
    /// potential iff their normalized forms are equal.
    pub fn normalized(&self) -> UnitCell {
        let mut segs: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            match segs.last_mut() {
                Some(last) if (last.height - s.height).abs() <= GEOM_TOL => {
                    last.length += s.length;
                }
                _ => segs.push(*s),
            }
        }
        UnitCell {
            segments: segs,
            deltas: self.deltas.clone(),
            period: self.period,
        }
    }

    /// Equality up to segment merging and the geometric tolerance.
    pub fn same_potential_as(&self, other: &UnitCell) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        if a.segments.len() != b.segments.len() || a.deltas.len() != b.deltas.len() {
            return false;
        }
        let segs_ok = a.segments.iter().zip(&b.segments).all(|(x, y)| {
            (x.length - y.length).abs() <= 10.0 * GEOM_TOL
                && (x.height - y.height).abs() <= 10.0 * GEOM_TOL
        });
        let deltas_ok = a.deltas.iter().zip(&b.deltas).all(|(x, y)| {
            (x.position - y.position).abs() <= 10.0 * GEOM_TOL
                && (x.strength - y.strength).abs() <= 10.0 * GEOM_TOL
        });
        segs_ok && deltas_ok
    }
}

/// Perturbation overlay: extra Dirac scatterers (global positions) plus
/// optional per-barrier height offsets, both multiplied by epsilon when the
/// structure is flattened.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Perturbation {
    pub deltas: Vec<DiracScatterer>,
    pub height_offsets: Option<Vec<f64>>,
}

impl Perturbation {
    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
            && self
                .height_offsets
                .as_ref()
                .map_or(true, |o| o.iter().all(|&v| v == 0.0))
    }

    /// Mirror symmetry of the overlay with respect to the structure center:
    /// scatterers come in (x, -x) pairs of equal strength and the offset
    /// list is palindromic.
    pub fn is_mirror_symmetric(&self) -> bool {
        let mut ds = self.deltas.clone();
        ds.sort_by(|a, b| a.position.total_cmp(&b.position));
        let m = ds.len();
        for i in 0..m {
            let a = &ds[i];
            let b = &ds[m - 1 - i];
            if (a.position + b.position).abs() > GEOM_TOL
                || (a.strength - b.strength).abs() > GEOM_TOL
            {
                return false;
            }
        }
        if let Some(offs) = &self.height_offsets {
            let m = offs.len();
            for i in 0..m {
                if (offs[i] - offs[m - 1 - i]).abs() > GEOM_TOL {
                    return false;
                }
            }
        }
        true
    }
}

/// A finite periodic structure, optionally perturbed. The total length
/// D = N d is kept symbolic (cell + count), never accumulated.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureSpec {
    cell: UnitCell,
    n_cells: usize,
    perturbation: Perturbation,
    epsilon: f64,
}

/// Build the unperturbed N-cell structure spanning [-D/2, D/2].
pub fn build_periodic(cell: UnitCell, n_cells: usize) -> Result<StructureSpec, PotentialError> {
    if n_cells == 0 {
        return Err(PotentialError::ZeroCells);
    }
    Ok(StructureSpec {
        cell,
        n_cells,
        perturbation: Perturbation::default(),
        epsilon: 0.0,
    })
}

impl StructureSpec {
    pub fn cell(&self) -> &UnitCell {
        &self.cell
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    /// Total length D = N d.
    pub fn total_length(&self) -> f64 {
        self.n_cells as f64 * self.cell.period()
    }

    /// Half length D/2; the structure occupies [-D/2, D/2].
    pub fn half_length(&self) -> f64 {
        self.total_length() / 2.0
    }

    /// Centers a_p = -D/2 + (p - 1/2) d, p = 1..N.
    pub fn cell_centers(&self) -> Vec<f64> {
        let d = self.cell.period();
        let half = self.half_length();
        (1..=self.n_cells)
            .map(|p| -half + (p as f64 - 0.5) * d)
            .collect()
    }

    /// Edges b_p = -D/2 + p d, p = 0..N (N + 1 values).
    pub fn cell_edges(&self) -> Vec<f64> {
        let d = self.cell.period();
        let half = self.half_length();
        (0..=self.n_cells).map(|p| -half + p as f64 * d).collect()
    }

    /// Left edge of cell p (1-based).
    pub fn cell_start(&self, p: usize) -> f64 {
        -self.half_length() + (p as f64 - 1.0) * self.cell.period()
    }

    /// Overlay a perturbation. Positions must lie inside [-D/2, D/2]; the
    /// offset list, when present, must have one entry per barrier of the
    /// unperturbed structure. Epsilon is stored, not baked in, so sweeps can
    /// rescale it later. Any previously attached perturbation is replaced.
    pub fn overlay_perturbation(
        &self,
        deltas: Vec<DiracScatterer>,
        height_offsets: Option<Vec<f64>>,
        epsilon: f64,
    ) -> Result<StructureSpec, PotentialError> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(PotentialError::BadEpsilon(epsilon));
        }
        let half = self.half_length();
        for d in &deltas {
            if d.position < -half - GEOM_TOL || d.position > half + GEOM_TOL {
                return Err(PotentialError::ScattererOutside(d.position, -half, half));
            }
        }
        if let Some(offs) = &height_offsets {
            let expected = self.barrier_count();
            if offs.len() != expected {
                return Err(PotentialError::OffsetCountMismatch {
                    got: offs.len(),
                    expected,
                });
            }
        }
        Ok(StructureSpec {
            cell: self.cell.clone(),
            n_cells: self.n_cells,
            perturbation: Perturbation {
                deltas,
                height_offsets,
            },
            epsilon,
        })
    }

    /// Same structure with a different perturbation scale.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<StructureSpec, PotentialError> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(PotentialError::BadEpsilon(epsilon));
        }
        let mut out = self.clone();
        out.epsilon = epsilon;
        Ok(out)
    }

    /// The unperturbed base (epsilon = 0, overlay dropped).
    pub fn base(&self) -> StructureSpec {
        StructureSpec {
            cell: self.cell.clone(),
            n_cells: self.n_cells,
            perturbation: Perturbation::default(),
            epsilon: 0.0,
        }
    }

    /// Number of barriers: maximal nonzero-height plateaus of the
    /// unperturbed flattened structure, left to right. Height offsets are
    /// indexed against this count.
    pub fn barrier_count(&self) -> usize {
        self.base().flatten().barriers.len()
    }

    /// True when the full structure, perturbation included, is invariant
    /// under x -> -x.
    pub fn is_mirror_symmetric(&self) -> bool {
        let base_ok = self.cell.is_mirror_symmetric();
        if self.epsilon == 0.0 || self.perturbation.is_empty() {
            return base_ok;
        }
        base_ok && self.perturbation.is_mirror_symmetric()
    }

    /// Potential value at x (the piecewise-constant part; point scatterers
    /// carry no evaluatable height). Outside [-D/2, D/2] the potential is 0.
    pub fn evaluate(&self, x: f64) -> f64 {
        let flat = self.flatten();
        if x < -flat.half_length || x > flat.half_length {
            return 0.0;
        }
        for seg in &flat.segments {
            if x <= seg.end || seg.end == flat.half_length {
                return seg.height;
            }
        }
        0.0
    }

    /// Flatten to the ordered element walk used by the transfer-matrix and
    /// field engines: contiguous constant segments (heights include the
    /// epsilon-scaled offsets, adjacent equal heights merged) interleaved
    /// with effective point scatterers (cell scatterers at full strength,
    /// overlay scatterers scaled by epsilon, coincident ones coalesced).
    pub fn flatten(&self) -> FlatStructure {
        let d = self.cell.period();
        let half = self.half_length();
        let eps = self.epsilon;

        // walk the cells: raw segments with symbolic start positions
        let mut raw: Vec<FlatSegment> = Vec::new();
        let mut deltas: Vec<FlatDelta> = Vec::new();
        for p in 1..=self.n_cells {
            let cell_start = -half + (p as f64 - 1.0) * d;
            let mut offset = 0.0;
            for seg in &self.cell.segments {
                raw.push(FlatSegment {
                    start: cell_start + offset,
                    end: cell_start + offset + seg.length,
                    height: seg.height,
                });
                offset += seg.length;
            }
            if let Some(last) = raw.last_mut() {
                // kill the accumulated rounding on the cell boundary
                last.end = cell_start + d;
            }
            let center = cell_start + d / 2.0;
            for ds in &self.cell.deltas {
                deltas.push(FlatDelta {
                    position: center + ds.position,
                    strength: ds.strength,
                });
            }
        }
        if let Some(last) = raw.last_mut() {
            last.end = half;
        }

        // per-barrier height offsets on the *base* plateaus
        let mut barrier_of_raw: Vec<Option<usize>> = Vec::with_capacity(raw.len());
        let mut barrier_index = 0usize;
        let mut prev_height: Option<f64> = None;
        for seg in &raw {
            if seg.height != 0.0 {
                let same_plateau = matches!(prev_height, Some(h) if (h - seg.height).abs() <= GEOM_TOL);
                if !same_plateau {
                    barrier_index += 1;
                }
                barrier_of_raw.push(Some(barrier_index - 1));
            } else {
                barrier_of_raw.push(None);
            }
            prev_height = Some(seg.height);
        }
        let n_barriers = barrier_index;
        if let Some(offs) = &self.perturbation.height_offsets {
            // length validated at overlay time; recheck defensively
            if offs.len() == n_barriers && eps != 0.0 {
                for (seg, b) in raw.iter_mut().zip(&barrier_of_raw) {
                    if let Some(bi) = b {
                        seg.height += eps * offs[*bi];
                    }
                }
            }
        }

        if eps != 0.0 {
            for ds in &self.perturbation.deltas {
                if ds.strength != 0.0 {
                    deltas.push(FlatDelta {
                        position: ds.position,
                        strength: eps * ds.strength,
                    });
                }
            }
        }

        // merge adjacent equal heights
        let mut segments: Vec<FlatSegment> = Vec::with_capacity(raw.len());
        for seg in raw {
            match segments.last_mut() {
                Some(last) if (last.height - seg.height).abs() <= GEOM_TOL => {
                    last.end = seg.end;
                }
                _ => segments.push(seg),
            }
        }

        // coalesce coincident scatterers, then split segments so every
        // scatterer sits on a junction; one exactly on an existing junction
        // is attributed to that junction (a single jump condition)
        deltas.sort_by(|a, b| a.position.total_cmp(&b.position));
        let mut merged: Vec<FlatDelta> = Vec::with_capacity(deltas.len());
        for ds in deltas {
            match merged.last_mut() {
                Some(last) if (last.position - ds.position).abs() <= GEOM_TOL => {
                    last.strength += ds.strength;
                }
                _ => merged.push(ds),
            }
        }
        let mut split: Vec<FlatSegment> = Vec::with_capacity(segments.len() + merged.len());
        for seg in segments {
            let mut cursor = seg.start;
            for ds in &merged {
                if ds.position > cursor + GEOM_TOL && ds.position < seg.end - GEOM_TOL {
                    split.push(FlatSegment {
                        start: cursor,
                        end: ds.position,
                        height: seg.height,
                    });
                    cursor = ds.position;
                }
            }
            split.push(FlatSegment {
                start: cursor,
                end: seg.end,
                height: seg.height,
            });
        }

        // barrier windows in the final geometry (for overlap integrals)
        let mut barriers: Vec<(f64, f64)> = Vec::new();
        {
            let base = if eps != 0.0 && self.perturbation.height_offsets.is_some() {
                // geometry is epsilon-independent; recompute plateaus from
                // the unperturbed heights
                self.base().flatten().barriers
            } else {
                let mut out: Vec<(f64, f64)> = Vec::new();
                for seg in &split {
                    if seg.height != 0.0 {
                        match out.last_mut() {
                            Some(last) if (last.1 - seg.start).abs() <= GEOM_TOL => {
                                last.1 = seg.end;
                            }
                            _ => out.push((seg.start, seg.end)),
                        }
                    }
                }
                out
            };
            barriers.extend(base);
        }

        FlatStructure {
            half_length: half,
            segments: split,
            deltas: merged,
            barriers,
        }
    }
}

/// One constant piece of the flattened structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatSegment {
    pub start: f64,
    pub end: f64,
    pub height: f64,
}

impl FlatSegment {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Effective point scatterer of the flattened structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatDelta {
    pub position: f64,
    pub strength: f64,
}

/// Ordered, evaluable form of a structure: segments cover [-D/2, D/2]
/// contiguously; every scatterer position coincides with a segment junction
/// or an endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatStructure {
    pub half_length: f64,
    pub segments: Vec<FlatSegment>,
    pub deltas: Vec<FlatDelta>,
    /// Nonzero-height plateaus of the unperturbed structure, left to right.
    pub barriers: Vec<(f64, f64)>,
}

impl FlatStructure {
    /// Scatterer strength attached to the junction at x, if any.
    pub fn delta_at(&self, x: f64) -> Option<f64> {
        self.deltas
            .iter()
            .find(|d| (d.position - x).abs() <= GEOM_TOL)
            .map(|d| d.strength)
    }

    /// Slice the window [lo, hi] out of the structure as a unit cell with
    /// positions re-centered on the window midpoint.
    pub fn slice_cell(&self, lo: f64, hi: f64) -> Result<UnitCell, PotentialError> {
        let mid = 0.5 * (lo + hi);
        let mut segs: Vec<Segment> = Vec::new();
        for seg in &self.segments {
            let a = seg.start.max(lo);
            let b = seg.end.min(hi);
            if b - a > GEOM_TOL {
                segs.push(Segment::new(b - a, seg.height)?);
            }
        }
        let deltas = self
            .deltas
            .iter()
            .filter(|d| d.position > lo + GEOM_TOL && d.position < hi - GEOM_TOL)
            .map(|d| DiracScatterer {
                position: d.position - mid,
                strength: d.strength,
            })
            .collect();
        UnitCell::new(segs, deltas)
    }
}

// ---------------------------------------------------------------------------
// JSON schema consumed by the CLI
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("invalid structure JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("d must be strictly positive, got {0}")]
    BadPeriod(f64),
    #[error("N must be at least 1")]
    BadCellCount,
    #[error("cell segments sum to {got} but d = {d}")]
    PeriodMismatch { got: f64, d: f64 },
    #[error("{0}")]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StructureJson {
    pub d: f64,
    #[serde(rename = "N")]
    pub n: u32,
    pub cell: CellJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationJson>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CellJson {
    pub segments: Vec<SegmentJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<DeltaJson>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentJson {
    pub len: f64,
    pub height: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaJson {
    pub pos: f64,
    pub c: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationJson {
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<DeltaJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_offsets: Option<Vec<f64>>,
}

impl StructureJson {
    pub fn from_str(text: &str) -> Result<Self, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Validate and convert to the canonical d = 1 structure: positions are
    /// divided by d, heights multiplied by d^2, strengths by d. Frequencies
    /// computed from the result are in units of 1/d.
    pub fn to_spec(&self) -> Result<StructureSpec, SchemaError> {
        let d = self.d;
        if !(d > 0.0) || !d.is_finite() {
            return Err(SchemaError::BadPeriod(d));
        }
        if self.n == 0 {
            return Err(SchemaError::BadCellCount);
        }
        let sum: f64 = self.cell.segments.iter().map(|s| s.len).sum();
        if (sum - d).abs() > 1e-9 * d {
            return Err(SchemaError::PeriodMismatch { got: sum, d });
        }
        let segments = self
            .cell
            .segments
            .iter()
            .map(|s| Segment::new(s.len / d, s.height * d * d))
            .collect::<Result<Vec<_>, _>>()?;
        let cell_deltas = self
            .cell
            .deltas
            .iter()
            .map(|x| DiracScatterer::new(x.pos / d, x.c * d))
            .collect::<Result<Vec<_>, _>>()?;
        let cell = UnitCell::new(segments, cell_deltas)?;
        let spec = build_periodic(cell, self.n as usize)?;
        match &self.perturbation {
            None => Ok(spec),
            Some(p) => {
                let deltas = p
                    .deltas
                    .iter()
                    .map(|x| DiracScatterer::new(x.pos / d, x.c * d))
                    .collect::<Result<Vec<_>, _>>()?;
                let offsets = p
                    .height_offsets
                    .as_ref()
                    .map(|o| o.iter().map(|v| v * d * d).collect());
                Ok(spec.overlay_perturbation(deltas, offsets, p.epsilon)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_cell() -> UnitCell {
        // d = 1 cell: 5/12 free | 1/6 barrier of height 27 | 5/12 free
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

    #[test]
    fn free_cells_merge_to_one_segment() {
        let free = UnitCell::new(vec![Segment::new(1.0, 0.0).unwrap()], vec![]).unwrap();
        let spec = build_periodic(free, 8).unwrap();
        let flat = spec.flatten();
        assert_eq!(flat.segments.len(), 1);
        assert_eq!(flat.segments[0].length(), 8.0);
        assert_eq!(flat.segments[0].height, 0.0);
    }

    #[test]
    fn barrier_structure_has_expected_geometry() {
        let spec = build_periodic(rect_cell(), 8).unwrap();
        assert_eq!(spec.total_length(), 8.0);
        let flat = spec.flatten();
        // free 5/12 | 8 barriers separated by 5/6 gaps | free 5/12
        assert_eq!(flat.barriers.len(), 8);
        assert_eq!(flat.segments.len(), 17);
        assert!((27.0_f64.sqrt() - 5.196).abs() < 1e-3);
        // barrier 1 occupies [-D/2 + 5/12, -D/2 + 7/12]
        let (b0, b1) = flat.barriers[0];
        assert!((b0 - (-4.0 + 5.0 / 12.0)).abs() < 1e-12);
        assert!((b1 - (-4.0 + 7.0 / 12.0)).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_cell_is_detected() {
        let cell = UnitCell::new(
            vec![
                Segment::new(1.0 / 6.0, 27.0).unwrap(),
                Segment::new(5.0 / 6.0, 0.0).unwrap(),
            ],
            vec![],
        )
        .unwrap();
        assert!(!cell.is_mirror_symmetric());
        let spec = build_periodic(cell.clone(), 4).unwrap();
        assert!(!spec.is_mirror_symmetric());
        assert_eq!(spec.is_mirror_symmetric(), cell.is_mirror_symmetric());
    }

    #[test]
    fn rejects_zero_cells() {
        assert!(build_periodic(rect_cell(), 0).is_err());
    }

    #[test]
    fn centers_and_edges() {
        let spec = build_periodic(rect_cell(), 8).unwrap();
        let centers = spec.cell_centers();
        assert_eq!(centers.len(), 8);
        assert_eq!(centers[0], -3.5);
        assert_eq!(centers[7], 3.5);
        let edges = spec.cell_edges();
        assert_eq!(edges.len(), 9);
        assert_eq!(edges[0], -4.0);
        assert_eq!(edges[8], 4.0);

        let single = build_periodic(
            UnitCell::new(vec![Segment::new(2.0, 0.0).unwrap()], vec![]).unwrap(),
            1,
        )
        .unwrap();
        assert_eq!(single.cell_centers(), vec![0.0]);

        let two = build_periodic(
            UnitCell::new(vec![Segment::new(1.0, 0.0).unwrap()], vec![]).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(two.cell_centers(), vec![-0.5, 0.5]);

        let half = build_periodic(
            UnitCell::new(vec![Segment::new(0.5, 1.0).unwrap()], vec![]).unwrap(),
            4,
        )
        .unwrap();
        assert_eq!(half.cell_edges(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn overlay_validates_and_stores_epsilon() {
        let base = build_periodic(rect_cell(), 8).unwrap();
        let offs = vec![-27.0, 0.0, -72.0, 27.0, 27.0, -72.0, 0.0, -27.0];
        let spec = base
            .overlay_perturbation(vec![], Some(offs.clone()), 0.1)
            .unwrap();
        assert_eq!(spec.epsilon(), 0.1);
        assert!(spec.is_mirror_symmetric());
        // third barrier height perturbed to 27 - 7.2
        let flat = spec.flatten();
        let heights: Vec<f64> = flat
            .segments
            .iter()
            .filter(|s| s.height != 0.0)
            .map(|s| s.height)
            .collect();
        assert_eq!(heights.len(), 8);
        assert!((heights[2] - (27.0 - 7.2)).abs() < 1e-12);

        // wrong offset count
        assert!(base
            .overlay_perturbation(vec![], Some(vec![1.0, 2.0]), 0.1)
            .is_err());
        // out-of-region scatterer
        assert!(base
            .overlay_perturbation(
                vec![DiracScatterer::new(5.0, 1.0).unwrap()],
                None,
                0.1
            )
            .is_err());
    }

    #[test]
    fn zero_epsilon_overlay_is_identity_on_values() {
        let base = build_periodic(rect_cell(), 8).unwrap();
        let spec = base
            .overlay_perturbation(
                vec![DiracScatterer::new(0.3, 4.8).unwrap()],
                Some(vec![1.0; 8]),
                0.0,
            )
            .unwrap();
        for i in 0..200 {
            let x = -4.0 + 8.0 * i as f64 / 199.0;
            assert_eq!(spec.evaluate(x), base.evaluate(x));
        }
        // epsilon with an empty overlay is also the identity
        let noop = base.overlay_perturbation(vec![], None, 0.37).unwrap();
        assert_eq!(noop.flatten(), base.flatten());
    }

    #[test]
    fn slice_reproduces_the_unit_cell() {
        let spec = build_periodic(rect_cell(), 8).unwrap();
        let flat = spec.flatten();
        for p in 1..=8 {
            let lo = spec.cell_start(p);
            let cell = flat.slice_cell(lo, lo + 1.0).unwrap();
            assert!(cell.same_potential_as(spec.cell()));
        }
    }

    #[test]
    fn scatterer_on_junction_is_coalesced() {
        let base = build_periodic(rect_cell(), 2).unwrap();
        // two scatterers at the same junction point merge strengths
        let spec = base
            .overlay_perturbation(
                vec![
                    DiracScatterer::new(0.0, 1.0).unwrap(),
                    DiracScatterer::new(0.0, 2.0).unwrap(),
                ],
                None,
                1.0,
            )
            .unwrap();
        let flat = spec.flatten();
        assert_eq!(flat.deltas.len(), 1);
        assert!((flat.deltas[0].strength - 3.0).abs() < 1e-12);
        // segments still cover the region contiguously
        let mut x = -flat.half_length;
        for seg in &flat.segments {
            assert!((seg.start - x).abs() < 1e-12);
            x = seg.end;
        }
        assert!((x - flat.half_length).abs() < 1e-12);
    }

    #[test]
    fn schema_round_trip_and_rescale() {
        let text = r#"{
            "d": 2.0,
            "N": 4,
            "cell": {"segments": [{"len": 0.8333333333333334, "height": 0.0},
                                   {"len": 0.3333333333333333, "height": 6.75},
                                   {"len": 0.8333333333333334, "height": 0.0}]},
            "perturbation": {"epsilon": 0.1, "deltas": [{"pos": 1.0, "c": 2.4}]}
        }"#;
        let spec = StructureJson::from_str(text).unwrap().to_spec().unwrap();
        // rescaled to d = 1: heights * d^2 = 27, strengths * d = 4.8
        assert_eq!(spec.n_cells(), 4);
        assert!((spec.cell().period() - 1.0).abs() < 1e-12);
        assert!((spec.cell().segments()[1].height - 27.0).abs() < 1e-12);
        assert!((spec.perturbation().deltas[0].strength - 4.8).abs() < 1e-12);
        assert!((spec.perturbation().deltas[0].position - 0.5).abs() < 1e-12);
    }

    #[test]
    fn schema_rejects_unknown_keys_and_bad_counts() {
        assert!(StructureJson::from_str(r#"{"d": 1.0, "N": 2, "cell": {"segments": []}, "bogus": 1}"#).is_err());
        let no_cells = r#"{"d": 1.0, "N": 0, "cell": {"segments": [{"len": 1.0, "height": 0.0}]}}"#;
        assert!(StructureJson::from_str(no_cells).unwrap().to_spec().is_err());
        let bad_sum = r#"{"d": 1.0, "N": 2, "cell": {"segments": [{"len": 0.7, "height": 0.0}]}}"#;
        assert!(StructureJson::from_str(bad_sum).unwrap().to_spec().is_err());
    }
}
