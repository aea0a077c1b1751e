//! Annulus-by-sector partition of the cell disk and the zooming bookkeeping
//! run as users join and leave.
//!
//! The disk of radius `R` is cut into `n_annuli` rings of equal width and
//! `n_sectors` equal angular wedges. Intervals are half-open, `[lo, hi)`, with
//! the outermost ring and the last wedge closed so that every point of the
//! disk has exactly one address.
//!
//! [`CpzState`] keeps, for every sector holding at least one user, the index
//! of its outermost occupied ring. A sector's zoom distance is the outer
//! radius of that ring.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UeId(pub u64);

impl fmt::Display for UeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionGrid {
    n_annuli: usize,
    n_sectors: usize,
    cell_radius: f64,
}

impl PartitionGrid {
    pub fn new(n_annuli: usize, n_sectors: usize, cell_radius: f64) -> Result<Self> {
        if n_annuli == 0 || n_sectors == 0 {
            return Err(SimError::Config(format!(
                "grid needs at least one annulus and one sector, got {n_annuli}x{n_sectors}"
            )));
        }
        if !(cell_radius > 0.0 && cell_radius.is_finite()) {
            return Err(SimError::Config(format!(
                "cell radius must be > 0, got {cell_radius}"
            )));
        }
        Ok(Self { n_annuli, n_sectors, cell_radius })
    }

    pub fn n_annuli(&self) -> usize {
        self.n_annuli
    }

    pub fn n_sectors(&self) -> usize {
        self.n_sectors
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    /// Radius of boundary `i`, `i * R / n_annuli`; boundary `n_annuli` is exactly `R`.
    pub fn annulus_boundary(&self, i: usize) -> f64 {
        if i >= self.n_annuli {
            self.cell_radius
        } else {
            i as f64 * self.cell_radius / self.n_annuli as f64
        }
    }

    /// Outer radius of ring `annulus`.
    pub fn annulus_outer(&self, annulus: usize) -> f64 {
        self.annulus_boundary(annulus + 1)
    }

    /// Angular width of one sector, `2 pi / n_sectors`.
    pub fn sector_width(&self) -> f64 {
        TAU / self.n_sectors as f64
    }

    /// Start angle of sector `s`; sector `n_sectors` starts at `2 pi`.
    pub fn sector_start(&self, s: usize) -> f64 {
        if s >= self.n_sectors {
            TAU
        } else {
            s as f64 * TAU / self.n_sectors as f64
        }
    }

    pub fn locate(&self, pos: &UePosition) -> Result<CellIndex> {
        let r = pos.r;
        if !(r >= 0.0 && r <= self.cell_radius) {
            return Err(SimError::OutOfCell { r, radius: self.cell_radius });
        }
        let phi = normalize_angle(pos.phi);
        let annulus = snap(
            (r * self.n_annuli as f64 / self.cell_radius).floor(),
            self.n_annuli,
            r,
            |i| self.annulus_boundary(i),
        );
        let sector = snap(
            (phi * self.n_sectors as f64 / TAU).floor(),
            self.n_sectors,
            phi,
            |i| self.sector_start(i),
        );
        Ok(CellIndex { annulus, sector })
    }
}

/// Clamp an estimated interval index into `[0, n)` and correct it against the
/// exact boundary values, so that `boundary(idx) <= x < boundary(idx + 1)`
/// holds for every interval but the last.
fn snap(estimate: f64, n: usize, x: f64, boundary: impl Fn(usize) -> f64) -> usize {
    let mut idx = if estimate.is_finite() && estimate > 0.0 {
        (estimate as usize).min(n - 1)
    } else {
        0
    };
    while idx > 0 && x < boundary(idx) {
        idx -= 1;
    }
    while idx + 1 < n && x >= boundary(idx + 1) {
        idx += 1;
    }
    idx
}

/// Map an angle into `[0, 2 pi)`.
pub fn normalize_angle(phi: f64) -> f64 {
    let a = phi.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Reported location of a user relative to the BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UePosition {
    pub ue_id: UeId,
    /// Meters.
    pub r: f64,
    /// Radians.
    pub phi: f64,
}

impl UePosition {
    pub fn new(ue_id: UeId, r: f64, phi: f64) -> Self {
        Self { ue_id, r, phi: normalize_angle(phi) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub annulus: usize,
    pub sector: usize,
}

/// One powered sector: its index, angular width and zoom radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageRequirement {
    pub sector: usize,
    /// Radians.
    pub theta: f64,
    /// Meters.
    pub zoom_distance: f64,
}

/// Occupancy and per-sector zoom state.
#[derive(Debug, Clone, PartialEq)]
pub struct CpzState {
    grid: PartitionGrid,
    ues: BTreeMap<UeId, (UePosition, CellIndex)>,
    occupants: BTreeMap<CellIndex, BTreeSet<UeId>>,
    // sector -> outermost occupied annulus
    zoom_annulus: BTreeMap<usize, usize>,
}

impl CpzState {
    pub fn new(grid: PartitionGrid) -> Self {
        Self {
            grid,
            ues: BTreeMap::new(),
            occupants: BTreeMap::new(),
            zoom_annulus: BTreeMap::new(),
        }
    }

    pub fn with_positions<'a>(
        grid: PartitionGrid,
        positions: impl IntoIterator<Item = &'a UePosition>,
    ) -> Result<Self> {
        let mut state = Self::new(grid);
        for pos in positions {
            state.join(*pos)?;
        }
        Ok(state)
    }

    pub fn grid(&self) -> &PartitionGrid {
        &self.grid
    }

    pub fn is_empty(&self) -> bool {
        self.ues.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ues.len()
    }

    pub fn positions(&self) -> impl Iterator<Item = &UePosition> + '_ {
        self.ues.values().map(|(p, _)| p)
    }

    pub fn cell_of(&self, ue_id: UeId) -> Option<CellIndex> {
        self.ues.get(&ue_id).map(|&(_, c)| c)
    }

    pub fn occupants(&self, cell: CellIndex) -> Option<&BTreeSet<UeId>> {
        self.occupants.get(&cell)
    }

    /// A new user reports its location. If its sector is already covered out
    /// to its ring, the zoom map is untouched; otherwise the sector zooms out
    /// to the user's ring.
    pub fn join(&mut self, pos: UePosition) -> Result<CellIndex> {
        if self.ues.contains_key(&pos.ue_id) {
            return Err(SimError::DuplicateUe(pos.ue_id));
        }
        let pos = UePosition::new(pos.ue_id, pos.r, pos.phi);
        let cell = self.grid.locate(&pos)?;
        self.ues.insert(pos.ue_id, (pos, cell));
        self.occupants.entry(cell).or_default().insert(pos.ue_id);
        self.zoom_annulus
            .entry(cell.sector)
            .and_modify(|a| *a = (*a).max(cell.annulus))
            .or_insert(cell.annulus);
        Ok(cell)
    }

    /// Remove a user; its sector's zoom shrinks or the sector goes dark.
    pub fn leave(&mut self, ue_id: UeId) -> Result<UePosition> {
        let (pos, cell) = self.ues.remove(&ue_id).ok_or(SimError::UnknownUe(ue_id))?;
        if let Some(set) = self.occupants.get_mut(&cell) {
            set.remove(&ue_id);
            if set.is_empty() {
                self.occupants.remove(&cell);
            }
        }
        let top = (0..self.grid.n_annuli).rev().find(|&annulus| {
            self.occupants
                .contains_key(&CellIndex { annulus, sector: cell.sector })
        });
        match top {
            Some(a) => {
                self.zoom_annulus.insert(cell.sector, a);
            }
            None => {
                self.zoom_annulus.remove(&cell.sector);
            }
        }
        Ok(pos)
    }

    pub fn zoom_distance(&self, sector: usize) -> Option<f64> {
        self.zoom_annulus
            .get(&sector)
            .map(|&a| self.grid.annulus_outer(a))
    }

    pub fn per_sector_zoom(&self) -> BTreeMap<usize, f64> {
        self.zoom_annulus
            .iter()
            .map(|(&s, &a)| (s, self.grid.annulus_outer(a)))
            .collect()
    }

    /// Largest zoom distance over all sectors, `None` when the cell is empty.
    pub fn global_zoom(&self) -> Option<f64> {
        self.zoom_annulus
            .values()
            .max()
            .map(|&a| self.grid.annulus_outer(a))
    }

    pub fn n_active_sectors(&self) -> usize {
        self.zoom_annulus.len()
    }

    /// One entry per powered sector in ascending sector order; empty means sleep.
    pub fn coverage_requirements(&self) -> Vec<CoverageRequirement> {
        let theta = self.grid.sector_width();
        self.zoom_annulus
            .iter()
            .map(|(&sector, &a)| CoverageRequirement {
                sector,
                theta,
                zoom_distance: self.grid.annulus_outer(a),
            })
            .collect()
    }
}
