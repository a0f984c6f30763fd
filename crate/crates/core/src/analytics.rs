//! Descriptive statistics: speed histograms, spatial speed maps, conflict
//! counts per vehicle-type pair and conflict position maps.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::conflict::{ConflictEvent, TypePair};
use crate::geometry::Vec2;
use crate::trajectory::{Dataset, VehicleClass};

pub const DEFAULT_BIN_WIDTH: f64 = 1.0;
pub const DEFAULT_CELL_SIZE: f64 = 2.0;
pub const MPS_TO_KMH: f64 = 3.6;

pub const COUNTING_CONVENTION: &str =
    "one event per contiguous below-threshold episode per vehicle pair (runs closer than merge_gap joined)";

/// Fixed-width histogram with bins aligned to multiples of `bin_width`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn from_values(values: &[f64], bin_width: f64) -> Self {
        assert!(bin_width > 0.0, "bin width must be positive");
        let index = |v: f64| (v / bin_width).floor() as i64;
        let (Some(lo), Some(hi)) = (
            values.iter().map(|&v| index(v)).min(),
            values.iter().map(|&v| index(v)).max(),
        ) else {
            return Self {
                bin_width,
                bin_edges: Vec::new(),
                counts: Vec::new(),
                total: 0,
            };
        };
        let mut counts = vec![0u64; (hi - lo + 1) as usize];
        for &v in values {
            counts[(index(v) - lo) as usize] += 1;
        }
        Self {
            bin_width,
            bin_edges: (lo..=hi + 1).map(|k| k as f64 * bin_width).collect(),
            counts,
            total: values.len() as u64,
        }
    }

    /// (bin_start, bin_end, count) triples.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.bin_edges[i], self.bin_edges[i + 1], c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedStats {
    pub histogram: Histogram,
    /// `None` when the class has no samples.
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
}

fn speeds(dataset: &Dataset, vclass: VehicleClass) -> Vec<f64> {
    dataset
        .tracks()
        .filter(|t| t.vclass == vclass)
        .flat_map(|t| t.states.iter().map(|s| s.speed()))
        .collect()
}

/// Instantaneous speeds over every frame of every track of one class.
pub fn speed_distribution(dataset: &Dataset, vclass: VehicleClass, bin_width: f64) -> SpeedStats {
    let v = speeds(dataset, vclass);
    let n = v.len() as f64;
    let mean = (!v.is_empty()).then(|| v.iter().sum::<f64>() / n);
    let std_dev = mean.map(|m| (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt());
    SpeedStats {
        histogram: Histogram::from_values(&v, bin_width),
        mean,
        std_dev,
    }
}

pub type CellIndex = (i64, i64);

/// Square cells keyed by (col, row) from `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid<T> {
    pub cell_size: f64,
    pub origin: Vec2,
    pub cells: BTreeMap<CellIndex, T>,
}

impl<T> SpatialGrid<T> {
    pub fn new(cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        Self {
            cell_size,
            origin: Vec2::default(),
            cells: BTreeMap::new(),
        }
    }

    pub fn cell_of(&self, p: Vec2) -> CellIndex {
        (
            ((p.x - self.origin.x) / self.cell_size).floor() as i64,
            ((p.y - self.origin.y) / self.cell_size).floor() as i64,
        )
    }

    pub fn cell_center(&self, (col, row): CellIndex) -> Vec2 {
        Vec2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_size,
            self.origin.y + (row as f64 + 0.5) * self.cell_size,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanCell {
    pub sum: f64,
    pub count: u64,
}

impl MeanCell {
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

/// Mean speed per cell over all frames of tracks of `vclass`.
pub fn spatial_speed_map(dataset: &Dataset, vclass: VehicleClass, cell_size: f64) -> SpatialGrid<MeanCell> {
    let mut grid = SpatialGrid::new(cell_size);
    for t in dataset.tracks().filter(|t| t.vclass == vclass) {
        for s in &t.states {
            let cell = grid.cells.entry(grid.cell_of(s.position())).or_insert_with(MeanCell::default);
            cell.sum += s.speed();
            cell.count += 1;
        }
    }
    grid
}

/// Conflicts falling in one cell; `min_ttcs` is kept sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConflictCell {
    pub min_ttcs: Vec<f64>,
}

impl ConflictCell {
    pub fn count(&self) -> usize {
        self.min_ttcs.len()
    }

    pub fn most_severe(&self) -> Option<f64> {
        self.min_ttcs.first().copied()
    }
}

/// One entry per event location, optionally restricted to a type pair.
pub fn conflict_position_map(
    events: &[ConflictEvent],
    filter: Option<TypePair>,
    cell_size: f64,
) -> SpatialGrid<ConflictCell> {
    let mut grid = SpatialGrid::new(cell_size);
    for e in events {
        if filter.is_some() && e.type_pair() != filter {
            continue;
        }
        let idx = grid.cell_of(e.location);
        grid.cells.entry(idx).or_insert_with(ConflictCell::default).min_ttcs.push(e.min_ttc);
    }
    for cell in grid.cells.values_mut() {
        cell.min_ttcs.sort_by(f64::total_cmp);
    }
    grid
}

/// Quantile breaks (quartiles) of min TTC over a set of events, used for
/// severity shading.
pub fn severity_breaks(events: &[ConflictEvent]) -> Vec<f64> {
    let mut v: Vec<f64> = events.iter().map(|e| e.min_ttc).collect();
    if v.is_empty() {
        return Vec::new();
    }
    v.sort_by(f64::total_cmp);
    [0.25, 0.5, 0.75]
        .iter()
        .map(|q| v[((v.len() - 1) as f64 * q).round() as usize])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypePairStats {
    pub type_pair: TypePair,
    pub event_count: usize,
    pub mean_ttc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConflictSummary {
    /// Always the four type pairs, in car-car, car-truck, truck-car, truck-truck order.
    pub by_type_pair: Vec<TypePairStats>,
    pub lane_change_events: usize,
    pub mean_ttc: Option<f64>,
    pub rear_end_events: usize,
    pub counting_convention: String,
}

impl ConflictSummary {
    pub fn stats(&self, tp: TypePair) -> &TypePairStats {
        self.by_type_pair
            .iter()
            .find(|s| s.type_pair == tp)
            .expect("all type pairs present")
    }
}

fn sorted_mean(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    // sorted summation keeps the mean independent of input order
    v.sort_by(f64::total_cmp);
    Some(v.iter().sum::<f64>() / v.len() as f64)
}

/// Count and mean min TTC of lane-change events per type pair.
pub fn conflict_summary(events: &[ConflictEvent]) -> ConflictSummary {
    let lane_change: Vec<&ConflictEvent> = events.iter().filter(|e| e.is_lane_change()).collect();
    let by_type_pair = TypePair::ALL
        .iter()
        .map(|&tp| {
            let ttcs: Vec<f64> = lane_change
                .iter()
                .filter(|e| e.type_pair() == Some(tp))
                .map(|e| e.min_ttc)
                .collect();
            TypePairStats {
                type_pair: tp,
                event_count: ttcs.len(),
                mean_ttc: sorted_mean(ttcs),
            }
        })
        .collect();
    ConflictSummary {
        by_type_pair,
        lane_change_events: lane_change.len(),
        mean_ttc: sorted_mean(lane_change.iter().map(|e| e.min_ttc).collect()),
        rear_end_events: events.iter().filter(|e| !e.is_lane_change() && e.classification.is_some()).count(),
        counting_convention: COUNTING_CONVENTION.to_string(),
    }
}
