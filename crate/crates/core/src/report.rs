//! Report bundle: `summary.json`, histogram and grid CSVs, optional SVG
//! heatmaps. Every file is built in memory first so nothing is written
//! unless the whole bundle could be produced, and the bytes depend only on
//! the inputs.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analytics::{
    conflict_position_map, conflict_summary, severity_breaks, spatial_speed_map, speed_distribution,
    ConflictCell, ConflictSummary, MeanCell, SpatialGrid, SpeedStats, DEFAULT_BIN_WIDTH,
    DEFAULT_CELL_SIZE, MPS_TO_KMH,
};
use crate::conflict::{ConflictEvent, TypePair};
use crate::error::ReportError;
use crate::trajectory::{Dataset, VehicleClass};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub cell_size: f64,
    pub bin_width: f64,
    pub filter_type_pair: Option<TypePair>,
    pub svg: bool,
    /// Recorded in the summary; the events are assumed to use it.
    pub ttc_threshold: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            cell_size: DEFAULT_CELL_SIZE,
            bin_width: DEFAULT_BIN_WIDTH,
            filter_type_pair: None,
            svg: false,
            ttc_threshold: 3.0,
        }
    }
}

#[derive(Debug, Serialize)]
struct FleetSection {
    cars: usize,
    trucks: usize,
    total: usize,
    /// Percent, one decimal.
    truck_percentage: Option<f64>,
    truck_fraction: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SpeedSection {
    samples: u64,
    mean_mps: Option<f64>,
    std_mps: Option<f64>,
    mean_kmh: Option<f64>,
    std_kmh: Option<f64>,
    bin_width_mps: f64,
}

impl SpeedSection {
    fn new(s: &SpeedStats) -> Self {
        Self {
            samples: s.histogram.total,
            mean_mps: s.mean,
            std_mps: s.std_dev,
            mean_kmh: s.mean.map(|v| v * MPS_TO_KMH),
            std_kmh: s.std_dev.map(|v| v * MPS_TO_KMH),
            bin_width_mps: s.histogram.bin_width,
        }
    }
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    fleet: FleetSection,
    speed: SpeedBlock,
    ttc_threshold_s: f64,
    total_events: usize,
    conflicts: &'a ConflictSummary,
    position_map_filter: Option<TypePair>,
    files: Vec<String>,
}

#[derive(Debug, Serialize)]
struct SpeedBlock {
    car: SpeedSection,
    truck: SpeedSection,
}

/// In-memory report: file name and contents, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub files: Vec<(String, Vec<u8>)>,
}

impl ReportBundle {
    pub fn push(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every file into `dir`, creating it if needed. On failure,
    /// files already written by this call are removed, and so is `dir` if
    /// this call created it.
    pub fn write_to(&self, dir: &Path) -> Result<(), ReportError> {
        let io = |path: &Path, source| ReportError::Io {
            path: path.to_path_buf(),
            source,
        };
        let existed = dir.exists();
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = std::fs::write(&path, bytes) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                if !existed {
                    let _ = std::fs::remove_dir(dir);
                }
                return Err(io(&path, e));
            }
            written.push(path);
        }
        Ok(())
    }
}

pub fn histogram_csv(stats: &SpeedStats) -> String {
    let mut s = String::from("bin_start,bin_end,count\n");
    for (a, b, c) in stats.histogram.bins() {
        let _ = writeln!(s, "{a},{b},{c}");
    }
    s
}

pub fn speed_grid_csv(grid: &SpatialGrid<MeanCell>) -> String {
    let mut s = String::from("col,row,x_center,y_center,value,count\n");
    for (&idx, cell) in &grid.cells {
        let c = grid.cell_center(idx);
        let _ = writeln!(s, "{},{},{},{},{},{}", idx.0, idx.1, c.x, c.y, cell.mean(), cell.count);
    }
    s
}

/// Value column is the most severe (smallest) min TTC in the cell.
pub fn conflict_grid_csv(grid: &SpatialGrid<ConflictCell>) -> String {
    let mut s = String::from("col,row,x_center,y_center,value,count\n");
    for (&idx, cell) in &grid.cells {
        let c = grid.cell_center(idx);
        let v = cell.most_severe().unwrap_or(f64::NAN);
        let _ = writeln!(s, "{},{},{},{},{},{}", idx.0, idx.1, c.x, c.y, v, cell.count());
    }
    s
}

const PALETTE: [&str; 5] = ["#2c7bb6", "#abd9e9", "#ffffbf", "#fdae61", "#d7191c"];

fn svg_grid<T>(grid: &SpatialGrid<T>, title: &str, shade: impl Fn(&T) -> usize) -> String {
    let cs = grid.cell_size;
    let mut s = String::new();
    let (cols, rows): (Vec<i64>, Vec<i64>) = grid.cells.keys().copied().unzip();
    let (c0, c1) = (cols.iter().min().copied().unwrap_or(0), cols.iter().max().copied().unwrap_or(0));
    let (r0, r1) = (rows.iter().min().copied().unwrap_or(0), rows.iter().max().copied().unwrap_or(0));
    let (w, h) = ((c1 - c0 + 1) as f64 * cs, (r1 - r0 + 1) as f64 * cs);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{}" height="{}">"#,
        w * 4.0,
        h * 4.0
    );
    let _ = writeln!(s, "<title>{title}</title>");
    for (&(c, r), cell) in &grid.cells {
        // y grows upward in road coordinates
        let x = (c - c0) as f64 * cs;
        let y = (r1 - r) as f64 * cs;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="{cs}" height="{cs}" fill="{}"/>"#,
            PALETTE[shade(cell).min(PALETTE.len() - 1)]
        );
    }
    s.push_str("</svg>\n");
    s
}

fn speed_svg(grid: &SpatialGrid<MeanCell>, title: &str) -> String {
    let means: Vec<f64> = grid.cells.values().map(MeanCell::mean).collect();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    svg_grid(grid, title, |c| {
        if hi > lo {
            (((c.mean() - lo) / (hi - lo)) * (PALETTE.len() - 1) as f64).round() as usize
        } else {
            0
        }
    })
}

fn conflict_svg(grid: &SpatialGrid<ConflictCell>, breaks: &[f64], title: &str) -> String {
    // red for the most severe quartile
    svg_grid(grid, title, |c| {
        let v = c.most_severe().unwrap_or(f64::INFINITY);
        let q = breaks.iter().filter(|&&b| v > b).count();
        PALETTE.len() - 1 - q.min(PALETTE.len() - 1)
    })
}

/// Builds the complete bundle without touching the filesystem.
pub fn build_report(
    dataset: &Dataset,
    events: &[ConflictEvent],
    options: &ReportOptions,
) -> Result<ReportBundle, ReportError> {
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut push = |name: String, body: String| files.push((name, body.into_bytes()));

    let car = speed_distribution(dataset, VehicleClass::Car, options.bin_width);
    let truck = speed_distribution(dataset, VehicleClass::Truck, options.bin_width);
    push("speed_hist_car.csv".into(), histogram_csv(&car));
    push("speed_hist_truck.csv".into(), histogram_csv(&truck));

    let car_grid = spatial_speed_map(dataset, VehicleClass::Car, options.cell_size);
    let truck_grid = spatial_speed_map(dataset, VehicleClass::Truck, options.cell_size);
    push("speed_grid_car.csv".into(), speed_grid_csv(&car_grid));
    push("speed_grid_truck.csv".into(), speed_grid_csv(&truck_grid));

    let lane_change: Vec<ConflictEvent> = events.iter().filter(|e| e.is_lane_change()).copied().collect();
    let main_grid = conflict_position_map(&lane_change, options.filter_type_pair, options.cell_size);
    push("conflict_grid.csv".into(), conflict_grid_csv(&main_grid));
    let per_type: Vec<(TypePair, SpatialGrid<ConflictCell>)> = TypePair::ALL
        .iter()
        .map(|&tp| (tp, conflict_position_map(&lane_change, Some(tp), options.cell_size)))
        .collect();
    for (tp, grid) in &per_type {
        push(format!("conflict_grid_{}.csv", tp.as_str()), conflict_grid_csv(grid));
    }

    if options.svg {
        push("speed_grid_car.svg".into(), speed_svg(&car_grid, "car speed"));
        push("speed_grid_truck.svg".into(), speed_svg(&truck_grid, "truck speed"));
        let filtered: Vec<ConflictEvent> = lane_change
            .iter()
            .filter(|e| options.filter_type_pair.is_none() || e.type_pair() == options.filter_type_pair)
            .copied()
            .collect();
        push(
            "conflict_grid.svg".into(),
            conflict_svg(&main_grid, &severity_breaks(&filtered), "lane-change conflict positions"),
        );
    }

    let mix = dataset.fleet_mix();
    let summary_stats = conflict_summary(events);
    let mut names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    names.insert(0, "summary.json".into());
    let summary = Summary {
        fleet: FleetSection {
            cars: mix.cars,
            trucks: mix.trucks,
            total: mix.total(),
            truck_percentage: mix.truck_percentage().map(|p| (p * 10.0).round() / 10.0),
            truck_fraction: mix.truck_percentage().map(|p| p / 100.0),
        },
        speed: SpeedBlock {
            car: SpeedSection::new(&car),
            truck: SpeedSection::new(&truck),
        },
        ttc_threshold_s: options.ttc_threshold,
        total_events: events.len(),
        conflicts: &summary_stats,
        position_map_filter: options.filter_type_pair,
        files: names,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    files.insert(0, ("summary.json".into(), json.into_bytes()));
    Ok(ReportBundle { files })
}

/// Builds the bundle and writes it into `out_dir`.
pub fn render_report(
    dataset: &Dataset,
    events: &[ConflictEvent],
    options: &ReportOptions,
    out_dir: &Path,
) -> Result<ReportBundle, ReportError> {
    let bundle = build_report(dataset, events, options)?;
    bundle.write_to(out_dir)?;
    Ok(bundle)
}
