//! Tracks CSV and site JSON readers/writers.
//!
//! Tracks CSV header: `frame,id,x,y,vx,vy,length,width[,lane_id]`. Columns are
//! located by name. Floats are written with the shortest representation
//! that parses back to the same bits.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use super::{
    derive_heading, Dataset, Frame, KinematicState, LaneId, SiteGeometry, VehicleId, VehicleTrack,
};
use crate::error::DataError;

const REQUIRED: [&str; 8] = ["frame", "id", "x", "y", "vx", "vy", "length", "width"];

fn open(path: &Path) -> Result<BufReader<File>, DataError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn read_site(path: &Path) -> Result<SiteGeometry, DataError> {
    let reader = open(path)?;
    serde_json::from_reader(reader).map_err(|e| {
        // surface validation failures as site errors rather than json errors
        if e.is_data() {
            DataError::Site(e.to_string())
        } else {
            DataError::SiteJson(e)
        }
    })
}

pub fn write_site<W: Write>(site: &SiteGeometry, w: W) -> Result<(), DataError> {
    serde_json::to_writer_pretty(w, site)?;
    Ok(())
}

/// Parsed rows prior to dataset validation.
#[derive(Debug, Clone, PartialEq)]
pub struct TracksTable {
    pub tracks: Vec<VehicleTrack>,
    pub has_lane_column: bool,
}

struct Partial {
    length: f64,
    width: f64,
    states: BTreeMap<Frame, KinematicState>,
}

/// Reads a tracks CSV, deriving headings against `site`.
pub fn read_tracks<R: Read>(reader: R, site: &SiteGeometry) -> Result<TracksTable, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut cols = [0usize; 8];
    for (slot, name) in cols.iter_mut().zip(REQUIRED) {
        *slot = find(name).ok_or_else(|| DataError::Malformed {
            line: 1,
            column: name.to_string(),
            message: "missing column in header".into(),
        })?;
    }
    let lane_col = find("lane_id");

    let mut partial: BTreeMap<VehicleId, Partial> = BTreeMap::new();
    let mut mismatches = 0usize;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize, name: &str| -> Result<&str, DataError> {
            record.get(idx).ok_or_else(|| DataError::Malformed {
                line,
                column: name.to_string(),
                message: "missing value".into(),
            })
        };
        let float = |k: usize| -> Result<f64, DataError> {
            let name = REQUIRED[k];
            let raw = field(cols[k], name)?;
            let v: f64 = raw.parse().map_err(|_| DataError::Malformed {
                line,
                column: name.to_string(),
                message: format!("cannot parse `{raw}` as a number"),
            })?;
            if !v.is_finite() {
                return Err(DataError::Malformed {
                    line,
                    column: name.to_string(),
                    message: format!("non-finite value `{raw}`"),
                });
            }
            Ok(v)
        };
        let int = |k: usize| -> Result<u64, DataError> {
            let name = REQUIRED[k];
            let raw = field(cols[k], name)?;
            raw.parse().map_err(|_| DataError::Malformed {
                line,
                column: name.to_string(),
                message: format!("`{raw}` is not a non-negative integer"),
            })
        };
        let frame = int(0)?;
        let frame = Frame::try_from(frame).map_err(|_| DataError::Malformed {
            line,
            column: "frame".into(),
            message: format!("frame {frame} out of range"),
        })?;
        let id = int(1)?;
        let (x, y, vx, vy) = (float(2)?, float(3)?, float(4)?, float(5)?);
        let (length, width) = (float(6)?, float(7)?);
        let lane: Option<LaneId> = match lane_col {
            None => None,
            Some(c) => match record.get(c).unwrap_or("") {
                "" => None,
                raw => Some(raw.parse().map_err(|_| DataError::Malformed {
                    line,
                    column: "lane_id".into(),
                    message: format!("`{raw}` is not a lane id"),
                })?),
            },
        };
        if let Some(l) = lane {
            if site.lane(l).is_none() {
                return Err(DataError::Malformed {
                    line,
                    column: "lane_id".into(),
                    message: format!("lane {l} is not defined by the site"),
                });
            }
            if site.assign_lane(crate::geometry::Vec2::new(x, y)) != Some(l) {
                mismatches += 1;
            }
        }
        let entry = partial.entry(id).or_insert_with(|| Partial {
            length,
            width,
            states: BTreeMap::new(),
        });
        if entry.length != length || entry.width != width {
            return Err(DataError::Malformed {
                line,
                column: if entry.length != length { "length" } else { "width" }.into(),
                message: format!("vehicle {id} changes dimensions between rows"),
            });
        }
        let position = crate::geometry::Vec2::new(x, y);
        let velocity = crate::geometry::Vec2::new(vx, vy);
        let heading_lane = lane.or_else(|| site.assign_lane(position));
        let state = KinematicState {
            frame,
            x,
            y,
            vx,
            vy,
            heading: derive_heading(position, velocity, heading_lane, site),
            lane,
        };
        if entry.states.insert(frame, state).is_some() {
            return Err(DataError::DuplicateState { id, frame, line });
        }
    }
    if mismatches > 0 {
        tracing::warn!(mismatches, "file lane ids disagree with site geometry");
    }
    let tracks = partial
        .into_iter()
        .map(|(id, p)| VehicleTrack::new(id, p.length, p.width, p.states.into_values().collect()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TracksTable {
        tracks,
        has_lane_column: lane_col.is_some(),
    })
}

/// Loads and validates a dataset from a tracks CSV and a site JSON file.
pub fn ingest_dataset(tracks_file: &Path, site_file: &Path) -> Result<Dataset, DataError> {
    let site = read_site(site_file)?;
    let table = read_tracks(open(tracks_file)?, &site)?;
    Dataset::new(site, table.tracks)
}

/// Writes every state as one row ordered by (id, frame). The lane column is
/// emitted only when at least one state carries a file lane id.
pub fn write_tracks<'a, W, I>(tracks: I, w: W) -> Result<(), DataError>
where
    W: Write,
    I: IntoIterator<Item = &'a VehicleTrack>,
{
    let tracks: Vec<&VehicleTrack> = tracks.into_iter().collect();
    let with_lane = tracks
        .iter()
        .any(|t| t.states.iter().any(|s| s.lane.is_some()));
    let mut wtr = csv::WriterBuilder::new().from_writer(w);
    let mut header: Vec<&str> = REQUIRED.to_vec();
    if with_lane {
        header.push("lane_id");
    }
    wtr.write_record(&header)?;
    for t in tracks {
        for s in &t.states {
            let mut row = vec![
                s.frame.to_string(),
                t.id.to_string(),
                s.x.to_string(),
                s.y.to_string(),
                s.vx.to_string(),
                s.vy.to_string(),
                t.length.to_string(),
                t.width.to_string(),
            ];
            if with_lane {
                row.push(s.lane.map(|l| l.to_string()).unwrap_or_default());
            }
            wtr.write_record(&row)?;
        }
    }
    wtr.flush().map_err(|e| DataError::Csv(e.into()))?;
    Ok(())
}
