//! From district outline and congestion table to one placement per time window.
//!
//! Congestion percentages become weights by dividing by 100. A window's weight
//! vector follows the region's edge order, so every edge needs exactly one
//! record per window. The synthetic window [`UNWEIGHTED`] (all weights 1) is
//! always planned alongside the windows found in the data.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{region_from_vertices, GeometryError, Point2, PolygonRegion, Vertex};
use crate::wls::{assemble, solve_wls, LineSystem, WeightVector, WlsError};

/// Name of the synthetic all-ones window.
pub const UNWEIGHTED: &str = "unweighted";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },
    #[error("line {line}: percent {percent} for {segment}/{window} is outside [0, 100]")]
    Range {
        line: u64,
        segment: String,
        window: String,
        percent: f64,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("window `{window}` has no record for segment `{segment}`")]
    MissingSegment { window: String, segment: String },
    #[error("window `{window}` has more than one record for segment `{segment}`")]
    DuplicateSegment { window: String, segment: String },
    #[error(
        "window `{window}` references segment `{segment}`, which is not an edge of the region"
    )]
    UnknownSegment { window: String, segment: String },
    #[error("no congestion records for window `{0}`")]
    UnknownWindow(String),
    #[error("window name `{UNWEIGHTED}` is reserved for the all-ones placement")]
    ReservedWindow,
    #[error("window `{window}`: {source}")]
    Solve {
        window: String,
        #[source]
        source: WlsError,
    },
}

impl TrafficError {
    /// The solver failure behind this error, if any.
    pub fn solver_error(&self) -> Option<&WlsError> {
        match self {
            TrafficError::Solve { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// The region document: a name and vertices in boundary order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDocument {
    pub name: String,
    pub vertices: Vec<Vertex>,
}

impl RegionDocument {
    pub fn parse(source: &str) -> Result<Self, TrafficError> {
        serde_json::from_str(source).map_err(|e| TrafficError::Parse {
            context: format!("region document line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn to_region(&self) -> Result<PolygonRegion, TrafficError> {
        Ok(region_from_vertices(self.vertices.clone())?)
    }
}

pub fn load_region(source: &str) -> Result<PolygonRegion, TrafficError> {
    RegionDocument::parse(source)?.to_region()
}

/// One row of the congestion table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongestionRecord {
    #[serde(rename = "segment")]
    pub segment_id: String,
    pub window: String,
    pub percent: f64,
}

impl CongestionRecord {
    pub fn new(segment_id: impl Into<String>, window: impl Into<String>, percent: f64) -> Self {
        CongestionRecord {
            segment_id: segment_id.into(),
            window: window.into(),
            percent,
        }
    }
}

const CONGESTION_HEADER: [&str; 3] = ["segment", "window", "percent"];

/// Parses a `segment,window,percent` table.
pub fn load_congestion(source: &str) -> Result<Vec<CongestionRecord>, TrafficError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());
    let csv_error = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        TrafficError::Parse {
            context: format!("congestion table line {line}"),
            message: e.to_string(),
        }
    };
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.is_empty() && source.trim().is_empty() {
        return Ok(Vec::new());
    }
    if headers.iter().ne(CONGESTION_HEADER) {
        return Err(TrafficError::Parse {
            context: "congestion table line 1".into(),
            message: format!(
                "expected header `{}`, found `{}`",
                CONGESTION_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let record: CongestionRecord =
            row.deserialize(Some(&headers))
                .map_err(|e| TrafficError::Parse {
                    context: format!("congestion table line {line}"),
                    message: e.to_string(),
                })?;
        if !(0.0..=100.0).contains(&record.percent) {
            return Err(TrafficError::Range {
                line,
                segment: record.segment_id,
                window: record.window,
                percent: record.percent,
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Weight vector for `window`, in the region's edge order, `w = percent / 100`.
pub fn weights_for_window(
    records: &[CongestionRecord],
    region: &PolygonRegion,
    window: &str,
) -> Result<WeightVector, TrafficError> {
    let mut by_segment: BTreeMap<&str, f64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.window == window) {
        if by_segment.insert(&r.segment_id, r.percent).is_some() {
            return Err(TrafficError::DuplicateSegment {
                window: window.into(),
                segment: r.segment_id.clone(),
            });
        }
    }
    if by_segment.is_empty() {
        return Err(TrafficError::UnknownWindow(window.into()));
    }
    let mut weights = Vec::with_capacity(region.lines().len());
    for segment in region.segment_ids() {
        let percent = by_segment
            .remove(segment)
            .ok_or_else(|| TrafficError::MissingSegment {
                window: window.into(),
                segment: segment.into(),
            })?;
        weights.push(percent / 100.0);
    }
    if let Some(segment) = by_segment.keys().next() {
        return Err(TrafficError::UnknownSegment {
            window: window.into(),
            segment: (*segment).into(),
        });
    }
    let labels = region.segment_ids().map(String::from).collect();
    let w = WeightVector::new(weights).and_then(|w| w.with_labels(labels));
    w.map_err(|source| TrafficError::Solve {
        window: window.into(),
        source,
    })
}

/// Weight vectors for every window named in the records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightSchedule {
    windows: BTreeMap<String, WeightVector>,
}

impl WeightSchedule {
    pub fn from_records(
        records: &[CongestionRecord],
        region: &PolygonRegion,
    ) -> Result<Self, TrafficError> {
        let names: BTreeSet<&str> = records.iter().map(|r| r.window.as_str()).collect();
        if names.contains(UNWEIGHTED) {
            return Err(TrafficError::ReservedWindow);
        }
        let windows = names
            .into_iter()
            .map(|name| Ok((name.to_string(), weights_for_window(records, region, name)?)))
            .collect::<Result<_, TrafficError>>()?;
        Ok(WeightSchedule { windows })
    }

    pub fn get(&self, window: &str) -> Option<&WeightVector> {
        self.windows.get(window)
    }

    pub fn windows(&self) -> impl Iterator<Item = (&str, &WeightVector)> {
        self.windows.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentResidual {
    pub segment: String,
    pub weight: f64,
    /// Signed distance from the placement to the segment's line.
    pub distance: f64,
}

/// The placement for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementReport {
    pub window: String,
    pub location: Point2,
    pub objective: f64,
    pub inside_region: bool,
    pub condition: f64,
    pub per_segment: Vec<SegmentResidual>,
}

fn line_system(region: &PolygonRegion) -> LineSystem {
    assemble(region.lines().to_vec()).expect("a region has at least 3 edges")
}

fn plan_with_weights(
    region: &PolygonRegion,
    system: &LineSystem,
    window: &str,
    weights: &WeightVector,
) -> Result<PlacementReport, TrafficError> {
    let solution = solve_wls(system, weights).map_err(|source| TrafficError::Solve {
        window: window.into(),
        source,
    })?;
    let per_segment = region
        .segment_ids()
        .zip(weights.values())
        .zip(&solution.residuals)
        .map(|((segment, &weight), &distance)| SegmentResidual {
            segment: segment.into(),
            weight,
            distance,
        })
        .collect();
    Ok(PlacementReport {
        window: window.into(),
        location: solution.point,
        objective: solution.objective,
        inside_region: region.contains(solution.point),
        condition: solution.condition,
        per_segment,
    })
}

fn unweighted(region: &PolygonRegion) -> WeightVector {
    let labels = region.segment_ids().map(String::from).collect();
    WeightVector::uniform(region.lines().len(), 1.0)
        .and_then(|w| w.with_labels(labels))
        .expect("unit weights are valid")
}

/// Placement for a single window; [`UNWEIGHTED`] uses all-ones weights.
pub fn plan_window(
    region: &PolygonRegion,
    records: &[CongestionRecord],
    window: &str,
) -> Result<PlacementReport, TrafficError> {
    let weights = if window == UNWEIGHTED {
        unweighted(region)
    } else {
        weights_for_window(records, region, window)?
    };
    plan_with_weights(region, &line_system(region), window, &weights)
}

/// One report per window in the records plus [`UNWEIGHTED`], sorted by window name.
pub fn plan_stations(
    region: &PolygonRegion,
    records: &[CongestionRecord],
) -> Result<Vec<PlacementReport>, TrafficError> {
    let schedule = WeightSchedule::from_records(records, region)?;
    let system = line_system(region);
    let all_ones = unweighted(region);
    let mut windows: Vec<(&str, &WeightVector)> = schedule.windows().collect();
    windows.push((UNWEIGHTED, &all_ones));
    windows.sort_by(|a, b| a.0.cmp(b.0));
    windows
        .into_iter()
        .map(|(name, w)| plan_with_weights(region, &system, name, w))
        .collect()
}

/// JSON formatter writing every float with 17 significant digits.
struct Sig17<F>(F);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl<F: serde_json::ser::Formatter> serde_json::ser::Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        value: f32,
    ) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array_value<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    delegate!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        end_object_key,
        begin_object_value,
        end_object_value
    );
}

/// Serializes reports as an indented JSON array with 17-significant-digit numbers.
pub fn reports_to_json(reports: &[PlacementReport]) -> String {
    let mut out = Vec::new();
    let formatter = Sig17(serde_json::ser::PrettyFormatter::new());
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    reports
        .serialize(&mut ser)
        .expect("reports serialize into memory");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

pub fn reports_from_json(source: &str) -> Result<Vec<PlacementReport>, TrafficError> {
    serde_json::from_str(source).map_err(|e| TrafficError::Parse {
        context: format!("report document line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}
