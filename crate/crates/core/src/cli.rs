//! `stationfit` command line.
//!
//! Exit codes: 0 success, 1 input or parse error, 2 singular system,
//! 3 solver/oracle mismatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use geojson::{Feature, FeatureCollection, Geometry, JsonObject};

use crate::fixtures;
use crate::geometry::{Point2, PolygonRegion};
use crate::oracle::{grid_minimize, SearchBox};
use crate::traffic::{
    load_congestion, plan_stations, plan_window, reports_to_json, CongestionRecord,
    PlacementReport, RegionDocument, TrafficError,
};
use crate::wls::{solve_coefficients, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InputError = 1,
    NumericalError = 2,
    VerificationMismatch = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stationfit",
    version,
    about = "Place a portable station by weighted least squares"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve placements and emit the report document.
    Solve {
        #[command(flatten)]
        inputs: Inputs,
        /// Only this window (`unweighted` for all-ones weights).
        #[arg(long)]
        window: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print a table instead of JSON.
        #[arg(long)]
        pretty: bool,
    },
    /// Cross-check every window against the grid-search oracle.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        /// Largest accepted distance between solver and oracle.
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
    },
    /// Compare published results with the bundled fixtures.
    DemoPaper,
    /// Write the region and placements as a GeoJSON feature collection.
    ExportGeojson {
        #[command(flatten)]
        inputs: Inputs,
        /// Destination GeoJSON file.
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Inputs {
    /// Region document (JSON).
    #[arg(long)]
    region: PathBuf,
    /// Congestion table (`segment,window,percent`); omit for the unweighted placement only.
    #[arg(long)]
    congestion: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numerical(String),
    Mismatch(String),
}

impl Failure {
    fn status(&self) -> ExitStatus {
        match self {
            Failure::Input(_) => ExitStatus::InputError,
            Failure::Numerical(_) => ExitStatus::NumericalError,
            Failure::Mismatch(_) => ExitStatus::VerificationMismatch,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) | Failure::Mismatch(m) => m,
        }
    }
}

impl From<TrafficError> for Failure {
    fn from(e: TrafficError) -> Self {
        match e.solver_error() {
            Some(_) => Failure::Numerical(e.to_string()),
            None => Failure::Input(e.to_string()),
        }
    }
}

struct Loaded {
    name: String,
    region: PolygonRegion,
    records: Vec<CongestionRecord>,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load(inputs: &Inputs) -> Result<Loaded, Failure> {
    let doc = RegionDocument::parse(&read(&inputs.region)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", inputs.region.display())))?;
    let region = doc
        .to_region()
        .map_err(|e| Failure::Input(format!("{}: {e}", inputs.region.display())))?;
    let records = match &inputs.congestion {
        Some(path) => load_congestion(&read(path)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        None => Vec::new(),
    };
    Ok(Loaded {
        name: doc.name,
        region,
        records,
    })
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("cannot write output: {e}"))),
    }
}

fn fmt_point(p: Point2) -> String {
    format!("({:.5}, {:.5})", p.x, p.y)
}

fn report_table(reports: &[PlacementReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:>12} {:>12} {:>14} {:>7} {:>12}",
        "window", "x", "y", "objective", "inside", "condition"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<12} {:>12.5} {:>12.5} {:>14.6e} {:>7} {:>12.4}",
            r.window, r.location.x, r.location.y, r.objective, r.inside_region, r.condition
        );
    }
    s
}

fn plan(loaded: &Loaded, window: Option<&str>) -> Result<Vec<PlacementReport>, Failure> {
    Ok(match window {
        Some(w) => vec![plan_window(&loaded.region, &loaded.records, w)?],
        None => plan_stations(&loaded.region, &loaded.records)?,
    })
}

fn cmd_solve(
    inputs: &Inputs,
    window: Option<&str>,
    output: Option<&Path>,
    pretty: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let loaded = load(inputs)?;
    let reports = plan(&loaded, window)?;
    let text = if pretty {
        report_table(&reports)
    } else {
        reports_to_json(&reports)
    };
    write_output(output, &text, out)
}

/// Oracle search box: the default box when it holds the region, otherwise the
/// region's bounding box padded by its diagonal on every side.
pub fn search_box_for(region: &PolygonRegion) -> SearchBox {
    let mut b = SearchBox::default();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in region.vertices() {
        x0 = x0.min(v.point.x);
        x1 = x1.max(v.point.x);
        y0 = y0.min(v.point.y);
        y1 = y1.max(v.point.y);
    }
    if x0 >= b.xmin && x1 <= b.xmax && y0 >= b.ymin && y1 <= b.ymax {
        return b;
    }
    let margin = (x1 - x0).hypot(y1 - y0);
    (b.xmin, b.xmax, b.ymin, b.ymax) = (x0 - margin, x1 + margin, y0 - margin, y1 + margin);
    b
}

/// Per-window solver/oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyLine {
    pub window: String,
    pub solver: Point2,
    pub oracle: Point2,
    pub delta: f64,
    pub resolution: f64,
}

/// Runs the oracle on each report's objective, rebuilt from the region lines
/// and the report's own weights.
pub fn verify_reports(region: &PolygonRegion, reports: &[PlacementReport]) -> Vec<VerifyLine> {
    let search = search_box_for(region);
    reports
        .iter()
        .map(|r| {
            let terms: Vec<(f64, f64, f64, f64)> = region
                .lines()
                .iter()
                .zip(&r.per_segment)
                .map(|(l, s)| (l.nx, l.ny, l.d, s.weight * s.weight))
                .collect();
            let f = |p: Point2| {
                terms
                    .iter()
                    .map(|&(nx, ny, d, w2)| {
                        let dist = nx * p.x + ny * p.y - d;
                        w2 * dist * dist
                    })
                    .sum::<f64>()
            };
            let found = grid_minimize(f, &search).expect("search box is valid");
            VerifyLine {
                window: r.window.clone(),
                solver: r.location,
                oracle: found.point,
                delta: r.location.distance(found.point),
                resolution: found.resolution,
            }
        })
        .collect()
}

fn cmd_verify(inputs: &Inputs, tolerance: f64, out: &mut dyn Write) -> Result<(), Failure> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Failure::Input(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let loaded = load(inputs)?;
    let reports = plan(&loaded, None)?;
    let lines = verify_reports(&loaded.region, &reports);
    let mut failed = Vec::new();
    let mut text = String::new();
    for l in &lines {
        let ok = l.delta <= tolerance;
        if !ok {
            failed.push(l.window.clone());
        }
        let _ = writeln!(
            text,
            "{:<12} solver {} oracle {} delta {:.3e} resolution {:.3e} {}",
            l.window,
            fmt_point(l.solver),
            fmt_point(l.oracle),
            l.delta,
            l.resolution,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    write_output(None, &text, out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!(
            "oracle disagrees beyond tolerance {tolerance:e} for: {}",
            failed.join(", ")
        )))
    }
}

/// One row of the published-versus-recomputed comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoRow {
    pub case: &'static str,
    pub published: Point2,
    /// Replay of the printed matrices.
    pub literal: Point2,
    /// Result of the geometry-derived pipeline.
    pub corrected: Point2,
    pub note: &'static str,
}

fn replay(b: &[f64; 7], w: &[f64]) -> Point2 {
    let weights = WeightVector::new(w.to_vec()).expect("published weights are valid");
    solve_coefficients(&fixtures::published_rows(b), &weights)
        .expect("published system is nonsingular")
        .point
}

/// Builds the comparison rows from the bundled fixtures.
pub fn demo_rows() -> Vec<DemoRow> {
    let region =
        crate::traffic::load_region(fixtures::POWER_AND_LIGHT_JSON).expect("bundled region");
    let records = load_congestion(fixtures::RUSH_HOUR_CSV).expect("bundled congestion");
    let reports = plan_stations(&region, &records).expect("bundled inputs solve");
    let corrected = |w: &str| {
        reports
            .iter()
            .find(|r| r.window == w)
            .expect("window present")
            .location
    };
    let three = crate::wls::solve_ls(&fixtures::three_line_example())
        .expect("three-line example solves")
        .point;
    vec![
        DemoRow {
            case: "three-line example",
            published: fixtures::PUBLISHED_THREE_LINE,
            literal: three,
            corrected: three,
            note: "printed as 0.75x + y = 4, solved as 4x + 5y = 20; difference is rounding",
        },
        DemoRow {
            case: "unweighted",
            published: fixtures::PUBLISHED_UNWEIGHTED,
            literal: replay(&fixtures::PUBLISHED_B, &[1.0; 7]),
            corrected: corrected("unweighted"),
            note: "printed b5 = 1.115 repeats b1; the EF edge gives 16.962",
        },
        DemoRow {
            case: "morning",
            published: fixtures::PUBLISHED_MORNING,
            literal: replay(
                &fixtures::PUBLISHED_WEIGHTED_B,
                &fixtures::PUBLISHED_MORNING_W,
            ),
            corrected: corrected("morning"),
            note: "published arithmetic not reproducible from its own matrices",
        },
        DemoRow {
            case: "afternoon",
            published: fixtures::PUBLISHED_AFTERNOON,
            literal: replay(
                &fixtures::PUBLISHED_WEIGHTED_B,
                &fixtures::PUBLISHED_AFTERNOON_W,
            ),
            corrected: corrected("afternoon"),
            note: "published arithmetic not reproducible from its own matrices",
        },
    ]
}

fn cmd_demo_paper(out: &mut dyn Write) -> Result<(), Failure> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:<22} {:<22} {:<22} note",
        "case", "published", "printed matrices", "corrected"
    );
    for r in demo_rows() {
        let _ = writeln!(
            s,
            "{:<20} {:<22} {:<22} {:<22} {}",
            r.case,
            format!("({}, {})", r.published.x, r.published.y),
            fmt_point(r.literal),
            fmt_point(r.corrected),
            r.note
        );
    }
    write_output(None, &s, out)
}

/// GeoJSON feature collection: the region polygon, then one point per report.
pub fn geojson_document(
    name: &str,
    region: &PolygonRegion,
    reports: &[PlacementReport],
) -> FeatureCollection {
    let mut ring: Vec<[f64; 2]> = region
        .vertices()
        .iter()
        .map(|v| [v.point.x, v.point.y])
        .collect();
    ring.push(ring[0]);
    let mut props = JsonObject::new();
    props.insert("name".into(), name.into());
    let mut features = vec![Feature {
        geometry: Some(Geometry::new_polygon([ring])),
        properties: Some(props),
        ..Default::default()
    }];
    for r in reports {
        let mut props = JsonObject::new();
        props.insert("window".into(), r.window.clone().into());
        props.insert("objective".into(), r.objective.into());
        props.insert("inside_region".into(), r.inside_region.into());
        features.push(Feature {
            geometry: Some(Geometry::new_point([r.location.x, r.location.y])),
            properties: Some(props),
            ..Default::default()
        });
    }
    FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    }
}

fn cmd_export_geojson(inputs: &Inputs, output: &Path) -> Result<(), Failure> {
    let loaded = load(inputs)?;
    let reports = plan(&loaded, None)?;
    let doc = geojson_document(&loaded.name, &loaded.region, &reports);
    let mut text = geojson::GeoJson::FeatureCollection(doc).to_string();
    text.push('\n');
    write_output(Some(output), &text, &mut std::io::sink())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() {
                ExitStatus::InputError
            } else {
                ExitStatus::Success
            };
        }
    };
    let result = match &cli.command {
        Command::Solve {
            inputs,
            window,
            output,
            pretty,
        } => cmd_solve(inputs, window.as_deref(), output.as_deref(), *pretty, out),
        Command::Verify { inputs, tolerance } => cmd_verify(inputs, *tolerance, out),
        Command::DemoPaper => cmd_demo_paper(out),
        Command::ExportGeojson { inputs, output } => cmd_export_geojson(inputs, output),
    };
    match result {
        Ok(()) => ExitStatus::Success,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.status()
        }
    }
}
