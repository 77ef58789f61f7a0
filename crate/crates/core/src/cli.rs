//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 64 usage
//! error, 65 malformed body spec.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::asymptotics::{
    default_summary, entropy_curve, funk_ratio_curve, lemma2_check, ratio_curve, shell_constants,
    theorem2_bounds, ExperimentReport, ExperimentRow,
};
use crate::body::{BodySpec, BodySummary, ConvexBody, Direction, Point};
use crate::error::Error;
use crate::metric::MetricQuery;
use crate::numerics::ToleranceConfig;
use crate::spheres::{
    ball_volume_direct, ball_volume_polar, lemma1_coeffs, measured_coeffs, sphere_area,
    sphere_area_chords, MAX_RADIUS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SPEC: i32 = 65;

/// Header of per-radius tables.
pub const ROW_HEADER: [&str; 5] = ["t", "sphere_area", "ball_volume", "ratio", "ln_area_over_t"];
/// Header of scalar outputs.
pub const SCALAR_HEADER: [&str; 2] = ["quantity", "value"];

#[derive(Debug, Parser)]
#[command(
    name = "hilbert-kit",
    version,
    about = "Hilbert geometry on smooth convex bodies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct Common {
    /// Body spec JSON file.
    #[arg(long, value_name = "FILE")]
    body: PathBuf,
    /// Write results here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Use the cheap quadrature settings.
    #[arg(long)]
    coarse: bool,
}

#[derive(Debug, Args)]
struct Grid {
    #[arg(long, allow_hyphen_values = true)]
    t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<f64>,
    /// Number of equally spaced radii, endpoints included.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Radial extremes, asymmetry, curvature extremes and tangent radii.
    BodyInfo {
        #[command(flatten)]
        common: Common,
    },
    /// Hilbert distance between two points.
    Distance {
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        p: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        q: Vec<f64>,
    },
    /// Finsler norm and forward/backward Funk norms of a tangent vector.
    Norm {
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        p: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        v: Vec<f64>,
    },
    /// Busemann–Hausdorff and Funk densities at a point.
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        p: Vec<f64>,
    },
    /// Volume of the metric ball of radius t about the origin.
    BallVolume {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Measure of the metric sphere of radius t about the origin.
    SphereArea {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// Also report the inscribed-polygon estimate with this many chords.
        #[arg(long)]
        chords: Option<usize>,
    },
    /// Entropy slopes of sphere areas and ball volumes (default t = 5..8).
    Entropy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Ball volume over sphere area (default t = 1..8).
    Ratio {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// The six volume-ratio bounds with the body summary.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Large-radius gap coefficients at a direction.
    Lemma1 {
        #[command(flatten)]
        common: Common,
        /// Azimuth of the direction.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        /// Height of the direction on S² (spatial bodies).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z: f64,
        /// Radius for the measured coefficients.
        #[arg(long, default_value_t = MAX_RADIUS)]
        t: f64,
        /// Finite-difference step in θ.
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
    /// Smallest radial/normal cosine against its lower bound.
    Lemma2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
    },
    /// Funk sphere length against Funk ball area (planar bodies).
    FunkRatio {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
}

/// Resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub body_spec_path: PathBuf,
    pub command: &'static str,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub tolerances: ToleranceConfig,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(CliError::Validation("radii must be finite".into()));
        }
        if self.t_min >= self.t_max {
            return Err(CliError::Validation(format!(
                "t-min ({}) must be below t-max ({})",
                self.t_min, self.t_max
            )));
        }
        if self.t_max > MAX_RADIUS {
            return Err(CliError::Validation(format!(
                "t-max ({}) exceeds {MAX_RADIUS}",
                self.t_max
            )));
        }
        if self.t_steps < 2 {
            return Err(CliError::Validation("steps must be at least 2".into()));
        }
        Ok(())
    }

    /// Equally spaced radii from t_min to t_max inclusive.
    pub fn t_grid(&self) -> Vec<f64> {
        let n = self.t_steps - 1;
        let h = (self.t_max - self.t_min) / n as f64;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.t_max
                } else {
                    self.t_min + h * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug)]
pub enum CliError {
    Spec(Error),
    Validation(String),
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => EXIT_SPEC,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => f.write_str(m),
            CliError::Spec(e) | CliError::Numerical(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec { .. } => CliError::Spec(e),
            e if e.is_numerical() => CliError::Numerical(e),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(format!("writing output: {e}"))
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Validation(format!("writing output: {e}"))
    }
}

/// Formats a real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Computed output before formatting.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Scalars(Vec<(String, f64)>),
    Rows {
        rows: Vec<ExperimentRow>,
        /// Printed to stderr alongside the table.
        notes: Vec<(String, f64)>,
    },
}

fn scalars<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>) -> Vec<(String, f64)> {
    pairs.into_iter().map(|(k, v)| (k.into(), v)).collect()
}

fn summary_pairs(s: &BodySummary) -> Vec<(String, f64)> {
    scalars([
        ("omega0", s.omega0),
        ("omega1", s.omega1),
        ("asymmetry", s.asymmetry),
        ("curvature_min", s.curvature_min),
        ("curvature_max", s.curvature_max),
        ("inner_radius", s.inner_radius),
        ("outer_radius", s.outer_radius),
    ])
}

fn load_body(path: &Path) -> Result<ConvexBody, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read body spec {}: {e}", path.display()))
    })?;
    let spec = BodySpec::from_json(&text)?;
    Ok(ConvexBody::new(spec)?)
}

fn point(body: &ConvexBody, coords: &[f64]) -> Result<Point, CliError> {
    Ok(body.point(coords)?)
}

fn report_rows(report: ExperimentReport, mut notes: Vec<(String, f64)>) -> Output {
    let c = report.constants;
    notes.extend(scalars([
        ("d1", c.d1),
        ("d2", c.d2),
        ("c1", c.c1),
        ("c2", c.c2),
    ]));
    Output::Rows {
        rows: report.rows,
        notes,
    }
}

fn run_config(
    name: &'static str,
    common: &Common,
    grid: Option<(&Grid, (f64, f64, usize))>,
) -> RunConfig {
    let (t_min, t_max, t_steps) = match grid {
        Some((g, (lo, hi, n))) => (
            g.t_min.unwrap_or(lo),
            g.t_max.unwrap_or(hi),
            g.steps.unwrap_or(n),
        ),
        None => (1.0, MAX_RADIUS, 8),
    };
    RunConfig {
        body_spec_path: common.body.clone(),
        command: name,
        t_min,
        t_max,
        t_steps,
        tolerances: if common.coarse {
            ToleranceConfig::coarse()
        } else {
            ToleranceConfig::default()
        },
        out: common.out.clone(),
        format: common.format,
    }
}

fn execute(command: &Command) -> Result<(RunConfig, Output), CliError> {
    use Command::*;
    let (common, grid, name, defaults) = match command {
        BodyInfo { common } => (common, None, "body-info", None),
        Distance { common, .. } => (common, None, "distance", None),
        Norm { common, .. } => (common, None, "norm", None),
        Density { common, .. } => (common, None, "density", None),
        BallVolume { common, .. } => (common, None, "ball-volume", None),
        SphereArea { common, .. } => (common, None, "sphere-area", None),
        Entropy { common, grid } => (common, Some(grid), "entropy", Some((5.0, 8.0, 4))),
        Ratio { common, grid } => (common, Some(grid), "ratio", Some((1.0, 8.0, 8))),
        Bounds { common } => (common, None, "bounds", None),
        Lemma1 { common, .. } => (common, None, "lemma1", None),
        Lemma2 { common, .. } => (common, None, "lemma2", None),
        FunkRatio { common, grid } => (common, Some(grid), "funk-ratio", Some((1.0, 8.0, 8))),
    };
    let config = run_config(name, common, grid.zip(defaults));
    config.validate()?;
    let body = load_body(&config.body_spec_path)?;
    let q = MetricQuery::new(body, config.tolerances.clone());
    let body = q.body();

    let output = match command {
        BodyInfo { .. } => {
            let mut pairs = scalars([("dim", body.dim() as f64)]);
            pairs.extend(summary_pairs(&default_summary(body)));
            pairs.push((
                "centrally_symmetric".into(),
                if body.is_centrally_symmetric() {
                    1.0
                } else {
                    0.0
                },
            ));
            Output::Scalars(pairs)
        }
        Distance { p, q: qq, .. } => {
            let (a, b) = (point(body, p)?, point(body, qq)?);
            Output::Scalars(scalars([("distance", q.hilbert_distance(&a, &b)?)]))
        }
        Norm { p, v, .. } => {
            let (a, w) = (point(body, p)?, point(body, v)?);
            let mut pairs = scalars([("finsler_norm", q.finsler_norm(&a, &w)?)]);
            if w.norm() > 0.0 {
                pairs.push(("funk_norm".into(), q.funk_norm(&a, &w)?));
                pairs.push(("funk_norm_reverse".into(), q.funk_norm(&a, &-w)?));
            }
            Output::Scalars(pairs)
        }
        Density { p, .. } => {
            let a = point(body, p)?;
            Output::Scalars(scalars([
                ("busemann_density", q.busemann_density(&a)?),
                ("funk_density", q.funk_density(&a)?),
            ]))
        }
        BallVolume { t, .. } => {
            let mut pairs = scalars([("ball_volume", ball_volume_polar(&q, *t)?)]);
            if body.dim() == 2 {
                pairs.push(("ball_volume_direct".into(), ball_volume_direct(&q, *t)?));
            }
            Output::Scalars(pairs)
        }
        SphereArea { t, chords, .. } => {
            let mut pairs = scalars([("sphere_area", sphere_area(&q, *t)?)]);
            if let Some(n) = chords {
                pairs.push(("sphere_area_chords".into(), sphere_area_chords(&q, *t, *n)?));
            }
            Output::Scalars(pairs)
        }
        Entropy { .. } => {
            let (report, fit) = entropy_curve(&q, &config.t_grid())?;
            report_rows(
                report,
                scalars([
                    ("entropy_spheres", fit.spheres),
                    ("entropy_balls", fit.balls),
                ]),
            )
        }
        Ratio { .. } => report_rows(ratio_curve(&q, &config.t_grid())?, Vec::new()),
        FunkRatio { .. } => report_rows(funk_ratio_curve(&q, &config.t_grid())?, Vec::new()),
        Bounds { .. } => {
            let summary = default_summary(body);
            let bounds = theorem2_bounds(body, &summary, q.config())?;
            let c = shell_constants(body, &summary, q.config())?;
            let mut pairs = scalars(bounds.as_pairs());
            pairs.extend(summary_pairs(&summary));
            pairs.extend(scalars([
                ("d1", c.d1),
                ("d2", c.d2),
                ("c1", c.c1),
                ("c2", c.c2),
            ]));
            Output::Scalars(pairs)
        }
        Lemma1 { theta, z, t, h, .. } => {
            let u = if body.dim() == 2 {
                Direction::from_angle(*theta)
            } else {
                if !(-1.0..=1.0).contains(z) {
                    return Err(CliError::Validation(format!("z ({z}) outside [-1, 1]")));
                }
                Direction::from_spherical(*z, *theta)
            };
            let coeffs = lemma1_coeffs(body, &u);
            let mut pairs = scalars([("delta", coeffs.delta)]);
            for (name, v) in [
                ("delta1", coeffs.delta1),
                ("delta2", coeffs.delta2),
                ("delta2_display", coeffs.delta2_display),
            ] {
                if let Some(v) = v {
                    pairs.push((name.into(), v));
                }
            }
            if body.dim() == 2 {
                let [m0, m1, m2] = measured_coeffs(body, *theta, *t, *h)?;
                pairs.extend(scalars([
                    ("measured_delta", m0),
                    ("measured_delta1", m1),
                    ("measured_delta2", m2),
                ]));
            }
            Output::Scalars(pairs)
        }
        Lemma2 { grid, .. } => {
            let summary = default_summary(body);
            let report = lemma2_check(body, &summary, *grid)?;
            Output::Scalars(scalars([
                ("min_cos", report.min_cos),
                ("bound", report.bound),
                ("holds", if report.holds() { 1.0 } else { 0.0 }),
            ]))
        }
    };
    Ok((config, output))
}

/// Writes `quantity,value` or per-radius CSV.
pub fn write_csv<W: Write>(out: W, output: &Output) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    match output {
        Output::Scalars(pairs) => {
            w.write_record(SCALAR_HEADER)?;
            for (k, v) in pairs {
                w.write_record([k.as_str(), &format_real(*v)])?;
            }
        }
        Output::Rows { rows, .. } => {
            w.write_record(ROW_HEADER)?;
            for r in rows {
                w.write_record(
                    [r.t, r.sphere_area, r.ball_volume, r.ratio, r.ln_area_over_t].map(format_real),
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_text<W: Write>(mut out: W, output: &Output) -> io::Result<()> {
    match output {
        Output::Scalars(pairs) => {
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in pairs {
                writeln!(out, "{k:<width$}  {v}")?;
            }
        }
        Output::Rows { rows, notes } => {
            writeln!(
                out,
                "{:>6}  {:>24}  {:>24}  {:>22}  {:>22}",
                "t", "sphere_area", "ball_volume", "ratio", "ln_area_over_t"
            )?;
            for r in rows {
                writeln!(
                    out,
                    "{:>6}  {:>24.12e}  {:>24.12e}  {:>22.15}  {:>22.15}",
                    r.t, r.sphere_area, r.ball_volume, r.ratio, r.ln_area_over_t
                )?;
            }
            for (k, v) in notes {
                writeln!(out, "{k} = {v}")?;
            }
        }
    }
    Ok(())
}

/// Reads a per-radius CSV back into rows.
pub fn read_rows<R: io::Read>(input: R) -> Result<Vec<ExperimentRow>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().collect()
}

/// Reads a `quantity,value` CSV back into pairs.
pub fn read_scalars<R: io::Read>(input: R) -> Result<Vec<(String, f64)>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().collect()
}

fn emit(config: &RunConfig, output: &Output) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match config.format {
        OutputFormat::Csv => write_csv(&mut buf, output)?,
        OutputFormat::Text => write_text(&mut buf, output)?,
    }
    match &config.out {
        Some(path) => fs::write(path, &buf)?,
        None => io::stdout().write_all(&buf)?,
    }
    if let (OutputFormat::Csv, Output::Rows { notes, .. }) = (config.format, output) {
        let mut err = io::stderr();
        for (k, v) in notes {
            writeln!(err, "{k} = {}", format_real(*v))?;
        }
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = execute(&cli.command).and_then(|(config, output)| emit(&config, &output));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let kind = match &e {
                CliError::Spec(_) => "malformed body spec",
                CliError::Numerical(_) => "numerical failure",
                CliError::Validation(_) => "invalid input",
            };
            eprintln!("hilbert-kit: {kind}: {e}");
            e.exit_code()
        }
    }
}
