//! The `planar` command line.
//!
//! Every subcommand reads a field (`--builtin NAME` or `--field FILE`),
//! writes its artifacts into `--out` (default `$PLANAR_OUT`, else the
//! working directory) and returns 0 on success, 2 when the hypotheses are
//! violated or not certified, 1 on usage or runtime errors.

pub mod portrait;

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify_critical_point, Classification, ClassifyConfig, GasProbeConfig, Verdict};
use crate::error::{Error, Result};
use crate::field::{Builtin, FieldDef};
use crate::flow::{integrate, liouville_residual, IntegratorConfig, LiouvilleConfig, LiouvilleReport, Polygon};
use crate::geom::{Point, Region};
use crate::hamiltonian::{
    conservation_check, hamiltonian_residual, hessian_extremum, reconstruct_hamiltonian, ConservationReport, GridHeader, HamiltonianConfig,
    HessianReport,
};
use crate::poincare::{detect_cycles, return_profile, write_profile_csv, PoincareConfig, Section};
use crate::report::{Envelope, ReportKind};
use crate::verify::{
    find_critical_points, verify_hypotheses, CertStatus, CriticalConfig, CriticalPoints, VerificationReport, VerifyConfig,
};
use portrait::{clip_polyline, zero_contour, Portrait};

pub const OUT_DIR_ENV: &str = "PLANAR_OUT";

#[derive(Debug, Parser)]
#[command(name = "planar", version, about = "Global stability analysis for planar vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify D > 0, T <= 0 and the eigenvalue condition on a region -> report.json
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 12)]
        max_depth: u32,
        #[arg(long, default_value_t = 1e-12, value_parser = non_negative)]
        tol: f64,
    },
    /// Locate critical points and classify them -> classification.json
    Classify {
        #[command(flatten)]
        common: Common,
        /// Classify this point instead of searching the region.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Option<Point>,
        #[arg(long, default_value_t = 1e-2, value_parser = positive)]
        gas_rho: f64,
        #[arg(long, default_value_t = 16)]
        gas_angles: usize,
    },
    /// Orbit bundle and nullclines -> portrait.svg, orbits.csv
    Portrait {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        integ: Integ,
        #[arg(long, default_value_t = 24)]
        orbits: usize,
        /// Integration time in each direction.
        #[arg(long, default_value_t = 20.0, value_parser = positive)]
        t_end: f64,
        #[arg(long, default_value_t = 800.0, value_parser = positive)]
        width: f64,
        /// Cells per side for the nullcline contours.
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Return-map profile on a ray section -> returnmap.csv
    Poincare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        integ: Integ,
        #[arg(long, default_value = "0,0", value_parser = parse_point, allow_hyphen_values = true)]
        center: Point,
        /// Ray direction in radians.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        angle: f64,
        #[arg(long, default_value = "0.1,3", value_parser = parse_pair)]
        r_range: (f64, f64),
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 1e3, value_parser = positive)]
        t_max: f64,
    },
    /// Check dA/dt = integral of T over a polygon -> liouville.json
    Liouville {
        #[command(flatten)]
        common: Common,
        /// CSV file with an `x,y` header and counter-clockwise vertices.
        #[arg(long, conflicts_with = "circle")]
        polygon: Option<PathBuf>,
        /// Regular polygon `cx,cy,r,n`.
        #[arg(long, value_parser = parse_circle, allow_hyphen_values = true)]
        circle: Option<(Point, f64, usize)>,
    },
    /// Reconstruct H where T vanishes -> hgrid.csv, hgrid.json, hamiltonian.json
    Hamiltonian {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        integ: Integ,
        #[arg(long, default_value = "0,0", value_parser = parse_point, allow_hyphen_values = true)]
        base: Point,
        /// Grid nodes per side.
        #[arg(long, default_value_t = 513)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Start of the conservation orbit.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        x0: Option<Point>,
        #[arg(long, default_value_t = 20.0, value_parser = positive)]
        t_end: f64,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// One of linear_rotation, cubic_damped, bump_annulus.
    #[arg(long, required_unless_present = "field", conflicts_with = "field")]
    builtin: Option<Builtin>,
    /// Field file with `P = ...` / `Q = ...` and optional `param name = value` lines.
    #[arg(long)]
    field: Option<PathBuf>,
    /// `xmin,xmax,ymin,ymax`.
    #[arg(long, default_value = "-5,5,-5,5", value_parser = parse_region, allow_hyphen_values = true)]
    region: Region,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave the generation time out of JSON reports.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct Integ {
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12, value_parser = positive)]
    atol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
}

impl Integ {
    fn config(&self) -> IntegratorConfig {
        IntegratorConfig { max_steps: self.max_steps, ..IntegratorConfig::with_tolerances(self.rtol, self.atol) }
    }
}

fn numbers(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|e| e.to_string())?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

fn parse_region(s: &str) -> std::result::Result<Region, String> {
    let v = numbers(s, 4)?;
    Region::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let v = numbers(s, 2)?;
    Ok(Point::new(v[0], v[1]))
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = numbers(s, 2)?;
    if !(0.0 < v[0] && v[0] < v[1]) {
        return Err(format!("need 0 < lo < hi, got {},{}", v[0], v[1]));
    }
    Ok((v[0], v[1]))
}

fn parse_circle(s: &str) -> std::result::Result<(Point, f64, usize), String> {
    let v = numbers(s, 4)?;
    if v[2] <= 0.0 || v[3] < 3.0 || v[3].fract() != 0.0 {
        return Err("need a positive radius and an integer vertex count >= 3".into());
    }
    Ok((Point::new(v[0], v[1]), v[2], v[3] as usize))
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive finite number, got `{s}`")),
    }
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a non-negative finite number, got `{s}`")),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            if code != 0 && !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return code;
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::NotCertified) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum Outcome {
    Success,
    NotCertified,
}

struct Ctx {
    field: FieldDef,
    region: Region,
    out: PathBuf,
    seed: u64,
    timestamp: bool,
}

impl Ctx {
    fn new(c: Common) -> Result<Self> {
        let field = match (c.builtin, &c.field) {
            (Some(b), _) => FieldDef::builtin(b),
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
                FieldDef::from_config(&text)?
            }
            (None, None) => return Err(Error::InvalidArgument("one of --builtin or --field is required".into())),
        };
        fs::create_dir_all(&c.out)?;
        Ok(Self { field, region: c.region, out: c.out, seed: c.seed, timestamp: !c.no_timestamp })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_report<T: Serialize>(&self, name: &str, kind: ReportKind, data: &T) -> Result<PathBuf> {
        let mut env = Envelope::new(kind, &self.field, data);
        if self.timestamp {
            env = env.stamped();
        }
        let path = self.path(name);
        env.write(&path)?;
        Ok(path)
    }
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

#[derive(Serialize)]
struct VerifyData<'a> {
    region: Region,
    config: VerifyConfig,
    all_certified: bool,
    reports: &'a [VerificationReport],
}

#[derive(Serialize)]
struct ClassifyData<'a> {
    region: Region,
    critical_points: Option<&'a CriticalPoints>,
    classifications: &'a [Classification],
}

#[derive(Serialize)]
struct LiouvilleData {
    polygon_vertices: usize,
    polygon_area: f64,
    report: LiouvilleReport,
    /// `max(1e-4, 1% of |∬T|)`.
    tolerance: f64,
    within_tolerance: bool,
}

#[derive(Serialize)]
struct HamiltonianData {
    region: Region,
    base: Point,
    grid: GridHeader,
    residual: f64,
    residual_samples: usize,
    seed: u64,
    hessian: Option<HessianReport>,
    conservation: Option<ConservationReport>,
    conservation_start: Option<Point>,
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Verify { common, max_depth, tol } => {
            let ctx = Ctx::new(common)?;
            let config = VerifyConfig { max_depth, tol, ..Default::default() };
            let reports = verify_hypotheses(&ctx.field, &ctx.region, &config)?;
            for r in &reports {
                println!("{:<22} {:?}", format!("{:?}", r.property), r.status);
            }
            let all_certified = reports.iter().all(|r| r.status == CertStatus::Certified);
            let path = ctx.write_report(
                "report.json",
                ReportKind::Verification,
                &VerifyData { region: ctx.region, config, all_certified, reports: &reports },
            )?;
            announce(&path);
            let violated = reports.iter().any(|r| r.status == CertStatus::Violated);
            Ok(if violated { Outcome::NotCertified } else { Outcome::Success })
        }
        Command::Classify { common, point, gas_rho, gas_angles } => {
            let ctx = Ctx::new(common)?;
            let cfg = ClassifyConfig { gas: GasProbeConfig { rho: gas_rho, ..Default::default() }, gas_angles, ..Default::default() };
            let (critical, points) = match point {
                Some(p) => (None, vec![p]),
                None => {
                    let cp = find_critical_points(&ctx.field, &ctx.region, &CriticalConfig::default())?;
                    let pts = cp.points.clone();
                    (Some(cp), pts)
                }
            };
            if points.is_empty() {
                return Err(Error::InvalidArgument(format!("no critical point found in {}", ctx.region)));
            }
            let classes = points.iter().map(|&o| classify_critical_point(&ctx.field, o, &ctx.region, &cfg)).collect::<Result<Vec<_>>>()?;
            for c in &classes {
                let extra = c.attractor_radius().map(|r| format!(" (attractor radius {r:.6})")).unwrap_or_default();
                println!("{}: {}{extra}", c.point, c.verdict.name());
                for d in &c.diagnostics {
                    println!("  {d}");
                }
            }
            let data = ClassifyData { region: ctx.region, critical_points: critical.as_ref(), classifications: &classes };
            announce(&ctx.write_report("classification.json", ReportKind::Classification, &data)?);
            let bad = classes.iter().any(|c| c.verdict == Verdict::HypothesesNotCertified);
            Ok(if bad { Outcome::NotCertified } else { Outcome::Success })
        }
        Command::Portrait { common, integ, orbits, t_end, width, grid } => {
            let ctx = Ctx::new(common)?;
            let cfg = integ.config();
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let backward = ctx.field.reversed();
            let mut csv = String::from("orbit,t,x,y\n");
            let mut pieces = Vec::new();
            for k in 0..orbits {
                let start = ctx.region.lerp(rng.gen(), rng.gen());
                let fwd = integrate(&ctx.field, start, t_end, &cfg)?.resample(400);
                let bwd = integrate(&backward, start, t_end, &cfg)?.resample(400);
                let mut samples: Vec<(f64, Point)> = bwd.into_iter().skip(1).rev().map(|(t, p)| (-t, p)).collect();
                samples.extend(fwd);
                for (t, p) in &samples {
                    csv.push_str(&format!("{k},{t:?},{:?},{:?}\n", p.x, p.y));
                }
                let pts: Vec<Point> = samples.iter().map(|s| s.1).collect();
                pieces.extend(clip_polyline(&pts, &ctx.region));
            }
            let p_null = zero_contour(&ctx.region, grid, |p| ctx.field.eval(p.x, p.y).0);
            let q_null = zero_contour(&ctx.region, grid, |p| ctx.field.eval(p.x, p.y).1);
            let critical = find_critical_points(&ctx.field, &ctx.region, &CriticalConfig::default())?.points;
            let title = format!("{} on {}", ctx.field.name, ctx.region);
            let svg = Portrait {
                region: &ctx.region,
                title: &title,
                orbits: &pieces,
                p_nullcline: &p_null,
                q_nullcline: &q_null,
                critical: &critical,
                width,
            }
            .to_svg();
            let (svg_path, csv_path) = (ctx.path("portrait.svg"), ctx.path("orbits.csv"));
            fs::write(&svg_path, svg)?;
            fs::write(&csv_path, csv)?;
            announce(&svg_path);
            announce(&csv_path);
            Ok(Outcome::Success)
        }
        Command::Poincare { common, integ, center, angle, r_range, samples, t_max } => {
            let ctx = Ctx::new(common)?;
            let cfg = PoincareConfig { integrator: integ.config(), t_max, ..Default::default() };
            let section = Section::from_angle(center, angle);
            let profile = return_profile(&ctx.field, &section, r_range, samples, &cfg)?;
            let path = ctx.path("returnmap.csv");
            write_profile_csv(&profile, BufWriter::new(fs::File::create(&path)?))?;
            let cycles = detect_cycles(&ctx.field, &section, r_range, &cfg)?;
            for band in &cycles.neutral_bands {
                println!("neutral band r in [{:.6}, {:.6}]", band.0, band.1);
            }
            for c in &cycles.isolated {
                println!("isolated cycle r = {:.8} ({:?})", c.r, c.stability);
            }
            if cycles.not_found > 0 {
                println!("{} samples did not return", cycles.not_found);
            }
            announce(&path);
            Ok(Outcome::Success)
        }
        Command::Liouville { common, polygon, circle } => {
            let ctx = Ctx::new(common)?;
            let poly = match (polygon, circle) {
                (Some(path), _) => Polygon::from_csv(&fs::read_to_string(&path)?)?,
                (None, Some((c, r, n))) => Polygon::regular(c, r, n)?,
                (None, None) => Polygon::rect(&ctx.region),
            };
            let report = liouville_residual(&ctx.field, &poly, &LiouvilleConfig::default())?;
            let tolerance = (0.01 * report.integral_t.abs()).max(1e-4);
            let within_tolerance = report.residual.abs() < tolerance;
            println!("dA/dt = {:.10e}, integral of T = {:.10e}, residual = {:.3e}", report.da_dt, report.integral_t, report.residual);
            let data = LiouvilleData { polygon_vertices: poly.len(), polygon_area: poly.area(), report, tolerance, within_tolerance };
            announce(&ctx.write_report("liouville.json", ReportKind::Liouville, &data)?);
            Ok(Outcome::Success)
        }
        Command::Hamiltonian { common, integ, base, n, samples, x0, t_end } => {
            let ctx = Ctx::new(common)?;
            let grid = match reconstruct_hamiltonian(&ctx.field, base, &ctx.region, n, &HamiltonianConfig::default()) {
                Ok(g) => g,
                Err(Error::Refused(why)) => {
                    eprintln!("refused: {why}");
                    return Ok(Outcome::NotCertified);
                }
                Err(e) => return Err(e),
            };
            let residual = hamiltonian_residual(&ctx.field, &grid, samples, ctx.seed)?;
            let hessian = find_critical_points(&ctx.field, &ctx.region, &CriticalConfig::default())?
                .points
                .first()
                .map(|&o| hessian_extremum(&ctx.field, o))
                .transpose()?;
            let start = x0.unwrap_or_else(|| base + Point::new(0.25 * ctx.region.inner_radius(base), 0.0));
            let conservation = match conservation_check(&ctx.field, &grid, start, t_end, &integ.config()) {
                Ok(c) => Some(c),
                Err(Error::InvalidArgument(_)) => None,
                Err(e) => return Err(e),
            };
            println!("residual {residual:.3e}");
            if let Some(c) = &conservation {
                println!("max drift {:.3e}{}", c.max_drift, if c.partial { " (orbit left the grid)" } else { "" });
            }
            let csv_path = ctx.path("hgrid.csv");
            grid.write_csv(BufWriter::new(fs::File::create(&csv_path)?))?;
            announce(&csv_path);
            announce(&ctx.write_report("hgrid.json", ReportKind::HamiltonianGrid, &grid.header())?);
            let data = HamiltonianData {
                region: ctx.region,
                base,
                grid: grid.header(),
                residual,
                residual_samples: samples,
                seed: ctx.seed,
                hessian,
                conservation,
                conservation_start: conservation.map(|_| start),
            };
            announce(&ctx.write_report("hamiltonian.json", ReportKind::Hamiltonian, &data)?);
            Ok(Outcome::Success)
        }
    }
}
