//! `umbilic`: surface reports, catalog access, phase portraits, geodesics,
//! identity checks and the claim verification run.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use umbilic::catalog::{self, CatalogEntry};
use umbilic::flows::{self, CurveState, IDENTITY_NAMES};
use umbilic::output::{fmt_f64, to_csv, to_json};
use umbilic::phaseplane::{self, PhaseParams, PhasePoint, PortraitSpec};
use umbilic::verify::{self, Fault, VerifyConfig, IDENTITY_BAND, IDENTITY_STEP};
use umbilic::{HorizontalVector, Point};

/// Largest `|u|` at which an input point is projected onto the surface
/// instead of rejected.
const PROJECT_TOL: f64 = 1e-3;

#[derive(Parser, Debug)]
#[command(
    name = "umbilic",
    version,
    about = "Umbilic hypersurfaces in the Heisenberg group"
)]
struct Cli {
    /// Significant digits of every emitted float.
    #[arg(long, global = true, default_value_t = 17, value_parser = clap::value_parser!(u8).range(1..=17))]
    digits: u8,

    /// Directory for relative output paths.
    #[arg(long, global = true, env = "UMBILIC_OUT_DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Geometric report of a catalog surface at a point, as JSON.
    Report {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// `x_1..x_n,y_1..y_n,t`; points with `|u| <= 1e-3` are projected.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Catalog surfaces and their expected invariants.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// Phase portrait of the `(α, β)` system as CSV `kind,s,alpha,beta`.
    Phase {
        #[arg(long, default_value_t = 2, value_parser = dimension())]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// CSV with columns `alpha,beta` replacing the default seeds.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curvature-λ geodesic as CSV `s,x..,y..,t,v..`.
    Geodesic {
        #[arg(long)]
        lambda: f64,
        /// `x_1..x_n,y_1..y_n,t`.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        /// Unit horizontal direction `v_1..v_2n`; defaults to `e_n` of the
        /// Pansu sphere `S_λ` through the start.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = 3.0)]
        smax: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residuals of the structure identities at umbilic sample points, as JSON.
    Identities {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Difference step along the surface flows.
        #[arg(long, default_value_t = IDENTITY_STEP)]
        h: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Claim verification.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    /// Every entry with default parameters.
    List {
        #[arg(long, default_value_t = 2, value_parser = dimension())]
        n: usize,
    },
    /// One entry.
    Show {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 2, value_parser = dimension())]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Runs every claim and prints one line per claim.
    Run {
        /// Only claims whose id starts with this prefix.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Writes the full report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Injects a deliberate defect (mutation testing).
        #[arg(long, hide = true, value_parser = ["flip-alpha-sign"])]
        inject_fault: Option<String>,
    },
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    /// One of pansu, heisenberg-sphere, shifted-sphere, cylinder, hyperplane.
    #[arg(long)]
    surface: String,
    #[arg(long, default_value_t = 2, value_parser = dimension())]
    n: usize,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
struct ParamArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Hyperplane normal `a_1..a_2n`.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
}

fn dimension() -> impl clap::builder::TypedValueParser<Value = usize> {
    use clap::builder::TypedValueParser;
    clap::value_parser!(u64).range(2..1024).map(|v| v as usize)
}

impl ParamArgs {
    fn entry(&self, name: &str, n: usize) -> Result<CatalogEntry> {
        let mut m = BTreeMap::new();
        for (k, v) in [
            ("lambda", self.lambda),
            ("rho", self.rho),
            ("rho0", self.rho0),
            ("c", self.c),
        ] {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        }
        if let Some(a) = &self.a {
            let a = parse_list(a).context("--a")?;
            if a.len() != 2 * n {
                bail!("--a needs {} components, got {}", 2 * n, a.len());
            }
            for (i, v) in a.into_iter().enumerate() {
                m.insert(format!("a{}", i + 1), v);
            }
        }
        Ok(catalog::by_name(name, n, &m)?)
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad number '{}': {e}", v.trim()))
        })
        .collect()
}

fn parse_point(s: &str, n: Option<usize>) -> Result<Point> {
    let c = parse_list(s)?;
    if let Some(n) = n {
        if c.len() != 2 * n + 1 {
            bail!(
                "point needs {} coordinates for n = {n}, got {}",
                2 * n + 1,
                c.len()
            );
        }
    }
    Ok(Point::from_coords(&c)?)
}

/// Newton-projects `p` onto the entry when `|u| <= PROJECT_TOL`; otherwise
/// keeps `z` and solves `u = 0` for `t` on the side of the given `t`.
fn on_surface(e: &CatalogEntry, p: Point) -> Result<Point> {
    let s = e.surface_for(&p);
    let u = s.value(p.coords()).abs();
    if u <= PROJECT_TOL {
        return Ok(flows::project(s, &p)?);
    }
    let q = vertical(e, &p).ok_or_else(|| {
        anyhow!("point is off the surface (|u| = {u:e} > {PROJECT_TOL:e}) and no surface point lies above z")
    })?;
    eprintln!(
        "umbilic: |u| = {u:e} > {PROJECT_TOL:e}; moved along T from t = {} to t = {}",
        p.t(),
        q.t()
    );
    Ok(q)
}

fn vertical(e: &CatalogEntry, p: &Point) -> Option<Point> {
    let m = 2 * p.n();
    let mut c = p.coords().to_vec();
    if c[m] == 0.0 {
        c[m] = 1e-3;
    }
    let side = c[m].signum();
    for _ in 0..100 {
        let q = Point::from_coords(&c).ok()?;
        let s = e.surface_for(&q);
        let jet = s.jet(&c).ok()?;
        let ut = jet.grad[m];
        if jet.value.abs() <= 1e-14 * (1.0 + ut.abs()) {
            return flows::project(s, &q).ok();
        }
        if ut == 0.0 || !ut.is_finite() {
            return None;
        }
        let next = c[m] - jet.value / ut;
        // Halve towards zero instead of crossing to the other side.
        c[m] = if next * side > 0.0 { next } else { c[m] / 2.0 };
    }
    None
}

struct Out {
    dir: Option<PathBuf>,
    digits: usize,
}

impl Out {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn emit(&self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(p) => {
                let p = self.path(p);
                if let Some(d) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(d)
                        .with_context(|| format!("creating {}", d.display()))?;
                }
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
            }
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    fn json<T: Serialize + ?Sized>(&self, v: &T) -> String {
        to_json(v, self.digits)
    }

    fn num(&self, v: f64) -> String {
        fmt_f64(v, self.digits)
    }
}

#[derive(Serialize)]
struct CatalogJson<'a> {
    name: &'a str,
    n: usize,
    params: &'a BTreeMap<String, f64>,
    formulas: BTreeMap<&'static str, &'static str>,
}

fn catalog_json(e: &CatalogEntry) -> CatalogJson<'_> {
    CatalogJson {
        name: &e.name,
        n: e.n,
        params: &e.params,
        formulas: e.formulas(),
    }
}

#[derive(Serialize)]
struct IdentityRow {
    chart: String,
    point: Vec<f64>,
    residuals: BTreeMap<&'static str, f64>,
    k: f64,
    l: f64,
    alpha: f64,
    en_alpha: f64,
}

#[derive(Serialize)]
struct IdentityReport {
    surface: String,
    n: usize,
    params: BTreeMap<String, f64>,
    h: f64,
    seed: u64,
    max: BTreeMap<&'static str, f64>,
    points: Vec<IdentityRow>,
}

fn identities(e: &CatalogEntry, count: usize, h: f64, seed: u64) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max: BTreeMap<&'static str, f64> = IDENTITY_NAMES.iter().map(|k| (*k, 0.0)).collect();
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let row = verify::at_regular_point(e, &mut rng, IDENTITY_BAND, |s, p| {
            let r = flows::identity_check(s, p, h)?;
            Ok(IdentityRow {
                chart: s.name.clone(),
                point: p.coords().to_vec(),
                residuals: IDENTITY_NAMES.iter().copied().zip(r.residuals).collect(),
                k: r.k,
                l: r.l,
                alpha: r.alpha,
                en_alpha: r.en_alpha,
            })
        })?;
        for (k, v) in &row.residuals {
            let m = max.get_mut(k).expect("same keys");
            *m = m.max(*v);
        }
        points.push(row);
    }
    Ok(IdentityReport {
        surface: e.name.clone(),
        n: e.n,
        params: e.params.clone(),
        h,
        seed,
        max,
        points,
    })
}

fn read_seeds(path: &Path) -> Result<Vec<PhasePoint>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let head = r.headers()?.clone();
    let col = |name: &str| {
        head.iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| anyhow!("{}: missing column '{name}'", path.display()))
    };
    let (ia, ib) = (col("alpha")?, col("beta")?);
    let mut seeds = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            let v = rec.get(i).unwrap_or("").trim();
            v.parse()
                .map_err(|e| anyhow!("{}: bad number '{v}': {e}", path.display()))
        };
        seeds.push(PhasePoint::new(f(ia)?, f(ib)?));
    }
    if seeds.is_empty() {
        bail!("{}: no seeds", path.display());
    }
    Ok(seeds)
}

fn geodesic_csv(
    o: &Out,
    lambda: f64,
    start: &str,
    direction: Option<&str>,
    smax: f64,
) -> Result<String> {
    let p = parse_point(start, None)?;
    let n = p.n();
    let (p, v) = match direction {
        Some(d) => {
            let v = parse_list(d)?;
            if v.len() != 2 * n {
                bail!("direction needs {} components, got {}", 2 * n, v.len());
            }
            (p, HorizontalVector(v))
        }
        None => {
            let e =
                catalog::pansu(lambda, n).context("--direction is required unless lambda > 0")?;
            let p = on_surface(&e, p).context("--direction is required off the Pansu sphere")?;
            let en = e.report(&p)?.frame.en;
            (p, en)
        }
    };
    let samples = flows::geodesic_flow(&CurveState { p, v }, lambda, smax)?;
    let mut header = vec!["s".to_string()];
    header.extend((1..=n).map(|j| format!("x{j}")));
    header.extend((1..=n).map(|j| format!("y{j}")));
    header.push("t".into());
    header.extend((1..=2 * n).map(|a| format!("v{a}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = samples.iter().map(|c| {
        std::iter::once(c.s)
            .chain(c.p.coords().iter().copied())
            .chain(c.v.coeffs().iter().copied())
            .map(|x| o.num(x))
            .collect::<Vec<_>>()
    });
    Ok(to_csv(&header, rows)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let o = Out {
        dir: cli.out_dir,
        digits: cli.digits as usize,
    };
    match cli.cmd {
        Cmd::Report {
            surface,
            point,
            out,
        } => {
            let e = surface.params.entry(&surface.surface, surface.n)?;
            let p = on_surface(&e, parse_point(&point, Some(surface.n))?)?;
            o.emit(out.as_deref(), &o.json(&e.report(&p)?))?;
        }
        Cmd::Catalog {
            cmd: CatalogCmd::List { n },
        } => {
            let entries: Vec<CatalogEntry> = catalog::NAMES
                .iter()
                .map(|name| catalog::by_name(name, n, &BTreeMap::new()))
                .collect::<umbilic::Result<_>>()?;
            let v: Vec<_> = entries.iter().map(catalog_json).collect();
            o.emit(None, &o.json(&v))?;
        }
        Cmd::Catalog {
            cmd: CatalogCmd::Show { name, params, n },
        } => {
            let e = params.entry(&name, n)?;
            o.emit(None, &o.json(&catalog_json(&e)))?;
        }
        Cmd::Phase { n, c, seeds, out } => {
            let pp = PhaseParams::new(n, c)?;
            let mut layout = PortraitSpec::standard(&pp);
            if let Some(f) = seeds {
                layout.seeds = read_seeds(&f)?;
            }
            let rows = phaseplane::portrait(&pp, &layout)?;
            let csv = to_csv(
                &["kind", "s", "alpha", "beta"],
                rows.iter()
                    .map(|r| vec![r.kind.clone(), o.num(r.s), o.num(r.alpha), o.num(r.beta)]),
            )?;
            o.emit(out.as_deref(), &csv)?;
        }
        Cmd::Geodesic {
            lambda,
            start,
            direction,
            smax,
            out,
        } => {
            let csv = geodesic_csv(&o, lambda, &start, direction.as_deref(), smax)?;
            o.emit(out.as_deref(), &csv)?;
        }
        Cmd::Identities {
            surface,
            points,
            h,
            seed,
            out,
        } => {
            let e = surface.params.entry(&surface.surface, surface.n)?;
            o.emit(out.as_deref(), &o.json(&identities(&e, points, h, seed)?))?;
        }
        Cmd::Verify {
            cmd:
                VerifyCmd::Run {
                    only,
                    seed,
                    json,
                    inject_fault,
                },
        } => {
            let fault = inject_fault.map(|_| Fault::FlipAlphaSign);
            let report = verify::run_all(&VerifyConfig { seed, only, fault });
            if report.claims.is_empty() {
                bail!("no claim matches the --only prefix");
            }
            let mut text = String::new();
            for c in &report.claims {
                text += &format!(
                    "{} {} residual={} tolerance={} samples={}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.claim_id,
                    o.num(c.residual),
                    o.num(c.tolerance),
                    c.samples
                );
                if let Some(err) = &c.error {
                    text += &format!(" error={err}");
                }
                text.push('\n');
            }
            o.emit(None, &text)?;
            if let Some(j) = json {
                o.emit(Some(&j), &o.json(&report))?;
            }
            if !report.passed {
                eprintln!(
                    "umbilic: {} of {} claims failed",
                    report.failures().count(),
                    report.claims.len()
                );
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!(
                "umbilic: {}",
                msg.lines()
                    .next()
                    .unwrap_or("usage error")
                    .trim_start_matches("error: ")
            );
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("umbilic: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
