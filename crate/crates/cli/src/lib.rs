//! Command-line front end for `padlab`: scene files in, exact CSV reports
//! out.

pub mod checks;
pub mod error;
pub mod scene;
pub mod text;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use padlab::cexp::parse_term;
use padlab::distributions::Distribution;
use padlab::extend::{extend_min_coord, regularize, test_split};
use padlab::microlocal::{
    holonomicity_check, smooth_locus_scan, wf_scan, ConormalPresentation, ScanParams, SmoothVerdict,
};
use padlab::resolution::{certify_resolution, resolve, DEFAULT_LEVEL, DEFAULT_PREC};
use padlab::{ExactComplex, Prime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use error::CliError;
use scene::{polynomial, Scene};
use text::{fmt_point, parse_point, parse_points, split_list};

#[derive(Debug, Parser)]
#[command(name = "padlab", version, about = "Exact p-adic distributions, wave front scans and monomial charts")]
pub struct Cli {
    /// The prime; must agree with the scene when both are given.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Working precision for chart construction.
    #[arg(long, global = true)]
    pub prec: Option<i64>,
    /// Digits in float renderings.
    #[arg(long = "float-digits", global = true, default_value_t = 6)]
    pub float_digits: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SceneArg {
    /// Scene file.
    #[arg(long)]
    pub scene: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier transform of a test function.
    Ft {
        #[command(flatten)]
        scene: SceneArg,
        /// Name of a [schwartz] entry.
        #[arg(long = "in")]
        input: String,
    },
    /// Evaluates a distribution on a test function, or an expression at a point.
    Eval {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long, requires = "test", conflicts_with_all = ["expr", "at"])]
        dist: Option<String>,
        #[arg(long)]
        test: Option<String>,
        #[arg(long, requires = "at")]
        expr: Option<String>,
        /// Point such as `(1/3,2)`.
        #[arg(long)]
        at: Option<String>,
    },
    /// Ball masses `ξ(1_{B(x,|r|)})` for `ord r` in a range.
    Bfun {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        dist: String,
        /// Center; repeat for several.
        #[arg(long = "x", required = true)]
        xs: Vec<String>,
        #[arg(long = "ord-min", default_value_t = -4, allow_hyphen_values = true)]
        ord_min: i64,
        #[arg(long = "ord-max", default_value_t = 4, allow_hyphen_values = true)]
        ord_max: i64,
    },
    /// Wave front scan over a region, with an optional holonomicity check.
    Wf {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        dist: String,
        /// Set name or inline box union.
        #[arg(long)]
        region: String,
        #[arg(long, default_value_t = 2)]
        kx: i64,
        #[arg(long, default_value_t = 2)]
        ky: i64,
        #[arg(long, default_value_t = 3)]
        ktest: i64,
        #[arg(long, default_value_t = 1)]
        nmin: i64,
        #[arg(long, default_value_t = 5)]
        nmax: i64,
        /// Graph names whose conormal bundles are candidates.
        #[arg(long)]
        candidates: Option<String>,
        /// Points (joined by `;`) whose full fibers are candidates.
        #[arg(long = "point-candidates")]
        point_candidates: Option<String>,
    },
    /// Locally constant density test on the cosets of a region.
    Smoothlocus {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        dist: String,
        #[arg(long)]
        region: String,
        #[arg(long, default_value_t = 1)]
        level: i64,
        #[arg(long, default_value_t = 2)]
        depth: i64,
    },
    /// Evaluates the minimal-coordinate extension of a distribution.
    Extend {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        dist: String,
        #[arg(long)]
        test: String,
    },
    /// Evaluates the regularization of a distribution along a stratification.
    Regularize {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        dist: String,
        /// Ambient set name or inline box union.
        #[arg(long)]
        ambient: String,
        /// Graph names, largest stratum first.
        #[arg(long)]
        strata: String,
        #[arg(long)]
        test: String,
    },
    /// Monomializing charts with their certificate.
    Resolve {
        /// Polynomials joined by `;`.
        #[arg(long)]
        f: String,
        #[arg(long = "N", default_value_t = 2)]
        exponent: u64,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: i64,
    },
    /// Evaluates the pushforward of a distribution along one resolution chart.
    Pushforward {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        dist: String,
        #[arg(long)]
        f: String,
        #[arg(long = "N", default_value_t = 2)]
        exponent: u64,
        #[arg(long)]
        chart: usize,
        #[arg(long)]
        test: String,
    },
    /// Evaluates `Σ ∫_stratum g φ` over graph strata.
    Loci {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        strata: String,
        #[arg(long)]
        test: String,
    },
    /// Randomized self-checks.
    Check {
        #[arg(value_enum)]
        which: CheckKind,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Plancherel,
    Urysohn,
    Partition,
    FourierInversion,
    BfunHaar,
}

/// Parses arguments and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(report) => match emit(&cli, &report) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("{e}");
                e.code()
            }
        },
        Err((e, partial)) => {
            if let Some(r) = partial {
                let _ = emit(&cli, &r);
            }
            eprintln!("{e}");
            e.code()
        }
    }
}

fn emit(cli: &Cli, report: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => fs::write(path, report).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(report.as_bytes()).and_then(|()| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Usage(format!("cannot write the report: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn load(cli: &Cli, path: &Path) -> Result<Scene, CliError> {
    let src = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let scene = Scene::parse(&src)?;
    if let Some(p) = cli.p {
        if p != scene.p.get() {
            return Err(CliError::Usage(format!("--p {p} disagrees with the scene prime {}", scene.p)));
        }
    }
    Ok(scene)
}

fn prime_flag(cli: &Cli) -> Result<Prime, CliError> {
    let p = cli.p.ok_or_else(|| CliError::Usage("this command needs --p".into()))?;
    Prime::new(p).map_err(|e| CliError::Usage(e.to_string()))
}

fn value_csv(cli: &Cli, label: &str, v: &ExactComplex) -> String {
    format!("name,value_exact,value_float\n{label},\"{v}\",{}\n", v.format_float(cli.float_digits))
}

type Failure = (CliError, Option<String>);

fn fail(e: impl Into<CliError>) -> Failure {
    (e.into(), None)
}

/// Runs a parsed command; on failure, returns the error and any report
/// worth emitting anyway.
pub fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Ft { scene, input } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            let f = s.schwartz(input).map_err(fail)?;
            Ok(f.fourier().map_err(fail)?.to_csv(cli.float_digits))
        }
        Command::Eval { scene, dist, test, expr, at } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            match (dist, test, expr, at) {
                (Some(d), Some(t), None, None) => {
                    let xi = s.distribution(d).map_err(fail)?;
                    let v = xi.eval(s.schwartz(t).map_err(fail)?).map_err(fail)?;
                    Ok(value_csv(cli, &format!("{d}({t})"), &v))
                }
                (None, _, Some(e), Some(x)) => {
                    let x = parse_point(x).map_err(|m| fail(CliError::Usage(m)))?;
                    let v = s.cexp(e).map_err(fail)?.eval(&x).map_err(fail)?;
                    Ok(value_csv(cli, &format!("{e}{}", fmt_point(&x)), &v))
                }
                _ => Err(fail(CliError::Usage("eval needs --dist with --test, or --expr with --at".into()))),
            }
        }
        Command::Bfun { scene, dist, xs, ord_min, ord_max } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            let xi = s.distribution(dist).map_err(fail)?;
            let mut out = String::from("x,ord_r,value_exact,value_float\n");
            for x in xs {
                let x = parse_point(x).map_err(|m| fail(CliError::Usage(m)))?;
                for k in *ord_min..=*ord_max {
                    let v = xi.b_function(&x, &s.p.rpow(k)).map_err(fail)?;
                    out += &format!("\"{}\",{k},\"{v}\",{}\n", fmt_point(&x), v.format_float(cli.float_digits));
                }
            }
            Ok(out)
        }
        Command::Wf {
            scene,
            dist,
            region,
            kx,
            ky,
            ktest,
            nmin,
            nmax,
            candidates,
            point_candidates,
        } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            let xi = s.distribution(dist).map_err(fail)?;
            let region = s.resolve_set(region).map_err(fail)?;
            let params = ScanParams {
                k_x: *kx,
                k_y: *ky,
                k_test: *ktest,
                n_min: *nmin,
                n_max: *nmax,
            };
            params.validate().map_err(|e| fail(CliError::Usage(e.to_string())))?;
            let report = wf_scan(&xi, &region, &params).map_err(fail)?;
            let csv = report.to_csv(cli.float_digits);
            if candidates.is_none() && point_candidates.is_none() {
                return Ok(csv);
            }
            let mut cands = Vec::new();
            for name in split_list(candidates.as_deref().unwrap_or("")) {
                cands.push(ConormalPresentation::new(s.graph(&name).map_err(fail)?.clone()));
            }
            for a in parse_points(point_candidates.as_deref().unwrap_or("")).map_err(|m| fail(CliError::Usage(m)))? {
                cands.push(ConormalPresentation::point(s.p, a));
            }
            let verdict = holonomicity_check(&report, &cands).map_err(fail)?;
            if verdict.passes {
                Ok(csv)
            } else {
                let cells: Vec<String> = verdict.violations.iter().take(4).map(|(x, y)| format!("{x} x {y}")).collect();
                Err((
                    CliError::Cert(format!(
                        "{} nonvanishing cells outside the candidates, e.g. {}",
                        verdict.violations.len(),
                        cells.join(", ")
                    )),
                    Some(csv),
                ))
            }
        }
        Command::Smoothlocus { scene, dist, region, level, depth } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            let xi = s.distribution(dist).map_err(fail)?;
            let region = s.resolve_set(region).map_err(fail)?;
            let cells = smooth_locus_scan(&xi, &region, *level, *depth).map_err(fail)?;
            let mut out = String::from("coset,verdict,value_exact,value_float\n");
            for (b, v) in cells {
                let (tag, val) = match &v {
                    SmoothVerdict::LocallyConstantDensity { gamma } => ("constant_density".to_string(), gamma),
                    SmoothVerdict::NotSmoothAtScale { witness, value } => (format!("not_smooth({witness})"), value),
                };
                out += &format!("\"{b}\",\"{tag}\",\"{val}\",{}\n", val.format_float(cli.float_digits));
            }
            Ok(out)
        }
        Command::Extend { scene, dist, test } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            let xi = extend_min_coord(&s.distribution(dist).map_err(fail)?).map_err(fail)?;
            let v = xi.eval(s.schwartz(test).map_err(fail)?).map_err(fail)?;
            Ok(value_csv(cli, &format!("extend({dist})({test})"), &v))
        }
        Command::Regularize { scene, dist, ambient, strata, test } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            let xi = s.distribution(dist).map_err(fail)?;
            let x = s.resolve_set(ambient).map_err(fail)?;
            let strata = split_list(strata)
                .iter()
                .map(|n| s.graph(n).cloned())
                .collect::<Result<Vec<_>, _>>()
                .map_err(fail)?;
            let split = test_split(&x, &strata).map_err(fail)?;
            let reg = regularize(&xi, &split).map_err(fail)?;
            let v = reg.eval(s.schwartz(test).map_err(fail)?).map_err(fail)?;
            Ok(value_csv(cli, &format!("regularize({dist})({test})"), &v))
        }
        Command::Resolve { f, exponent, level } => {
            let p = prime_flag(cli).map_err(fail)?;
            let polys = parse_polys(f).map_err(fail)?;
            let charts = resolve(&polys, p, *exponent, cli.prec.unwrap_or(DEFAULT_PREC)).map_err(fail)?;
            let cert = certify_resolution(&charts, &polys, *level, cli.seed);
            let report = cert.report();
            if cert.passes() {
                Ok(report)
            } else {
                Err((CliError::Cert("resolution certificate has failing conclusions".into()), Some(report)))
            }
        }
        Command::Pushforward { scene, dist, f, exponent, chart, test } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            let xi = s.distribution(dist).map_err(fail)?;
            let polys = parse_polys(f).map_err(fail)?;
            let charts = resolve(&polys, s.p, *exponent, cli.prec.unwrap_or(DEFAULT_PREC)).map_err(fail)?;
            let c = charts
                .get(*chart)
                .ok_or_else(|| fail(CliError::Usage(format!("chart {chart} out of range (0..{})", charts.len()))))?;
            let cert = certify_resolution(&charts, &polys, DEFAULT_LEVEL, cli.seed);
            if !cert.passes() {
                return Err((CliError::Cert("charts failed certification".into()), Some(cert.report())));
            }
            let phi = s.schwartz(test).map_err(fail)?;
            let map = c.chart_map_at(phi.constancy_level().max(0), true).map_err(fail)?;
            let pushed = Distribution::pushforward_chart(&xi, map).map_err(fail)?;
            let v = pushed.eval(phi).map_err(fail)?;
            Ok(value_csv(cli, &format!("push({dist}, chart {chart})({test})"), &v))
        }
        Command::Loci { scene, expr, strata, test } => {
            let s = load(cli, &scene.scene).map_err(fail)?;
            let strata = split_list(strata)
                .iter()
                .map(|n| s.graph(n).cloned())
                .collect::<Result<Vec<_>, _>>()
                .map_err(fail)?;
            let xi = Distribution::loci(s.cexp(expr).map_err(fail)?.clone(), strata).map_err(fail)?;
            let v = xi.eval(s.schwartz(test).map_err(fail)?).map_err(fail)?;
            Ok(value_csv(cli, &format!("loci({expr})({test})"), &v))
        }
        Command::Check { which, trials, n } => {
            let p = prime_flag(cli).map_err(fail)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let outcome = match which {
                CheckKind::Plancherel => checks::plancherel(p, *n, *trials, &mut rng),
                CheckKind::FourierInversion => checks::fourier_inversion(p, *n, *trials, &mut rng),
                CheckKind::Urysohn => checks::urysohn(p, *n, *trials, &mut rng),
                CheckKind::Partition => checks::partition(p, *n, *trials, &mut rng),
                CheckKind::BfunHaar => checks::bfun_haar(p, &mut rng),
            }
            .map_err(fail)?;
            let line = format!("{}\n", outcome.line());
            if outcome.passed() {
                Ok(line)
            } else {
                Err((CliError::Cert(format!("{} found a counterexample", outcome.name)), Some(line)))
            }
        }
    }
}

fn parse_polys(f: &str) -> Result<Vec<padlab::poly::Poly>, CliError> {
    let terms = f
        .split(';')
        .map(|t| parse_term(t.trim()).map_err(|e| CliError::Usage(format!("--f: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let n = terms.iter().map(|t| t.arity()).max().unwrap_or(0).max(1);
    terms.iter().map(|t| polynomial(t, n)).collect()
}
