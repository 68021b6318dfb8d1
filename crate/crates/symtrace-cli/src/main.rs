//! Command-line front end: operator classification, certificate search,
//! fractal measure generation, trace-inequality verification runs, and the
//! strict-convergence demos.
//!
//! Exit codes: 0 = run completed (whatever the verdicts), 1 = internal
//! error, 2 = invalid user input. Reports are append-only: an existing file
//! is never overwritten, a numbered sibling is created instead.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use symtrace::catalog::{catalog, CATALOG_NAMES};
use symtrace::classify::{classify_full, search_certificate, verify_certificate, ClassifyConfig};
use symtrace::fields::{DiffMode, GridBox};
use symtrace::harness::{
    self, adams_ratio, blowup_noncancelling, blowup_nonelliptic, default_cone_cantor,
    indicator_disk, mollification_strict_check, multiplicative_ratio, strict_discontinuity_demo,
    sweep_halfspace, sweep_sobolev, wirtinger_blowup, BlowupConfig, FamilyConfig,
};
use symtrace::measures::{
    self, ahlfors_profile, build_cantor_product, estimate_morrey_norm, map_into_cone,
    shell_divergence_sums,
};
use symtrace::rational::{parse_rat, Rat};
use symtrace::symbol::HomogeneousSymbol;

#[derive(Parser)]
#[command(
    name = "symtrace",
    version,
    about = "Classify vectorial differential operators by their Fourier symbols and verify \
             limiting trace inequalities at desk scale"
)]
struct Cli {
    /// Cap the worker thread count.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory for report files.
    #[arg(long, global = true, env = "SYMTRACE_OUT", default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OperatorSource {
    /// Built-in operator name.
    #[arg(long, value_parser = CATALOG_NAMES)]
    catalog: Option<String>,
    /// Operator spec file (JSON).
    #[arg(long, conflicts_with = "catalog")]
    spec: Option<PathBuf>,
    /// Ambient dimension for catalog operators.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Order for catalog families that take one.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the four class predicates and write a classification report.
    Classify {
        #[command(flatten)]
        source: OperatorSource,
        /// Seed for every randomized predicate.
        #[arg(long)]
        seed: u64,
        /// Cheaper sampling settings.
        #[arg(long)]
        quick: bool,
        /// Also write the operator spec document for inspection.
        #[arg(long)]
        emit_spec: bool,
    },
    /// Search for an exact divisibility certificate and verify it.
    Certificate {
        #[command(flatten)]
        source: OperatorSource,
        /// Largest certificate degree to try.
        #[arg(long)]
        dmax: Option<u32>,
        /// Seed for the grid consistency spot-check.
        #[arg(long)]
        seed: u64,
    },
    /// Build a Cantor-type fractal measure and report its ball statistics.
    Fractal {
        /// Target Hausdorff dimension.
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        level: u32,
        /// Cone axis components, comma separated, to arc-compress into.
        #[arg(long)]
        cone_axis: Option<String>,
        /// Cone half-angle in radians.
        #[arg(long)]
        cone_angle: Option<f64>,
        /// Seed for the Morrey ball sampling.
        #[arg(long)]
        seed: u64,
        /// Also write the compact binary recipe next to the JSON file.
        #[arg(long)]
        binary: bool,
    },
    /// Run a trace-inequality test family.
    Verify {
        #[command(subcommand)]
        test: VerifyCommand,
    },
    /// Run a named demo with documented defaults.
    Demo {
        #[arg(value_parser = ["strict-discontinuity", "wirtinger-blowup", "mollification-strict"])]
        name: String,
        /// Seed recorded in the demo reports.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: OperatorSource,
    /// Codimension parameter s ∈ [0, 1), exact rational or decimal.
    #[arg(long, default_value = "0")]
    s: String,
    /// Measure file (JSON); a default cone-Cantor of dimension n−s is built
    /// when omitted.
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Also rerun at doubled resolution for the stability check.
    #[arg(long)]
    double_resolution: bool,
    #[arg(long, default_value_t = 16)]
    members: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Sup of trace ratios over a random bump family (Sobolev-type).
    Sobolev(SweepArgs),
    /// Multiplicative trace ratios at a given θ.
    Multiplicative {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        theta: f64,
    },
    /// Riesz-potential (Adams-type) ratios at a given α.
    Adams {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// Blow-up family for a non-elliptic operator along a symbol zero.
    BlowupNonelliptic {
        #[command(flatten)]
        source: OperatorSource,
        /// Frequency ξ₀ with A[ξ₀]v = 0, comma separated.
        #[arg(long)]
        xi0: String,
        /// Kernel vector v, comma separated.
        #[arg(long)]
        v: String,
        #[arg(long, default_value = "1/2")]
        s: String,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long, default_value_t = 2.0)]
        box_side: f64,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Blow-up family for an elliptic non-cancelling operator.
    BlowupNoncancelling {
        #[command(flatten)]
        source: OperatorSource,
        /// Residual image direction w; detected from the cancellation check
        /// when omitted.
        #[arg(long)]
        w: Option<String>,
        #[arg(long, default_value = "1/2")]
        s: String,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long, default_value_t = 2.0)]
        box_side: f64,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, default_value_t = 6)]
        measure_level: u32,
        #[arg(long)]
        seed: u64,
    },
    /// Hyperplane trace ratios over a random bump family (s = 1 endpoint).
    Halfspace {
        #[command(flatten)]
        source: OperatorSource,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long)]
        double_resolution: bool,
        #[arg(long, default_value_t = 16)]
        members: usize,
        /// Label the run exploratory (forced for escnotcell, whose endpoint
        /// behavior is an open question).
        #[arg(long)]
        exploratory: bool,
        #[arg(long)]
        seed: u64,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn user(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<harness::HarnessError> for CliError {
    fn from(e: harness::HarnessError) -> Self {
        use harness::HarnessError::*;
        match e {
            SRange(_) | ThetaRange { .. } | AdamsAlphaRange { .. } | WitnessRejected(_)
            | NotAxisAligned | ZeroDenominator(_) => CliError::user(e.to_string()),
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<measures::MeasureError> for CliError {
    fn from(e: measures::MeasureError) -> Self {
        CliError::user(e.to_string())
    }
}

fn load_operator(source: &OperatorSource) -> Result<HomogeneousSymbol, CliError> {
    match (&source.catalog, &source.spec) {
        (Some(name), None) => catalog(name, source.n, source.k)
            .map_err(|e| CliError::user(format!("catalog operator: {e}"))),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::user(format!("cannot read spec file {}: {e}", path.display()))
            })?;
            HomogeneousSymbol::from_spec_string(&text)
                .map_err(|e| CliError::user(format!("{}: {e}", path.display())))
        }
        _ => Err(CliError::user("exactly one of --catalog or --spec is required")),
    }
}

fn parse_vector(text: &str, expect: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let vals: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| CliError::user(format!("bad {what} {text:?}: {e}")))?;
    if vals.len() != expect {
        return Err(CliError::user(format!("{what} has {} entries, expected {expect}", vals.len())));
    }
    Ok(vals)
}

fn parse_s(text: &str) -> Result<Rat, CliError> {
    parse_rat(text).map_err(|e| CliError::user(format!("bad codimension s: {e}")))
}

/// Append-only writer: never overwrites, picks the first free numbered name.
fn write_report(dir: &Path, stem: &str, ext: &str, body: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::internal(format!("cannot create {}: {e}", dir.display())))?;
    for attempt in 0.. {
        let name = if attempt == 0 {
            format!("{stem}.{ext}")
        } else {
            format!("{stem}.{}.{ext}", attempt + 1)
        };
        let path = dir.join(name);
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                use std::io::Write;
                file.write_all(body.as_bytes())
                    .map_err(|e| CliError::internal(format!("write {}: {e}", path.display())))?;
                return Ok(path);
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::internal(format!("create {}: {e}", path.display()))),
        }
    }
    unreachable!()
}

fn slug(a: &HomogeneousSymbol) -> String {
    a.name().unwrap_or("operator").replace([' ', '/'], "_")
}

fn load_measure(
    args: &SweepArgs,
    a: &HomogeneousSymbol,
    s: &Rat,
) -> Result<measures::DiscreteMeasure, CliError> {
    if let Some(path) = &args.measure {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
        // binary recipe files carry a magic prefix; everything else is JSON
        if bytes.starts_with(b"SYMMSR") {
            return measures::from_recipe_bytes(&bytes)
                .map_err(|e| CliError::user(format!("{}: {e}", path.display())));
        }
        let text = String::from_utf8(bytes)
            .map_err(|e| CliError::user(format!("{}: {e}", path.display())))?;
        return measures::from_json_string(&text)
            .map_err(|e| CliError::user(format!("{}: {e}", path.display())));
    }
    let n = a.n();
    let s_f = symtrace::rational::rat_to_f64(s);
    let dim = n as f64 - s_f;
    if s_f == 0.0 {
        Ok(build_cantor_product(dim, n, 6, &vec![0.3; n], 0.4)?)
    } else {
        Ok(default_cone_cantor(n, dim, 7, &vec![0.5; n], 0.18)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify { source, seed, quick, emit_spec } => {
            let a = load_operator(&source)?;
            let cfg =
                if quick { ClassifyConfig::quick(seed) } else { ClassifyConfig::with_seed(seed) };
            let report = classify_full(&a, &cfg);
            if emit_spec {
                let path = write_report(
                    &cli.out,
                    &format!("{}.operator", slug(&a)),
                    "json",
                    &a.to_spec_string(),
                )?;
                println!("operator spec: {}", path.display());
            }
            let path = write_report(
                &cli.out,
                &format!("{}.classification", slug(&a)),
                "json",
                &report.to_json_string(),
            )?;
            println!(
                "elliptic: {:?}  cancelling: {:?}  strongly_cancelling: {:?}  c_elliptic: {:?}",
                report.elliptic.verdict,
                report.cancelling.verdict,
                report.strongly_cancelling.verdict,
                report.c_elliptic.verdict
            );
            if let Some(d) = report.c_elliptic.certificate_degree {
                println!("certificate degree: {d}");
            }
            println!("report: {}", path.display());
            Ok(())
        }
        Command::Certificate { source, dmax, seed } => {
            let a = load_operator(&source)?;
            let d_max = dmax.unwrap_or(a.order() + 4).max(a.order());
            match search_certificate(&a, d_max) {
                Some(cert) => {
                    let check = verify_certificate(&a, &cert, seed)
                        .map_err(|e| CliError::internal(e.to_string()))?;
                    let path = write_report(
                        &cli.out,
                        &format!("{}.certificate", slug(&a)),
                        "json",
                        &cert.to_json_string(),
                    )?;
                    println!(
                        "certificate degree {} — exact match: {}, grid residual {:.3e}",
                        cert.degree, check.exact_match, check.grid_residual
                    );
                    println!("certificate: {}", path.display());
                }
                None => println!("not-found: no certificate up to degree {d_max}"),
            }
            Ok(())
        }
        Command::Fractal { alpha, n, level, cone_axis, cone_angle, seed, binary } => {
            let mu = build_cantor_product(alpha, n, level, &vec![0.0; n], 1.0)?;
            let (mu, dropped) = match (cone_axis, cone_angle) {
                (Some(axis), Some(angle)) => {
                    let axis = parse_vector(&axis, n, "cone axis")?;
                    map_into_cone(&mu, &vec![0.0; n], &axis, angle)?
                }
                (None, None) => (mu, 0.0),
                _ => {
                    return Err(CliError::user(
                        "--cone-axis and --cone-angle must be given together",
                    ))
                }
            };
            println!(
                "atoms: {}  total mass: {:.6}  dropped: {:.3e}",
                mu.atoms.len(),
                mu.total_mass(),
                dropped
            );
            let center = vec![0.0; n];
            match ahlfors_profile(&mu, alpha, &center) {
                Ok(profile) => {
                    println!("ahlfors profile (radius, mass, ratio):");
                    for row in &profile.rows {
                        println!("  {:.6e}  {:.6e}  {:.4}", row.radius, row.mass, row.ratio);
                    }
                    println!("m̂ = {:.4}, M̂ = {:.4}", profile.m_hat, profile.big_m_hat);
                }
                Err(e) => println!("profile: {e}"),
            }
            if let Ok(sums) = shell_divergence_sums(&mu, alpha, &center, 8) {
                println!("shell partial sums slope: {:.4}", sums.slope);
            }
            let morrey = estimate_morrey_norm(&mu, alpha, 200, seed);
            println!("Morrey lower bound at λ = {alpha}: {morrey:.4}");
            let path = write_report(
                &cli.out,
                &format!("cantor_a{alpha}_n{n}_l{level}"),
                "json",
                &measures::to_json_string(&mu),
            )?;
            println!("measure: {}", path.display());
            if binary {
                let bytes =
                    measures::to_recipe_bytes(&mu).map_err(|e| CliError::user(e.to_string()))?;
                let bin_path = cli.out.join(format!("cantor_a{alpha}_n{n}_l{level}.msr"));
                std::fs::write(&bin_path, bytes).map_err(|e| CliError::internal(e.to_string()))?;
                println!("recipe: {}", bin_path.display());
            }
            Ok(())
        }
        Command::Verify { test } => run_verify(test, &cli.out),
        Command::Demo { name, seed } => run_demo(&name, seed, &cli.out),
    }
}

fn emit_inequality_report(
    out: &Path,
    stem: &str,
    report: &harness::InequalityReport,
) -> Result<(), CliError> {
    let path = write_report(out, stem, "json", &report.to_json_string())?;
    println!("verdict: {:?}", report.verdict);
    if let Some(sup) = report.sup_ratio {
        println!("sup ratio: {sup:.4}");
    }
    if !report.growth.is_empty() {
        let csv_path = write_report(out, stem, "csv", &report.growth_csv())?;
        println!("growth table: {}", csv_path.display());
    }
    println!("report: {}", path.display());
    Ok(())
}

fn bump_family_ratios(
    a: &HomogeneousSymbol,
    mu: &measures::DiscreteMeasure,
    resolution: usize,
    family: &FamilyConfig,
    mut one: impl FnMut(&symtrace::fields::GridField, u64) -> Result<f64, harness::HarnessError>,
) -> Result<Vec<f64>, CliError> {
    let gbox = GridBox::unit(a.n());
    let _ = mu;
    let mut ratios = Vec::new();
    for m in 0..family.members {
        let seed = harness::member_seed(family.seed, m);
        let u = symtrace::fields::biased_band_limited_bump(
            a.n(),
            a.dim_v(),
            resolution,
            &gbox,
            family.max_mode,
            family.bias,
            family.noise,
            seed,
        );
        ratios.push(one(&u, seed)?);
    }
    Ok(ratios)
}

#[allow(clippy::too_many_arguments)]
fn family_report(
    test_id: &str,
    a: &HomogeneousSymbol,
    s: &Rat,
    theta: Option<f64>,
    alpha: Option<f64>,
    resolution: usize,
    family: &FamilyConfig,
    ratios: Vec<f64>,
) -> harness::InequalityReport {
    let mut report = harness::InequalityReport::for_test(test_id, a.name());
    report.s = Some(symtrace::rational::format_rat(s));
    report.theta = theta;
    report.alpha = alpha;
    report.resolutions = vec![resolution];
    report.seed = family.seed;
    report.sup_ratio = Some(ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let spread = harness::spread(&ratios);
    report.instance_ratios = ratios;
    report.notes.push(format!(
        "family: {} members, modes ≤ {}, bias {}, noise {}; spread {spread:.3}",
        family.members, family.max_mode, family.bias, family.noise
    ));
    report.verdict = if spread <= 2.0 {
        harness::RatioVerdict::Bounded
    } else {
        harness::RatioVerdict::Inconclusive
    };
    report
}

fn run_verify(test: VerifyCommand, out: &Path) -> Result<(), CliError> {
    match test {
        VerifyCommand::Sobolev(args) => {
            let a = load_operator(&args.source)?;
            let s = parse_s(&args.s)?;
            let mu = load_measure(&args, &a, &s)?;
            let gbox = GridBox::unit(a.n());
            let mut resolutions = vec![args.resolution];
            if args.double_resolution {
                resolutions.push(args.resolution * 2);
            }
            let family =
                FamilyConfig { members: args.members, seed: args.seed, ..FamilyConfig::default() };
            let mut report = sweep_sobolev(&a, &s, &mu, &gbox, &resolutions, &family)?;
            // classification context for the report
            let classes = classify_full(&a, &ClassifyConfig::quick(args.seed));
            report.notes.push(format!(
                "operator classes: elliptic {:?}, cancelling {:?}, strongly cancelling {:?}, \
                 ℂ-elliptic {:?}",
                classes.elliptic.verdict,
                classes.cancelling.verdict,
                classes.strongly_cancelling.verdict,
                classes.c_elliptic.verdict
            ));
            emit_inequality_report(out, &format!("{}.sobolev", slug(&a)), &report)
        }
        VerifyCommand::Multiplicative { sweep, theta } => {
            let a = load_operator(&sweep.source)?;
            let s = parse_s(&sweep.s)?;
            let mu = load_measure(&sweep, &a, &s)?;
            let family =
                FamilyConfig { members: sweep.members, seed: sweep.seed, ..FamilyConfig::default() };
            let ratios = bump_family_ratios(&a, &mu, sweep.resolution, &family, |u, seed| {
                multiplicative_ratio(&a, u, &mu, &s, theta, None, seed).map(|r| r.ratio)
            })?;
            let report = family_report(
                "multiplicative-trace",
                &a,
                &s,
                Some(theta),
                None,
                sweep.resolution,
                &family,
                ratios,
            );
            println!("theta: {theta}");
            emit_inequality_report(out, &format!("{}.multiplicative", slug(&a)), &report)
        }
        VerifyCommand::Adams { sweep, alpha } => {
            let a = load_operator(&sweep.source)?;
            let s = parse_s(&sweep.s)?;
            let mu = load_measure(&sweep, &a, &s)?;
            let family =
                FamilyConfig { members: sweep.members, seed: sweep.seed, ..FamilyConfig::default() };
            let ratios = bump_family_ratios(&a, &mu, sweep.resolution, &family, |u, seed| {
                adams_ratio(&a, u, &mu, &s, alpha, None, seed).map(|r| r.ratio)
            })?;
            let report = family_report(
                "adams-trace",
                &a,
                &s,
                None,
                Some(alpha),
                sweep.resolution,
                &family,
                ratios,
            );
            println!("alpha: {alpha}");
            emit_inequality_report(out, &format!("{}.adams", slug(&a)), &report)
        }
        VerifyCommand::BlowupNonelliptic {
            source,
            xi0,
            v,
            s,
            resolution,
            box_side,
            levels,
            seed,
        } => {
            let a = load_operator(&source)?;
            let xi0 = parse_vector(&xi0, a.n(), "xi0")?;
            let v = parse_vector(&v, a.dim_v(), "v")?;
            let s = parse_s(&s)?;
            let cfg = BlowupConfig { resolution, box_side, levels, measure_level: 8, seed };
            let report = blowup_nonelliptic(&a, &xi0, &v, &s, &cfg)?;
            emit_inequality_report(out, &format!("{}.blowup_nonelliptic", slug(&a)), &report)
        }
        VerifyCommand::BlowupNoncancelling {
            source,
            w,
            s,
            resolution,
            box_side,
            levels,
            measure_level,
            seed,
        } => {
            let a = load_operator(&source)?;
            let s = parse_s(&s)?;
            let w = match w {
                Some(text) => parse_vector(&text, a.dim_w(), "w")?,
                None => {
                    let cancel =
                        symtrace::classify::check_cancellation(&a, &ClassifyConfig::quick(seed));
                    cancel.witness_w.ok_or_else(|| {
                        CliError::user(
                            "operator appears cancelling: no residual image direction found \
                             (pass --w to override)",
                        )
                    })?
                }
            };
            let cfg = BlowupConfig { resolution, box_side, levels, measure_level, seed };
            let report = blowup_noncancelling(&a, &w, &s, &cfg)?;
            emit_inequality_report(out, &format!("{}.blowup_noncancelling", slug(&a)), &report)
        }
        VerifyCommand::Halfspace {
            source,
            resolution,
            double_resolution,
            members,
            exploratory,
            seed,
        } => {
            let a = load_operator(&source)?;
            let exploratory =
                exploratory || a.name().is_some_and(|name| name.starts_with("escnotcell"));
            let gbox = GridBox::unit(a.n());
            let mut resolutions = vec![resolution];
            if double_resolution {
                resolutions.push(resolution * 2);
            }
            let family = FamilyConfig { members, seed, ..FamilyConfig::default() };
            let report = sweep_halfspace(&a, &gbox, &resolutions, &family, exploratory)?;
            emit_inequality_report(out, &format!("{}.halfspace", slug(&a)), &report)
        }
    }
}

fn run_demo(name: &str, seed: u64, out: &Path) -> Result<(), CliError> {
    match name {
        "strict-discontinuity" => {
            let rep = strict_discontinuity_demo(8);
            println!("j, |Dρ_j|(ℝ²), trace on ∂B(0,1)");
            let mut csv = String::from("j,total_variation,trace_on_circle\n");
            for row in &rep.rows {
                println!("{}, {:.6}, {}", row.j, row.total_variation, row.trace_on_circle);
                csv.push_str(&format!(
                    "{},{},{}\n",
                    row.j, row.total_variation, row.trace_on_circle
                ));
            }
            println!("limit total variation: {:.6}", rep.limit_total_variation);
            println!("interior trace of the strict limit: {}", rep.limit_trace);
            let path = write_report(out, "strict_discontinuity", "csv", &csv)?;
            println!("table: {}", path.display());
            Ok(())
        }
        "wirtinger-blowup" => {
            let a = catalog("wirtinger", 2, None).map_err(|e| CliError::internal(e.to_string()))?;
            let cfg =
                BlowupConfig { resolution: 512, box_side: 4.0, levels: 5, measure_level: 0, seed };
            let report =
                wirtinger_blowup(&a, &[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[0.0, -1.0], &cfg)?;
            emit_inequality_report(out, "wirtinger_blowup_demo", &report)
        }
        "mollification-strict" => {
            let g = catalog("gradient", 2, None).map_err(|e| CliError::internal(e.to_string()))?;
            let gbox = GridBox::centered(2, 2.5);
            let (disk, perimeter) = indicator_disk(1024, &gbox, 1.0);
            let rep = mollification_strict_check(
                &g,
                &disk,
                perimeter,
                &[0.08, 0.04, 0.02, 0.01],
                DiffMode::FiniteDifference,
            )?;
            println!("eps, gradient mass (target 2π = {perimeter:.6})");
            let mut csv = String::from("eps,mass\n");
            for row in &rep.rows {
                println!("{:.4}, {:.6}", row.eps, row.mass);
                csv.push_str(&format!("{},{}\n", row.eps, row.mass));
            }
            println!("final relative error: {:.4e}", rep.final_relative_error);
            let path = write_report(out, "mollification_strict", "csv", &csv)?;
            println!("table: {}", path.display());
            Ok(())
        }
        other => Err(CliError::user(format!("unknown demo {other:?}"))),
    }
}
