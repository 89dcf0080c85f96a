//! `shockstab`: viscous shock profiles of planar viscoelastic systems and
//! their Evans-function stability verdicts.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;
use shockstab_cli::config::{
    load_key_value, parse_connect, parse_vector, physical_indices, GridRange,
};
use shockstab_cli::record::RunRecord;
use shockstab_cli::single::{run_single, SingleConfig};
use shockstab_cli::sweep::{run_sweep, SweepSpec};
use shockstab_cli::{emit_case_figures, CSV_HEADER};
use shockstab_core::contour::{winding_number, ClosureEvaluator, ContourSpec, Verdict};
use shockstab_core::equilibria::rh_shear;
use shockstab_core::export;
use shockstab_core::model::{ElasticPotential, ModelVariant, ViscosityKind};
use shockstab_core::pipeline::{CaseFilters, CaseSettings, TargetRule};
use shockstab_core::profile::{
    dispersion_growth_rate, dispersion_relation, phase_portrait, undercompressive_search,
    PhiPotential, Window,
};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "shockstab",
    version,
    about = "Viscoelastic shock profiles and Evans-function stability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration: an explicit connection or every connection
    /// generated by (alpha, s).
    Single(SingleArgs),
    /// Sweep a grid of (alpha, s) points, writing one CSV row per
    /// connection; resumable.
    Sweep(SweepArgs),
    /// Render a phase portrait of the profile flow.
    Portrait(PortraitArgs),
    /// Dispersion relation of a 1D compressible constant state.
    Dispersion(DispersionArgs),
    /// Search a shear grid for undercompressive (saddle-saddle) connections.
    Ucsearch(UcArgs),
    /// Built-in verification battery.
    Selftest,
}

#[derive(Args)]
struct SingleArgs {
    /// Model variant: comp3d, comp2d, shear2d, shear1d, comp1d, transverse.
    #[arg(long)]
    model: Option<String>,
    /// Strain components of the left/generating state, comma separated.
    #[arg(long)]
    alpha: Option<String>,
    /// Shorthand for the longitudinal component (1D compressible model).
    #[arg(long)]
    alpha3: Option<f64>,
    /// Wave speed s.
    #[arg(long)]
    s: Option<f64>,
    /// Squared speed (alternative to --s).
    #[arg(long)]
    sigma: Option<f64>,
    /// Explicit endstate pair 'a1,a2:b1,b2'.
    #[arg(long)]
    connect: Option<String>,
    /// Potential coefficients 'mu1,mu2,mu3[,c]' (canonical when omitted).
    #[arg(long)]
    mu: Option<String>,
    /// Viscous stress tensor: z1 or z2.
    #[arg(long)]
    viscosity: Option<String>,
    /// Connection selection when no --connect is given: lax, oc, fourpoint.
    #[arg(long)]
    target: Option<String>,
    /// Interior seeds per overcompressive family.
    #[arg(long)]
    oc_seeds: Option<usize>,
    /// Directory for JSON records and figures (stdout JSON otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write profile/Evans-image SVGs.
    #[arg(long, default_value_t = false)]
    figures: bool,
    /// Flat key=value configuration file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model: Option<String>,
    /// Grid for the first strain component, 'start:step:stop' or a value.
    #[arg(long)]
    alpha1: Option<String>,
    #[arg(long)]
    alpha2: Option<String>,
    #[arg(long)]
    alpha3: Option<String>,
    /// Speed grid.
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// lax, oc, or fourpoint.
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    oc_seeds: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reuse rows already present in the output file.
    #[arg(long, default_value_t = false)]
    resume: bool,
    /// Disable the endstate hyperbolicity/feasibility filters.
    #[arg(long, default_value_t = false)]
    no_filters: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PortraitArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Window 'x_min:x_max:y_min:y_max'.
    #[arg(long, default_value = "-3:3:-3:3")]
    window: String,
    #[arg(long, default_value_t = 24)]
    seeds: usize,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DispersionArgs {
    /// Downstream longitudinal strain a3+.
    #[arg(long)]
    a3: f64,
    #[arg(long, default_value_t = 1.0)]
    k_max: f64,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct UcArgs {
    /// Grid of alpha values, 'start:step:stop'.
    #[arg(long, default_value = "0.2:0.2:5")]
    alpha: String,
    /// Grid of speeds.
    #[arg(long, default_value = "0.2:0.2:7")]
    s: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Single(args) => cmd_single(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Portrait(args) => cmd_portrait(args),
        Command::Dispersion(args) => cmd_dispersion(args),
        Command::Ucsearch(args) => cmd_ucsearch(args),
        Command::Selftest => cmd_selftest(),
    }
}

fn config_map(path: &Option<PathBuf>) -> Result<BTreeMap<String, String>> {
    match path {
        Some(p) => load_key_value(p),
        None => Ok(BTreeMap::new()),
    }
}

fn merged<'a>(
    cli: &'a Option<String>,
    cfg: &'a BTreeMap<String, String>,
    key: &str,
) -> Option<&'a str> {
    cli.as_deref().or_else(|| cfg.get(key).map(|s| s.as_str()))
}

fn parse_mu(text: Option<&str>) -> Result<ElasticPotential> {
    match text {
        None => Ok(ElasticPotential::w0()),
        Some(t) => {
            let vals = parse_vector(t)?;
            match vals.len() {
                3 => Ok(ElasticPotential::new(vals[0], vals[1], vals[2], 0.0)),
                4 => Ok(ElasticPotential::new(vals[0], vals[1], vals[2], vals[3])),
                n => bail!("--mu needs 3 or 4 components, found {n}"),
            }
        }
    }
}

fn parse_target(text: Option<&str>, oc_seeds: usize) -> Result<TargetRule> {
    Ok(match text.unwrap_or("fourpoint") {
        "lax" => TargetRule::AllLaxPairs,
        "oc" => TargetRule::OvercompressiveFamily { n_interior: oc_seeds },
        "fourpoint" => TargetRule::FourPointConfigurations { n_interior: oc_seeds },
        other => bail!("unknown target '{other}' (expected lax, oc, or fourpoint)"),
    })
}

fn record_json(rec: &RunRecord) -> serde_json::Value {
    json!({
        "model": rec.model,
        "alpha": rec.alpha,
        "s": rec.s,
        "a_plus": rec.a_plus,
        "shock_class": rec.shock_class,
        "R": rec.r,
        "n_points": rec.n_points,
        "max_rel_step": rec.max_rel_step,
        "L": rec.l,
        "winding": rec.winding,
        "verdict": rec.verdict.label(),
        "seconds": rec.seconds,
    })
}

fn cmd_single(args: SingleArgs) -> Result<i32> {
    let cfg_file = config_map(&args.config)?;
    let model =
        merged(&args.model, &cfg_file, "model").ok_or_else(|| anyhow!("--model is required"))?;
    let variant = ModelVariant::parse(model).map_err(|e| anyhow!("{e}"))?;
    let pot = parse_mu(merged(&args.mu, &cfg_file, "mu"))?;
    let strain_dim = variant.profile_variant().strain_dim();

    let alpha = if let Some(text) = merged(&args.alpha, &cfg_file, "alpha") {
        let v = parse_vector(text)?;
        if v.len() != strain_dim {
            bail!("--alpha needs {strain_dim} components for {model}");
        }
        DVector::from_vec(v)
    } else if let Some(a3) =
        args.alpha3.or_else(|| cfg_file.get("alpha3").and_then(|t| t.parse().ok()))
    {
        if strain_dim != 1 {
            bail!("--alpha3 shorthand applies to 1D models only");
        }
        DVector::from_vec(vec![a3])
    } else {
        bail!("--alpha is required");
    };

    let s = match (
        args.s.or_else(|| cfg_file.get("s").and_then(|t| t.parse().ok())),
        args.sigma.or_else(|| cfg_file.get("sigma").and_then(|t| t.parse().ok())),
    ) {
        (Some(s), _) => s,
        (None, Some(sigma)) if sigma > 0.0 => sigma.sqrt(),
        (None, Some(_)) => bail!("--sigma must be positive"),
        (None, None) => bail!("--s (or --sigma) is required"),
    };

    let viscosity = match merged(&args.viscosity, &cfg_file, "viscosity").unwrap_or("z2") {
        "z1" => ViscosityKind::Z1,
        "z2" => ViscosityKind::Z2,
        other => bail!("unknown viscosity '{other}'"),
    };
    let oc_seeds = args
        .oc_seeds
        .or_else(|| cfg_file.get("oc_seeds").and_then(|t| t.parse().ok()))
        .unwrap_or(5);
    let target = parse_target(merged(&args.target, &cfg_file, "target"), oc_seeds)?;
    let connect = match merged(&args.connect, &cfg_file, "connect") {
        Some(text) => {
            let (a, b) = parse_connect(text)?;
            if a.len() != strain_dim || b.len() != strain_dim {
                bail!("--connect endstates need {strain_dim} components");
            }
            Some((DVector::from_vec(a), DVector::from_vec(b)))
        }
        None => None,
    };

    let cfg = SingleConfig {
        variant,
        pot,
        alpha,
        s,
        connect,
        viscosity,
        target,
        filters: CaseFilters::default(),
        settings: CaseSettings::default(),
    };
    let outcome = run_single(&cfg)?;
    for reason in &outcome.skipped {
        eprintln!("filtered: {reason}");
    }
    let mut inconclusive = 0;
    for (i, rec) in outcome.records.iter().enumerate() {
        if matches!(rec.verdict, Verdict::Inconclusive(_)) {
            inconclusive += 1;
        }
        let value = record_json(rec);
        match &args.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("record_{i}.json"));
                std::fs::write(&path, serde_json::to_string_pretty(&value)?)?;
                println!("{}", path.display());
            }
            None => println!("{value}"),
        }
        if args.figures {
            if let Some(result) = outcome.results.get(i) {
                let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
                for f in emit_case_figures(result, &dir, &format!("case_{i}"))? {
                    println!("{f}");
                }
            }
        }
    }
    Ok(if inconclusive > 0 { 2 } else { 0 })
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let cfg_file = config_map(&args.config)?;
    let model =
        merged(&args.model, &cfg_file, "model").ok_or_else(|| anyhow!("--model is required"))?;
    let variant = ModelVariant::parse(model).map_err(|e| anyhow!("{e}"))?;
    let pot = parse_mu(merged(&args.mu, &cfg_file, "mu"))?;
    let oc_seeds = args
        .oc_seeds
        .or_else(|| cfg_file.get("oc_seeds").and_then(|t| t.parse().ok()))
        .unwrap_or(5);
    let target = parse_target(merged(&args.target, &cfg_file, "target"), oc_seeds)?;

    // per-component grids, keyed by the physical flag names
    let flag_texts = [&args.alpha1, &args.alpha2, &args.alpha3];
    let mut alpha_ranges = Vec::new();
    for &idx in physical_indices(variant) {
        let key = format!("alpha{}", idx + 1);
        let text = merged(flag_texts[idx], &cfg_file, &key);
        alpha_ranges.push(match text {
            Some(t) => GridRange::parse(t)?,
            None => GridRange::single(0.0),
        });
    }
    let s_range = GridRange::parse(
        merged(&args.s, &cfg_file, "s").ok_or_else(|| anyhow!("--s grid is required"))?,
    )?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg_file.get("out").map(PathBuf::from))
        .ok_or_else(|| anyhow!("--out CSV path is required"))?;

    let filters = if args.no_filters {
        CaseFilters { require_hyperbolic_endstates: false, require_feasible: false }
    } else {
        CaseFilters::default()
    };
    let spec = SweepSpec {
        variant,
        pot,
        alpha_ranges,
        s_range,
        target,
        filters,
        settings: CaseSettings::default(),
    };
    let summary = run_sweep(&spec, &out, args.resume)?;
    for line in &summary.filtered {
        eprintln!("filtered: {line}");
    }
    eprintln!(
        "sweep: {} computed, {} reused, {} inconclusive -> {}",
        summary.computed,
        summary.reused,
        summary.inconclusive,
        out.display()
    );
    Ok(if summary.inconclusive > 0 { 2 } else { 0 })
}

fn cmd_portrait(args: PortraitArgs) -> Result<i32> {
    let variant = ModelVariant::parse(&args.model).map_err(|e| anyhow!("{e}"))?;
    let pot = parse_mu(args.mu.as_deref())?;
    let alpha = DVector::from_vec(parse_vector(&args.alpha)?);
    let sigma = match (args.sigma, args.s) {
        (Some(sig), _) => sig,
        (None, Some(s)) => s * s,
        (None, None) => bail!("--sigma or --s is required"),
    };
    let parts: Vec<f64> = args
        .window
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad window part '{t}': {e}")))
        .collect::<Result<_>>()?;
    if parts.len() != 4 {
        bail!("--window needs x_min:x_max:y_min:y_max");
    }
    let window = Window { x_min: parts[0], x_max: parts[1], y_min: parts[2], y_max: parts[3] };
    let p = PhiPotential::new(alpha, sigma, pot, variant).map_err(|e| anyhow!("{e}"))?;
    let portrait = phase_portrait(&p, window, args.seeds).map_err(|e| anyhow!("{e}"))?;
    std::fs::write(&args.out, export::phase_portrait_svg(&portrait))
        .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "portrait: {} equilibria, {} trajectories -> {}",
        portrait.equilibria.len(),
        portrait.trajectories.len(),
        args.out.display()
    );
    Ok(0)
}

fn cmd_dispersion(args: DispersionArgs) -> Result<i32> {
    if args.n == 0 {
        bail!("--n must be positive");
    }
    let ks: Vec<f64> = (1..=args.n).map(|i| args.k_max * i as f64 / args.n as f64).collect();
    let res = dispersion_relation(args.a3, &ks).map_err(|e| anyhow!("{e}"))?;
    let value = json!({
        "a3_plus": args.a3,
        "growth_rate_sampled": res.growth_rate,
        "growth_rate_small_k": dispersion_growth_rate(args.a3),
        "max_residual": res.max_residual(),
        "samples": res.k.iter().zip(&res.roots).map(|(k, r)| json!({
            "k": k,
            "lambda": [[r[0].re, r[0].im], [r[1].re, r[1].im]],
        })).collect::<Vec<_>>(),
    });
    match &args.out {
        Some(path) => std::fs::write(path, serde_json::to_string_pretty(&value)?)?,
        None => println!("{value}"),
    }
    Ok(0)
}

fn cmd_ucsearch(args: UcArgs) -> Result<i32> {
    let alphas = GridRange::parse(&args.alpha)?.values();
    let speeds = GridRange::parse(&args.s)?.values();
    let pot = ElasticPotential::w0();
    let report = undercompressive_search(&alphas, &speeds, &pot).map_err(|e| anyhow!("{e}"))?;
    let value = json!({
        "pairs_examined": report.pairs_examined,
        "connections_found": report.connections_found,
        "saddle_saddle_candidates": report.candidates.iter().map(|c| json!({
            "alpha1": c.alpha1,
            "s": c.s,
            "from": c.from.as_slice(),
            "to": c.to.as_slice(),
            "miss": c.miss,
        })).collect::<Vec<_>>(),
    });
    match &args.out {
        Some(path) => std::fs::write(path, serde_json::to_string_pretty(&value)?)?,
        None => println!("{value}"),
    }
    eprintln!(
        "ucsearch: {} pairs examined, {} saddle-saddle candidates, {} connections",
        report.pairs_examined,
        report.candidates.len(),
        report.connections_found
    );
    Ok(0)
}

fn cmd_selftest() -> Result<i32> {
    let mut failures = 0;
    let mut check = |name: &str, ok: bool| {
        println!("[{}] {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // model exactness at the energy well
    let pot = ElasticPotential::w0();
    let well = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    let hess = shockstab_core::model::hess_potential(&well, &pot, ModelVariant::Compressible3D)
        .map_err(|e| anyhow!("{e}"))?;
    let mut eigs: Vec<f64> = hess.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    check(
        "strain Hessian spectrum {1, 1, 2} at the well",
        (eigs[0] - 1.0).abs() < 1e-12
            && (eigs[1] - 1.0).abs() < 1e-12
            && (eigs[2] - 2.0).abs() < 1e-12,
    );

    // RH roots of the reference shear configuration
    let alpha = DVector::from_vec(vec![1.0, 0.0]);
    let roots = rh_shear(&alpha, 3.44, &pot).map_err(|e| anyhow!("{e}"))?;
    let mut axis: Vec<f64> = roots.points.iter().map(|p| p[0]).collect();
    axis.sort_by(|a, b| a.partial_cmp(b).unwrap());
    check(
        "shear endstates {-1.8, 0.8, 1.0}",
        axis.len() == 3
            && (axis[0] + 1.8).abs() < 1e-9
            && (axis[1] - 0.8).abs() < 1e-9
            && (axis[2] - 1.0).abs() < 1e-9,
    );

    // synthetic winding numbers
    let spec = ContourSpec::new(2.0);
    let one =
        winding_number(&mut ClosureEvaluator(|l| l - num_complex::Complex::new(0.5, 0.0)), &spec)
            .map_err(|e| anyhow!("{e}"))?;
    check("argument principle counts one root", one.winding == 1);
    let zero =
        winding_number(&mut ClosureEvaluator(|l| l.exp()), &spec).map_err(|e| anyhow!("{e}"))?;
    check("nonvanishing function winds zero", zero.winding == 0);

    // the reference Lax case end to end
    let cfg = SingleConfig {
        variant: ModelVariant::Shear2D,
        pot,
        alpha: DVector::from_vec(vec![1.0, 0.0]),
        s: 3.44f64.sqrt(),
        connect: Some((DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.8, 0.0]))),
        viscosity: ViscosityKind::Z2,
        target: TargetRule::AllLaxPairs,
        filters: CaseFilters::default(),
        settings: CaseSettings::default(),
    };
    let outcome = run_single(&cfg)?;
    check(
        "reference Lax shock is Evans stable",
        outcome.records.len() == 1
            && outcome.records[0].winding == 0
            && outcome.records[0].verdict == Verdict::Stable,
    );

    check("CSV header is stable", CSV_HEADER.split(',').count() == 16);
    if failures == 0 {
        println!("selftest: all checks passed");
        Ok(0)
    } else {
        println!("selftest: {failures} check(s) failed");
        Ok(1)
    }
}
