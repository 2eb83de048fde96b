mod entry;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use entry::EntrySpec;
use travflow::config::ConfigError;
use travflow::expr::Var;
use travflow::flow::{integrate_trajectory, trace_through, FieldKind, FlowError, TrajectoryRecord};
use travflow::local_models::{reachable_patterns, trajectories_at, ModelPolynomial};
use travflow::mho::models::shipped;
use travflow::mho::{StratifiedModel, Variant};
use travflow::omega::{enumerate, hasse_diagram, Pattern};
use travflow::pipeline::{
    atlas_artifacts, full_run, mho_one, scatter_artifacts, Artifacts, Header, Run, RunError,
};

#[derive(Parser)]
#[command(name = "travflow", version, about = "Tangency patterns, traversing flows and their stratified complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Interior,
    Double,
    Both,
}

impl VariantArg {
    fn variants(self) -> Vec<Variant> {
        match self {
            VariantArg::Interior => vec![Variant::Interior],
            VariantArg::Double => vec![Variant::Double],
            VariantArg::Both => vec![Variant::Interior, Variant::Double],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List admissible patterns up to a reduced norm.
    OmegaEnum {
        #[arg(long)]
        max_reduced_norm: u32,
        /// `dot` prints the degeneration diagram.
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Divisor of a local model, or the patterns its small deformations reach.
    ModelClassify {
        #[arg(long)]
        pattern: Pattern,
        /// Deformation coordinate `root:power=value`, repeatable.
        #[arg(long = "deform", value_parser = parse_deformation)]
        deformation: Vec<((u32, u32), f64)>,
        /// Sample deformations instead of reading off one divisor.
        #[arg(long)]
        reachable: bool,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Integrate one trajectory from a boundary point.
    FlowTrace {
        #[arg(long)]
        config: PathBuf,
        /// `(x, y) dir (a, b)`; the direction is needed for geodesic fields.
        #[arg(long)]
        entry: EntrySpec,
        #[arg(long)]
        json: bool,
    },
    /// Scattering map over seeded random entries.
    Scatter {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured entry count.
        #[arg(long)]
        entries: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the entry chart and count strata components.
    Stratify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the complexes of a shipped or stored cell model.
    MhoBuild {
        /// Name of a shipped model.
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        model: Option<String>,
        /// Model JSON file.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantArg,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate the component-count bound in one degree.
    VerifyBounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        j: u32,
        /// Norms file; defaults to the one named in the config.
        #[arg(long)]
        norms: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every stage, with all reports and plots written out.
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_deformation(s: &str) -> Result<((u32, u32), f64), String> {
    let bad = || format!("expected root:power=value, got `{s}`");
    let (key, value) = s.split_once('=').ok_or_else(bad)?;
    let (root, power) = key.split_once(':').ok_or_else(bad)?;
    Ok((
        (
            root.trim().parse().map_err(|_| bad())?,
            power.trim().parse().map_err(|_| bad())?,
        ),
        value.trim().parse().map_err(|_| bad())?,
    ))
}

fn tuple(p: &Pattern) -> String {
    let parts: Vec<String> = p.entries().iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Config(ConfigError::Invalid(msg.into()))
}

fn out_dir(run: &Run, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| run.config.output_dir.clone())
}

fn write_all(artifacts: &Artifacts, dir: &Path) -> Result<(), RunError> {
    for p in artifacts.write(dir)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn omega_enum(max: u32, format: Format) {
    match format {
        Format::Text => enumerate(max).iter().for_each(|p| println!("{}", tuple(p))),
        Format::Json => {
            let list: Vec<serde_json::Value> = enumerate(max)
                .iter()
                .map(|p| json!({"pattern": p.entries(), "norm": p.norm(), "reduced_norm": p.reduced_norm()}))
                .collect();
            print_json(&list);
        }
        Format::Dot => print!("{}", hasse_diagram(max).to_dot()),
    }
}

#[allow(clippy::too_many_arguments)]
fn model_classify(
    pattern: &Pattern,
    deformation: Vec<((u32, u32), f64)>,
    reachable: bool,
    radius: f64,
    budget: usize,
    seed: u64,
    json: bool,
) -> Result<(), RunError> {
    if reachable {
        if !(radius > 0.0) || budget == 0 {
            return Err(invalid("reachable sampling needs radius > 0 and budget > 0"));
        }
        let set = reachable_patterns(pattern, radius, budget, seed);
        if json {
            print_json(&set);
        } else {
            for p in &set.patterns {
                println!("{}", tuple(p));
            }
        }
        return Ok(());
    }
    let deformation: BTreeMap<(u32, u32), f64> = deformation.into_iter().collect();
    let model = ModelPolynomial::product(pattern, &deformation).map_err(|e| invalid(e.to_string()))?;
    let divisor = trajectories_at(&model, model.default_tol()).map_err(|e| RunError::Numerical(e.to_string()))?;
    if json {
        print_json(&divisor);
    } else if divisor.components.is_empty() {
        println!("empty divisor");
    } else {
        for c in &divisor.components {
            println!("{} on [{:.9}, {:.9}]", tuple(&c.pattern), c.left, c.right);
        }
    }
    Ok(())
}

fn flow_trace(config: &Path, target: &EntrySpec, json: bool) -> Result<(), RunError> {
    let run = Run::load(config)?;
    let flow = &run.flow;
    let tol = &run.config.tolerances;
    let dom = flow.domain();
    if target.point.len() != dom.vars().len() {
        return Err(invalid(format!("entry needs {} coordinates", dom.vars().len())));
    }
    let mut env = dom.env(&target.point);
    if dom.eval_z(&env).abs() > tol.tol_boundary {
        env = dom
            .project_to_boundary(&env)
            .ok_or_else(|| invalid("entry point is not near the boundary"))?;
    }
    match (flow.field().kind(), &target.direction) {
        (FieldKind::Geodesic(_), Some(d)) => env[Var::Theta as usize] = d[1].atan2(d[0]),
        (FieldKind::Geodesic(_), None) => return Err(invalid("geodesic entries need a direction")),
        _ => {}
    }
    let state = flow.state(&flow.coords(&env));
    let record: TrajectoryRecord = match integrate_trajectory(flow, &state, tol, false) {
        Err(FlowError::NotAnEntry { multiplicity, sign }) if multiplicity % 2 == 0 && sign < 0 => {
            trace_through(flow, &flow.reversed(), &state, tol)?
        }
        r => r?,
    };
    if json {
        print_json(&json!({"header": run.header(), "trajectory": record}));
        return Ok(());
    }
    println!("pattern {}", record.pattern);
    println!("norm {} reduced {}", record.norm, record.reduced_norm);
    println!("flight {:.9}", record.flight_time);
    for e in &record.events {
        let p: Vec<String> = e.point.iter().take(dom.vars().len()).map(|c| format!("{c:.9}")).collect();
        println!("event t={:.9} ({}) m={} sign={}", e.time, p.join(", "), e.multiplicity, e.sign);
    }
    if record.dimension_cap_exceeded {
        println!("warning: reduced norm exceeds the trajectory-space dimension");
    }
    Ok(())
}

fn scatter(config: &Path, entries: Option<usize>, out: Option<PathBuf>) -> Result<(), RunError> {
    let mut run = Run::load(config)?;
    if let Some(n) = entries {
        run.config.scatter.entries = n;
        run = Run::new(run.config)?;
    }
    let result = run.scatter()?;
    let mut artifacts = Artifacts::default();
    scatter_artifacts(&run, &result, &mut artifacts)?;
    write_all(&artifacts, &out_dir(&run, out))?;
    let s = &result.summary;
    println!(
        "{} entries: {} samples, {} trapped, {} not entries, {} failed",
        s.entries, s.samples, s.trapped, s.not_entry, s.failed
    );
    for (p, n) in &s.patterns {
        println!("{p}\t{n}");
    }
    Ok(())
}

fn stratify(config: &Path, out: Option<PathBuf>) -> Result<(), RunError> {
    let run = Run::load(config)?;
    let atlas = run.stratify()?;
    let mut artifacts = Artifacts::default();
    atlas_artifacts(&run, &atlas, &mut artifacts);
    artifacts.add_json(
        "atlas.json",
        &json!({"header": run.header(), "atlas": Run::atlas_summary(&atlas)}),
    );
    write_all(&artifacts, &out_dir(&run, out))?;
    print!("{}", String::from_utf8_lossy(&artifacts.files[Path::new("counts.csv")]));
    Ok(())
}

fn mho_build(model: Option<String>, file: Option<PathBuf>, variant: VariantArg, out: &Path) -> Result<(), RunError> {
    let model: StratifiedModel = match (model, file) {
        (Some(name), _) => shipped()
            .into_iter()
            .find(|m| m.name == name)
            .ok_or_else(|| invalid(format!("unknown model `{name}`")))?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
            StratifiedModel::parse(&text)?
        }
        (None, None) => return Err(invalid("give --model or --file")),
    };
    let mut artifacts = Artifacts::default();
    let mut notices = Vec::new();
    for v in variant.variants() {
        let s = mho_one(&model, v, &mut artifacts, &mut notices)?;
        println!("{} {v}: ranks {:?}, basis rule {:?}", s.model, s.ranks, s.basis_rule);
        for pd in &s.localized_pd {
            println!(
                "  localized duality in degree {}: homology rank {}, rank mod boundaries {}",
                pd.degree, pd.homology_rank, pd.rank_mod_boundaries
            );
        }
    }
    for n in &notices {
        eprintln!("notice: {n}");
    }
    write_all(&artifacts, out)
}

fn verify_bounds(config: &Path, j: u32, norms: Option<PathBuf>, out: Option<PathBuf>) -> Result<(), RunError> {
    let run = Run::load(config)?;
    let atlas = run.stratify()?;
    let bounds = run.bounds(&atlas.counts, &[j], norms.as_deref())?;
    let header: Header = run.header();
    let doc = json!({"header": header, "counts": atlas.counts, "bounds": bounds});
    let mut artifacts = Artifacts::default();
    artifacts.add_json(format!("bounds-j{j}.json"), &doc);
    write_all(&artifacts, &out_dir(&run, out))?;
    print_json(&bounds.reports[0]);
    Ok(())
}

fn report(config: &Path, out: Option<PathBuf>) -> Result<(), RunError> {
    let run = Run::load(config)?;
    let (report, artifacts) = full_run(&run)?;
    write_all(&artifacts, &out_dir(&run, out))?;
    for n in &report.notices {
        eprintln!("notice: {n}");
    }
    if let Some(a) = &report.atlas {
        for r in &a.counts.rows {
            println!("{}\tcodim {}\t{} components", r.pattern, r.codim, r.components);
        }
    }
    if let Some(b) = &report.bounds {
        for r in &b.reports {
            println!(
                "j={}: lhs {} / {} against rhs {} / {}: {}",
                r.j,
                r.lhs_manifold,
                r.lhs_double,
                r.rhs_manifold.rank.value(),
                r.rhs_double.rank.value(),
                if r.satisfied { "satisfied" } else { "violated" }
            );
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::OmegaEnum { max_reduced_norm, format } => {
            omega_enum(max_reduced_norm, format);
            Ok(())
        }
        Command::ModelClassify {
            pattern,
            deformation,
            reachable,
            radius,
            budget,
            seed,
            json,
        } => model_classify(&pattern, deformation, reachable, radius, budget, seed, json),
        Command::FlowTrace { config, entry, json } => flow_trace(&config, &entry, json),
        Command::Scatter { config, entries, out } => scatter(&config, entries, out),
        Command::Stratify { config, out } => stratify(&config, out),
        Command::MhoBuild { model, file, variant, out } => mho_build(model, file, variant, &out),
        Command::VerifyBounds { config, j, norms, out } => verify_bounds(&config, j, norms, out),
        Command::Report { config, out } => report(&config, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("TRAVFLOW_THREADS").ok().and_then(|v| v.parse().ok()) {
        // a second initialization is the only failure and is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
