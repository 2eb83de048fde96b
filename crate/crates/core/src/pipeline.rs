//! A full run: scattering, stratification, bounds and cell-model complexes,
//! gathered into a report plus artifact files. Output bytes depend only on
//! the config and the seed.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{hex_digest, AnnotationConfig, ConfigError, RunConfig, TOOL_VERSION};
use crate::flow::cache::{write_cache, write_jsonl};
use crate::flow::scatter::sample_from_record;
use crate::flow::{
    integrate_trajectory, traversing_report, FieldKind, Flow, FlowError, State, TrajectoryRecord,
    TraversingReport,
};
use crate::mho::export::{polytope_dump, polytope_svg, PolytopeDump};
use crate::mho::heuristic::atlas_models;
use crate::mho::models::shipped;
use crate::mho::{
    ball_polytope, basis_rule, build_mho, localized_pd, MhoDump, MhoError, StratifiedModel,
    Variant,
};
use crate::simplicial_norm::{NormError, NormRegistry};
use crate::stratification::export::{atlas_svg, counts_csv, counts_json};
use crate::stratification::{
    boundary_loops, build_atlas, chart_state, check_k_convexity, morse_bound_report,
    obstruction_report, CountsTable, MorseBoundReport, NormAnnotations, ObstructionEntry,
    StrataAtlas, StratError,
};
use crate::stratification::bounds::Witness;

/// Failed integrations must stay below this fraction of a scatter run.
pub const FAILURE_LIMIT: f64 = 0.01;
/// Entries re-integrated backwards for the reversal check.
const REVERSAL_SAMPLE: usize = 1000;
const WITNESS_LIMIT: usize = 5;
/// Interior points sampled for the traversing check.
const TRAVERSING_BUDGET: usize = 500;
/// Quotient balls are sketched up to this dimension and dumped up to the hull cap.
const SKETCH_DIM: usize = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("norms: {0}")]
    Norms(#[from] NormError),
    #[error("i/o: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Norms(_) | RunError::Io(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Invariant(_) => 4,
        }
    }
}

impl From<StratError> for RunError {
    fn from(e: StratError) -> Self {
        match e {
            StratError::TooManyFailures { .. } | StratError::Overflow => RunError::Numerical(e.to_string()),
            StratError::Unsupported | StratError::NoBoundary | StratError::MissingAnnotation(_) => {
                RunError::Config(ConfigError::Invalid(e.to_string()))
            }
        }
    }
}

impl From<MhoError> for RunError {
    fn from(e: MhoError) -> Self {
        match e {
            MhoError::StratificationDefect(_) | MhoError::Invariant(_) | MhoError::Homology(_) => {
                RunError::Invariant(e.to_string())
            }
            MhoError::DimensionCap { .. } => RunError::Numerical(e.to_string()),
            MhoError::Unsupported(_) => RunError::Config(ConfigError::Invalid(e.to_string())),
        }
    }
}

impl From<FlowError> for RunError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::BudgetExceeded { .. } | FlowError::IllConditioned { .. } => {
                RunError::Numerical(e.to_string())
            }
            _ => RunError::Config(ConfigError::Invalid(e.to_string())),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

/// Stamped on every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub name: String,
}

/// Files produced by a run, keyed by path relative to the output directory.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Artifacts {
    pub files: BTreeMap<PathBuf, Vec<u8>>,
}

impl Artifacts {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(path.into(), bytes.into());
    }

    pub fn add_json(&mut self, path: impl Into<PathBuf>, value: &impl Serialize) {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.add(path, text);
    }

    /// Writes every file through a temporary sibling and a rename, so readers
    /// never see a partial file.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
        let mut written = Vec::with_capacity(self.files.len());
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            write_atomic(&path, bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| RunError::Io(e.to_string()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversalCheck {
    pub checked: usize,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterSummary {
    pub entries: usize,
    pub samples: usize,
    pub trapped: usize,
    pub not_entry: usize,
    pub failed: usize,
    pub patterns: BTreeMap<String, usize>,
    /// Trajectories whose reduced norm exceeds the trajectory-space dimension.
    pub non_generic: usize,
    pub reversal: ReversalCheck,
    pub traversing: TraversingSummary,
    /// SHA-256 over the raw bits of every sample.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraversingSummary {
    pub sampled: usize,
    pub exited: usize,
    pub exit_fraction: f64,
    pub trapped_witnesses: Vec<Vec<f64>>,
}

impl From<TraversingReport> for TraversingSummary {
    fn from(r: TraversingReport) -> Self {
        TraversingSummary {
            sampled: r.sampled,
            exited: r.exited,
            exit_fraction: r.exit_fraction,
            trapped_witnesses: r.trapped_witnesses.into_iter().take(WITNESS_LIMIT).collect(),
        }
    }
}

/// Records and per-entry failures of a scatter run.
#[derive(Debug, Clone)]
pub struct ScatterOutput {
    pub summary: ScatterSummary,
    pub records: Vec<TrajectoryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexitySummary {
    pub k: u32,
    pub convex: bool,
    pub witness_count: usize,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtlasSummary {
    pub chart_dim: usize,
    pub curves: usize,
    pub nodes: usize,
    pub edges: usize,
    pub transitions: usize,
    pub failed: usize,
    pub failed_fraction: f64,
    pub counts: CountsTable,
    pub k_convexity: Vec<ConvexitySummary>,
    /// Units in each filtration level, interior variant then with boundary.
    pub filtration_interior: Vec<usize>,
    pub filtration_with_boundary: Vec<usize>,
    pub filtration_nested: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSection {
    pub manifold: String,
    pub double: String,
    pub reports: Vec<MorseBoundReport>,
    pub obstruction: Vec<ObstructionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdSummary {
    pub degree: usize,
    pub homology_rank: usize,
    pub rank_mod_boundaries: usize,
    pub injective: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallSummary {
    pub codim: u32,
    pub quotient_dim: usize,
    /// Vertex count, or `None` when the quotient is above the hull cap.
    pub vertices: Option<usize>,
    pub sketched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MhoSummary {
    pub model: String,
    pub variant: Variant,
    pub heuristic: bool,
    pub ranks: Vec<usize>,
    pub basis_rule: Vec<usize>,
    pub delta_squared_vanishes: bool,
    pub localized_pd: Vec<PdSummary>,
    pub balls: Vec<BallSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub header: Header,
    pub scatter: Option<ScatterSummary>,
    pub atlas: Option<AtlasSummary>,
    pub bounds: Option<BoundsSection>,
    pub mho: Vec<MhoSummary>,
    pub notices: Vec<String>,
}

/// Config plus the compiled flow.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub flow: Flow,
    hash: String,
}

fn digest_samples(records: &[TrajectoryRecord]) -> String {
    let mut h = Sha256::new();
    for r in records {
        for x in r.entry.iter().chain(&r.exit).chain([&r.flight_time]) {
            h.update(x.to_bits().to_le_bytes());
        }
        h.update(r.pattern.to_string().as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Run {
    pub fn new(config: RunConfig) -> Result<Self, RunError> {
        config.validate()?;
        let flow = config.build_flow()?;
        let hash = config.hash();
        Ok(Run { config, flow, hash })
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        Self::new(RunConfig::load(path)?)
    }

    pub fn header(&self) -> Header {
        Header {
            tool: "travflow",
            version: TOOL_VERSION,
            config_hash: self.hash.clone(),
            seed: self.config.seed,
            name: self.config.name.clone(),
        }
    }

    fn geodesic(&self) -> bool {
        matches!(self.flow.field().kind(), FieldKind::Geodesic(_))
    }

    /// Seeded random entries: a boundary curve picked with probability
    /// proportional to its length, a uniform arclength on it, and for
    /// geodesic fields a uniform angle off the inward normal.
    pub fn sample_entries(&self, n: usize) -> Result<Vec<State>, RunError> {
        let dom = self.flow.domain();
        if dom.vars().len() != 2 {
            return Err(StratError::Unsupported.into());
        }
        let mesh = &self.config.mesh;
        let curves = boundary_loops(dom, mesh.seed_grid, mesh.samples_per_unit);
        if curves.is_empty() {
            return Err(StratError::NoBoundary.into());
        }
        let pick = WeightedIndex::new(curves.iter().map(|c| c.length))
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let geodesic = self.geodesic();
        Ok((0..n)
            .map(|_| {
                let c = &curves[pick.sample(&mut rng)];
                let s = rng.gen_range(0.0..c.length);
                let phi = rng.gen_range(-FRAC_PI_2..FRAC_PI_2);
                chart_state(dom, c, &[s, phi], geodesic)
            })
            .collect())
    }

    pub fn scatter(&self) -> Result<ScatterOutput, RunError> {
        let tol = &self.config.tolerances;
        let entries = self.sample_entries(self.config.scatter.entries)?;
        let outcomes: Vec<Result<TrajectoryRecord, FlowError>> = entries
            .par_iter()
            .map(|e| integrate_trajectory(&self.flow, e, tol, false))
            .collect();
        let (mut trapped, mut not_entry, mut failed) = (0, 0, 0);
        let mut records = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            match o {
                Ok(r) => records.push(r),
                Err(FlowError::BudgetExceeded { .. }) => trapped += 1,
                Err(FlowError::NotAnEntry { .. }) => not_entry += 1,
                Err(_) => failed += 1,
            }
        }
        if failed > 0 && failed as f64 >= FAILURE_LIMIT * entries.len() as f64 {
            return Err(RunError::Numerical(format!(
                "{failed} of {} integrations failed",
                entries.len()
            )));
        }
        let mut patterns: BTreeMap<String, usize> = BTreeMap::new();
        for r in &records {
            *patterns.entry(r.pattern.to_string()).or_default() += 1;
        }
        let summary = ScatterSummary {
            entries: entries.len(),
            samples: records.len(),
            trapped,
            not_entry,
            failed,
            non_generic: records.iter().filter(|r| r.dimension_cap_exceeded).count(),
            reversal: self.reversal_check(&records),
            traversing: traversing_report(&self.flow, TRAVERSING_BUDGET, self.config.seed, tol).into(),
            digest: digest_samples(&records),
            patterns,
        };
        Ok(ScatterOutput { summary, records })
    }

    /// Re-integrates the exits of `(1,1)` trajectories under the reversed
    /// field and measures how far the result lands from the entry.
    fn reversal_check(&self, records: &[TrajectoryRecord]) -> ReversalCheck {
        let reverse = self.flow.reversed();
        let tol = &self.config.tolerances;
        let picked: Vec<&TrajectoryRecord> = records
            .iter()
            .filter(|r| r.pattern.entries() == [1, 1])
            .take(REVERSAL_SAMPLE)
            .collect();
        let errors: Vec<f64> = picked
            .par_iter()
            .map(|r| {
                let s = sample_from_record(&self.flow, r);
                let back = reverse.state(&s.exit_state);
                match integrate_trajectory(&reverse, &back, tol, false) {
                    Ok(b) => {
                        let p = sample_from_record(&reverse, &b);
                        p.exit_point
                            .iter()
                            .zip(&s.entry_point)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max)
                    }
                    Err(_) => f64::INFINITY,
                }
            })
            .collect();
        ReversalCheck {
            checked: errors.len(),
            max_error: errors.into_iter().fold(0.0, f64::max),
        }
    }

    pub fn stratify(&self) -> Result<StrataAtlas, RunError> {
        let atlas = build_atlas(&self.flow, &self.config.mesh, &self.config.tolerances)?;
        if !atlas.filtration().is_nested() {
            return Err(RunError::Invariant("filtration levels are not nested".into()));
        }
        Ok(atlas)
    }

    pub fn atlas_summary(atlas: &StrataAtlas) -> AtlasSummary {
        let filtration = atlas.filtration();
        let top = atlas.counts.trajectory_space_dim as u32 + 1;
        let level_sizes =
            |levels: &[Vec<bool>]| levels.iter().map(|m| m.iter().filter(|b| **b).count()).collect();
        AtlasSummary {
            chart_dim: atlas.chart_dim,
            curves: atlas.curves.len(),
            nodes: atlas.nodes.len(),
            edges: atlas.edges.len(),
            transitions: atlas.transitions.len(),
            failed: atlas.failed,
            failed_fraction: atlas.failed_fraction(),
            counts: atlas.counts.clone(),
            k_convexity: (1..=top)
                .map(|k| {
                    let c = check_k_convexity(atlas, k);
                    ConvexitySummary {
                        k,
                        convex: c.convex,
                        witness_count: c.witnesses.len(),
                        witnesses: c.witnesses.into_iter().take(WITNESS_LIMIT).collect(),
                    }
                })
                .collect(),
            filtration_interior: level_sizes(&filtration.interior),
            filtration_with_boundary: level_sizes(&filtration.with_boundary),
            filtration_nested: filtration.is_nested(),
        }
    }

    fn norms_path(&self) -> Result<&Path, RunError> {
        self.config
            .norms
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("no norms file configured".into()).into())
    }

    /// Annotations for the configured manifold and double, read from `norms`
    /// when given, otherwise from the configured file.
    pub fn annotations(&self, norms: Option<&Path>) -> Result<(AnnotationConfig, NormAnnotations), RunError> {
        let ann = self
            .config
            .annotations
            .clone()
            .ok_or_else(|| ConfigError::Invalid("no [annotations] section".into()))?;
        let path = match norms {
            Some(p) => p,
            None => self.norms_path()?,
        };
        let reg = NormRegistry::load(path)?;
        let found = NormAnnotations::from_registry(&reg, &ann.manifold, &ann.double, ann.max_degree);
        Ok((ann, found))
    }

    /// Bound records for each `j` in `degrees`. A right-hand side without
    /// provenance is refused here, before anything is emitted.
    pub fn bounds(
        &self,
        counts: &CountsTable,
        degrees: &[u32],
        norms: Option<&Path>,
    ) -> Result<BoundsSection, RunError> {
        let (ann, found) = self.annotations(norms)?;
        let reports = degrees
            .iter()
            .map(|&j| morse_bound_report(counts, j, &found))
            .collect::<Result<Vec<_>, _>>()?;
        for r in &reports {
            for rhs in [&r.rhs_manifold, &r.rhs_double] {
                if rhs.provenance.trim().is_empty() {
                    return Err(RunError::Invariant(format!(
                        "right-hand side for degree {} has no provenance",
                        r.j
                    )));
                }
            }
        }
        Ok(BoundsSection {
            manifold: ann.manifold,
            double: ann.double,
            reports,
            obstruction: obstruction_report(counts, &found),
        })
    }

    /// Degrees with annotations on both spaces.
    pub fn annotated_degrees(&self, norms: Option<&Path>) -> Result<Vec<u32>, RunError> {
        let (_, found) = self.annotations(norms)?;
        Ok(found
            .manifold
            .keys()
            .filter(|j| found.double.contains_key(j))
            .copied()
            .collect())
    }

    /// The configured shipped models, by name.
    pub fn shipped_models(&self) -> Result<Vec<StratifiedModel>, RunError> {
        let all = shipped();
        self.config
            .mho
            .models
            .iter()
            .map(|name| {
                all.iter()
                    .find(|m| &m.name == name)
                    .cloned()
                    .ok_or_else(|| ConfigError::Invalid(format!("unknown model `{name}`")).into())
            })
            .collect()
    }
}

/// Complexes of one model in both variants with their artifacts. Failures
/// of heuristic models become notices; on shipped models they are errors.
pub fn mho_section(
    model: &StratifiedModel,
    artifacts: &mut Artifacts,
    notices: &mut Vec<String>,
) -> Result<Vec<MhoSummary>, RunError> {
    let mut out = Vec::new();
    for variant in [Variant::Interior, Variant::Double] {
        match mho_one(model, variant, artifacts, notices) {
            Ok(s) => out.push(s),
            Err(e) if model.heuristic => {
                notices.push(format!("{} ({variant}): skipped, {e}", model.name));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn mho_one(
    model: &StratifiedModel,
    variant: Variant,
    artifacts: &mut Artifacts,
    notices: &mut Vec<String>,
) -> Result<MhoSummary, RunError> {
    let mho = build_mho(model, variant)?;
    let stem = format!("mho/{}-{variant}", model.name);
    let dump: MhoDump = mho.dump()?;
    artifacts.add_json(format!("{stem}.json"), &dump);
    let codims: Vec<u32> = (0..mho.groups.len() as u32).collect();
    let mut localized = Vec::new();
    for &j in &codims {
        match localized_pd(&mho, j as usize) {
            Ok(pd) => localized.push(PdSummary {
                degree: pd.degree,
                homology_rank: pd.homology_rank,
                rank_mod_boundaries: pd.rank_mod_boundaries,
                injective: pd.is_injective(),
            }),
            Err(MhoError::Unsupported(why)) => {
                notices.push(format!("{} ({variant}) codim {j}: no localized duality, {why}", model.name));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut balls = Vec::new();
    for &j in &codims {
        let q = mho.normed_quotient(j);
        let dim = q.quotient_dim();
        match ball_polytope(&q) {
            Ok(vertices) => {
                let dump: PolytopeDump = polytope_dump(dim, &vertices);
                artifacts.add_json(format!("{stem}-codim{j}-ball.json"), &dump);
                let svg = polytope_svg(dim, &vertices);
                let sketched = svg.is_some();
                match svg {
                    Some(svg) => artifacts.add(format!("{stem}-codim{j}-ball.svg"), svg),
                    None if dim > SKETCH_DIM => notices.push(format!(
                        "{} ({variant}) codim {j}: ball of dimension {dim} written as JSON only",
                        model.name
                    )),
                    None => {}
                }
                balls.push(BallSummary {
                    codim: j,
                    quotient_dim: dim,
                    vertices: Some(vertices.len()),
                    sketched,
                });
            }
            Err(MhoError::DimensionCap { dim, cap }) => {
                notices.push(format!(
                    "{} ({variant}) codim {j}: quotient of dimension {dim} above the hull cap {cap}, ball skipped",
                    model.name
                ));
                balls.push(BallSummary {
                    codim: j,
                    quotient_dim: dim,
                    vertices: None,
                    sketched: false,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let summary = MhoSummary {
        model: model.name.clone(),
        variant,
        heuristic: model.heuristic,
        ranks: mho.ranks(),
        basis_rule: codims.iter().map(|&j| basis_rule(model, variant, j)).collect(),
        delta_squared_vanishes: mho.delta_squared_vanishes(),
        localized_pd: localized,
        balls,
    };
    if !summary.delta_squared_vanishes {
        return Err(RunError::Invariant(format!("{stem}: differential does not square to zero")));
    }
    if !model.heuristic && summary.ranks != summary.basis_rule {
        return Err(RunError::Invariant(format!(
            "{stem}: ranks {:?} differ from the basis rule {:?}",
            summary.ranks, summary.basis_rule
        )));
    }
    Ok(summary)
}

pub fn scatter_artifacts(run: &Run, out: &ScatterOutput, artifacts: &mut Artifacts) -> Result<(), RunError> {
    #[derive(Serialize)]
    struct ScatterFile<'a> {
        header: Header,
        scatter: &'a ScatterSummary,
    }
    artifacts.add_json(
        "scatter.json",
        &ScatterFile {
            header: run.header(),
            scatter: &out.summary,
        },
    );
    if run.config.scatter.cache {
        let mut bin = Vec::new();
        write_cache(&mut bin, &out.records).map_err(|e| RunError::Io(e.to_string()))?;
        let mut lines = Vec::new();
        write_jsonl(&mut lines, &out.records).map_err(|e| RunError::Io(e.to_string()))?;
        artifacts.add("trajectories.trvk", bin);
        artifacts.add("trajectories.jsonl", lines);
    }
    Ok(())
}

pub fn atlas_artifacts(run: &Run, atlas: &StrataAtlas, artifacts: &mut Artifacts) {
    #[derive(Serialize)]
    struct CountsFile {
        header: Header,
        counts: serde_json::Value,
    }
    artifacts.add("counts.csv", counts_csv(&atlas.counts));
    artifacts.add_json(
        "counts.json",
        &CountsFile {
            header: run.header(),
            counts: counts_json(&atlas.counts),
        },
    );
    artifacts.add("atlas.svg", atlas_svg(atlas));
}

/// Every stage the config asks for, in order: scatter, atlas, bounds,
/// complexes. Nothing is written; see [`Artifacts::write`].
pub fn full_run(run: &Run) -> Result<(Report, Artifacts), RunError> {
    let mut artifacts = Artifacts::default();
    let mut notices = Vec::new();
    let scatter = if run.config.scatter.entries > 0 {
        let out = run.scatter()?;
        scatter_artifacts(run, &out, &mut artifacts)?;
        Some(out.summary)
    } else {
        None
    };
    let atlas = run.stratify()?;
    atlas_artifacts(run, &atlas, &mut artifacts);
    let bounds = match (&run.config.annotations, &run.config.norms) {
        (Some(_), Some(_)) => {
            let degrees = run.annotated_degrees(None)?;
            Some(run.bounds(&atlas.counts, &degrees, None)?)
        }
        _ => {
            notices.push("no annotations configured, bounds skipped".into());
            None
        }
    };
    let mut models = run.shipped_models()?;
    if run.config.mho.heuristic {
        let coarse = build_atlas(&run.flow, &run.config.mho.heuristic_mesh, &run.config.tolerances)?;
        match atlas_models(&coarse, &run.config.name) {
            Ok(ms) => models.extend(ms),
            Err(e) => notices.push(format!("no cell model from the atlas: {e}")),
        }
    }
    let mut mho = Vec::new();
    for m in &models {
        mho.extend(mho_section(m, &mut artifacts, &mut notices)?);
    }
    let report = Report {
        header: run.header(),
        scatter,
        atlas: Some(Run::atlas_summary(&atlas)),
        bounds,
        mho,
        notices,
    };
    artifacts.add_json("report.json", &report);
    Ok((report, artifacts))
}

/// Digest of all artifact bytes, in path order.
pub fn artifacts_digest(artifacts: &Artifacts) -> String {
    let mut all = Vec::new();
    for (p, b) in &artifacts.files {
        all.extend_from_slice(p.to_string_lossy().as_bytes());
        all.push(0);
        all.extend_from_slice(&(b.len() as u64).to_le_bytes());
        all.extend_from_slice(b);
    }
    hex_digest(&all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_run(entries: usize) -> Run {
        let text = format!(
            r#"
name = "disk"
seed = 3
[domain]
vars = ["x", "y"]
z = "x^2 + y^2 - 1"
bbox = [[-1.5, 1.5], [-1.5, 1.5]]
[field]
kind = "geodesic"
[mesh]
samples_per_unit = 3.0
angle_steps = 8
[scatter]
entries = {entries}
"#
        );
        Run::new(RunConfig::parse(&text).unwrap()).unwrap()
    }

    #[test]
    fn entries_are_seeded() {
        let run = disk_run(10);
        assert_eq!(run.sample_entries(20).unwrap(), run.sample_entries(20).unwrap());
        let mut other = run.clone();
        other.config.seed = 4;
        assert_ne!(run.sample_entries(20).unwrap(), other.sample_entries(20).unwrap());
    }

    #[test]
    fn disk_scatter_is_all_chords() {
        let out = disk_run(200).scatter().unwrap();
        let s = &out.summary;
        assert_eq!(s.samples + s.not_entry, 200);
        assert_eq!(s.trapped + s.failed, 0);
        assert!(s.patterns.keys().all(|p| p == "11" || p == "2"));
        assert!(s.reversal.checked > 0 && s.reversal.max_error < 1e-6);
        assert_eq!(s.traversing.exit_fraction, 1.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::from(ConfigError::Parse("x".into())).exit_code(), 2);
        assert_eq!(RunError::from(StratError::TooManyFailures { failed: 2, total: 3 }).exit_code(), 3);
        assert_eq!(RunError::from(MhoError::StratificationDefect("x".into())).exit_code(), 4);
        assert_eq!(
            RunError::from(FlowError::IllConditioned { reason: "x".into(), time: 0.0 }).exit_code(),
            3
        );
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn full_run_without_annotations_notes_it() {
        let run = disk_run(50);
        let (report, artifacts) = full_run(&run).unwrap();
        assert!(report.bounds.is_none());
        assert!(report.notices.iter().any(|n| n.contains("bounds skipped")));
        assert!(artifacts.files.contains_key(Path::new("report.json")));
        assert!(artifacts.files.contains_key(Path::new("counts.csv")));
        let again = full_run(&run).unwrap().1;
        assert_eq!(artifacts_digest(&artifacts), artifacts_digest(&again));
    }
}
