//! The shipped configurations, run end to end in memory.

use std::path::{Path, PathBuf};

use travflow::config::RunConfig;
use travflow::pipeline::{full_run, Run};

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn counts(run: &Run) -> Vec<(String, usize)> {
    let atlas = run.stratify().unwrap();
    atlas
        .counts
        .rows
        .iter()
        .map(|r| (r.pattern.to_string(), r.components))
        .collect()
}

fn pairs(list: &[(&str, usize)]) -> Vec<(String, usize)> {
    list.iter().map(|(p, c)| (p.to_string(), *c)).collect()
}

#[test]
fn disk_run_end_to_end() {
    let run = Run::load(&shipped("disk.cfg")).unwrap();
    let (report, artifacts) = full_run(&run).unwrap();
    let scatter = report.scatter.as_ref().unwrap();
    assert_eq!(scatter.failed + scatter.trapped, 0);
    assert!(scatter.reversal.max_error < 1e-6);
    let atlas = report.atlas.as_ref().unwrap();
    assert!(atlas.filtration_nested);
    let rows: Vec<(String, usize)> = atlas.counts.rows.iter().map(|r| (r.pattern.to_string(), r.components)).collect();
    assert_eq!(rows, pairs(&[("11", 1), ("2", 2)]));
    let bounds = report.bounds.as_ref().unwrap();
    assert!(bounds.reports.iter().all(|r| r.satisfied));
    assert!(report.mho.iter().all(|m| m.delta_squared_vanishes && m.ranks == m.basis_rule));
    assert!(artifacts.files.keys().any(|p| p.starts_with("mho")));
}

#[test]
fn annulus_atlas_and_bounds() {
    let run = Run::load(&shipped("annulus.cfg")).unwrap();
    assert_eq!(counts(&run), pairs(&[("11", 4), ("2", 2), ("121", 2)]));
    let atlas = run.stratify().unwrap();
    let degrees = run.annotated_degrees(None).unwrap();
    let bounds = run.bounds(&atlas.counts, &degrees, None).unwrap();
    let lhs: Vec<(u32, u128, u128)> = bounds
        .reports
        .iter()
        .map(|r| (r.j, r.lhs_manifold, r.lhs_double))
        .collect();
    assert_eq!(&lhs[..2], &[(0, 8, 16), (1, 8, 8)]);
    // nothing deeper than codimension one, so every annotated rank must be 0
    assert!(bounds.obstruction.iter().all(|o| !o.flagged));
}

#[test]
fn annulus_counts_survive_refinement() {
    let run = Run::load(&shipped("annulus.cfg")).unwrap();
    let mut fine = run.config.clone();
    fine.mesh = fine.mesh.refined();
    let fine = Run::new(fine).unwrap();
    assert_eq!(counts(&run), counts(&fine));
}

#[test]
fn relative_paths_resolve_against_the_config_file() {
    let text = std::fs::read_to_string(shipped("annulus.cfg")).unwrap();
    let parsed = RunConfig::parse(&text).unwrap();
    let loaded = RunConfig::load(&shipped("annulus.cfg")).unwrap();
    assert_eq!(parsed.seed, loaded.seed);
    assert!(loaded.norms.as_ref().unwrap().is_file());
    assert!(loaded.output_dir.ends_with("out/annulus"));
}
