//! Hand-built synthetic stratified models, shipped as JSON under
//! `data/models` and regenerated from here.

use std::path::PathBuf;

use super::{Cells, StratifiedModel};
use crate::homology::cubical::{Axis, CubeLabel, CubicalComplex};
use crate::homology::Locus;

fn tagged(
    name: &str,
    mut cx: CubicalComplex,
    tag: impl Fn(&CubeLabel) -> (&'static str, u32, Locus),
) -> StratifiedModel {
    for i in 0..cx.len() {
        let (s, depth, locus) = tag(cx.label(i));
        cx.complex_mut().tag(i, Some(s.to_string()), depth, locus);
    }
    StratifiedModel {
        name: name.into(),
        heuristic: false,
        cells: Cells::Cubical(cx),
    }
}

fn grid(axes: &[Axis]) -> CubicalComplex {
    CubicalComplex::grid(axes).expect("fixed grids are valid")
}

/// Closed torus, one stratum.
pub fn torus_trivial() -> StratifiedModel {
    tagged("torus-trivial", grid(&[Axis::periodic(3), Axis::periodic(3)]), |_| {
        ("11", 0, Locus::Interior)
    })
}

/// Surface of the cube, one stratum.
pub fn sphere_trivial() -> StratifiedModel {
    let cx = CubicalComplex::sphere(2).expect("cube boundary is valid");
    tagged("sphere-trivial", cx, |_| ("11", 0, Locus::Interior))
}

/// `[0,2] × S¹` with the fold circle `{1} × S¹` of depth one and the two
/// end circles as boundary.
pub fn e2_circle() -> StratifiedModel {
    tagged("e2-circle", grid(&[Axis::closed(2), Axis::periodic(3)]), |l| {
        match (l.free[0], l.lo[0]) {
            (false, 1) => ("2", 1, Locus::Interior),
            (false, _) => ("∂11", 1, Locus::Boundary),
            _ => ("11", 0, Locus::Interior),
        }
    })
}

/// `[0,2]` with its midpoint of depth one and both ends as boundary.
pub fn interval_midpoint() -> StratifiedModel {
    tagged("interval-midpoint", grid(&[Axis::closed(2)]), |l| {
        match (l.free[0], l.lo[0]) {
            (false, 1) => ("2", 1, Locus::Interior),
            (false, _) => ("∂11", 1, Locus::Boundary),
            _ => ("11", 0, Locus::Interior),
        }
    })
}

/// `[0,2] × S¹` whose fold circle carries one deeper point, splitting the
/// fold into an open arc.
pub fn cusp_annulus() -> StratifiedModel {
    tagged("cusp-annulus", grid(&[Axis::closed(2), Axis::periodic(4)]), |l| {
        match (l.free[0], l.lo[0], l.free[1], l.lo[1]) {
            (false, 1, false, 0) => ("1221", 2, Locus::Interior),
            (false, 1, _, _) => ("121", 1, Locus::Interior),
            (false, _, _, _) => ("2", 1, Locus::Boundary),
            _ => ("11", 0, Locus::Interior),
        }
    })
}

/// `[0,2]³` with the middle plane `{1} × [0,2]²` of depth one, closed in
/// the other two directions by periodicity.
pub fn slab_with_wall() -> StratifiedModel {
    let axes = [Axis::closed(2), Axis::periodic(2), Axis::periodic(2)];
    tagged("slab-with-wall", grid(&axes), |l| match (l.free[0], l.lo[0]) {
        (false, 1) => ("121", 1, Locus::Interior),
        (false, _) => ("2", 1, Locus::Boundary),
        _ => ("11", 0, Locus::Interior),
    })
}

pub fn shipped() -> Vec<StratifiedModel> {
    vec![
        torus_trivial(),
        sphere_trivial(),
        e2_circle(),
        interval_midpoint(),
        cusp_annulus(),
        slab_with_wall(),
    ]
}

pub fn shipped_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("models")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_files_match_their_generators() {
        for m in shipped() {
            let path = shipped_dir().join(format!("{}.json", m.name));
            if std::env::var_os("TRAVFLOW_REGENERATE").is_some() {
                std::fs::create_dir_all(shipped_dir()).unwrap();
                std::fs::write(&path, m.to_json()).unwrap();
            }
            let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(text, m.to_json(), "{} is stale", path.display());
        }
    }
}
