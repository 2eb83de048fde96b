//! Acceptance run: one PASS/FAIL line per criterion, each with its time
//! budget. Expected values come from closed forms or from oracles written
//! here, independently of the library code they check.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use travflow::expr::Var;
use travflow::flow::scatter::sample_from_record;
use travflow::flow::{
    integrate_trajectory, tangency_multiplicity, FieldSpec, Flow, ImplicitDomain, Metric,
    Tolerances,
};
use travflow::homology::groups::{betti_numbers, les_check};
use travflow::homology::{smith_normal_form, Axis, CellComplex, CellSet, CubicalComplex, Locus};
use travflow::local_models::{boundary_local_model, reachable_patterns};
use travflow::mho::{build_mho, models, NormedQuotient, StratifiedModel, Variant};
use travflow::omega::{degenerates_to, enumerate, is_admissible, Pattern};
use travflow::pipeline::{full_run, Run};
use travflow::simplicial_norm::ReducedRank;
use travflow::stratification::{morse_bound_report, obstruction_report, CountsTable, NormAnnotations};
use travflow::stratification::bounds::RankBound;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pat(s: &str) -> Pattern {
    s.parse().unwrap()
}

fn pattern_set(list: &[&str]) -> BTreeSet<Pattern> {
    list.iter().map(|s| pat(s)).collect()
}

fn poset_enumeration() -> Outcome {
    let got: BTreeSet<Pattern> = enumerate(2).into_iter().collect();
    let want = pattern_set(&["11", "2", "121", "1221", "13", "31"]);
    ensure(got == want, || format!("enumerate(2) = {got:?}"))?;
    let top: BTreeSet<Pattern> = got.into_iter().filter(|p| p.reduced_norm() == 2).collect();
    let listed = pattern_set(&["1221", "13", "31"]);
    ensure(top == listed, || format!("reduced norm 2 subset = {top:?}"))?;
    Ok("6 patterns, 3 of reduced norm 2".into())
}

/// Every composition of `1..=max` with admissible parity.
fn admissible_up_to(max: u32) -> Vec<Pattern> {
    let mut out = Vec::new();
    let mut queue: VecDeque<Vec<u32>> = (1..=max).map(|k| vec![k]).collect();
    while let Some(seq) = queue.pop_front() {
        let sum: u32 = seq.iter().sum();
        if is_admissible(&seq) {
            out.push(Pattern::new(seq.clone()).unwrap());
        }
        for k in 1..=max - sum {
            let mut next = seq.clone();
            next.push(k);
            queue.push_back(next);
        }
    }
    out
}

fn order_oracle() -> Outcome {
    let all = admissible_up_to(6);
    let mut mismatches = Vec::new();
    for target in &all {
        let sampled = reachable_patterns(target, 0.1, 10_000, 11).patterns;
        let moved: BTreeSet<Pattern> = all
            .iter()
            .filter(|s| s.norm() <= target.norm() && degenerates_to(s, target))
            .cloned()
            .collect();
        if sampled != moved {
            mismatches.push(format!("{target}: sampled {sampled:?} vs moves {moved:?}"));
        }
    }
    ensure(mismatches.is_empty(), || mismatches.join("; "))?;
    Ok(format!("{} admissible patterns agree", all.len()))
}

/// `z = u^j + p_{j-2} u^{j-2} + … + p_0` over `(u, p_0, …)` with the field
/// `∂_u`; the origin is a tangency of order `j`.
fn local_model_flow(j: u32) -> Flow {
    let model = boundary_local_model(j, &[]);
    let factor = &model.factors[0];
    let params = [Var::X, Var::Y, Var::Theta];
    let mut z = format!("u^{}", factor.multiplicity);
    for (l, p) in params.iter().take(factor.coeffs.len()).enumerate() {
        z.push_str(&format!(" + {} * u^{l}", p.name()));
    }
    let vars: Vec<Var> = std::iter::once(Var::U)
        .chain(params.iter().copied().take(factor.coeffs.len()))
        .collect();
    let mut dir = vec![0.0; vars.len()];
    dir[0] = 1.0;
    let bbox = vec![(-1.0, 1.0); vars.len()];
    let domain = ImplicitDomain::parse(vars.clone(), &z, bbox).unwrap();
    Flow::new(domain, FieldSpec::constant(vars, &dir), 6).unwrap()
}

fn multiplicity_detection() -> Outcome {
    let base = Tolerances::default();
    for j in 1..=4 {
        let flow = local_model_flow(j);
        let origin = flow.state(&[]);
        for tol in [base, base.halved(), base.halved().halved()] {
            let m = tangency_multiplicity(&flow, &origin, &tol)
                .map_err(|e| format!("j = {j}: {e}"))?
                .multiplicity;
            ensure(m == j, || format!("j = {j}: detected {m} at tol_mult {:e}", tol.tol_mult))?;
        }
    }
    Ok("j = 1..4 exact at three tolerance levels".into())
}

fn geodesic(domain: ImplicitDomain) -> Flow {
    Flow::new(domain, FieldSpec::geodesic(Metric::euclidean()), 5).unwrap()
}

/// Boundary point at angle `a` on the circle of radius `r` with heading
/// `theta`.
fn on_circle(r: f64, a: f64, theta: f64) -> [f64; 4] {
    [r * a.cos(), r * a.sin(), 0.0, theta]
}

fn dot(p: [f64; 2], w: [f64; 2]) -> f64 {
    p[0] * w[0] + p[1] * w[1]
}

fn disk_chords(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 4]> {
    (0..n)
        .map(|_| {
            let a = rng.gen_range(0.0..2.0 * PI);
            let phi = rng.gen_range(-1.5..1.5);
            on_circle(1.0, a, a + PI + phi)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ChordType {
    /// Crosses to the other side of the outer circle.
    OuterToOuter,
    /// Runs into the hole.
    ToInner,
    /// Leaves the hole for the outer circle.
    InnerToOuter,
    /// Touches the inner circle.
    Grazing,
}

/// Line–circle intersection for the annulus `1 <= r <= 2`, plus the
/// distance from the tangency configuration.
fn chord_oracle(s: &[f64; 4]) -> (ChordType, f64, f64) {
    let p = [s[0], s[1]];
    let w = [s[3].cos(), s[3].sin()];
    let pw = dot(p, w);
    let r2 = dot(p, p);
    if r2 < 2.0 {
        // from the inner circle, |p| = 1: root of |p + t w| = 2
        let t = -pw + (pw * pw + 4.0 - r2).sqrt();
        return (ChordType::InnerToOuter, t, f64::INFINITY);
    }
    let miss = (p[0] * w[1] - p[1] * w[0]).abs();
    let gap = miss - 1.0;
    if gap < 0.0 {
        let t = -pw - (pw * pw - (r2 - 1.0)).sqrt();
        (ChordType::ToInner, t, gap.abs())
    } else if gap == 0.0 {
        (ChordType::Grazing, -2.0 * pw, 0.0)
    } else {
        (ChordType::OuterToOuter, -2.0 * pw, gap)
    }
}

fn annulus_entries(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 4]> {
    (0..n)
        .map(|k| {
            let a = rng.gen_range(0.0..2.0 * PI);
            let phi = rng.gen_range(-1.5..1.5);
            match k % 5 {
                0 => on_circle(1.0, a, a + phi),
                // exact tangents to the hole
                1 if k % 50 == 1 => on_circle(2.0, a, a + PI + (0.5f64).asin()),
                _ => on_circle(2.0, a, a + PI + phi),
            }
        })
        .collect()
}

fn classify(rec: &travflow::flow::TrajectoryRecord) -> Result<ChordType, String> {
    let r = rec.exit[0].hypot(rec.exit[1]);
    let entry_r = rec.entry[0].hypot(rec.entry[1]);
    match (rec.pattern.to_string().as_str(), entry_r < 1.5, r < 1.5) {
        ("121", false, false) => Ok(ChordType::Grazing),
        ("11", false, false) => Ok(ChordType::OuterToOuter),
        ("11", false, true) => Ok(ChordType::ToInner),
        ("11", true, false) => Ok(ChordType::InnerToOuter),
        (p, _, _) => Err(format!("unexpected pattern {p} ending at radius {r}")),
    }
}

fn flow_golden() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let disk = geodesic(ImplicitDomain::unit_disk());
    let mut worst: f64 = 0.0;
    for s in disk_chords(&mut rng, 10_000) {
        let rec = integrate_trajectory(&disk, &s, &tol, false).map_err(|e| format!("disk {s:?}: {e}"))?;
        let w = [s[3].cos(), s[3].sin()];
        let t = -2.0 * dot([s[0], s[1]], w);
        let exit = [s[0] + t * w[0], s[1] + t * w[1]];
        let err = (rec.flight_time - t)
            .abs()
            .max((rec.exit[0] - exit[0]).abs())
            .max((rec.exit[1] - exit[1]).abs());
        worst = worst.max(err);
        ensure(rec.pattern.to_string() == "11", || format!("disk {s:?}: pattern {}", rec.pattern))?;
    }
    ensure(worst <= 1e-6, || format!("disk exit error {worst:e}"))?;

    // tangency band: a few multiples of the boundary tolerance in the
    // distance of the line from the center
    let band = 10.0 * tol.tol_boundary;
    let annulus = geodesic(ImplicitDomain::annulus());
    let (mut in_band, mut wrong, mut t_err): (usize, Vec<String>, f64) = (0, Vec::new(), 0.0);
    for s in annulus_entries(&mut rng, 10_000) {
        let (want, t, gap) = chord_oracle(&s);
        let got = integrate_trajectory(&annulus, &s, &tol, false)
            .map_err(|e| e.to_string())
            .and_then(|r| classify(&r).map(|c| (c, r.flight_time)));
        if gap <= band {
            in_band += 1;
            continue;
        }
        match got {
            Ok((c, _)) if c != want => wrong.push(format!("{s:?}: {c:?} vs {want:?}")),
            Ok((_, ft)) => t_err = t_err.max((ft - t).abs()),
            Err(e) => wrong.push(format!("{s:?}: {e}")),
        }
    }
    ensure(wrong.is_empty(), || format!("{} misclassified: {}", wrong.len(), wrong[..wrong.len().min(3)].join("; ")))?;
    ensure(t_err <= 1e-6, || format!("annulus flight-time error {t_err:e}"))?;
    Ok(format!(
        "disk max error {worst:.1e}; annulus 0 misclassified, {in_band} in band, flight error {t_err:.1e}"
    ))
}

fn reversal_on(flow: &Flow, entries: &[[f64; 4]], tol: &Tolerances) -> Result<(usize, f64), String> {
    let back = flow.reversed();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for s in entries {
        let Ok(rec) = integrate_trajectory(flow, s, tol, false) else { continue };
        if rec.pattern.entries() != [1, 1] {
            continue;
        }
        let fwd = sample_from_record(flow, &rec);
        let again = integrate_trajectory(&back, &back.state(&fwd.exit_state), tol, false)
            .map_err(|e| format!("reverse of {s:?}: {e}"))?;
        let home = sample_from_record(&back, &again).exit_point;
        let err = home
            .iter()
            .zip(&fwd.entry_point)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        checked += 1;
    }
    Ok((checked, worst))
}

fn scattering_reversal() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let disk = geodesic(ImplicitDomain::unit_disk());
    let (nd, ed) = reversal_on(&disk, &disk_chords(&mut rng, 5_000), &tol)?;
    let annulus = geodesic(ImplicitDomain::annulus());
    let (na, ea) = reversal_on(&annulus, &annulus_entries(&mut rng, 5_000), &tol)?;
    ensure(ed <= 1e-6 && ea <= 1e-6, || format!("errors disk {ed:e}, annulus {ea:e}"))?;
    Ok(format!("{nd} disk and {na} annulus chords, max error {:.1e}", ed.max(ea)))
}

fn homology_engine() -> Outcome {
    let torus = CubicalComplex::torus(3, 4).unwrap();
    let b = betti_numbers(torus.complex());
    ensure(b == [1, 2, 1], || format!("torus ranks {b:?}"))?;

    let axes = [Axis::closed(2), Axis::periodic(3)];
    let annulus = CubicalComplex::grid(&axes).unwrap();
    let (double, _) = annulus.double(&annulus.grid_boundary(&axes)).unwrap();
    let b = betti_numbers(double.complex());
    ensure(b == [1, 2, 1], || format!("annulus double ranks {b:?}"))?;

    let small = CubicalComplex::torus(3, 3).unwrap();
    let cx = small.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..100 {
        let seeds: Vec<usize> = (0..rng.gen_range(1..12)).map(|_| rng.gen_range(0..cx.len())).collect();
        let cut_b = rng.gen_range(0..=seeds.len());
        let cut_c = rng.gen_range(0..=cut_b);
        let a = cx.closure(seeds.iter().copied());
        let b = cx.closure(seeds[..cut_b].iter().copied().skip(1));
        let c = cx.closure(seeds[..cut_c].iter().copied().skip(1));
        let r = les_check(cx, &a, &b, &c).map_err(|e| format!("triple {trial}: {e}"))?;
        ensure(r.exact, || format!("triple {trial}: {:?}", r.nodes))?;
    }

    for j in 0..=2 {
        let d = torus.duality(&torus.complex().none(), j).map_err(|e| e.to_string())?;
        ensure(d.pd.is_unimodular(), || format!("degree {j} duality matrix not unimodular"))?;
    }
    Ok("torus (1,2,1), double (1,2,1), 100 exact triples, unimodular duality".into())
}

/// Relative cochains of `upper` mod `lower`: the torsion and the rank of
/// `H^q`, from Smith forms of the cellular boundary matrices.
fn relative_group(cx: &CellComplex, upper: &CellSet, lower: &CellSet, q: usize) -> (Vec<BigInt>, usize) {
    let cells = |d: usize| -> Vec<usize> {
        cx.cells_of_dim(d)
            .iter()
            .copied()
            .filter(|&i| upper.contains(i) && !lower.contains(i))
            .collect()
    };
    let boundary_rank_and_torsion = |d: usize| -> (usize, Vec<BigInt>) {
        if d == 0 {
            return (0, Vec::new());
        }
        let (rows, cols) = (cells(d - 1), cells(d));
        if rows.is_empty() || cols.is_empty() {
            return (0, Vec::new());
        }
        let snf = smith_normal_form(&cx.boundary_matrix(d, &rows, &cols));
        let torsion = snf.diagonal.iter().filter(|x| !x.is_zero() && !x.abs().is_one()).cloned().collect();
        (snf.rank, torsion)
    };
    // H^q torsion is the torsion of coker δ^{q-1}, the transpose of ∂_q
    let (rank_in, torsion) = boundary_rank_and_torsion(q);
    let (rank_out, _) = boundary_rank_and_torsion(q + 1);
    (torsion, cells(q).len() - rank_in - rank_out)
}

/// Open stratum components of exact depth `depth` by breadth-first search
/// over face incidences between cells of the same tag.
fn stratum_components(cx: &CellComplex, depth: u32, locus: Option<Locus>) -> usize {
    let keep = |i: usize| cx.cell(i).depth == depth && locus.is_none_or(|l| cx.cell(i).locus == l);
    let mut adjacent: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in (0..cx.len()).filter(|&i| keep(i)) {
        adjacent.entry(i).or_default();
        for &(f, _) in &cx.cell(i).boundary {
            if keep(f) && cx.cell(f).stratum == cx.cell(i).stratum {
                adjacent.entry(i).or_default().push(f);
                adjacent.entry(f).or_default().push(i);
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for &start in adjacent.keys() {
        if !seen.insert(start) {
            continue;
        }
        count += 1;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &n in &adjacent[&i] {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    count
}

/// Interior strata appear twice in a double, boundary strata once.
fn expected_rank(model: &StratifiedModel, variant: Variant, j: u32) -> usize {
    let cx = model.complex();
    let closed = (0..cx.len()).all(|i| cx.cell(i).locus == Locus::Interior);
    match variant {
        Variant::Interior => stratum_components(cx, j, Some(Locus::Interior)),
        Variant::Double if closed => stratum_components(cx, j, None),
        Variant::Double => {
            2 * stratum_components(cx, j, Some(Locus::Interior)) + stratum_components(cx, j, Some(Locus::Boundary))
        }
    }
}

fn mho_contracts() -> Outcome {
    let shipped = models::shipped();
    let mut built = 0;
    for model in &shipped {
        for variant in [Variant::Interior, Variant::Double] {
            let tag = format!("{} {variant}", model.name);
            let mho = build_mho(model, variant).map_err(|e| format!("{tag}: {e}"))?;
            for w in mho.differentials.windows(2) {
                ensure((&w[0].matrix * &w[1].matrix).is_zero(), || format!("{tag}: δ∘δ ≠ 0"))?;
            }
            for g in &mho.groups {
                let (torsion, rank) = relative_group(mho.ambient(), mho.filtration(g.codim), mho.filtration(g.codim + 1), g.degree);
                ensure(torsion.is_empty(), || format!("{tag}: codim {} torsion {torsion:?}", g.codim))?;
                let want = expected_rank(model, variant, g.codim);
                ensure(g.rank() == rank && rank == want, || {
                    format!("{tag}: codim {} rank {} (cohomology {rank}, strata {want})", g.codim, g.rank())
                })?;
            }
            built += 1;
        }
    }
    Ok(format!("{} models, {built} complexes", shipped.len()))
}

fn annotations(j: u32, manifold: u64, double: u64) -> NormAnnotations {
    let bound = |r| RankBound {
        rank: ReducedRank::Exact(r),
        provenance: "hand-built".into(),
    };
    NormAnnotations {
        manifold: [(j, bound(manifold))].into(),
        double: [(j, bound(double))].into(),
    }
}

fn bound_arithmetic() -> Outcome {
    let one = CountsTable::new(4, [(pat("1221"), 1)]);
    let r = morse_bound_report(&one, 2, &annotations(2, 0, 0)).map_err(|e| e.to_string())?;
    ensure(r.lhs_manifold == 4, || format!("(1221) at j = 2 gives {}", r.lhs_manifold))?;
    let two = CountsTable::new(4, [(pat("121"), 1), (pat("1221"), 1)]);
    let r = morse_bound_report(&two, 1, &annotations(1, 0, 0)).map_err(|e| e.to_string())?;
    ensure(r.lhs_manifold == 3 && r.lhs_double == 9, || {
        format!("(121)+(1221) at j = 1 gives {} / {}", r.lhs_manifold, r.lhs_double)
    })?;

    let pool: Vec<Pattern> = enumerate(4);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..500 {
        let mut rows: Vec<(Pattern, usize)> = Vec::new();
        for p in &pool {
            if rng.gen_bool(0.3) {
                rows.push((p.clone(), rng.gen_range(0..5)));
            }
        }
        let table = CountsTable::new(6, rows.clone());
        let j = rng.gen_range(0..=4u32);
        let (m, d) = (rng.gen_range(0..30u64), rng.gen_range(0..60u64));
        let ann = annotations(j, m, d);
        let sup = |p: &Pattern| p.len() as u128;
        let lhs1: u128 = rows.iter().filter(|(p, _)| p.reduced_norm() == j).map(|(p, c)| sup(p) * *c as u128).sum();
        let lhs2 = lhs1
            + 2 * rows
                .iter()
                .filter(|(p, _)| p.reduced_norm() == j + 1)
                .map(|(p, c)| (sup(p) - 1) * *c as u128)
                .sum::<u128>();
        let r = morse_bound_report(&table, j, &ann).map_err(|e| e.to_string())?;
        ensure(r.lhs_manifold == lhs1 && r.lhs_double == lhs2, || {
            format!("{rows:?} at j = {j}: {} / {} vs {lhs1} / {lhs2}", r.lhs_manifold, r.lhs_double)
        })?;
        ensure(r.satisfied == (lhs1 >= m as u128 && lhs2 >= d as u128), || format!("{rows:?}: satisfied flag"))?;

        let empty_deep = rows.iter().all(|(p, c)| p.reduced_norm() < j || *c == 0);
        let entry = obstruction_report(&table, &ann).into_iter().find(|e| e.j == j).ok_or("degree missing")?;
        ensure(entry.flagged == ((m > 0 || d > 0) && empty_deep), || format!("{rows:?} at j = {j}: obstruction flag"))?;
    }
    Ok("worked examples and 500 random tables".into())
}

type Rat = BigRational;

fn rat(v: i64) -> Rat {
    Rat::from_integer(v.into())
}

/// Solves the square system `m x = b` exactly, or `None` when singular.
fn solve(mut m: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[c][c];
                for k in c..n {
                    let t = &f * &m[c][k];
                    m[r][k] -= t;
                }
                let t = &f * &b[c];
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &m[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    (k - 1..n)
        .flat_map(|last| {
            subsets(last, k - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

/// `min_u ‖v + B u‖₁` for `B` of full column rank `k`: the objective is
/// convex, piecewise linear and coercive, so it is minimal at a vertex
/// where `k` independent coordinates of `v + B u` vanish.
fn breakpoint_norm(v: &[Rat], columns: &[Vec<Rat>]) -> Rat {
    let k = columns.len();
    subsets(v.len(), k)
        .into_iter()
        .filter_map(|rows| {
            let m = rows.iter().map(|&r| columns.iter().map(|c| c[r].clone()).collect()).collect();
            let rhs = rows.iter().map(|&r| -v[r].clone()).collect();
            solve(m, rhs)
        })
        .map(|u| {
            (0..v.len())
                .map(|i| (&v[i] + columns.iter().zip(&u).map(|(c, x)| &c[i] * x).sum::<Rat>()).abs())
                .sum::<Rat>()
        })
        .min()
        .unwrap_or_else(|| v.iter().map(|x| x.abs()).sum())
}

fn full_column_rank(columns: &[Vec<Rat>]) -> bool {
    let n = columns.first().map_or(0, Vec::len);
    columns.is_empty()
        || subsets(n, columns.len()).into_iter().any(|rows| {
            let m = rows.iter().map(|&r| columns.iter().map(|c| c[r].clone()).collect()).collect();
            solve(m, vec![Rat::zero(); columns.len()]).is_some()
        })
}

fn quotient_norms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(1..=2.min(n - 1));
        let columns: Vec<Vec<Rat>> = (0..k).map(|_| (0..n).map(|_| rat(rng.gen_range(-2..=2))).collect()).collect();
        if !full_column_rank(&columns) {
            continue;
        }
        let v: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(-3..=3))).collect();
        let lp = NormedQuotient::new(n, columns.clone()).norm(&v).value;
        let oracle = breakpoint_norm(&v, &columns);
        ensure(lp == oracle, || format!("B = {columns:?}, v = {v:?}: {lp} vs {oracle}"))?;
        done += 1;
    }
    for n in 1..=4 {
        let mut got = travflow::mho::ball_polytope(&NormedQuotient::new(n, Vec::new())).map_err(|e| e.to_string())?;
        let mut want: Vec<Vec<Rat>> = (0..n)
            .flat_map(|i| {
                [1, -1].map(|s| {
                    let mut e = vec![Rat::zero(); n];
                    e[i] = rat(s);
                    e
                })
            })
            .collect();
        got.sort();
        want.sort();
        ensure(got == want, || format!("dimension {n} ball {got:?}"))?;
    }
    Ok("100 random instances, cross-polytopes in dimensions 1..4".into())
}

fn determinism() -> Outcome {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/annulus.cfg");
    let mut outputs = Vec::new();
    let mut slowest = Duration::ZERO;
    for _ in 0..2 {
        let start = Instant::now();
        let run = Run::load(&cfg).map_err(|e| e.to_string())?;
        ensure(run.config.scatter.entries == 100_000, || "config no longer asks for 10⁵ entries".into())?;
        let (_, artifacts) = full_run(&run).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        outputs.push(artifacts.files);
    }
    ensure(outputs[0] == outputs[1], || {
        let differing: Vec<_> = outputs[0]
            .iter()
            .filter(|(p, b)| outputs[1].get(*p) != Some(*b))
            .map(|(p, _)| p.display().to_string())
            .collect();
        format!("artifacts differ: {differing:?}")
    })?;
    ensure(slowest < Duration::from_secs(60), || format!("a full run took {slowest:?}"))?;
    Ok(format!("{} identical files, slowest run {:.1} s", outputs[0].len(), slowest.as_secs_f64()))
}

fn main() {
    let criteria: [(&str, Check, u64); 10] = [
        ("poset enumeration", poset_enumeration, 1),
        ("order-oracle agreement", order_oracle, 60),
        ("multiplicity detection", multiplicity_detection, 1),
        ("flow golden tests", flow_golden, 60),
        ("scattering reversal", scattering_reversal, 30),
        ("homology engine", homology_engine, 30),
        ("mho complex contracts", mho_contracts, 30),
        ("bound arithmetic", bound_arithmetic, 1),
        ("quotient norms", quotient_norms, 30),
        ("determinism", determinism, 120),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(budget) {
                Ok(detail)
            } else {
                Err(format!("{detail}; over the {budget} s budget"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {name} ({:.2} s): {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.2} s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
