use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

use travflow::flow::{FieldSpec, Flow, ImplicitDomain, Metric, Tolerances};
use travflow::mho::heuristic::atlas_models;
use travflow::mho::quotient::to_rational;
use travflow::mho::{basis_rule, build_mho, models, NormedQuotient, Variant, Q};
use travflow::stratification::{build_atlas, AtlasConfig};

fn ints(v: &[i64]) -> Vec<Q> {
    to_rational(&v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
}

#[test]
fn coarse_annulus_atlas_gives_consistent_models() {
    let flow = Flow::new(ImplicitDomain::annulus(), FieldSpec::geodesic(Metric::euclidean()), 5).unwrap();
    let mesh = AtlasConfig {
        samples_per_unit: 1.0,
        angle_steps: 6,
        ..AtlasConfig::default()
    };
    let atlas = build_atlas(&flow, &mesh, &Tolerances::default()).unwrap();
    let models = atlas_models(&atlas, "annulus").unwrap();
    assert_eq!(models.len(), 2);
    let mut ranks = Vec::new();
    for m in &models {
        assert!(m.heuristic);
        for variant in [Variant::Interior, Variant::Double] {
            let mho = build_mho(m, variant).unwrap();
            let rule: Vec<usize> = (0..=mho.top_dim as u32).map(|j| basis_rule(m, variant, j)).collect();
            assert_eq!(mho.ranks(), rule);
            assert!(mho.delta_squared_vanishes());
            ranks.push(mho.ranks());
        }
    }
    // outer curve first: interior and double, then the inner curve
    assert_eq!(ranks, [vec![5, 4, 0], vec![10, 10, 0], vec![1, 0, 0], vec![2, 2, 0]]);
}

#[test]
fn shipped_models_build_in_both_variants() {
    for m in models::shipped() {
        for variant in [Variant::Interior, Variant::Double] {
            let mho = build_mho(&m, variant).unwrap_or_else(|e| panic!("{} {variant}: {e}", m.name));
            assert_eq!(mho.groups.len(), mho.top_dim + 1);
            assert_eq!(mho.differentials.len(), mho.top_dim);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn norms_ignore_the_image_of_the_differential(pick in 0usize..64, coeffs in proptest::collection::vec(-3i64..=3, 12), shift in proptest::collection::vec(-2i64..=2, 12)) {
        let candidates: Vec<_> = models::shipped()
            .iter()
            .flat_map(|m| [Variant::Interior, Variant::Double].map(|v| build_mho(m, v).unwrap()))
            .flat_map(|mho| (0..=mho.top_dim as u32).map(move |j| (mho.boundary_image(j), mho.normed_quotient(j))))
            .filter(|(image, _)| image.rows() > 0)
            .collect();
        let (image, space) = &candidates[pick % candidates.len()];
        let v = ints(&coeffs[..image.rows()]);
        let mut w = v.clone();
        for c in 0..image.cols() {
            let col = to_rational(&image.column(c));
            for (x, y) in w.iter_mut().zip(col) {
                *x += y * Q::from_integer(shift[c % shift.len()].into());
            }
        }
        prop_assert_eq!(space.norm(&v).value, space.norm(&w).value);
    }

    #[test]
    fn quotient_norm_is_a_seminorm(
        basis in proptest::collection::vec(-2i64..=2, 4),
        a in proptest::collection::vec(-4i64..=4, 4),
        b in proptest::collection::vec(-4i64..=4, 4),
        k in -3i64..=3,
    ) {
        let space = NormedQuotient::new(4, vec![ints(&basis)]);
        let n = |v: &[Q]| space.norm(v).value;
        let (va, vb) = (ints(&a), ints(&b));
        let sum: Vec<Q> = va.iter().zip(&vb).map(|(x, y)| x + y).collect();
        prop_assert!(n(&sum) <= n(&va) + n(&vb));
        let scaled: Vec<Q> = va.iter().map(|x| x * Q::from_integer(k.into())).collect();
        prop_assert_eq!(n(&scaled), n(&va) * Q::from_integer(k.abs().into()));
        let l1: Q = va.iter().map(Signed::abs).sum();
        prop_assert!(n(&va) <= l1);
    }
}
