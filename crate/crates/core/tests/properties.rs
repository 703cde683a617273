use multiproj_core::metrics::{reference_projection, DEFAULT_PROJECTION_TOL};
use multiproj_core::polyproj::{
    build_cutting_polyhedron, improvement_factor, project_activeset_oracle, project_hildreth,
    Polyhedron,
};
use multiproj_core::problems::{sample_indices, SampleBatch};
use multiproj_core::solver::{feasibility_update, AlgorithmKind, Scheme};
use multiproj_core::{ConstraintFamily, ConvexSet, Halfspace, RngStream, Vector};
use proptest::prelude::*;

const DIM: usize = 3;

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, DIM)
}

fn normal() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, DIM).prop_filter("nonzero normal", |v| {
        v.iter().map(|x| x * x).sum::<f64>() > 1e-3
    })
}

/// Sets containing the origin: halfspaces with nonnegative offset and balls
/// whose radius exceeds the distance of their center from the origin.
fn set_through_origin() -> impl Strategy<Value = ConvexSet> {
    prop_oneof![
        (normal(), 0.0..2.0f64).prop_map(|(a, b)| ConvexSet::halfspace(&a, b).unwrap()),
        (point(), 0.1..2.0f64).prop_map(|(c, extra)| {
            let reach = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            ConvexSet::ball(&c, reach + extra).unwrap()
        }),
    ]
}

fn vec_of(v: &[f64]) -> Vector {
    Vector::from_slice(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_idempotent_and_lands_inside(set in set_through_origin(), x in point()) {
        let x = vec_of(&x);
        let p = set.project(&x).unwrap();
        prop_assert!(set.contains(&p, 1e-9).unwrap());
        prop_assert!(set.project(&p).unwrap().dist_sq(&p) <= 1e-18);
    }

    #[test]
    fn projection_is_firmly_nonexpansive(set in set_through_origin(), x in point(), z in point()) {
        let (x, z) = (vec_of(&x), vec_of(&z));
        let (px, pz) = (set.project(&x).unwrap(), set.project(&z).unwrap());
        let lhs = px.dist_sq(&pz);
        let rhs = (&px - &pz).dot(&(&x - &z));
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn reference_projection_satisfies_the_variational_inequality(
        sets in prop::collection::vec(set_through_origin(), 1..6),
        x in point(),
        w in point(),
    ) {
        let family = ConstraintFamily::new(sets).unwrap();
        let x = vec_of(&x);
        let z = reference_projection(&family, &x, DEFAULT_PROJECTION_TOL).unwrap();
        let tol = DEFAULT_PROJECTION_TOL * (1.0 + x.norm());
        prop_assert!(family.max_set_distance(&z).unwrap() <= 10.0 * tol);
        // Any feasible point works; the origin is one, so are its images.
        let feasible = reference_projection(&family, &vec_of(&w), DEFAULT_PROJECTION_TOL).unwrap();
        for w in [Vector::zeros(DIM), feasible] {
            prop_assert!((&x - &z).dot(&(&w - &z)) <= 10.0 * tol * (1.0 + x.norm()));
        }
        prop_assert!(z.dist_sq(&x).sqrt() >= family.max_set_distance(&x).unwrap() - 10.0 * tol);
    }

    #[test]
    fn hildreth_matches_the_oracle(
        rows in prop::collection::vec((normal(), 0.0..1.0f64), 1..8),
        y in point(),
    ) {
        let rows: Vec<Halfspace> = rows
            .into_iter()
            .map(|(a, b)| Halfspace::new(vec_of(&a), b).unwrap())
            .collect();
        let poly = Polyhedron::new(DIM, rows).unwrap();
        let y = vec_of(&y);
        let fast = project_hildreth(&y, &poly, 1e-10, 100_000).unwrap();
        let exact = project_activeset_oracle(&y, &poly).unwrap();
        prop_assert!(fast.point.dist_sq(&exact.point).sqrt() <= 1e-6 * (1.0 + y.norm()));
        prop_assert!(fast.multipliers.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn progress_is_ordered_across_schemes(
        sets in prop::collection::vec(set_through_origin(), 2..10),
        y in point(),
        seed in any::<u64>(),
    ) {
        let family = ConstraintFamily::new(sets).unwrap();
        let y = vec_of(&y);
        let mut rng = RngStream::new(seed, 0);
        let m = family.len();
        let indices = sample_indices(m, 1 + rng.below(m), &mut rng).unwrap();
        let projections = indices.iter().map(|&i| family.sets()[i].project(&y).unwrap()).collect();
        let batch = SampleBatch { indices, projections };
        let count = batch.indices.len();
        let e = |s| feasibility_update(AlgorithmKind::new(s, count).unwrap(), &y, &batch).unwrap().1;
        let (avg, max, poly) = (e(Scheme::Averaging), e(Scheme::MaxSet), e(Scheme::PolyhedralSet));
        prop_assert!(max >= avg - 1e-9);
        prop_assert!(poly >= max - 1e-9);
    }

    #[test]
    fn cutting_polyhedron_contains_every_sampled_set(
        sets in prop::collection::vec(set_through_origin(), 1..6),
        y in point(),
        probe in point(),
    ) {
        let family = ConstraintFamily::new(sets).unwrap();
        let y = vec_of(&y);
        let projections: Vec<Vector> = family.sets().iter().map(|s| s.project(&y).unwrap()).collect();
        let poly = build_cutting_polyhedron(&y, &projections).unwrap();
        let p = vec_of(&probe);
        let inside_all = family.sets().iter().all(|s| s.contains(&p, 0.0).unwrap());
        if inside_all {
            prop_assert!(poly.max_violation(&p).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn improvement_factor_is_between_one_and_the_row_count(
        rows in prop::collection::vec((normal(), 0.0..1.0f64), 1..6),
        y in point(),
    ) {
        let rows: Vec<Halfspace> = rows
            .into_iter()
            .map(|(a, b)| Halfspace::new(vec_of(&a), b).unwrap())
            .collect();
        let poly = Polyhedron::new(DIM, rows).unwrap();
        let y = vec_of(&y);
        let sol = project_hildreth(&y, &poly, 1e-10, 100_000).unwrap();
        if poly.max_violation(&y).unwrap() > 1e-6 {
            let theta = improvement_factor(&y, &poly, &sol).unwrap();
            let active = poly.len() as f64;
            prop_assert!(theta >= 1.0 - 1e-9 && theta <= active + 1e-9, "theta {}", theta);
        }
    }
}
