use cstar_approx::testing::{random_basis, random_element, seeded_rng};
use cstar_approx::{solve_distance, AlgebraSignature, NormKind, SolveOptions};

/// The benchmarked solve instance converges, so timings measure real work.
#[test]
fn benchmarked_solves_converge() {
    let mut rng = seeded_rng(2);
    let sig = AlgebraSignature::new(vec![3, 2, 2]).unwrap();
    let x = random_element(&mut rng, &sig);
    let v = random_basis(&mut rng, &sig, 3);
    for kind in [NormKind::Operator, NormKind::Trace] {
        let r = solve_distance(&x, &v, kind, &SolveOptions::default()).unwrap();
        assert!(r.converged, "{kind}: gap {}", r.gap);
    }
}
