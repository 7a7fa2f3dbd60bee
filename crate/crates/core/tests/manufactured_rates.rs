use std::sync::Arc;

use nash_stokes::mesh::{generate, refine, DomainSpec, TriMesh};
use nash_stokes::verify::{check_lemma_inequalities, run_convergence, ConvergenceStudy, ManufacturedBundle};

fn sequence(n: usize, levels: usize) -> Vec<Arc<TriMesh>> {
    let mut out = vec![Arc::new(generate(&DomainSpec::unit_square(n)).unwrap())];
    for _ in 1..levels {
        let next = refine(out.last().unwrap()).unwrap();
        out.push(Arc::new(next));
    }
    out
}

fn study() -> ConvergenceStudy {
    ConvergenceStudy::new(ManufacturedBundle::new(1.0, [1.0, 0.5]).unwrap())
}

#[test]
fn energy_norm_errors_converge_at_second_order() {
    let report = run_convergence(&study(), &sequence(8, 3)).unwrap();
    for name in ["y_H1", "phi1_H1", "phi2_H1", "r1_L2", "r2_L2", "u1_L2", "u2_L2"] {
        let e = report.eoc(name).unwrap();
        assert!(e.iter().all(|v| (1.7..=2.3).contains(v)), "{name}: {e:?}");
    }
    // The pressure is only asymptotic on the last pair.
    let p = report.eoc("p_L2").unwrap();
    assert!((1.7..=2.3).contains(&p[1]), "{p:?}");
}

#[test]
fn l2_errors_converge_at_least_at_third_order() {
    let report = run_convergence(&study(), &sequence(8, 3)).unwrap();
    let y = report.eoc("y_L2").unwrap();
    assert!(y.iter().all(|v| (2.7..=3.3).contains(v)), "{y:?}");
    for name in ["phi1_L2", "phi2_L2", "Pu1_minus_u1h_L2", "Pu2_minus_u2h_L2"] {
        let e = report.eoc(name).unwrap();
        assert!(e.iter().all(|v| *v >= 2.7), "{name}: {e:?}");
    }
}

#[test]
fn lemma_constants_stay_bounded() {
    let report = check_lemma_inequalities(&study(), &sequence(8, 3)).unwrap();
    for which in [1, 2, 4] {
        let r = report.ratios(which).unwrap();
        assert!(r.iter().all(|v| *v > 0.0), "lemma {which}: {r:?}");
        assert!(report.bounded(which, 10.0).unwrap(), "lemma {which}: {r:?}");
    }
}
