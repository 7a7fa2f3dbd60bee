use std::sync::Arc;

use nash_stokes::fem::VectorData;
use nash_stokes::mesh::{generate, refine, signed_area, DomainSpec};
use nash_stokes::nash::{ControlRegion, Controls, GameSpec, NashGame, PlayerSpec};
use proptest::prelude::*;

fn game(alpha: [f64; 2], nu: f64, degree: u8) -> NashGame {
    let mesh = Arc::new(generate(&DomainSpec::unit_square(3)).unwrap());
    let left: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| mesh.centroid(t)[0] < 0.5).collect();
    let spec = GameSpec {
        nu,
        forcing: VectorData::Zero,
        players: [
            PlayerSpec::new(alpha[0], VectorData::Zero, ControlRegion::Whole),
            PlayerSpec::new(alpha[1], VectorData::Zero, ControlRegion::Triangles(left)),
        ],
        control_degree: degree,
    };
    NashGame::new(mesh, spec).unwrap()
}

fn controls(game: &NashGame, seed: &[f64]) -> Controls {
    let mut k = 0;
    [0, 1].map(|i| {
        (0..game.control_dim(i))
            .map(|_| {
                k += 1;
                seed[k % seed.len()] * (1.0 + (k as f64).sin())
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn refinement_keeps_area_and_orientation(w in 0.2f64..3.0, h in 0.2f64..3.0, n in 1usize..5) {
        let coarse = generate(&DomainSpec::rectangle(w, h, n)).unwrap();
        let fine = refine(&coarse).unwrap();
        prop_assert_eq!(fine.n_triangles(), 4 * coarse.n_triangles());
        prop_assert!((fine.total_area() - w * h).abs() <= 1e-12 * w * h);
        prop_assert!(fine.check_conformity().is_ok());
        for t in 0..fine.n_triangles() {
            prop_assert!(signed_area(&fine.corners(t)) > 0.0);
        }
        let (hc, hf) = (coarse.mesh_size().0, fine.mesh_size().0);
        prop_assert!((hf - 0.5 * hc).abs() <= 1e-12 * hc);
    }

    #[test]
    fn reduced_operator_is_self_adjoint_and_coercive(
        a1 in 0.01f64..10.0,
        a2 in 0.01f64..10.0,
        nu in 0.05f64..5.0,
        degree in 0u8..2,
        s in prop::collection::vec(-1.0f64..1.0, 3..7),
        r in prop::collection::vec(-1.0f64..1.0, 3..7),
    ) {
        let g = game([a1, a2], nu, degree);
        let (v, w) = (controls(&g, &s), controls(&g, &r));
        let rv = g.apply_reduced([&v[0], &v[1]]).unwrap();
        let rw = g.apply_reduced([&w[0], &w[1]]).unwrap();
        let (lhs, rhs) = (g.pair_inner(&rv, &w), g.pair_inner(&v, &rw));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (lhs.abs() + rhs.abs() + 1e-300));
        let vv = g.pair_inner(&v, &v);
        prop_assert!(g.pair_inner(&rv, &v) >= (1.0 - 1e-10) * a1.min(a2) * vv);
    }
}
