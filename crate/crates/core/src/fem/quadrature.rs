//! Symmetric quadrature rules on the reference triangle `(0,0), (1,0), (0,1)`.

/// Points in barycentric coordinates; weights sum to the reference area 1/2.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    fn from_orbits(degree: usize, orbits: &[(f64, Orbit)]) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for &(w, orbit) in orbits {
            let pts = orbit.expand();
            weights.extend(std::iter::repeat_n(0.5 * w, pts.len()));
            points.extend(pts);
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    /// Seven-point Radon rule, exact for degree 5. Used for assembly.
    pub fn degree5() -> Self {
        let s = 15f64.sqrt();
        let a1 = (6.0 - s) / 21.0;
        let a2 = (6.0 + s) / 21.0;
        Self::from_orbits(
            5,
            &[
                (9.0 / 40.0, Orbit::Centroid),
                ((155.0 - s) / 1200.0, Orbit::Three(a1)),
                ((155.0 + s) / 1200.0, Orbit::Three(a2)),
            ],
        )
    }

    /// Sixteen-point rule exact for degree 8 (Dunavant's orbit structure,
    /// coordinates polished to double precision). Used for error norms.
    pub fn degree8() -> Self {
        Self::from_orbits(
            8,
            &[
                (0.144_315_607_677_787_17, Orbit::Centroid),
                (0.095_091_634_267_284_62, Orbit::Three(0.459_292_588_292_723_2)),
                (0.103_217_370_534_718_25, Orbit::Three(0.170_569_307_751_760_2)),
                (0.032_458_497_623_198_08, Orbit::Three(0.050_547_228_317_030_98)),
                (
                    0.027_230_314_174_434_994,
                    Orbit::Six(0.008_394_777_409_957_605, 0.263_112_829_634_638_1),
                ),
            ],
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

#[derive(Clone, Copy)]
enum Orbit {
    Centroid,
    /// `(1 - 2a, a, a)` and permutations.
    Three(f64),
    /// `(a, b, 1 - a - b)` and all six permutations.
    Six(f64, f64),
}

impl Orbit {
    fn expand(self) -> Vec<[f64; 3]> {
        match self {
            Orbit::Centroid => vec![[1.0 / 3.0; 3]],
            Orbit::Three(a) => {
                let b = 1.0 - 2.0 * a;
                vec![[b, a, a], [a, b, a], [a, a, b]]
            }
            Orbit::Six(a, b) => {
                let c = 1.0 - a - b;
                vec![[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
            }
        }
    }
}
