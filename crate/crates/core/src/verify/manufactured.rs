//! Closed-form equilibrium on the unit square.
//!
//! State and adjoint velocities are curls of products `a(x) a(y)`, so they
//! are solenoidal and vanish on the boundary:
//!
//! * `y = curl(sin²(πx) sin²(πy))`, `p = sin(2πx) sin(2πy)`,
//! * `φ_i = c_i curl(x²(1−x)² y²(1−y)²)`, `r_i = c_i/100 · cos(πx) cos(πy)`,
//!   with `c = (1, 1/2)`.
//!
//! The data are then chosen so that the optimality system holds exactly:
//! `u_i = −φ_i/α_i`, `f = −νΔy + ∇p − u_1 − u_2`, `y_{i,d} = y + νΔφ_i − ∇r_i`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::VectorData;
use crate::mesh::Point;
use crate::nash::{ControlRegion, GameSpec, PlayerSpec};

const ADJOINT_SCALES: [f64; 2] = [1.0, 0.5];
const ADJOINT_PRESSURE_SCALE: f64 = 1.0;

/// One-dimensional factor of a stream function.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Profile {
    /// `sin²(πt)`
    SineSquared,
    /// `t²(1−t)²`
    Bubble,
}

impl Profile {
    /// Value and first three derivatives.
    fn eval(self, t: f64) -> [f64; 4] {
        match self {
            Profile::SineSquared => {
                let s = (PI * t).sin();
                let (s2, c2) = ((2.0 * PI * t).sin(), (2.0 * PI * t).cos());
                [s * s, PI * s2, 2.0 * PI * PI * c2, -4.0 * PI.powi(3) * s2]
            }
            Profile::Bubble => [
                t * t * (1.0 - t) * (1.0 - t),
                2.0 * t - 6.0 * t * t + 4.0 * t * t * t,
                2.0 - 12.0 * t + 12.0 * t * t,
                -12.0 + 24.0 * t,
            ],
        }
    }
}

/// `scale · curl(a(x) a(y))` with `curl ψ = (∂_y ψ, −∂_x ψ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurlField {
    profile: Profile,
    scale: f64,
}

impl CurlField {
    pub fn value(&self, x: Point) -> [f64; 2] {
        let (a, b) = (self.profile.eval(x[0]), self.profile.eval(x[1]));
        [self.scale * a[0] * b[1], -self.scale * a[1] * b[0]]
    }

    /// `g[c][d] = ∂_d v_c`.
    pub fn gradient(&self, x: Point) -> [[f64; 2]; 2] {
        let (a, b) = (self.profile.eval(x[0]), self.profile.eval(x[1]));
        let s = self.scale;
        [[s * a[1] * b[1], s * a[0] * b[2]], [-s * a[2] * b[0], -s * a[1] * b[1]]]
    }

    pub fn laplacian(&self, x: Point) -> [f64; 2] {
        let (a, b) = (self.profile.eval(x[0]), self.profile.eval(x[1]));
        let s = self.scale;
        [s * (a[2] * b[1] + a[0] * b[3]), -s * (a[3] * b[0] + a[1] * b[2])]
    }
}

/// Analytic equilibrium and the data that produce it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedBundle {
    pub nu: f64,
    pub alpha: [f64; 2],
    state: CurlField,
    pressure_scale: f64,
    adjoints: [CurlField; 2],
    adjoint_pressure_scales: [f64; 2],
}

impl ManufacturedBundle {
    pub fn new(nu: f64, alpha: [f64; 2]) -> Result<Self> {
        Self::scaled(nu, alpha, 1.0)
    }

    /// The same construction with every field identically zero.
    pub fn zero(nu: f64, alpha: [f64; 2]) -> Result<Self> {
        Self::scaled(nu, alpha, 0.0)
    }

    fn scaled(nu: f64, alpha: [f64; 2], s: f64) -> Result<Self> {
        if !(nu > 0.0) || alpha.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "manufactured game needs ν > 0 and α > 0, got ν = {nu}, α = {alpha:?}"
            )));
        }
        Ok(Self {
            nu,
            alpha,
            state: CurlField {
                profile: Profile::SineSquared,
                scale: s,
            },
            pressure_scale: s,
            adjoints: ADJOINT_SCALES.map(|c| CurlField {
                profile: Profile::Bubble,
                scale: s * c,
            }),
            adjoint_pressure_scales: ADJOINT_SCALES.map(|c| s * c * ADJOINT_PRESSURE_SCALE),
        })
    }

    pub fn state(&self) -> &CurlField {
        &self.state
    }

    pub fn adjoint(&self, i: usize) -> &CurlField {
        &self.adjoints[i]
    }

    pub fn y(&self, x: Point) -> [f64; 2] {
        self.state.value(x)
    }

    pub fn p(&self, x: Point) -> f64 {
        self.pressure_scale * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()
    }

    pub fn grad_p(&self, x: Point) -> [f64; 2] {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        let k = 2.0 * PI * self.pressure_scale;
        [k * cx * sy, k * sx * cy]
    }

    pub fn phi(&self, i: usize, x: Point) -> [f64; 2] {
        self.adjoints[i].value(x)
    }

    pub fn r(&self, i: usize, x: Point) -> f64 {
        self.adjoint_pressure_scales[i] * (PI * x[0]).cos() * (PI * x[1]).cos()
    }

    pub fn grad_r(&self, i: usize, x: Point) -> [f64; 2] {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let k = -PI * self.adjoint_pressure_scales[i];
        [k * sx * cy, k * cx * sy]
    }

    /// Exact control `u_i = −φ_i/α_i`.
    pub fn u(&self, i: usize, x: Point) -> [f64; 2] {
        let v = self.phi(i, x);
        [-v[0] / self.alpha[i], -v[1] / self.alpha[i]]
    }

    /// `−νΔy + ∇p`, the load that the state equation balances.
    pub fn stokes_load(&self, x: Point) -> [f64; 2] {
        let (l, g) = (self.state.laplacian(x), self.grad_p(x));
        [-self.nu * l[0] + g[0], -self.nu * l[1] + g[1]]
    }

    pub fn f(&self, x: Point) -> [f64; 2] {
        let s = self.stokes_load(x);
        let (u1, u2) = (self.u(0, x), self.u(1, x));
        [s[0] - u1[0] - u2[0], s[1] - u1[1] - u2[1]]
    }

    pub fn y_d(&self, i: usize, x: Point) -> [f64; 2] {
        let (y, l, g) = (self.y(x), self.adjoints[i].laplacian(x), self.grad_r(i, x));
        [y[0] + self.nu * l[0] - g[0], y[1] + self.nu * l[1] - g[1]]
    }

    pub fn forcing(&self) -> VectorData {
        let b = *self;
        VectorData::analytic(move |x| b.f(x))
    }

    pub fn target(&self, i: usize) -> VectorData {
        let b = *self;
        VectorData::analytic(move |x| b.y_d(i, x))
    }

    pub fn control(&self, i: usize) -> VectorData {
        let b = *self;
        VectorData::analytic(move |x| b.u(i, x))
    }

    /// `y − y_{i,d} = −νΔφ_i + ∇r_i`, the continuous adjoint load.
    pub fn adjoint_load(&self, i: usize) -> VectorData {
        let b = *self;
        VectorData::analytic(move |x| {
            let (y, yd) = (b.y(x), b.y_d(i, x));
            [y[0] - yd[0], y[1] - yd[1]]
        })
    }

    pub fn state_load(&self) -> VectorData {
        let b = *self;
        VectorData::analytic(move |x| b.stokes_load(x))
    }

    /// The game whose equilibrium this bundle is, with controls on the whole
    /// square.
    pub fn game_spec(&self, control_degree: u8) -> GameSpec {
        GameSpec {
            nu: self.nu,
            forcing: self.forcing(),
            players: [0, 1].map(|i| PlayerSpec::new(self.alpha[i], self.target(i), ControlRegion::Whole)),
            control_degree,
        }
    }
}

/// The manufactured bundle for a game with control regions `regions`.
/// Only full-domain controls are accepted: restricting `u_i` to a proper
/// subdomain would make it discontinuous and spoil the smoothness the error
/// estimates assume.
pub fn make_manufactured(nu: f64, alpha: [f64; 2], regions: &[ControlRegion; 2]) -> Result<ManufacturedBundle> {
    if let Some(i) = regions.iter().position(|r| *r != ControlRegion::Whole) {
        return Err(Error::InvalidArgument(format!(
            "manufactured solution requires player {} to control the whole domain",
            i + 1
        )));
    }
    ManufacturedBundle::new(nu, alpha)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn bundle() -> ManufacturedBundle {
        ManufacturedBundle::new(0.7, [1.0, 0.5]).unwrap()
    }

    fn points(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect()
    }

    fn fd_gradient(f: impl Fn(Point) -> [f64; 2], x: Point, h: f64) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for d in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[d] += h;
            xm[d] -= h;
            let (fp, fm) = (f(xp), f(xm));
            for c in 0..2 {
                g[c][d] = (fp[c] - fm[c]) / (2.0 * h);
            }
        }
        g
    }

    fn fd_laplacian(f: impl Fn(Point) -> [f64; 2], x: Point, h: f64) -> [f64; 2] {
        let c = f(x);
        let mut out = [0.0; 2];
        for d in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[d] += h;
            xm[d] -= h;
            let (fp, fm) = (f(xp), f(xm));
            for k in 0..2 {
                out[k] += (fp[k] - 2.0 * c[k] + fm[k]) / (h * h);
            }
        }
        out
    }

    #[test]
    fn profile_derivatives_match_finite_differences() {
        for p in [Profile::SineSquared, Profile::Bubble] {
            for &t in &[0.13, 0.5, 0.77] {
                let h = 1e-5;
                let (vp, vm) = (p.eval(t + h), p.eval(t - h));
                let v = p.eval(t);
                for k in 0..3 {
                    let fd = (vp[k] - vm[k]) / (2.0 * h);
                    assert!((fd - v[k + 1]).abs() < 1e-6 * (1.0 + v[k + 1].abs()), "{p:?} derivative {}", k + 1);
                }
            }
        }
    }

    #[test]
    fn fields_are_solenoidal() {
        let b = bundle();
        for x in points(100, 1) {
            let g = b.state().gradient(x);
            assert!((g[0][0] + g[1][1]).abs() < 1e-12);
            for i in 0..2 {
                let g = b.adjoint(i).gradient(x);
                assert!((g[0][0] + g[1][1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fields_vanish_on_boundary() {
        let b = bundle();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            for x in [[t, 0.0], [t, 1.0], [0.0, t], [1.0, t]] {
                let vals = [b.y(x), b.phi(0, x), b.phi(1, x)];
                assert!(vals.iter().flatten().all(|v| v.abs() < 1e-15));
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let b = bundle();
        for x in points(20, 2) {
            for field in [*b.state(), *b.adjoint(0), *b.adjoint(1)] {
                let fd = fd_gradient(|p| field.value(p), x, 1e-6);
                let g = field.gradient(x);
                let lap = fd_laplacian(|p| field.value(p), x, 1e-4);
                let l = field.laplacian(x);
                for c in 0..2 {
                    for d in 0..2 {
                        assert!((fd[c][d] - g[c][d]).abs() < 1e-7);
                    }
                    assert!((lap[c] - l[c]).abs() < 1e-5 * (1.0 + l[c].abs()));
                }
            }
            let gp = b.grad_p(x);
            let h = 1e-6;
            let fdp = [
                (b.p([x[0] + h, x[1]]) - b.p([x[0] - h, x[1]])) / (2.0 * h),
                (b.p([x[0], x[1] + h]) - b.p([x[0], x[1] - h])) / (2.0 * h),
            ];
            assert!((fdp[0] - gp[0]).abs() < 1e-7 && (fdp[1] - gp[1]).abs() < 1e-7);
            for i in 0..2 {
                let gr = b.grad_r(i, x);
                let fdr = [
                    (b.r(i, [x[0] + h, x[1]]) - b.r(i, [x[0] - h, x[1]])) / (2.0 * h),
                    (b.r(i, [x[0], x[1] + h]) - b.r(i, [x[0], x[1] - h])) / (2.0 * h),
                ];
                assert!((fdr[0] - gr[0]).abs() < 1e-9 && (fdr[1] - gr[1]).abs() < 1e-9);
            }
        }
    }

    /// Strong residuals of the optimality system, with all derivatives taken
    /// by finite differences of the field values only.
    fn strong_residual(b: &ManufacturedBundle, x: Point, h: f64) -> f64 {
        let mut worst: f64 = 0.0;
        let lap_y = fd_laplacian(|p| b.y(p), x, h);
        let gp = [
            (b.p([x[0] + h, x[1]]) - b.p([x[0] - h, x[1]])) / (2.0 * h),
            (b.p([x[0], x[1] + h]) - b.p([x[0], x[1] - h])) / (2.0 * h),
        ];
        let (f, u1, u2) = (b.f(x), b.u(0, x), b.u(1, x));
        for c in 0..2 {
            worst = worst.max((-b.nu * lap_y[c] + gp[c] - f[c] - u1[c] - u2[c]).abs());
        }
        let gy = fd_gradient(|p| b.y(p), x, h);
        worst = worst.max((gy[0][0] + gy[1][1]).abs());
        for i in 0..2 {
            let lap = fd_laplacian(|p| b.phi(i, p), x, h);
            let gr = [
                (b.r(i, [x[0] + h, x[1]]) - b.r(i, [x[0] - h, x[1]])) / (2.0 * h),
                (b.r(i, [x[0], x[1] + h]) - b.r(i, [x[0], x[1] - h])) / (2.0 * h),
            ];
            let (y, yd, u, phi) = (b.y(x), b.y_d(i, x), b.u(i, x), b.phi(i, x));
            for c in 0..2 {
                worst = worst.max((-b.nu * lap[c] + gr[c] - (y[c] - yd[c])).abs());
                worst = worst.max((b.alpha[i] * u[c] + phi[c]).abs());
            }
            let g = fd_gradient(|p| b.phi(i, p), x, h);
            worst = worst.max((g[0][0] + g[1][1]).abs());
        }
        worst
    }

    #[test]
    fn optimality_system_residual_vanishes_under_refinement() {
        let b = bundle();
        let pts = points(50, 3);
        let res = |h: f64| pts.iter().map(|&x| strong_residual(&b, x, h)).fold(0.0, f64::max);
        let (r1, r2, r3) = (res(1e-2), res(1e-3), res(1e-4));
        // Second-order differences: a factor 10 in h gives about 100 in the residual.
        assert!(r2 < r1 / 50.0 && r3 < r2 / 50.0, "{r1:e} {r2:e} {r3:e}");
        assert!(r3 < 1e-5);
    }

    #[test]
    fn pressures_have_zero_mean() {
        // Midpoint sums are exact for these trigonometric polynomials.
        let b = bundle();
        let n = 64;
        let mut s = [0.0; 3];
        for i in 0..n {
            for j in 0..n {
                let x = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64];
                s[0] += b.p(x);
                s[1] += b.r(0, x);
                s[2] += b.r(1, x);
            }
        }
        assert!(s.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn subdomain_controls_rejected() {
        let regions = [ControlRegion::Whole, ControlRegion::label("O1")];
        assert!(make_manufactured(1.0, [1.0, 1.0], &regions).is_err());
        assert!(make_manufactured(1.0, [1.0, 1.0], &[ControlRegion::Whole, ControlRegion::Whole]).is_ok());
        assert!(ManufacturedBundle::new(1.0, [0.0, 1.0]).is_err());
    }
}
