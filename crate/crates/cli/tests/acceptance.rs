//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line with
//! the measured quantities, then asserts the verdict.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use nash_stokes::fem::VectorData;
use nash_stokes::mesh::{generate, refine, DomainSpec, TriMesh};
use nash_stokes::nash::{
    ControlRegion, Controls, EquilibriumBundle, GameSpec, Method, NashGame, PlayerSpec, SolverOptions,
};
use nash_stokes::stokes::FlowField;
use nash_stokes::verify::{
    check_lemma_inequalities, run_convergence, ConvergenceStudy, ErrorReport, LemmaReport, ManufacturedBundle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u8, pass: bool, detail: &str) {
    // Straight to the handle so the line shows even when libtest captures output.
    let line = format!("criterion {n}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn unit_square_sequence() -> Vec<Arc<TriMesh>> {
    let mut out = vec![Arc::new(generate(&DomainSpec::unit_square(8)).unwrap())];
    for _ in 0..2 {
        let next = refine(out.last().unwrap()).unwrap();
        out.push(Arc::new(next));
    }
    out
}

fn manufactured_study() -> ConvergenceStudy {
    ConvergenceStudy::new(ManufacturedBundle::new(1.0, [1.0, 0.5]).unwrap())
}

struct Rates {
    report: ErrorReport,
    elapsed: Duration,
}

fn rates() -> &'static Rates {
    static RATES: OnceLock<Rates> = OnceLock::new();
    RATES.get_or_init(|| {
        let start = Instant::now();
        let report = run_convergence(&manufactured_study(), &unit_square_sequence()).unwrap();
        Rates {
            report,
            elapsed: start.elapsed(),
        }
    })
}

/// Every consecutive-mesh EOC of `columns` inside `band`; returns the verdict
/// and a printable table.
fn check_band(columns: &[&str], band: (f64, f64)) -> (bool, String) {
    let r = rates();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in columns {
        let e = r.report.eoc(name).unwrap();
        let inside = e.iter().all(|v| (band.0..=band.1).contains(v));
        ok &= inside;
        let list: Vec<String> = e.iter().map(|v| format!("{v:.3}")).collect();
        parts.push(format!("{name} [{}]{}", list.join(", "), if inside { "" } else { " out of band" }));
    }
    (ok, parts.join("; "))
}

#[test]
fn criterion_1_energy_norm_rates() {
    let (ok, detail) = check_band(
        &["y_H1", "phi1_H1", "phi2_H1", "p_L2", "r1_L2", "r2_L2", "u1_L2", "u2_L2"],
        (1.7, 2.3),
    );
    let elapsed = rates().elapsed;
    let fast = elapsed < Duration::from_secs(300);
    report(1, ok && fast, &format!("{detail}; runtime {:.1}s", elapsed.as_secs_f64()));
}

#[test]
fn criterion_2_l2_rates() {
    let (ok, detail) = check_band(
        &["y_L2", "phi1_L2", "phi2_L2", "Pu1_minus_u1h_L2", "Pu2_minus_u2h_L2"],
        (2.7, 3.3),
    );
    report(2, ok, &detail);
}

/// Games for the method comparison: the manufactured one, and one with a
/// partial control region and piecewise constant controls.
fn comparison_games() -> Vec<(String, NashGame)> {
    let mut out = Vec::new();
    for n in [4, 8] {
        let mesh = Arc::new(generate(&DomainSpec::unit_square(n)).unwrap());
        let bundle = ManufacturedBundle::new(1.0, [1.0, 0.5]).unwrap();
        out.push((format!("manufactured n={n}"), NashGame::new(mesh.clone(), bundle.game_spec(1)).unwrap()));
        let lower: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| mesh.centroid(t)[1] < 0.5).collect();
        let spec = GameSpec {
            nu: 0.5,
            forcing: VectorData::analytic(|x| [(std::f64::consts::PI * x[1]).sin(), x[0]]),
            players: [
                PlayerSpec::new(0.5, VectorData::analytic(|x| [x[0] * x[1], 0.0]), ControlRegion::Whole),
                PlayerSpec::new(1.0, VectorData::analytic(|x| [0.0, (4.0 * x[0]).sin()]), ControlRegion::Triangles(lower)),
            ],
            control_degree: 0,
        };
        out.push((format!("partial-region n={n}"), NashGame::new(mesh, spec).unwrap()));
    }
    out
}

struct Solved {
    name: String,
    game: NashGame,
    bundles: Vec<EquilibriumBundle>,
    elapsed: Duration,
}

fn solved() -> &'static Vec<Solved> {
    static SOLVED: OnceLock<Vec<Solved>> = OnceLock::new();
    SOLVED.get_or_init(|| {
        comparison_games()
            .into_iter()
            .map(|(name, game)| {
                let start = Instant::now();
                let bundles = [Method::DenseOracle, Method::FixedPoint, Method::Gradient, Method::ReducedCg]
                    .into_iter()
                    .map(|method| {
                        let opts = SolverOptions {
                            tol: 1e-12,
                            theta: 1.0,
                            ..SolverOptions::with_method(method)
                        };
                        game.solve(&opts).unwrap_or_else(|e| panic!("{name}, {method}: {e}"))
                    })
                    .collect();
                Solved {
                    name,
                    game,
                    bundles,
                    elapsed: start.elapsed(),
                }
            })
            .collect()
    })
}

fn relative_gap(game: &NashGame, a: &Controls, b: &Controls) -> f64 {
    let d: Controls = [0, 1].map(|i| a[i].iter().zip(&b[i]).map(|(x, y)| x - y).collect());
    (game.pair_inner(&d, &d) / game.pair_inner(b, b)).sqrt()
}

#[test]
fn criterion_3_oracle_equivalence() {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut elapsed = Duration::ZERO;
    for s in solved() {
        let mut game_worst: f64 = 0.0;
        for a in 0..s.bundles.len() {
            for b in a + 1..s.bundles.len() {
                game_worst = game_worst.max(relative_gap(&s.game, &s.bundles[a].controls, &s.bundles[b].controls));
            }
        }
        worst = worst.max(game_worst);
        elapsed += s.elapsed;
        parts.push(format!("{} max gap {game_worst:.2e}", s.name));
    }
    let ok = worst <= 1e-8 && elapsed < Duration::from_secs(60);
    report(3, ok, &format!("{}; runtime {:.1}s", parts.join(", "), elapsed.as_secs_f64()));
}

#[test]
fn criterion_4_nash_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_drop = f64::NEG_INFINITY;
    let mut count = 0;
    for s in solved() {
        for eq in &s.bundles {
            let u = &eq.controls;
            for i in 0..2 {
                let base = s.game.cost(i, [&u[0], &u[1]]).unwrap();
                let scale = s.game.control_norm(i, &u[i]).max(1.0);
                for magnitude in [1e-4, 1e-2, 1.0] {
                    for _ in 0..20 {
                        let mut d: Vec<f64> = (0..u[i].len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let norm = s.game.control_norm(i, &d);
                        d.iter_mut().for_each(|x| *x *= magnitude * scale / norm);
                        let mut v = u.clone();
                        v[i].iter_mut().zip(&d).for_each(|(a, b)| *a += b);
                        let cost = s.game.cost(i, [&v[0], &v[1]]).unwrap();
                        worst_drop = worst_drop.max(base - cost);
                        count += 1;
                    }
                }
            }
        }
    }
    report(
        4,
        worst_drop <= 1e-12,
        &format!("{count} unilateral perturbations, largest cost decrease {worst_drop:.2e}"),
    );
}

#[test]
fn criterion_5_gradient_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for s in solved() {
        let g = &s.game;
        for _ in 0..10 {
            let u: Controls = [0, 1].map(|i| (0..g.control_dim(i)).map(|_| rng.random_range(-2.0..2.0)).collect());
            for i in 0..2 {
                let dir: Vec<f64> = (0..g.control_dim(i)).map(|_| rng.random_range(-1.0..1.0)).collect();
                let grad = g.gradient(i, [&u[0], &u[1]]).unwrap();
                let exact = g.control_inner(i, &grad, &dir);
                let h = 1e-3;
                let shifted = |s: f64| {
                    let mut v = u.clone();
                    v[i].iter_mut().zip(&dir).for_each(|(a, d)| *a += s * d);
                    g.cost(i, [&v[0], &v[1]]).unwrap()
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                worst = worst.max((fd - exact).abs() / exact.abs());
                count += 1;
            }
        }
    }
    report(5, worst <= 1e-6, &format!("{count} points, worst relative error {worst:.2e}"));
}

fn flows(eq: &EquilibriumBundle) -> [&FlowField; 3] {
    [&eq.state, &eq.adjoints[0], &eq.adjoints[1]]
}

#[test]
fn criterion_6_structural_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut div, mut mean, mut res): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut solves = 0;
    let mut witness_ok = true;
    let mut worst_ratio = f64::INFINITY;
    for s in solved() {
        for eq in &s.bundles {
            for f in flows(eq) {
                div = div.max(f.diagnostics.divergence);
                mean = mean.max(f.diagnostics.pressure_mean.abs());
                res = res.max(f.diagnostics.relative_residual);
                solves += 1;
            }
        }
        let g = &s.game;
        let alpha_min = g.alpha(0).min(g.alpha(1));
        for _ in 0..10 {
            let v: Controls = [0, 1].map(|i| (0..g.control_dim(i)).map(|_| rng.random_range(-1.0..1.0)).collect());
            let rv = g.apply_reduced([&v[0], &v[1]]).unwrap();
            let ratio = g.pair_inner(&rv, &v) / (alpha_min * g.pair_inner(&v, &v));
            witness_ok &= ratio >= 1.0;
            worst_ratio = worst_ratio.min(ratio);
        }
    }
    let ok = div <= 1e-10 && mean <= 1e-10 && res <= 1e-10 && witness_ok;
    report(
        6,
        ok,
        &format!(
            "{solves} solves: divergence {div:.1e}, pressure mean {mean:.1e}, saddle residual {res:.1e}; \
             min (Rv,v)/(min alpha |v|^2) = {worst_ratio:.4}"
        ),
    );
}

#[test]
fn criterion_7_lemma_constants_bounded() {
    let lemmas: LemmaReport = check_lemma_inequalities(&manufactured_study(), &unit_square_sequence()).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for which in [1, 2, 4] {
        let r = lemmas.ratios(which).unwrap();
        let bounded = lemmas.bounded(which, 10.0).unwrap();
        ok &= bounded;
        let list: Vec<String> = r.iter().map(|v| format!("{v:.3e}")).collect();
        parts.push(format!("lemma {which} [{}]", list.join(", ")));
    }
    report(7, ok, &parts.join("; "));
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

/// Minimal structural check of a legacy-VTK file; returns the point count.
fn validate_vtk(text: &str) -> Result<usize, String> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.first() != Some(&"# vtk DataFile Version 3.0") || lines.get(2) != Some(&"ASCII") {
        return Err("bad header".into());
    }
    let count = |prefix: &str| -> Result<(usize, usize), String> {
        let k = lines.iter().position(|l| l.starts_with(prefix)).ok_or(format!("missing {prefix}"))?;
        let n = lines[k].split_whitespace().nth(1).and_then(|v| v.parse().ok()).ok_or("bad count")?;
        Ok((k, n))
    };
    let (kp, np) = count("POINTS ")?;
    let (_, nc) = count("CELLS ")?;
    let (kt, nt) = count("CELL_TYPES ")?;
    if nc != nt || lines[kt + 1..kt + 1 + nt].iter().any(|l| *l != "5") {
        return Err("cell types".into());
    }
    for l in &lines[kp + 1..kp + 1 + np] {
        if l.split_whitespace().count() != 3 {
            return Err(format!("bad point '{l}'"));
        }
    }
    // Every data line must parse as finite numbers.
    let (kd, _) = count("POINT_DATA ")?;
    for l in &lines[kd..] {
        let first = l.split_whitespace().next().unwrap_or("");
        if first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            continue;
        }
        if l.split_whitespace().any(|v| !v.parse::<f64>().is_ok_and(f64::is_finite)) {
            return Err(format!("bad value '{l}'"));
        }
    }
    for name in ["velocity", "pressure", "control1", "control2", "target1", "subdomain"] {
        if !lines.iter().any(|l| l.split_whitespace().nth(1) == Some(name)) {
            return Err(format!("missing field {name}"));
        }
    }
    Ok(np)
}

#[test]
fn criterion_8_multidomain_smoke() {
    let mut ok = true;
    let mut parts = Vec::new();
    for re in [240, 720, 1200] {
        let cfg = configs_dir().join(format!("re{re}.toml"));
        let dir = tempfile::tempdir().unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_nash-stokes"))
            .args(["example-multidomain", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
            .env("RUST_LOG", "warn")
            .status()
            .unwrap();
        let summary = std::fs::read_to_string(dir.path().join("summary.toml")).unwrap();
        let iterations = summary
            .lines()
            .find_map(|l| l.strip_prefix("iterations = "))
            .unwrap_or("?")
            .to_string();
        let vtk = std::fs::read_to_string(dir.path().join("solution.vtk")).unwrap();
        let points = validate_vtk(&vtk);
        let history = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
        let last = history.lines().last().unwrap();
        let final_residual = last
            .split(',')
            .skip(1)
            .map(|v| v.parse::<f64>().unwrap())
            .fold(0.0, f64::max);
        let tagged = summary.contains(&format!("re = {re}"));
        let this = status.success() && points.is_ok() && final_residual <= 1e-8 && tagged;
        ok &= this;
        parts.push(format!(
            "Re={re}: vtk {}, {iterations} iterations, final residual {final_residual:.2e}",
            match &points {
                Ok(n) => format!("ok ({n} points)"),
                Err(e) => format!("invalid: {e}"),
            }
        ));
    }
    report(8, ok, &parts.join("; "));
}
