//! The four batch workflows and their artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use nash_stokes::fem::VectorData;
use nash_stokes::mesh::{generate, refine, TriMesh, WHOLE_DOMAIN_LABEL};
use nash_stokes::nash::{
    ControlRegion, EquilibriumBundle, GameSpec, Method, NashGame, PlayerSpec, SolverOptions, DENSE_ORACLE_LIMIT,
};
use nash_stokes::verify::{run_convergence, ConvergenceStudy, ManufacturedBundle};
use serde::Serialize;

use crate::config::{DomainKind, ForcingKind, Metadata, Overrides, RunConfig, TargetKind, Workflow};
use crate::target::build_streamfunction_target;
use crate::vtk::{write_vtk_file, Field};

pub const SOLUTION_FILE: &str = "solution.vtk";
pub const REPORT_FILE: &str = "report.csv";
pub const SUMMARY_FILE: &str = "summary.toml";

/// What a workflow produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub workflow: String,
    pub method: String,
    pub nu: f64,
    pub alpha: [f64; 2],
    pub levels: Vec<usize>,
    /// Iterations of the final solve (zero for convergence studies).
    pub iterations: usize,
    /// Largest optimality residual at the end of the final solve.
    pub final_residual: f64,
    pub metadata: Metadata,
}

/// Meshes of all configured levels; later levels refine the first.
pub fn build_meshes(cfg: &RunConfig) -> Result<Vec<Arc<TriMesh>>> {
    let levels = &cfg.mesh.levels;
    let mut out = vec![Arc::new(generate(&cfg.domain_spec(levels[0]))?)];
    for _ in 1..levels.len() {
        let next = refine(out.last().unwrap())?;
        out.push(Arc::new(next));
    }
    Ok(out)
}

fn region(labels: &[String]) -> ControlRegion {
    if labels.len() == 1 && labels[0] == WHOLE_DOMAIN_LABEL {
        ControlRegion::Whole
    } else {
        ControlRegion::Labels(labels.to_vec())
    }
}

fn manufactured(cfg: &RunConfig) -> Result<ManufacturedBundle> {
    Ok(ManufacturedBundle::new(cfg.physics.nu, [cfg.player1.alpha, cfg.player2.alpha])?)
}

/// Game data of the configuration on `mesh`.
pub fn game_spec(cfg: &RunConfig, mesh: &Arc<TriMesh>) -> Result<GameSpec> {
    let forcing = match cfg.physics.forcing {
        ForcingKind::Zero => VectorData::Zero,
        ForcingKind::Manufactured => manufactured(cfg)?.forcing(),
    };
    let mut players = Vec::with_capacity(2);
    for (i, p) in cfg.players().iter().enumerate() {
        let target = match p.target {
            TargetKind::Zero => VectorData::Zero,
            TargetKind::Manufactured => manufactured(cfg)?.target(i),
            TargetKind::StreamfunctionO1 => build_streamfunction_target(mesh, "O1")?,
        };
        players.push(PlayerSpec::new(p.alpha, target, region(&p.region)));
    }
    let [p1, p2]: [PlayerSpec; 2] = players.try_into().expect("two players");
    Ok(GameSpec {
        nu: cfg.physics.nu,
        forcing,
        players: [p1, p2],
        control_degree: cfg.solver.control_degree,
    })
}

/// Vertex values of a P2 vector field.
fn vertex_vectors(nv: usize, n_scalar: usize, coeffs: &[f64]) -> Vec<[f64; 2]> {
    (0..nv).map(|v| [coeffs[v], coeffs[n_scalar + v]]).collect()
}

/// Every field of an equilibrium, plus the targets and subdomain labels.
pub fn bundle_fields(game: &NashGame, eq: &EquilibriumBundle) -> Vec<Field> {
    let mesh = game.mesh();
    let (nv, nt) = (mesh.n_vertices(), mesh.n_triangles());
    let spaces = game.problem().spaces();
    let ns = spaces.velocity.n_scalar();
    let mut fields = vec![
        Field::PointVector("velocity".into(), vertex_vectors(nv, ns, &eq.state.velocity)),
        Field::PointScalar("pressure".into(), eq.state.pressure.clone()),
    ];
    for i in 0..2 {
        let adj = &eq.adjoints[i];
        fields.push(Field::PointVector(format!("adjoint{}_velocity", i + 1), vertex_vectors(nv, ns, &adj.velocity)));
        fields.push(Field::PointScalar(format!("adjoint{}_pressure", i + 1), adj.pressure.clone()));
    }
    for i in 0..2 {
        let space = &spaces.controls[i];
        let (n, u) = (space.n_scalar(), &eq.controls[i]);
        let name = format!("control{}", i + 1);
        if game.spec().control_degree == 0 {
            let mut v = vec![[0.0; 2]; nt];
            for (k, &t) in space.elements().iter().enumerate() {
                v[t] = [u[k], u[n + k]];
            }
            fields.push(Field::CellVector(name, v));
        } else {
            let mut v = vec![[0.0; 2]; nv];
            for s in 0..n {
                v[space.dof_vertex(s).expect("linear control dofs sit on vertices")] = [u[s], u[n + s]];
            }
            fields.push(Field::PointVector(name, v));
        }
    }
    for i in 0..2 {
        let target = &game.spec().players[i].target;
        let v = (0..nt)
            .map(|t| target.eval(t, mesh.centroid(t)).unwrap_or([0.0, 0.0]))
            .collect();
        fields.push(Field::CellVector(format!("target{}", i + 1), v));
    }
    let labels = mesh.subdomain_labels().iter().map(|&l| l as f64).collect();
    fields.push(Field::CellScalar("subdomain".into(), labels));
    fields
}

fn write_history(eq: &EquilibriumBundle, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["iteration", "residual1", "residual2"])?;
    for (k, r) in eq.diagnostics.history.iter().enumerate() {
        w.write_record([k.to_string(), format!("{:e}", r[0]), format!("{:e}", r[1])])?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    fs::write(path, toml::to_string(summary)?).with_context(|| format!("writing {}", path.display()))
}

fn title(cfg: &RunConfig, workflow: Workflow) -> String {
    let mut t = format!("nash-stokes {workflow} nu={} alpha=({}, {})", cfg.physics.nu, cfg.player1.alpha, cfg.player2.alpha);
    if let Some(re) = cfg.metadata.re {
        t.push_str(&format!(" Re={re}"));
    }
    t
}

fn max_residual(eq: &EquilibriumBundle) -> f64 {
    eq.residuals[0].max(eq.residuals[1])
}

struct Job<'a> {
    cfg: &'a RunConfig,
    workflow: Workflow,
    opts: SolverOptions,
    out: PathBuf,
}

impl Job<'_> {
    fn summary(&self, method: Method, iterations: usize, final_residual: f64) -> Summary {
        Summary {
            workflow: self.workflow.name().into(),
            method: method.name().into(),
            nu: self.cfg.physics.nu,
            alpha: [self.cfg.player1.alpha, self.cfg.player2.alpha],
            levels: self.cfg.mesh.levels.clone(),
            iterations,
            final_residual,
            metadata: self.cfg.metadata.clone(),
        }
    }

    fn finest_game(&self) -> Result<NashGame> {
        let mesh = build_meshes(self.cfg)?.pop().expect("at least one level");
        let spec = game_spec(self.cfg, &mesh)?;
        Ok(NashGame::new(mesh, spec)?)
    }

    fn solve(&self) -> Result<Summary> {
        let game = self.finest_game()?;
        info!(
            "solving on {} triangles with {} ({} control unknowns)",
            game.mesh().n_triangles(),
            self.opts.method,
            game.control_dim(0) + game.control_dim(1)
        );
        let eq = game.solve(&self.opts)?;
        info!("{} iterations, final residual {:.3e}", eq.diagnostics.iterations, max_residual(&eq));
        write_vtk_file(game.mesh(), &title(self.cfg, self.workflow), &bundle_fields(&game, &eq), &self.out.join(SOLUTION_FILE))?;
        write_history(&eq, &self.out.join(REPORT_FILE))?;
        Ok(self.summary(self.opts.method, eq.diagnostics.iterations, max_residual(&eq)))
    }

    fn converge(&self) -> Result<Summary> {
        self.cfg.check_converge()?;
        let meshes = build_meshes(self.cfg)?;
        let study = ConvergenceStudy {
            bundle: manufactured(self.cfg)?,
            control_degree: self.cfg.solver.control_degree,
            options: self.opts,
        };
        let report = run_convergence(&study, &meshes)?;
        let path = self.out.join(REPORT_FILE);
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        report.write_csv(file)?;
        Ok(self.summary(self.opts.method, 0, 0.0))
    }

    fn compare(&self) -> Result<Summary> {
        let game = self.finest_game()?;
        let mut results: Vec<(Method, EquilibriumBundle)> = Vec::new();
        for method in Method::ALL {
            if method == Method::DenseOracle && game.dense_oracle_size() > DENSE_ORACLE_LIMIT {
                warn!("skipping {method}: {} unknowns exceed {DENSE_ORACLE_LIMIT}", game.dense_oracle_size());
                continue;
            }
            let opts = SolverOptions { method, ..self.opts };
            let eq = game.solve(&opts).with_context(|| format!("method {method}"))?;
            info!("{method}: {} iterations", eq.diagnostics.iterations);
            results.push((method, eq));
        }
        let path = self.out.join(REPORT_FILE);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["method_a", "method_b", "gap_u1", "gap_u2", "relative_gap"])?;
        for a in 0..results.len() {
            for b in a + 1..results.len() {
                let (ua, ub) = (&results[a].1.controls, &results[b].1.controls);
                let gaps: Vec<f64> = (0..2)
                    .map(|i| {
                        let d: Vec<f64> = ua[i].iter().zip(&ub[i]).map(|(x, y)| x - y).collect();
                        game.control_norm(i, &d)
                    })
                    .collect();
                let scale = game.pair_inner(ub, ub).sqrt().max(game.pair_inner(ua, ua).sqrt());
                let total = gaps[0].hypot(gaps[1]);
                let rel = if scale > 0.0 { total / scale } else { total };
                w.write_record([
                    results[a].0.name().to_string(),
                    results[b].0.name().to_string(),
                    format!("{:e}", gaps[0]),
                    format!("{:e}", gaps[1]),
                    format!("{rel:e}"),
                ])?;
            }
        }
        w.flush()?;
        let (method, reference) = results.last().expect("reduced-cg always runs");
        write_vtk_file(game.mesh(), &title(self.cfg, self.workflow), &bundle_fields(&game, reference), &self.out.join(SOLUTION_FILE))?;
        Ok(self.summary(*method, reference.diagnostics.iterations, max_residual(reference)))
    }

    fn example(&self) -> Result<Summary> {
        if self.cfg.domain.kind != DomainKind::FiveBox {
            bail!("domain.kind: example-multidomain requires \"five-box\"");
        }
        self.solve()
    }
}

/// Runs `workflow` and writes its artifacts into the output directory: the
/// command-line `out` if given, else `output.dir`, else the current directory.
pub fn run(workflow: Workflow, cfg: &RunConfig, overrides: &Overrides, out: Option<&Path>) -> Result<Summary> {
    if let Some(w) = cfg.workflow {
        if w != workflow {
            bail!("workflow: config is for '{w}' but '{workflow}' was requested");
        }
    }
    let opts = cfg.solver_options(Some(overrides))?;
    let out = out.map(Path::to_path_buf).or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).with_context(|| format!("creating output directory {}", out.display()))?;
    let ctx = Job {
        cfg,
        workflow,
        opts,
        out: out.clone(),
    };
    let summary = match workflow {
        Workflow::Solve => ctx.solve(),
        Workflow::Converge => ctx.converge(),
        Workflow::Compare => ctx.compare(),
        Workflow::ExampleMultidomain => ctx.example(),
    }?;
    write_summary(&summary, &out.join(SUMMARY_FILE))?;
    Ok(summary)
}
