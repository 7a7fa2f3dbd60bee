//! Run configuration: a TOML file with one table per concern. Every key is
//! documented in `docs/config.md`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use nash_stokes::mesh::WHOLE_DOMAIN_LABEL;
use nash_stokes::nash::{Method, SolverOptions, UpdateOrder};
use nash_stokes::DomainSpec;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Workflow {
    Solve,
    Converge,
    Compare,
    ExampleMultidomain,
}

impl Workflow {
    pub fn name(self) -> &'static str {
        match self {
            Workflow::Solve => "solve",
            Workflow::Converge => "converge",
            Workflow::Compare => "compare",
            Workflow::ExampleMultidomain => "example-multidomain",
        }
    }
}

impl fmt::Display for Workflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    UnitSquare,
    Rectangle,
    FiveBox,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    pub width: Option<f64>,
    pub height: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Grid resolutions, one mesh per entry.
    pub levels: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingKind {
    #[default]
    Zero,
    Manufactured,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub nu: f64,
    #[serde(default)]
    pub forcing: ForcingKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
pub enum TargetKind {
    #[default]
    #[serde(rename = "zero")]
    Zero,
    #[serde(rename = "manufactured")]
    Manufactured,
    #[serde(rename = "streamfunction-O1")]
    StreamfunctionO1,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerConfig {
    pub alpha: f64,
    #[serde(default)]
    pub target: TargetKind,
    /// Subdomain labels of the control region.
    #[serde(default = "whole_domain")]
    pub region: Vec<String>,
}

fn whole_domain() -> Vec<String> {
    vec![WHOLE_DOMAIN_LABEL.to_string()]
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_order")]
    pub order: String,
    #[serde(default = "default_degree")]
    pub control_degree: u8,
}

fn default_method() -> String {
    Method::ReducedCg.name().to_string()
}
fn default_tol() -> f64 {
    SolverOptions::default().tol
}
fn default_max_iter() -> usize {
    SolverOptions::default().max_iter
}
fn default_theta() -> f64 {
    1.0
}
fn default_order() -> String {
    "simultaneous".into()
}
fn default_degree() -> u8 {
    1
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            theta: default_theta(),
            order: default_order(),
            control_degree: default_degree(),
        }
    }
}

/// Values recorded alongside the outputs. They do not enter the computation.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub re: Option<f64>,
    pub a: Option<f64>,
    pub mu: Option<f64>,
    pub label: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub workflow: Option<Workflow>,
    pub domain: DomainConfig,
    pub mesh: MeshConfig,
    pub physics: PhysicsConfig,
    pub player1: PlayerConfig,
    pub player2: PlayerConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub metadata: Metadata,
    #[serde(default)]
    pub output: OutputConfig,
}

impl FromStr for RunConfig {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {}", e.to_string().trim()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        text.parse().with_context(|| format!("in config {}", path.display()))
    }

    pub fn players(&self) -> [&PlayerConfig; 2] {
        [&self.player1, &self.player2]
    }

    /// Checks every cross-field constraint; the message names the offending key.
    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        match d.kind {
            DomainKind::Rectangle => {
                for (key, v) in [("domain.width", d.width), ("domain.height", d.height)] {
                    match v {
                        Some(v) if v > 0.0 && v.is_finite() => {}
                        Some(v) => bail!("{key}: must be positive, got {v}"),
                        None => bail!("{key}: required for a rectangle domain"),
                    }
                }
            }
            _ => {
                if d.width.is_some() || d.height.is_some() {
                    bail!("domain.width/domain.height: only valid for kind = \"rectangle\"");
                }
            }
        }
        let levels = &self.mesh.levels;
        if levels.is_empty() {
            bail!("mesh.levels: at least one level is required");
        }
        if let Some(bad) = levels.iter().find(|&&n| n == 0) {
            bail!("mesh.levels: resolution {bad} must be at least 1");
        }
        if d.kind == DomainKind::FiveBox {
            if let Some(bad) = levels.iter().find(|&&n| n % 8 != 0) {
                bail!("mesh.levels: five-box resolutions must be multiples of 8, got {bad}");
            }
        }
        if levels.windows(2).any(|w| w[1] != 2 * w[0]) {
            bail!("mesh.levels: each level must double the previous one, got {levels:?}");
        }
        let nu = self.physics.nu;
        if !(nu > 0.0 && nu.is_finite()) {
            bail!("physics.nu: must be positive, got {nu}");
        }
        for (i, p) in self.players().iter().enumerate() {
            let key = format!("player{}", i + 1);
            if !(p.alpha > 0.0 && p.alpha.is_finite()) {
                bail!("{key}.alpha: must be positive, got {}", p.alpha);
            }
            if p.region.is_empty() {
                bail!("{key}.region: must name at least one subdomain");
            }
            let labels = self.labels();
            if let Some(bad) = p.region.iter().find(|r| !labels.contains(&r.as_str())) {
                bail!("{key}.region: unknown subdomain '{bad}' (available: {})", labels.join(", "));
            }
            if p.target == TargetKind::StreamfunctionO1 && d.kind != DomainKind::FiveBox {
                bail!("{key}.target: streamfunction-O1 requires domain.kind = \"five-box\"");
            }
        }
        let manufactured = self.players().map(|p| p.target == TargetKind::Manufactured);
        let forcing = self.physics.forcing == ForcingKind::Manufactured;
        if manufactured.iter().any(|&m| m) || forcing {
            if !(manufactured[0] && manufactured[1] && forcing) {
                bail!("physics.forcing/player*.target: the manufactured solution needs manufactured forcing and both targets");
            }
            if d.kind != DomainKind::UnitSquare {
                bail!("domain.kind: the manufactured solution lives on the unit square");
            }
            if self.players().iter().any(|p| p.region != whole_domain()) {
                bail!("player*.region: the manufactured solution needs controls on the whole domain");
            }
        }
        if self.workflow == Some(Workflow::Converge) {
            self.check_converge()?;
        }
        self.solver_options(None).map(|_| ())
    }

    /// Extra requirements of the convergence workflow.
    pub fn check_converge(&self) -> Result<()> {
        if self.mesh.levels.len() < 3 {
            bail!("mesh.levels: converge needs at least 3 levels, got {}", self.mesh.levels.len());
        }
        if self.physics.forcing != ForcingKind::Manufactured {
            bail!("physics.forcing: converge needs the manufactured solution");
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<&'static str> {
        match self.domain.kind {
            DomainKind::FiveBox => {
                let mut l = vec![WHOLE_DOMAIN_LABEL];
                l.extend(["Omega1", "Omega2", "O1", "O2", "Omega_c"]);
                l
            }
            _ => vec![WHOLE_DOMAIN_LABEL],
        }
    }

    pub fn domain_spec(&self, n: usize) -> DomainSpec {
        match self.domain.kind {
            DomainKind::UnitSquare => DomainSpec::unit_square(n),
            DomainKind::Rectangle => {
                DomainSpec::rectangle(self.domain.width.unwrap_or(1.0), self.domain.height.unwrap_or(1.0), n)
            }
            DomainKind::FiveBox => DomainSpec::five_box(n),
        }
    }

    /// Solver options, with command-line overrides applied on top.
    pub fn solver_options(&self, overrides: Option<&Overrides>) -> Result<SolverOptions> {
        let s = &self.solver;
        let mut method = s.method.clone();
        let (mut tol, mut max_iter, mut theta) = (s.tol, s.max_iter, s.theta);
        let mut key = "solver";
        if let Some(o) = overrides {
            if let Some(m) = &o.method {
                method = m.clone();
            }
            tol = o.tol.unwrap_or(tol);
            max_iter = o.max_iter.unwrap_or(max_iter);
            theta = o.theta.unwrap_or(theta);
            if o.method.is_some() || o.tol.is_some() || o.max_iter.is_some() || o.theta.is_some() {
                key = "solver (or command-line override)";
            }
        }
        let method: Method = method.parse().map_err(|e| anyhow::anyhow!("{key}.method: {e}"))?;
        let order = match s.order.as_str() {
            "simultaneous" => UpdateOrder::Simultaneous,
            "sequential" => UpdateOrder::Sequential,
            other => bail!("solver.order: unknown order '{other}' (simultaneous, sequential)"),
        };
        if s.control_degree > 1 {
            bail!("solver.control_degree: must be 0 or 1, got {}", s.control_degree);
        }
        let opts = SolverOptions {
            method,
            tol,
            max_iter,
            theta,
            order,
        };
        if !(tol > 0.0 && tol.is_finite()) {
            bail!("{key}.tol: must be positive, got {tol}");
        }
        if max_iter == 0 {
            bail!("{key}.max_iter: must be at least 1");
        }
        if !(theta > 0.0 && theta <= 1.0) {
            bail!("{key}.theta: must lie in (0, 1], got {theta}");
        }
        opts.validate().map_err(|e| anyhow::anyhow!("{key}: {e}"))?;
        Ok(opts)
    }
}

/// Command-line replacements for `[solver]` keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub method: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub theta: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[domain]
kind = "unit-square"

[mesh]
levels = [4]

[physics]
nu = 1.0

[player1]
alpha = 1.0

[player2]
alpha = 0.5
"#;

    fn err(text: &str) -> String {
        format!("{:#}", text.parse::<RunConfig>().unwrap_err())
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: RunConfig = BASE.parse().unwrap();
        assert_eq!(cfg.player1.region, vec!["Omega".to_string()]);
        assert_eq!(cfg.player2.target, TargetKind::Zero);
        let opts = cfg.solver_options(None).unwrap();
        assert_eq!(opts.method, Method::ReducedCg);
        assert_eq!(opts.theta, 1.0);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = err(&format!("{BASE}\n[solver]\nmethd = \"gradient\"\n"));
        assert!(e.contains("methd"), "{e}");
        let e = err(&BASE.replace("alpha = 0.5", "alpha = 0.5\nbeta = 2"));
        assert!(e.contains("beta"), "{e}");
    }

    #[test]
    fn invalid_values_name_their_key() {
        let cases = [
            (BASE.replace("nu = 1.0", "nu = -1.0"), "physics.nu"),
            (BASE.replace("alpha = 0.5", "alpha = 0.0"), "player2.alpha"),
            (BASE.replace("levels = [4]", "levels = []"), "mesh.levels"),
            (BASE.replace("levels = [4]", "levels = [4, 6]"), "mesh.levels"),
            (format!("{BASE}\n[solver]\nmethod = \"newton\"\n"), "solver.method"),
            (format!("{BASE}\n[solver]\ntheta = 1.5\n"), "solver.theta"),
            (format!("{BASE}\n[solver]\norder = \"random\"\n"), "solver.order"),
            (format!("{BASE}\n[solver]\ncontrol_degree = 2\n"), "solver.control_degree"),
            (BASE.replace("alpha = 1.0", "alpha = 1.0\nregion = [\"O1\"]"), "player1.region"),
            (
                BASE.replace("alpha = 1.0", "alpha = 1.0\ntarget = \"streamfunction-O1\""),
                "player1.target",
            ),
            (
                BASE.replace("alpha = 1.0", "alpha = 1.0\ntarget = \"manufactured\""),
                "physics.forcing",
            ),
            (BASE.replace("kind = \"unit-square\"", "kind = \"rectangle\"\nwidth = 2.0"), "domain.height"),
            (BASE.replace("kind = \"unit-square\"", "kind = \"five-box\""), "mesh.levels"),
            (format!("workflow = \"converge\"\n{BASE}"), "mesh.levels"),
        ];
        for (text, key) in cases {
            let e = err(&text);
            assert!(e.contains(key), "expected '{key}' in: {e}");
        }
    }

    #[test]
    fn type_errors_do_not_panic() {
        for bad in ["", "domain = 3", "[domain]\nkind = \"torus\"", "[[mesh]]", "not toml at all ="] {
            assert!(bad.parse::<RunConfig>().is_err());
        }
    }

    #[test]
    fn overrides_replace_solver_keys() {
        let cfg: RunConfig = BASE.parse().unwrap();
        let o = Overrides {
            method: Some("gradient".into()),
            tol: Some(1e-6),
            max_iter: Some(7),
            theta: Some(0.5),
        };
        let opts = cfg.solver_options(Some(&o)).unwrap();
        assert_eq!((opts.method, opts.tol, opts.max_iter, opts.theta), (Method::Gradient, 1e-6, 7, 0.5));
        let bad = Overrides {
            tol: Some(0.0),
            ..Default::default()
        };
        assert!(format!("{:#}", cfg.solver_options(Some(&bad)).unwrap_err()).contains("tol"));
    }

    #[test]
    fn five_box_labels_resolve() {
        let text = BASE
            .replace("kind = \"unit-square\"", "kind = \"five-box\"")
            .replace("levels = [4]", "levels = [8]")
            .replace("alpha = 1.0", "alpha = 1.0\ntarget = \"streamfunction-O1\"\nregion = [\"O1\"]");
        let cfg: RunConfig = text.parse().unwrap();
        assert_eq!(cfg.player1.target, TargetKind::StreamfunctionO1);
    }
}
