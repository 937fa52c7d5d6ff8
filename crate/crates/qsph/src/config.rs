use std::path::{Path, PathBuf};

use clap::Args;
use qsph_core::bench::Integrator;
use qsph_core::hybrid::{Level, ModelConfig};
use qsph_core::qnn::{Family, HeadKind};
use qsph_core::qsph::PreMap;
use qsph_core::train::{NoiseSpec, OptimizerKind, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Every knob of every command. Loaded from `--config`, then overridden by
/// flags; the resolved value is echoed to `<out>/config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Command the config was echoed from; checked on reload.
    pub command: Option<String>,
    pub model: String,
    pub family: String,
    pub head: String,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub plot: bool,
    /// Record wall-clock milliseconds per epoch. Off by default since timings
    /// differ between otherwise identical runs.
    pub timing: bool,
    pub optimizer: String,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub test_fraction: f64,

    /// Lattice cells per side for fit-field, compare and train-kernel.
    pub grid: usize,
    pub field_seed: u64,
    pub field_time: f64,

    /// `regular` or `irregular`.
    pub distribution: String,
    /// `plain` or `corrected`; defaults by distribution.
    pub kernel: Option<String>,
    pub pre_map: String,
    /// `value`, `grad` or `both`.
    pub role: String,
    pub max_samples: Option<usize>,
    pub export_kernel_space: bool,
    pub grid_points: usize,

    /// `classical`, `exact`, or `quantum` (with `kernel_model`, or written
    /// `quantum:<path>`).
    pub operator: String,
    pub kernel_model: Option<PathBuf>,
    pub spacing: f64,
    pub dt: f64,
    pub period: f64,
    pub snapshot_times: Vec<f64>,
    pub integrator: String,

    pub families: Vec<String>,
    pub heads: Vec<String>,
    pub levels: Vec<String>,
    pub lrs: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            model: "crossed".into(),
            family: "qmlp".into(),
            head: "pauliz".into(),
            lr: 0.01,
            batch_size: 640,
            epochs: 100,
            noise_sigma: 0.0,
            seed: 0,
            out: PathBuf::from("out"),
            plot: false,
            timing: false,
            optimizer: "adam".into(),
            n_qubits: 4,
            n_layers: 2,
            test_fraction: 0.2,
            grid: 32,
            field_seed: 0,
            field_time: 0.0,
            distribution: "regular".into(),
            kernel: None,
            pre_map: "identity".into(),
            role: "both".into(),
            max_samples: Some(1024),
            export_kernel_space: false,
            grid_points: 101,
            operator: "classical".into(),
            kernel_model: None,
            spacing: 0.02,
            dt: 1e-4,
            period: 1.0,
            snapshot_times: qsph_core::bench::SNAPSHOT_TIMES.to_vec(),
            integrator: "rk3".into(),
            families: vec!["qnn".into(), "qmlp".into(), "qcnn".into()],
            heads: vec!["pauliz".into(), "prob".into()],
            levels: Vec::new(),
            lrs: Vec::new(),
        }
    }
}

/// Flags shared by every command. Unset flags leave the config untouched.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file; flags take precedence over its values
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Hierarchy level: single, forward, crossed or parallel
    #[arg(long)]
    pub model: Option<String>,
    /// Ansatz family: qnn, qmlp or qcnn
    #[arg(long)]
    pub family: Option<String>,
    /// Measurement head: pauliz or prob
    #[arg(long)]
    pub head: Option<String>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Batch size
    #[arg(long)]
    pub bs: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Gaussian readout noise on head values
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also render PNG plots
    #[arg(long)]
    pub plot: bool,
    /// Record per-epoch wall-clock time in loss tables
    #[arg(long)]
    pub timing: bool,
    /// sgd or adam
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub n_qubits: Option<usize>,
    #[arg(long)]
    pub n_layers: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Lattice cells per side
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub field_seed: Option<u64>,
    #[arg(long)]
    pub field_time: Option<f64>,
    /// regular or irregular particles
    #[arg(long)]
    pub distribution: Option<String>,
    /// plain or corrected kernel targets
    #[arg(long)]
    pub kernel: Option<String>,
    /// identity, norm or inner
    #[arg(long)]
    pub pre_map: Option<String>,
    /// value, grad or both
    #[arg(long)]
    pub role: Option<String>,
    /// Cap on samples per kernel set (0 for no cap)
    #[arg(long)]
    pub max_samples: Option<usize>,
    /// Write learned-versus-classical kernel tables
    #[arg(long)]
    pub export_kernel_space: bool,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// classical, exact, quantum or quantum:<model file>
    #[arg(long)]
    pub operator: Option<String>,
    /// Kernel model JSON for the quantum operator
    #[arg(long, value_name = "PATH")]
    pub kernel_model: Option<PathBuf>,
    /// Particle spacing for advection
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub period: Option<f64>,
    /// Comma-separated snapshot times
    #[arg(long, value_delimiter = ',')]
    pub snapshot_times: Option<Vec<f64>>,
    /// rk3 or euler
    #[arg(long)]
    pub integrator: Option<String>,
    /// Comma-separated families for compare
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Comma-separated heads for compare
    #[arg(long, value_delimiter = ',')]
    pub heads: Option<Vec<String>>,
    /// Comma-separated levels for compare
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<String>>,
    /// Comma-separated learning rates for compare
    #[arg(long, value_delimiter = ',')]
    pub lrs: Option<Vec<f64>>,
}

macro_rules! take {
    ($cfg:ident, $o:ident; $($f:ident),*) => {
        $(if let Some(v) = $o.$f.clone() { $cfg.$f = v; })*
    };
}

impl Overrides {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self, command: &str) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(CliError::config(format!("config was written by `{c}`, not `{command}`")));
            }
        }
        cfg.command = Some(command.to_string());
        let o = self;
        take!(cfg, o; model, family, head, lr, epochs, noise_sigma, seed, out, optimizer, n_qubits, n_layers,
            test_fraction, grid, field_seed, field_time, distribution, pre_map, role, grid_points, operator,
            spacing, dt, period, snapshot_times, integrator, families, heads, levels, lrs);
        if let Some(b) = o.bs {
            cfg.batch_size = b;
        }
        if let Some(k) = &o.kernel {
            cfg.kernel = Some(k.clone());
        }
        if let Some(m) = o.max_samples {
            cfg.max_samples = (m > 0).then_some(m);
        }
        if let Some(p) = &o.kernel_model {
            cfg.kernel_model = Some(p.clone());
        }
        cfg.plot |= o.plot;
        cfg.timing |= o.timing;
        cfg.export_kernel_space |= o.export_kernel_space;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn parse_level(s: &str) -> CliResult<Level> {
    Level::parse(s).map_err(|_| CliError::config(format!("`model` must be single, forward, crossed or parallel, got `{s}`")))
}

pub fn parse_family(s: &str) -> CliResult<Family> {
    match s.to_ascii_lowercase().as_str() {
        "qnn" | "general" => Ok(Family::GeneralQNN),
        "qmlp" | "improved" => Ok(Family::ImprovedQMLP),
        "qcnn" => Ok(Family::QCNN),
        _ => Err(CliError::config(format!("`family` must be qnn, qmlp or qcnn, got `{s}`"))),
    }
}

pub fn family_name(f: Family) -> &'static str {
    match f {
        Family::GeneralQNN => "qnn",
        Family::ImprovedQMLP => "qmlp",
        Family::QCNN => "qcnn",
    }
}

pub fn parse_head(s: &str) -> CliResult<HeadKind> {
    match s.to_ascii_lowercase().as_str() {
        "pauliz" | "z" => Ok(HeadKind::PauliZ),
        "prob" | "probability" => Ok(HeadKind::Probability),
        _ => Err(CliError::config(format!("`head` must be pauliz or prob, got `{s}`"))),
    }
}

pub fn head_name(h: HeadKind) -> &'static str {
    match h {
        HeadKind::PauliZ => "pauliz",
        HeadKind::Probability => "prob",
    }
}

/// Operator selected for advection.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSel {
    Classical,
    /// Exact corrected kernel routed through the learned-kernel path.
    Exact,
    Quantum(PathBuf),
}

/// Which networks train-kernel fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Value,
    Grad,
    Both,
}

impl RunConfig {
    pub fn level(&self) -> CliResult<Level> {
        parse_level(&self.model)
    }

    pub fn family(&self) -> CliResult<Family> {
        parse_family(&self.family)
    }

    pub fn head(&self) -> CliResult<HeadKind> {
        parse_head(&self.head)
    }

    pub fn optimizer(&self) -> CliResult<OptimizerKind> {
        match self.optimizer.to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            s => Err(CliError::config(format!("`optimizer` must be sgd or adam, got `{s}`"))),
        }
    }

    pub fn pre_map(&self) -> CliResult<PreMap> {
        PreMap::parse(&self.pre_map).map_err(|_| CliError::config(format!("`pre_map` must be identity, norm or inner, got `{}`", self.pre_map)))
    }

    pub fn integrator(&self) -> CliResult<Integrator> {
        Integrator::parse(&self.integrator).map_err(|_| CliError::config(format!("`integrator` must be rk3 or euler, got `{}`", self.integrator)))
    }

    pub fn irregular(&self) -> CliResult<bool> {
        match self.distribution.as_str() {
            "regular" => Ok(false),
            "irregular" => Ok(true),
            s => Err(CliError::config(format!("`distribution` must be regular or irregular, got `{s}`"))),
        }
    }

    /// Corrected targets by default on irregular particles, plain on lattices.
    pub fn corrected(&self) -> CliResult<bool> {
        match self.kernel.as_deref() {
            None => self.irregular(),
            Some("plain") => Ok(false),
            Some("corrected") => Ok(true),
            Some(s) => Err(CliError::config(format!("`kernel` must be plain or corrected, got `{s}`"))),
        }
    }

    pub fn role(&self) -> CliResult<Role> {
        match self.role.as_str() {
            "value" => Ok(Role::Value),
            "grad" => Ok(Role::Grad),
            "both" => Ok(Role::Both),
            s => Err(CliError::config(format!("`role` must be value, grad or both, got `{s}`"))),
        }
    }

    pub fn operator(&self) -> CliResult<OperatorSel> {
        match self.operator.as_str() {
            "classical" => Ok(OperatorSel::Classical),
            "exact" => Ok(OperatorSel::Exact),
            "quantum" => match &self.kernel_model {
                Some(p) => Ok(OperatorSel::Quantum(p.clone())),
                None => Err(CliError::config("`operator` quantum needs a kernel model file (--kernel-model or quantum:<path>)")),
            },
            s => match s.strip_prefix("quantum:") {
                Some(p) if !p.is_empty() => Ok(OperatorSel::Quantum(PathBuf::from(p))),
                _ => Err(CliError::config(format!("`operator` must be classical, exact or quantum:<path>, got `{s}`"))),
            },
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            readout_sigma: self.noise_sigma,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed: self.seed,
            noise: self.noise(),
        }
    }

    /// Architecture for `level`/`family`/`head`; inputs and bounds are
    /// filled in by the caller.
    pub fn model_config(&self, level: Level, family: Family, head: HeadKind) -> ModelConfig {
        let mut mc = ModelConfig::new(level, family, head, Vec::new(), 1);
        mc.n_qubits = self.n_qubits;
        mc.n_layers = self.n_layers;
        mc.seed = self.seed;
        mc
    }

    pub fn validate(&self) -> CliResult<()> {
        self.level()?;
        self.family()?;
        self.head()?;
        self.optimizer()?;
        self.pre_map()?;
        self.integrator()?;
        self.irregular()?;
        self.corrected()?;
        self.role()?;
        for s in &self.levels {
            parse_level(s)?;
        }
        for s in &self.families {
            parse_family(s)?;
        }
        for s in &self.heads {
            parse_head(s)?;
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(format!("`{name}` must be positive, got {v}")))
            }
        };
        positive("lr", self.lr)?;
        for &lr in &self.lrs {
            positive("lrs", lr)?;
        }
        positive("spacing", self.spacing)?;
        positive("dt", self.dt)?;
        positive("period", self.period)?;
        if self.batch_size == 0 {
            return Err(CliError::config("`batch_size` must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(CliError::config(format!("`noise_sigma` must be finite and nonnegative, got {}", self.noise_sigma)));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(CliError::config(format!("`test_fraction` must lie in [0, 1), got {}", self.test_fraction)));
        }
        if self.grid < 2 {
            return Err(CliError::config("`grid` must be at least 2"));
        }
        if self.n_qubits == 0 || self.n_qubits > 12 {
            return Err(CliError::config(format!("`n_qubits` must lie in 1..=12, got {}", self.n_qubits)));
        }
        if self.grid_points < 2 {
            return Err(CliError::config("`grid_points` must be at least 2"));
        }
        Ok(())
    }

    /// Writes the resolved config to `<out>/config.json`.
    pub fn echo(&self) -> CliResult<PathBuf> {
        let path = self.out.join("config.json");
        crate::io::save_json(&path, self)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"lr": 0.001, "epochs": 7, "head": "prob"}"#).unwrap();
        let o = Overrides {
            config: Some(p),
            epochs: Some(3),
            ..Default::default()
        };
        let cfg = o.resolve("fit-field").unwrap();
        assert_eq!((cfg.lr, cfg.epochs, cfg.head.as_str()), (0.001, 3, "prob"));
        assert_eq!(cfg.batch_size, 640);
    }

    #[test]
    fn bad_values_name_the_field() {
        let o = Overrides {
            lr: Some(-1.0),
            ..Default::default()
        };
        let e = o.resolve("fit-field").unwrap_err();
        assert!(e.to_string().contains("`lr`"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let o = Overrides {
            family: Some("cnn".into()),
            ..Default::default()
        };
        assert!(o.resolve("fit-field").unwrap_err().to_string().contains("`family`"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"learning_rate": 0.1}"#).unwrap();
        let o = Overrides {
            config: Some(p),
            ..Default::default()
        };
        assert_eq!(o.resolve("advect").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn operator_forms() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.operator().unwrap(), OperatorSel::Classical);
        cfg.operator = "quantum:m.json".into();
        assert_eq!(cfg.operator().unwrap(), OperatorSel::Quantum("m.json".into()));
        cfg.operator = "quantum".into();
        assert!(cfg.operator().is_err());
        cfg.kernel_model = Some("k.json".into());
        assert_eq!(cfg.operator().unwrap(), OperatorSel::Quantum("k.json".into()));
    }

    #[test]
    fn kernel_defaults_follow_distribution() {
        let mut cfg = RunConfig::default();
        assert!(!cfg.corrected().unwrap());
        cfg.distribution = "irregular".into();
        assert!(cfg.corrected().unwrap());
        cfg.kernel = Some("plain".into());
        assert!(!cfg.corrected().unwrap());
    }

    #[test]
    fn echoed_command_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"command": "advect"}"#).unwrap();
        let o = Overrides {
            config: Some(p),
            ..Default::default()
        };
        assert!(o.resolve("fit-field").is_err());
        assert!(o.resolve("advect").is_ok());
    }
}
