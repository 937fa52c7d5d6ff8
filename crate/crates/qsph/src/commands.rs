use std::path::{Path, PathBuf};
use std::time::Instant;

use qsph_core::bench::{fit_field_dataset, run_period, Advection, AdvectionSpec, OperatorChoice, PeriodRun, StencilProblem, VortexFieldSpec};
use qsph_core::hybrid::{HybridModel, Level};
use qsph_core::qnn::{Family, HeadKind};
use qsph_core::qsph::{
    distance_grid, extract_gradient_space, extract_kernel_space, fit_kernel_net, generate_kernel_dataset, ExactKernel, FittedNet, KernelFitConfig,
    KernelSpaceRow, PairKernel, QuantumKernelModel,
};
use qsph_core::sph::{correction_matrices, ParticleSet, DEFAULT_JITTER};
use qsph_core::train::{train_model, Dataset, LossSpec, OptimizerState, TrainTrace};
use serde::Serialize;
use serde_json::json;

use crate::config::{family_name, head_name, parse_family, parse_head, parse_level, OperatorSel, Role, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io;
use crate::plot;

fn clock(enabled: bool) -> impl Fn() -> f64 {
    let start = Instant::now();
    move || if enabled { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 }
}

fn start(cfg: &RunConfig) -> CliResult<()> {
    io::ensure_dir(&cfg.out)?;
    cfg.echo()?;
    Ok(())
}

/// A trained hybrid model and its loss history.
pub struct Trained {
    pub model: HybridModel,
    pub params: Vec<f64>,
    pub trace: TrainTrace,
    /// Indices of the held-out samples.
    pub test_idx: Vec<usize>,
}

/// Trains one architecture on `data` with the budget in `cfg`.
pub fn train_on(cfg: &RunConfig, data: &Dataset, level: Level, family: Family, head: HeadKind, lr: f64) -> CliResult<Trained> {
    let mut mc = cfg.model_config(level, family, head);
    mc.input_bounds = data.input_bounds();
    mc.n_inputs = mc.input_bounds.len();
    mc.n_outputs = data.targets.first().map_or(1, Vec::len);
    let model = HybridModel::build(&mc)?;
    let (test_idx, train_idx) = data.split_indices(cfg.test_fraction, cfg.seed);
    let (train, test) = (data.subset(&train_idx), data.subset(&test_idx));
    let mut opt = OptimizerState::new(cfg.optimizer()?, lr, model.n_params());
    let (params, trace) = train_model(&model, model.init_params(), &train, &test, &LossSpec::default(), &mut opt, &cfg.train_config(), &clock(cfg.timing))?;
    Ok(Trained {
        model,
        params,
        trace,
        test_idx,
    })
}

fn field_problem(cfg: &RunConfig) -> CliResult<StencilProblem> {
    let spec = VortexFieldSpec {
        t: cfg.field_time,
        ..VortexFieldSpec::with_seed(cfg.field_seed)
    };
    Ok(fit_field_dataset(&spec, cfg.grid)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct FitFieldSummary {
    pub samples: usize,
    pub n_params: usize,
    pub final_train_loss: Option<f64>,
    pub final_test_loss: Option<f64>,
}

/// Trains the selected model on the vortex-field stencil task and writes
/// `config.json`, `loss.csv`, `prediction.csv` and `error.csv`.
pub fn fit_field(cfg: &RunConfig) -> CliResult<FitFieldSummary> {
    start(cfg)?;
    let prob = field_problem(cfg)?;
    let t = train_on(cfg, &prob.data, cfg.level()?, cfg.family()?, cfg.head()?, cfg.lr)?;
    io::write_trace(&cfg.out.join("loss.csv"), &t.trace, cfg.timing)?;
    let mut is_test = vec![false; prob.data.len()];
    for &i in &t.test_idx {
        is_test[i] = true;
    }
    let mut pred = Vec::with_capacity(prob.data.len());
    for x in &prob.data.inputs {
        pred.push(t.model.forward(x, &t.params)?[0]);
    }
    let target: Vec<f64> = prob.data.targets.iter().map(|y| y[0]).collect();
    let num = |v: f64| format!("{v}");
    io::write_csv(
        &cfg.out.join("prediction.csv"),
        &io::PREDICTION_HEADER,
        (0..pred.len()).map(|i| {
            let p = prob.positions[i];
            let split = if is_test[i] { "test" } else { "train" };
            [num(p[0]), num(p[1]), num(target[i]), num(pred[i]), split.to_string()]
        }),
    )?;
    io::write_csv(
        &cfg.out.join("error.csv"),
        &io::ERROR_HEADER,
        (0..pred.len()).map(|i| {
            let (p, e) = (prob.positions[i], pred[i] - target[i]);
            [num(p[0]), num(p[1]), num(e), num(e.abs())]
        }),
    )?;
    if cfg.plot {
        plot::heatmap(&cfg.out.join("target.png"), &prob.positions, &target)?;
        plot::heatmap(&cfg.out.join("prediction.png"), &prob.positions, &pred)?;
        let err: Vec<f64> = pred.iter().zip(&target).map(|(a, b)| a - b).collect();
        plot::heatmap(&cfg.out.join("error.png"), &prob.positions, &err)?;
        plot_trace(&cfg.out.join("loss.png"), &t.trace)?;
    }
    Ok(FitFieldSummary {
        samples: prob.data.len(),
        n_params: t.model.n_params(),
        final_train_loss: t.trace.final_train_loss(),
        final_test_loss: t.trace.records.last().and_then(|r| r.test_loss),
    })
}

fn plot_trace(path: &Path, trace: &TrainTrace) -> CliResult<()> {
    let xs: Vec<f64> = trace.records.iter().map(|r| r.epoch as f64).collect();
    let mut series = vec![(xs.clone(), trace.records.iter().map(|r| r.train_loss).collect())];
    if trace.records.iter().all(|r| r.test_loss.is_some()) {
        series.push((xs, trace.records.iter().filter_map(|r| r.test_loss).collect()));
    }
    plot::lines(path, &series, true)
}

/// One row of the compare tables.
#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub family: String,
    pub head: String,
    pub level: String,
    pub lr: f64,
    pub n_params: usize,
    pub final_train_loss: Option<f64>,
    pub final_test_loss: Option<f64>,
}

/// Trains every family × head × level × lr combination on the fit-field
/// task under one budget; writes `compare_epochs.csv` and
/// `compare_final.csv`.
pub fn compare(cfg: &RunConfig) -> CliResult<Vec<CompareRow>> {
    start(cfg)?;
    let prob = field_problem(cfg)?;
    let levels = if cfg.levels.is_empty() { vec![cfg.model.clone()] } else { cfg.levels.clone() };
    let lrs = if cfg.lrs.is_empty() { vec![cfg.lr] } else { cfg.lrs.clone() };
    let mut rows = Vec::new();
    let mut epochs: Vec<[String; 7]> = Vec::new();
    let mut curves = Vec::new();
    for f in &cfg.families {
        let family = parse_family(f)?;
        for h in &cfg.heads {
            let head = parse_head(h)?;
            for l in &levels {
                let level = parse_level(l)?;
                for &lr in &lrs {
                    let t = train_on(cfg, &prob.data, level, family, head, lr)?;
                    let key = [family_name(family).to_string(), head_name(head).to_string(), level.name().to_string(), format!("{lr}")];
                    for r in &t.trace.records {
                        let [a, b, c, d] = key.clone();
                        epochs.push([a, b, c, d, r.epoch.to_string(), format!("{}", r.train_loss), r.test_loss.map_or(String::new(), |v| format!("{v}"))]);
                    }
                    curves.push((
                        t.trace.records.iter().map(|r| r.epoch as f64).collect::<Vec<_>>(),
                        t.trace.records.iter().map(|r| r.train_loss).collect::<Vec<_>>(),
                    ));
                    rows.push(CompareRow {
                        family: key[0].clone(),
                        head: key[1].clone(),
                        level: key[2].clone(),
                        lr,
                        n_params: t.model.n_params(),
                        final_train_loss: t.trace.final_train_loss(),
                        final_test_loss: t.trace.records.last().and_then(|r| r.test_loss),
                    });
                }
            }
        }
    }
    io::write_csv(&cfg.out.join("compare_epochs.csv"), &COMPARE_EPOCH_HEADER, epochs)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v}"));
    io::write_csv(
        &cfg.out.join("compare_final.csv"),
        &COMPARE_FINAL_HEADER,
        rows.iter().map(|r| {
            [
                r.family.clone(),
                r.head.clone(),
                r.level.clone(),
                format!("{}", r.lr),
                r.n_params.to_string(),
                opt(r.final_train_loss),
                opt(r.final_test_loss),
            ]
        }),
    )?;
    if cfg.plot {
        plot::lines(&cfg.out.join("compare_loss.png"), &curves, true)?;
    }
    Ok(rows)
}

pub const COMPARE_EPOCH_HEADER: [&str; 7] = ["family", "head", "level", "lr", "epoch", "train_loss", "test_loss"];
pub const COMPARE_FINAL_HEADER: [&str; 7] = ["family", "head", "level", "lr", "n_params", "final_train_loss", "final_test_loss"];

#[derive(Debug, Clone, Serialize)]
pub struct NetReport {
    pub samples: usize,
    pub scale: f64,
    pub n_params: usize,
    pub final_train_loss: Option<f64>,
    /// Largest `|learned − classical|` over the distance grid.
    pub max_residual: f64,
    /// `max_residual / (ω(0)·ΔV)` for the value network, `max_residual`
    /// over the largest classical weight for the gradient network.
    pub max_residual_rel: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainKernelSummary {
    pub distribution: String,
    pub corrected: bool,
    pub pre_map: String,
    pub dv: f64,
    pub value: Option<NetReport>,
    pub grad: Option<NetReport>,
    pub model_sha256: String,
    pub clamp_count: u64,
}

fn max_abs(rows: &[KernelSpaceRow], f: impl Fn(&KernelSpaceRow) -> f64) -> f64 {
    rows.iter().fold(0.0f64, |m, r| m.max(f(r).abs()))
}

/// Builds a kernel dataset from a regular or jittered lattice, fits the
/// value and/or gradient networks and writes `kernel_model.json`,
/// `particles.csv`, loss tables and `report.json`. With
/// `export_kernel_space` the learned-versus-classical tables are written
/// too.
pub fn train_kernel(cfg: &RunConfig) -> CliResult<TrainKernelSummary> {
    start(cfg)?;
    let mut ps = ParticleSet::unit_square(cfg.grid)?;
    if cfg.irregular()? {
        ps = ps.jittered(DEFAULT_JITTER, cfg.seed);
    }
    let field = VortexFieldSpec {
        t: cfg.field_time,
        ..VortexFieldSpec::with_seed(cfg.field_seed)
    };
    ps.fill(|p| field.at(p));
    io::write_particles(&cfg.out.join("particles.csv"), &ps)?;
    let (k, nl) = (ps.kernel(), ps.neighbors());
    let corrected = cfg.corrected()?;
    let ds = generate_kernel_dataset(&ps, &k, &nl, corrected, cfg.max_samples, cfg.seed)?;
    let pre_map = cfg.pre_map()?;
    let role = cfg.role()?;
    let fit_cfg = KernelFitConfig {
        model: cfg.model_config(cfg.level()?, cfg.family()?, cfg.head()?),
        train: cfg.train_config(),
        optimizer: cfg.optimizer()?,
        lr: cfg.lr,
        test_fraction: cfg.test_fraction,
    };
    let fit = |data: &Dataset, scale: f64, name: &str| -> CliResult<(FittedNet, usize)> {
        let f = fit_kernel_net(data, scale, &fit_cfg, &clock(cfg.timing))?;
        io::write_trace(&cfg.out.join(format!("loss_{name}.csv")), &f.trace, cfg.timing)?;
        if cfg.plot {
            plot_trace(&cfg.out.join(format!("loss_{name}.png")), &f.trace)?;
        }
        Ok((f, data.len()))
    };
    let value = match role {
        Role::Value | Role::Both => {
            let (data, scale) = ds.value_set()?;
            Some(fit(&data, scale, "value")?)
        }
        Role::Grad => None,
    };
    let grad = match role {
        Role::Grad | Role::Both => {
            let (data, scale) = ds.grad_set(pre_map)?;
            Some(fit(&data, scale, "grad")?)
        }
        Role::Value => None,
    };
    let report_of = |f: &(FittedNet, usize)| NetReport {
        samples: f.1,
        scale: f.0.net.scale,
        n_params: f.0.net.model.n_params(),
        final_train_loss: f.0.trace.final_train_loss(),
        max_residual: 0.0,
        max_residual_rel: 0.0,
    };
    let (mut value_report, mut grad_report) = (value.as_ref().map(report_of), grad.as_ref().map(report_of));
    let model = QuantumKernelModel::new(value.map(|f| f.0.net), grad.map(|f| f.0.net), pre_map, ds.h, ds.dv_max)?;
    let sha = io::save_kernel_model(&cfg.out.join("kernel_model.json"), &model)?;

    // Tables at the nominal lattice volume.
    let dv = ps.spacing * ps.spacing;
    let grid = distance_grid(k.h, cfg.grid_points);
    if let Some(r) = value_report.as_mut() {
        let rows = extract_kernel_space(&model, &ExactKernel::plain(k), &grid, dv)?;
        r.max_residual = max_abs(&rows, |x| x.residual);
        r.max_residual_rel = r.max_residual / (k.w(0.0) * dv);
        if cfg.export_kernel_space {
            io::write_kernel_space(&cfg.out.join("kernel_space_value.csv"), &rows)?;
        }
        if cfg.plot {
            plot_rows(&cfg.out.join("kernel_space_value.png"), &rows)?;
        }
    }
    if let Some(r) = grad_report.as_mut() {
        let classical = if corrected { ExactKernel::corrected(k, correction_matrices(&ps, &k, &nl)?) } else { ExactKernel::plain(k) };
        let centre = ps
            .interior_indices()
            .into_iter()
            .min_by(|&a, &b| {
                let d = |i: usize| (ps.positions[i][0] - 0.5).hypot(ps.positions[i][1] - 0.5);
                d(a).total_cmp(&d(b))
            })
            .ok_or(qsph_core::Error::EmptyDataset)?;
        let mut worst = 0.0f64;
        let mut peak = 0.0f64;
        for (axis, name) in [(0, "x"), (1, "y")] {
            let rows = extract_gradient_space(&model, &classical, &grid, dv, axis, centre)?;
            worst = worst.max(max_abs(&rows, |x| x.residual));
            peak = peak.max(max_abs(&rows, |x| x.classical));
            if cfg.export_kernel_space {
                io::write_kernel_space(&cfg.out.join(format!("kernel_space_grad_{name}.csv")), &rows)?;
            }
            if cfg.plot {
                plot_rows(&cfg.out.join(format!("kernel_space_grad_{name}.png")), &rows)?;
            }
        }
        r.max_residual = worst;
        r.max_residual_rel = if peak > 0.0 { worst / peak } else { worst };
    }
    let summary = TrainKernelSummary {
        distribution: cfg.distribution.clone(),
        corrected,
        pre_map: pre_map.name().to_string(),
        dv,
        value: value_report,
        grad: grad_report,
        model_sha256: sha,
        clamp_count: model.clamp_count(),
    };
    io::save_json(&cfg.out.join("report.json"), &summary)?;
    Ok(summary)
}

fn plot_rows(path: &Path, rows: &[KernelSpaceRow]) -> CliResult<()> {
    let r: Vec<f64> = rows.iter().map(|x| x.r).collect();
    plot::lines(
        path,
        &[(r.clone(), rows.iter().map(|x| x.classical).collect()), (r, rows.iter().map(|x| x.learned).collect())],
        false,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotReport {
    pub time: f64,
    pub step: usize,
    pub l2_rel: f64,
    pub linf_rel: f64,
    pub max_abs: f64,
    /// Against the classical-operator run at the same time.
    pub l2_vs_classical: Option<f64>,
    pub linf_vs_classical: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdvectSummary {
    pub operator: String,
    pub integrator: String,
    pub steps: usize,
    pub max_abs: f64,
    pub clamp_count: u64,
    pub nan_count: usize,
    pub model_file: Option<PathBuf>,
    pub model_sha256: Option<String>,
    /// `initial` for the classical operator, `classical` otherwise.
    pub reference: String,
    pub snapshots: Vec<SnapshotReport>,
}

/// Runs one period of the rotating-cone benchmark and writes a snapshot CSV
/// per requested time and `report.json`. Errors are measured against the
/// initial field; kernel operators are also compared with a classical run.
pub fn advect(cfg: &RunConfig) -> CliResult<AdvectSummary> {
    let spec = AdvectionSpec {
        period: cfg.period,
        dt: cfg.dt,
        spacing: cfg.spacing,
        snapshot_times: cfg.snapshot_times.clone(),
        integrator: cfg.integrator()?,
        ..Default::default()
    };
    spec.validate()?;
    let op = cfg.operator()?;
    // Resolve the model before any output is written.
    let loaded = match &op {
        OperatorSel::Quantum(p) => {
            let (m, sha) = io::load_kernel_model(p)?;
            if m.grad.is_none() {
                return Err(CliError::config(format!("{}: kernel model has no gradient network", p.display())));
            }
            let h = spec.h_ratio * spec.spacing;
            if (m.h - h).abs() > 1e-9 * h {
                return Err(CliError::config(format!("{}: model trained for h = {}, advection uses h = {h}", p.display(), m.h)));
            }
            Some((m, sha, p.clone()))
        }
        _ => None,
    };
    start(cfg)?;
    let classical = Advection::new(&spec, OperatorChoice::Classical)?;
    let classical_run = run_period(&classical, None)?;
    let (run, reference_run, clamp_count) = match &op {
        OperatorSel::Classical => (classical_run, None, 0),
        OperatorSel::Exact => {
            let ps = &classical.particles;
            let (k, nl) = (ps.kernel(), ps.neighbors());
            let exact = ExactKernel::corrected(k, correction_matrices(ps, &k, &nl)?);
            let adv = Advection::new(&spec, OperatorChoice::Kernel(&exact))?;
            (run_period(&adv, Some(&exact))?, Some(classical_run), 0)
        }
        OperatorSel::Quantum(_) => {
            let m = &loaded.as_ref().expect("loaded above").0;
            m.reset_clamps();
            let adv = Advection::new(&spec, OperatorChoice::Kernel(m))?;
            let r = run_period(&adv, Some(m))?;
            let c = m.clamp_count();
            (r, Some(classical_run), c)
        }
    };
    let positions: Vec<_> = classical.interior().iter().map(|&i| classical.particles.positions[i]).collect();
    let mut snaps = Vec::new();
    for s in &run.snapshots {
        let (reference, vs): (&[f64], _) = match &reference_run {
            Some(c) => {
                let cs = c.snapshot_at(s.time).expect("same snapshot schedule");
                let e = qsph_core::bench::error_metrics(&s.psi, &cs.psi, None).ok();
                (&cs.psi, e)
            }
            None => (&run.initial, None),
        };
        io::write_snapshot(&cfg.out.join(io::snapshot_file_name(s)), &positions, &s.psi, reference)?;
        if cfg.plot {
            plot::heatmap(&cfg.out.join(io::snapshot_file_name(s).replace(".csv", ".png")), &positions, &s.psi)?;
        }
        snaps.push(SnapshotReport {
            time: s.time,
            step: s.step,
            l2_rel: s.l2_rel,
            linf_rel: s.linf_rel,
            max_abs: s.max_abs,
            l2_vs_classical: vs.as_ref().map(|e| e.l2_rel),
            linf_vs_classical: vs.as_ref().map(|e| e.linf_rel),
        });
    }
    let summary = AdvectSummary {
        operator: match &op {
            OperatorSel::Classical => "classical".into(),
            OperatorSel::Exact => "exact".into(),
            OperatorSel::Quantum(_) => "quantum".into(),
        },
        integrator: cfg.integrator.clone(),
        steps: run.steps,
        max_abs: run.max_abs,
        clamp_count,
        nan_count: count_nan(&run),
        model_file: loaded.as_ref().map(|l| l.2.clone()),
        model_sha256: loaded.as_ref().map(|l| l.1.clone()),
        reference: if reference_run.is_some() { "classical" } else { "initial" }.into(),
        snapshots: snaps,
    };
    let report = json!({
        "summary": summary,
        "seeds": { "seed": cfg.seed },
        "config": cfg,
    });
    io::save_json(&cfg.out.join("report.json"), &report)?;
    Ok(summary)
}

fn count_nan(run: &PeriodRun) -> usize {
    run.snapshots.iter().flat_map(|s| &s.psi).filter(|v| !v.is_finite()).count()
}
