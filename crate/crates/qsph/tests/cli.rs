use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qsph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsph")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let o = qsph(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn files(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    files(dir).into_iter().filter(|f| f.ends_with(".csv")).map(|f| (f.clone(), fs::read(dir.join(f)).unwrap())).collect()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let k = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[k].parse().unwrap()).collect()
}

const FIT: [&str; 8] = ["--grid", "6", "--epochs", "2", "--bs", "16", "--n-qubits", "2"];

#[test]
fn fit_field_emits_four_artifacts_with_stable_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ok(&[&["fit-field", "--model", "single", "--head", "pauliz", "--out", out][..], &FIT].concat());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["samples"], 36);
    let expect: BTreeSet<String> = ["config.json", "loss.csv", "prediction.csv", "error.csv"].map(String::from).into();
    assert_eq!(files(dir.path()), expect);
    assert_eq!(header(&dir.path().join("loss.csv")), "epoch,train_loss,test_loss");
    assert_eq!(header(&dir.path().join("prediction.csv")), "x,y,target,prediction,split");
    assert_eq!(header(&dir.path().join("error.csv")), "x,y,error,abs_error");
    assert_eq!(column(&dir.path().join("loss.csv"), "epoch"), vec![1.0, 2.0]);
}

#[test]
fn zero_epochs_gives_untrained_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["fit-field", "--grid", "4", "--epochs", "0", "--out", out]);
    assert_eq!(fs::read_to_string(dir.path().join("loss.csv")).unwrap().trim(), "epoch,train_loss,test_loss");
    assert_eq!(column(&dir.path().join("prediction.csv"), "prediction").len(), 16);
}

#[test]
fn fixed_seed_and_echoed_config_reproduce_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = |out: &str| [&["fit-field", "--seed", "5", "--noise-sigma", "0.01", "--out"][..], &[out], &FIT].concat().iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let run = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    run(args(a.path().to_str().unwrap()));
    run(args(b.path().to_str().unwrap()));
    assert_eq!(csv_files(a.path()), csv_files(b.path()));
    let cfg = a.path().join("config.json");
    ok(&["fit-field", "--config", cfg.to_str().unwrap(), "--out", c.path().to_str().unwrap()]);
    assert_eq!(csv_files(a.path()), csv_files(c.path()));
}

#[test]
fn timing_adds_only_a_column() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[&["fit-field", "--timing", "--out", dir.path().to_str().unwrap()][..], &FIT].concat());
    assert_eq!(header(&dir.path().join("loss.csv")), "epoch,train_loss,test_loss,wall_ms");
}

#[test]
fn config_echo_keys_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fit-field", "--grid", "4", "--epochs", "0", "--out", dir.path().to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let want = [
        "batch_size", "command", "distribution", "dt", "epochs", "export_kernel_space", "families", "family", "field_seed", "field_time", "grid",
        "grid_points", "head", "heads", "integrator", "kernel", "kernel_model", "levels", "lr", "lrs", "max_samples", "model", "n_layers",
        "n_qubits", "noise_sigma", "operator", "optimizer", "out", "period", "plot", "pre_map", "role", "seed", "snapshot_times", "spacing",
        "test_fraction", "timing",
    ];
    assert_eq!(keys, want);
    assert_eq!(v["command"], "fit-field");
    assert_eq!(v["batch_size"], 640);
}

#[test]
fn invalid_config_exits_2_naming_the_field() {
    let o = qsph(&["fit-field", "--lr=-0.1", "--out", "/nonexistent/never"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`lr`"));
    let o = qsph(&["fit-field", "--head", "x"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qsph(&["fit-field", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

const KERNEL: [&str; 12] = ["--grid", "8", "--epochs", "2", "--bs", "32", "--max-samples", "48", "--n-qubits", "2", "--grid-points", "21"];

#[test]
fn train_kernel_cases_emit_models_and_tables() {
    for (dist, kernel) in [("regular", "plain"), ("irregular", "corrected")] {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        ok(&[&["train-kernel", "--distribution", dist, "--kernel", kernel, "--export-kernel-space", "--out", out][..], &KERNEL].concat());
        let names = files(dir.path());
        for f in [
            "config.json",
            "particles.csv",
            "kernel_model.json",
            "loss_value.csv",
            "loss_grad.csv",
            "report.json",
            "kernel_space_value.csv",
            "kernel_space_grad_x.csv",
            "kernel_space_grad_y.csv",
        ] {
            assert!(names.contains(f), "{dist}: missing {f}");
        }
        let ks = dir.path().join("kernel_space_value.csv");
        assert_eq!(header(&ks), "r,learned,classical,residual");
        let r = column(&ks, "r");
        let h = 1.2 / 8.0;
        assert_eq!(r.len(), 21);
        assert_eq!(r[0], 0.0);
        assert!((r[20] - 2.0 * h).abs() < 1e-12);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*column(&ks, "classical").last().unwrap(), 0.0);
        assert_eq!(header(&dir.path().join("particles.csv")), "x,y,volume,value,interior_flag");
        let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(rep["corrected"], kernel == "corrected");
        assert!(rep["value"]["max_residual_rel"].is_number());
    }
}

#[test]
fn train_kernel_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&[&["train-kernel", "--distribution", "irregular", "--pre-map", "norm", "--out", d.path().to_str().unwrap()][..], &KERNEL].concat());
    }
    assert_eq!(csv_files(a.path()), csv_files(b.path()));
    assert_eq!(fs::read(a.path().join("kernel_model.json")).unwrap(), fs::read(b.path().join("kernel_model.json")).unwrap());
}

const ADVECT: [&str; 8] = ["--spacing", "0.1", "--dt", "0.02", "--period", "1", "--snapshot-times", "0,0.5,1"];

#[test]
fn advect_classical_writes_snapshots_and_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[&["advect", "--out", dir.path().to_str().unwrap()][..], &ADVECT].concat());
    let names = files(dir.path());
    for f in ["snapshot_t0.00.csv", "snapshot_t0.50.csv", "snapshot_t1.00.csv", "report.json", "config.json"] {
        assert!(names.contains(f), "missing {f}");
    }
    assert_eq!(header(&dir.path().join("snapshot_t0.50.csv")), "x,y,psi_pred,psi_ref,err");
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let keys: Vec<&str> = rep.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["config", "seeds", "summary"]);
    let s = &rep["summary"];
    assert_eq!(s["steps"], 50);
    assert!(s["max_abs"].as_f64().unwrap() <= 1.2);
    assert_eq!(s["nan_count"], 0);
    assert_eq!(s["reference"], "initial");
    let snaps = s["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 3);
    assert!(snaps.iter().all(|x| x["l2_rel"].is_number()));
    assert_eq!(snaps[0]["l2_rel"], 0.0);
}

#[test]
fn advect_exact_operator_matches_classical() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[&["advect", "--operator", "exact", "--out", dir.path().to_str().unwrap()][..], &ADVECT].concat());
    for t in ["0.00", "0.50", "1.00"] {
        let err = column(&dir.path().join(format!("snapshot_t{t}.csv")), "err");
        assert!(err.iter().all(|e| e.abs() < 1e-10));
    }
}

#[test]
fn advect_quantum_needs_a_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = qsph(&[&["advect", "--operator", "quantum", "--out", out.to_str().unwrap()][..], &ADVECT].concat());
    assert_eq!(o.status.code(), Some(2));
    let o = qsph(&[&["advect", "--operator", "quantum:/nonexistent/model.json", "--out", out.to_str().unwrap()][..], &ADVECT].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not found"));
    assert!(!out.exists());
}

#[test]
fn advect_with_trained_kernel_model() {
    let dir = tempfile::tempdir().unwrap();
    let km = dir.path().join("k");
    ok(&["train-kernel", "--grid", "10", "--role", "grad", "--pre-map", "norm", "--epochs", "3", "--bs", "8", "--n-qubits", "2", "--out", km.to_str().unwrap()]);
    let model = km.join("kernel_model.json");
    let op = format!("quantum:{}", model.display());
    let run = dir.path().join("a");
    ok(&[&["advect", "--operator", &op, "--out", run.to_str().unwrap()][..], &ADVECT].concat());
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["summary"]["reference"], "classical");
    assert!(rep["summary"]["snapshots"][2]["l2_vs_classical"].is_number());
    assert_eq!(rep["summary"]["model_sha256"].as_str().unwrap().len(), 64);

    // a model trained for another spacing is rejected
    let o = qsph(&["advect", "--operator", &op, "--spacing", "0.05", "--dt", "0.02", "--period", "1", "--snapshot-times", "0", "--out", dir.path().join("b").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // tampering breaks the hash
    let text = fs::read_to_string(&model).unwrap().replacen("\"scale\": ", "\"scale\": 2", 1);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, text).unwrap();
    let o = qsph(&[&["advect", "--operator", &format!("quantum:{}", bad.display()), "--out", dir.path().join("c").to_str().unwrap()][..], &ADVECT].concat());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn diverging_training_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsph(&[&["fit-field", "--optimizer", "sgd", "--lr", "1e300", "--out", dir.path().to_str().unwrap()][..], &FIT].concat());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn compare_families_by_heads_gives_six_rows() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&["compare", "--grid", "4", "--epochs", "2", "--bs", "8", "--model", "forward", "--out", d.path().to_str().unwrap()]);
    }
    let fin = a.path().join("compare_final.csv");
    assert_eq!(header(&fin), "family,head,level,lr,n_params,final_train_loss,final_test_loss");
    assert_eq!(header(&a.path().join("compare_epochs.csv")), "family,head,level,lr,epoch,train_loss,test_loss");
    let mut r = csv::Reader::from_path(&fin).unwrap();
    let rows: Vec<(String, String)> = r.records().map(|x| x.unwrap()).map(|x| (x[0].to_string(), x[1].to_string())).collect();
    assert_eq!(rows.len(), 6);
    for fam in ["qnn", "qmlp", "qcnn"] {
        for head in ["pauliz", "prob"] {
            assert!(rows.contains(&(fam.to_string(), head.to_string())));
        }
    }
    assert_eq!(csv_files(a.path()), csv_files(b.path()));
}

#[test]
fn plots_are_optional() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[&["fit-field", "--plot", "--out", dir.path().to_str().unwrap()][..], &FIT].concat());
    let names = files(dir.path());
    assert!(names.contains("prediction.png") && names.contains("loss.png"));
}
