//! Command-line behavior: exit codes, modality gating, the six-analysis
//! matrix from one config, and output-schema sanity.

use std::path::Path;
use std::process::Output;

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_three-groups"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        r#"
[sim]
replicates = 2
n_genes = 10
n_beneficial = 1
n_deleterious = 1
n_gwas = 80
n_rna = 16
gwas_effects = [1.5]
rna_log2_fc = [1.5]
seed = 4

[chain]
n_iter = 150
burn_in = 50
seed = 9
"#,
    )
    .unwrap();
    path
}

fn read_data_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

#[test]
fn pipeline_outputs_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg = write_config(root);
    let cfg = cfg.to_str().unwrap();

    let archive = root.join("archive");
    let out = run(&["simulate", "--config", cfg, "--out", archive.to_str().unwrap()]);
    assert!(out.status.success());

    // refusing to clobber a non-empty output directory is a validation failure
    let out = run(&["simulate", "--config", cfg, "--out", archive.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // missing dataset files for the requested modality
    let out = run(&["fit", "--config", cfg, "--modality", "joint", "--out", root.join("nofit").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // the six-analysis matrix from one config file with flag overrides
    let replicate = archive.join("rep_000");
    for family in ["local-fixed", "nonlocal-pimom"] {
        for modality in ["rna", "gwas", "joint"] {
            let fit_out = root.join(format!("fits/{family}-{modality}/rep_000"));
            let out = run(&[
                "fit",
                "--config",
                cfg,
                "--replicate",
                replicate.to_str().unwrap(),
                "--modality",
                modality,
                "--family",
                family,
                "--out",
                fit_out.to_str().unwrap(),
            ]);
            assert!(
                out.status.success(),
                "{family}/{modality} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            // occupancy proportions sum to one for every gene
            for row in read_data_rows(&fit_out.join("summary.tsv")) {
                let p: f64 = row[1].parse::<f64>().unwrap()
                    + row[2].parse::<f64>().unwrap()
                    + row[3].parse::<f64>().unwrap();
                assert!((p - 1.0).abs() < 1e-12, "occupancies sum to {p}");
            }
        }
    }

    // mostly-null genes carry starred effect columns in at least one fit
    let starred = read_data_rows(&root.join("fits/nonlocal-pimom-joint/rep_000/summary.tsv"))
        .iter()
        .any(|row| row[4] == "*" && row[5] == "*");
    assert!(starred, "expected starred effects for mostly-null genes");

    // score the two joint fits only (layout: fits-for-score/<model>/<rep>)
    for family in ["local-fixed", "nonlocal-pimom"] {
        for rep in ["rep_000", "rep_001"] {
            let fit_out = root.join(format!("fits_score/{family}/{rep}"));
            let out = run(&[
                "fit",
                "--config",
                cfg,
                "--replicate",
                archive.join(rep).to_str().unwrap(),
                "--modality",
                "joint",
                "--family",
                family,
                "--out",
                fit_out.to_str().unwrap(),
            ]);
            assert!(out.status.success());
        }
    }
    let metrics = root.join("metrics.tsv");
    let out = run(&[
        "score",
        "--config",
        cfg,
        "--archive",
        archive.to_str().unwrap(),
        "--fits",
        root.join("fits_score").to_str().unwrap(),
        "--out",
        metrics.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_data_rows(&metrics);
    // 2 models × 2 replicates × (log, brier, auc + 2 TPR targets)
    assert_eq!(rows.len(), 2 * 2 * 5);
    let models: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(models.len(), 2);

    // summarize emits the report tables with a strictly decreasing prior curve
    let report = root.join("report");
    let out = run(&[
        "summarize",
        "--config",
        cfg,
        "--trace",
        root.join("fits/nonlocal-pimom-joint/rep_000/trace_chain00.jsonl").to_str().unwrap(),
        "--prior-curve-j",
        "60",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["summary.tsv", "volcano_rna.tsv", "volcano_gwas.tsv", "log_prior_curve.tsv"] {
        assert!(report.join(file).exists(), "missing {file}");
    }
    let curve = read_data_rows(&report.join("log_prior_curve.tsv"));
    assert_eq!(curve.len(), 31);
    for pair in curve.windows(2) {
        let a: f64 = pair[0][1].parse().unwrap();
        let b: f64 = pair[1][1].parse().unwrap();
        assert!(b < a, "log-prior curve not strictly decreasing");
    }
}

#[test]
fn rna_only_fit_ignores_gwas_files() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg = write_config(root);
    let cfg = cfg.to_str().unwrap();

    let archive = root.join("archive");
    assert!(run(&["simulate", "--config", cfg, "--out", archive.to_str().unwrap()]).status.success());
    // corrupt the GWAS files; an RNA-only fit must not read them
    let replicate = archive.join("rep_000");
    std::fs::write(replicate.join("gwas_carrier.tsv"), b"individual_id\tG0000\ni1\tnot_a_number\n").unwrap();
    std::fs::write(replicate.join("gwas_outcome.tsv"), b"individual_id\toutcome\ni1\tmaybe\n").unwrap();

    let out = run(&[
        "fit",
        "--config",
        cfg,
        "--replicate",
        replicate.to_str().unwrap(),
        "--modality",
        "rna",
        "--out",
        root.join("rna_fit").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // but a joint fit must now fail on the corrupted inputs
    let out = run(&[
        "fit",
        "--config",
        cfg,
        "--replicate",
        replicate.to_str().unwrap(),
        "--modality",
        "joint",
        "--out",
        root.join("joint_fit").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_rejects_gene_id_mismatch_in_score() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg = write_config(root);
    let cfg = cfg.to_str().unwrap();
    let archive = root.join("archive");
    assert!(run(&["simulate", "--config", cfg, "--out", archive.to_str().unwrap()]).status.success());
    let fit_out = root.join("fits/m/rep_000");
    assert!(run(&[
        "fit",
        "--config",
        cfg,
        "--replicate",
        archive.join("rep_000").to_str().unwrap(),
        "--modality",
        "gwas",
        "--out",
        fit_out.to_str().unwrap(),
    ])
    .status
    .success());

    // swap one truth gene id so the sets disagree
    let truth_path = archive.join("rep_000/truth.tsv");
    let mangled = std::fs::read_to_string(&truth_path).unwrap().replace("G0003", "XXXX");
    std::fs::write(&truth_path, mangled).unwrap();
    let out = run(&[
        "score",
        "--config",
        cfg,
        "--archive",
        archive.to_str().unwrap(),
        "--fits",
        root.join("fits").to_str().unwrap(),
        "--out",
        root.join("metrics.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("XXXX") && stderr.contains("G0003"), "diff listing missing: {stderr}");
}

#[test]
fn summarize_handles_truncated_trace_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg = write_config(root);
    let cfg = cfg.to_str().unwrap();
    let archive = root.join("archive");
    assert!(run(&["simulate", "--config", cfg, "--out", archive.to_str().unwrap()]).status.success());
    let fit_out = root.join("fit");
    assert!(run(&[
        "fit",
        "--config",
        cfg,
        "--replicate",
        archive.join("rep_000").to_str().unwrap(),
        "--modality",
        "joint",
        "--out",
        fit_out.to_str().unwrap(),
    ])
    .status
    .success());

    // chop the trace mid-record, as a crashed run would leave it
    let trace_path = fit_out.join("trace_chain00.jsonl");
    let bytes = std::fs::read(&trace_path).unwrap();
    std::fs::write(&trace_path, &bytes[..bytes.len() * 3 / 4]).unwrap();

    let out = run(&[
        "summarize",
        "--config",
        cfg,
        "--trace",
        trace_path.to_str().unwrap(),
        "--burnin",
        "50",
        "--out",
        root.join("report").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning") && stderr.contains("truncated"), "stderr: {stderr}");
    assert!(root.join("report/summary.tsv").exists());
}

#[test]
fn max_ram_estimate_gate() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg = write_config(root);
    let cfg = cfg.to_str().unwrap();
    let archive = root.join("archive");
    assert!(run(&["simulate", "--config", cfg, "--out", archive.to_str().unwrap()]).status.success());

    let out = run(&[
        "fit",
        "--config",
        cfg,
        "--replicate",
        archive.join("rep_000").to_str().unwrap(),
        "--modality",
        "joint",
        "--max-ram-estimate",
        "0.0000001",
        "--out",
        root.join("fit").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("estimated"));
}
