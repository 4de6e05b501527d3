use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use three_groups::io::{read_summary_p_null, read_truth, write_metrics, MetricRow};
use three_groups::metrics::{auc, brier_score, log_score, tpr_at_mean_fpr, ScoredGene};

use crate::config::RunConfig;
use crate::{ScoreArgs, ValidationFailure};

fn sorted_subdirs(root: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in
        std::fs::read_dir(root).with_context(|| format!("listing {}", root.display()))?
    {
        let entry = entry?;
        if entry.path().is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// Join one replicate's summary with its truth file by gene id; mismatched
/// gene sets are a hard error with a diff listing.
fn scored_genes(summary_path: &Path, truth_path: &Path) -> Result<Vec<ScoredGene>> {
    let summary = read_summary_p_null(summary_path)?;
    let truth = read_truth(truth_path)?;
    let truth_by_id: BTreeMap<&str, bool> = truth
        .gene_ids
        .iter()
        .enumerate()
        .map(|(g, id)| (id.as_str(), !truth.labels.get(g).is_null()))
        .collect();

    let summary_ids: std::collections::BTreeSet<&str> = summary.iter().map(|(id, _)| id.as_str()).collect();
    let truth_ids: std::collections::BTreeSet<&str> = truth_by_id.keys().copied().collect();
    if summary_ids != truth_ids {
        let only_summary: Vec<&str> = summary_ids.difference(&truth_ids).copied().collect();
        let only_truth: Vec<&str> = truth_ids.difference(&summary_ids).copied().collect();
        return Err(ValidationFailure(format!(
            "gene ids disagree between {} and {}\n  only in summary: {:?}\n  only in truth: {:?}",
            summary_path.display(),
            truth_path.display(),
            only_summary,
            only_truth
        ))
        .into());
    }

    Ok(summary
        .into_iter()
        .map(|(id, p_null)| ScoredGene { p_null, truth_non_null: truth_by_id[id.as_str()] })
        .collect())
}

pub fn run(args: ScoreArgs) -> Result<()> {
    let mut config = RunConfig::load(args.config.as_deref())?;
    if let Some(targets) = &args.targets {
        config.score.targets = targets
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| ValidationFailure(format!("bad FPR target `{t}`"))))
            .collect::<std::result::Result<Vec<f64>, _>>()?;
    }
    let hash = config.hash();

    let models = sorted_subdirs(&args.fits)?;
    if models.is_empty() {
        return Err(ValidationFailure(format!("no model directories under {}", args.fits.display())).into());
    }

    let mut rows = Vec::new();
    for model in &models {
        let model_dir = args.fits.join(model);
        let replicates = sorted_subdirs(&model_dir)?;
        if replicates.is_empty() {
            return Err(ValidationFailure(format!("no replicate directories under {}", model_dir.display())).into());
        }
        let mut per_replicate: Vec<(String, Vec<ScoredGene>)> = Vec::new();
        for replicate in &replicates {
            let summary_path = model_dir.join(replicate).join("summary.tsv");
            let truth_path = args.archive.join(replicate).join("truth.tsv");
            per_replicate.push((replicate.clone(), scored_genes(&summary_path, &truth_path)?));
        }

        for (replicate, genes) in &per_replicate {
            rows.push(MetricRow {
                model: model.clone(),
                replicate: replicate.clone(),
                metric: "log_score".into(),
                value: log_score(genes),
            });
            rows.push(MetricRow {
                model: model.clone(),
                replicate: replicate.clone(),
                metric: "brier_score".into(),
                value: brier_score(genes),
            });
            rows.push(MetricRow {
                model: model.clone(),
                replicate: replicate.clone(),
                metric: "auc".into(),
                value: auc(genes).unwrap_or(f64::NAN),
            });
        }

        let views: Vec<&[ScoredGene]> = per_replicate.iter().map(|(_, g)| g.as_slice()).collect();
        for &target in &config.score.targets {
            let result = tpr_at_mean_fpr(&views, target)?;
            for ((replicate, _), &tpr) in per_replicate.iter().zip(&result.tpr_per_replicate) {
                rows.push(MetricRow {
                    model: model.clone(),
                    replicate: replicate.clone(),
                    metric: format!("tpr_at_mean_fpr_{target}"),
                    value: tpr,
                });
            }
            eprintln!(
                "score: model {model} target FPR {target}: cutoff {:.6}, achieved mean FPR {:.4}, mean TPR {:.4}",
                result.cutoff, result.achieved_mean_fpr, result.mean_tpr
            );
        }
    }

    crate::prepare_out_file(&args.out, args.force)?;
    write_metrics(&args.out, &rows, &hash)?;
    eprintln!("score: wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}
