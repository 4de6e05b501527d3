//! Proper scoring rules and classification metrics over posterior null
//! probabilities, plus median-probability-model selection and volcano-plot
//! tables.

use serde::{Deserialize, Serialize};

use crate::data::GeneLabel;
use crate::error::{Error, Result};
use crate::trace::PosteriorSummary;

/// Probabilities are clamped here before taking logs: competitors and MCMC
/// occupancy can emit exact 0/1, and an unclamped score would be infinite.
pub const PROB_CLAMP: f64 = 1e-12;

/// One gene's score against ground truth: the posterior null probability and
/// whether the gene is truly non-null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredGene {
    pub p_null: f64,
    pub truth_non_null: bool,
}

impl ScoredGene {
    /// Classification score: posterior probability of being non-null.
    pub fn score(&self) -> f64 {
        1.0 - self.p_null
    }
}

/// Scores of one model on one replicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredGeneSet {
    pub model: String,
    pub replicate: String,
    pub genes: Vec<ScoredGene>,
}

fn clamp(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Logarithmic score Σ −log p(true class) over the two classes
/// {null, non-null}; lower is better.
pub fn log_score(genes: &[ScoredGene]) -> f64 {
    genes
        .iter()
        .map(|g| {
            let p_non_null = clamp(1.0 - g.p_null);
            if g.truth_non_null {
                -p_non_null.ln()
            } else {
                -(1.0 - p_non_null).ln()
            }
        })
        .sum()
}

/// Brier score Σ (p(non-null) − 1{non-null})²; lower is better.
pub fn brier_score(genes: &[ScoredGene]) -> f64 {
    genes
        .iter()
        .map(|g| {
            let p = 1.0 - g.p_null;
            let target = g.truth_non_null as u8 as f64;
            (p - target) * (p - target)
        })
        .sum()
}

/// Area under the ROC curve: the probability that a random non-null gene
/// scores above a random null gene, ties counting one half (midrank /
/// Mann-Whitney form). `None` when only one class is present.
pub fn auc(genes: &[ScoredGene]) -> Option<f64> {
    let n_pos = genes.iter().filter(|g| g.truth_non_null).count();
    let n_neg = genes.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..genes.len()).collect();
    order.sort_by(|&a, &b| genes[a].score().partial_cmp(&genes[b].score()).expect("finite scores"));

    // midranks over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut k = i;
        while k + 1 < order.len() && genes[order[k + 1]].score() == genes[order[i]].score() {
            k += 1;
        }
        let midrank = (i + k) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=k] {
            if genes[idx].truth_non_null {
                rank_sum_pos += midrank;
            }
        }
        i = k + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Result of targeting a mean false positive rate across replicates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TprAtMeanFpr {
    pub target_fpr: f64,
    /// Score cutoff shared by all replicates (classification rule: score > cutoff).
    pub cutoff: f64,
    /// Mean FPR actually attained at the cutoff (largest value ≤ target on
    /// the pooled score grid).
    pub achieved_mean_fpr: f64,
    pub tpr_per_replicate: Vec<f64>,
    pub mean_tpr: f64,
}

fn fpr_tpr_at(genes: &[ScoredGene], cutoff: f64) -> (f64, f64) {
    let mut fp = 0usize;
    let mut tp = 0usize;
    let mut n_neg = 0usize;
    let mut n_pos = 0usize;
    for g in genes {
        if g.truth_non_null {
            n_pos += 1;
            tp += (g.score() > cutoff) as usize;
        } else {
            n_neg += 1;
            fp += (g.score() > cutoff) as usize;
        }
    }
    (fp as f64 / n_neg as f64, tp as f64 / n_pos as f64)
}

/// Find one score cutoff per model such that the false positive rate averaged
/// across replicates is as close to the target as attainable without
/// exceeding it (bisection over the pooled score grid), then report each
/// replicate's true positive rate at that cutoff.
pub fn tpr_at_mean_fpr(replicates: &[&[ScoredGene]], target_fpr: f64) -> Result<TprAtMeanFpr> {
    if replicates.is_empty() {
        return Err(Error::InvalidData("no replicates to score".into()));
    }
    if !(0.0..=1.0).contains(&target_fpr) {
        return Err(Error::InvalidConfig(format!("target FPR {target_fpr} outside [0,1]")));
    }
    for (r, genes) in replicates.iter().enumerate() {
        let n_pos = genes.iter().filter(|g| g.truth_non_null).count();
        if n_pos == 0 || n_pos == genes.len() {
            return Err(Error::InvalidData(format!(
                "replicate {r} is degenerate: both truth classes are required"
            )));
        }
    }

    let mean_fpr = |cutoff: f64| -> f64 {
        replicates.iter().map(|g| fpr_tpr_at(g, cutoff).0).sum::<f64>() / replicates.len() as f64
    };

    // pooled cutoff grid; mean FPR is non-increasing along it
    let mut grid: Vec<f64> = replicates.iter().flat_map(|g| g.iter().map(|x| x.score())).collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    grid.dedup();

    // smallest grid cutoff whose mean FPR does not exceed the target
    let mut lo = 0usize;
    let mut hi = grid.len() - 1;
    if mean_fpr(grid[lo]) <= target_fpr {
        hi = lo;
    } else {
        // invariant: mean_fpr(grid[lo]) > target >= mean_fpr(grid[hi]) = 0
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if mean_fpr(grid[mid]) <= target_fpr {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let cutoff = grid[hi];
    let tpr_per_replicate: Vec<f64> = replicates.iter().map(|g| fpr_tpr_at(g, cutoff).1).collect();
    let mean_tpr = tpr_per_replicate.iter().sum::<f64>() / tpr_per_replicate.len() as f64;
    Ok(TprAtMeanFpr {
        target_fpr,
        cutoff,
        achieved_mean_fpr: mean_fpr(cutoff),
        tpr_per_replicate,
        mean_tpr,
    })
}

/// A gene selected by the median probability model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedGene {
    pub gene_id: String,
    pub label: GeneLabel,
    pub p_null: f64,
}

/// Median probability model: genes with P(null) strictly below 0.5, tagged by
/// the larger of the two non-null occupancies. A gene exactly at 0.5 is not
/// selected.
pub fn median_probability_select(summary: &PosteriorSummary) -> Vec<SelectedGene> {
    summary
        .genes
        .iter()
        .filter(|g| g.p_null < 0.5)
        .map(|g| SelectedGene {
            gene_id: g.gene_id.clone(),
            label: g.dominant_non_null_label(),
            p_null: g.p_null,
        })
        .collect()
}

/// One volcano-plot point: marginal log effect (zeros included in the
/// average) against posterior non-null probability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolcanoPoint {
    pub gene_id: String,
    pub marginal_log_effect: f64,
    pub p_include: f64,
}

/// Volcano-plot table for one modality, with the median-probability cutoff
/// line value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolcanoTable {
    pub modality: crate::priors::Modality,
    pub points: Vec<VolcanoPoint>,
    pub mm_cutoff: f64,
}

/// Plot-ready volcano tables, one per active modality.
pub fn volcano_data(summary: &PosteriorSummary) -> Vec<VolcanoTable> {
    let mut tables = Vec::new();
    if summary.modality.rna_active() {
        tables.push(VolcanoTable {
            modality: crate::priors::Modality::Rna,
            points: summary
                .genes
                .iter()
                .map(|g| VolcanoPoint {
                    gene_id: g.gene_id.clone(),
                    marginal_log_effect: g.marginal_log_fc,
                    p_include: g.p_non_null(),
                })
                .collect(),
            mm_cutoff: 0.5,
        });
    }
    if summary.modality.gwas_active() {
        tables.push(VolcanoTable {
            modality: crate::priors::Modality::Gwas,
            points: summary
                .genes
                .iter()
                .map(|g| VolcanoPoint {
                    gene_id: g.gene_id.clone(),
                    marginal_log_effect: g.marginal_gamma,
                    p_include: g.p_non_null(),
                })
                .collect(),
            mm_cutoff: 0.5,
        });
    }
    tables
}
