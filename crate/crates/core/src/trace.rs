//! MCMC trace records, line-delimited persistence, and posterior summaries.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::GeneLabel;
use crate::diagnostics::ChainDiagnostics;
use crate::error::{Error, Result};
use crate::priors::HyperState;
use crate::sampler::ModalitySet;

pub const TRACE_SCHEMA: &str = "three-groups-trace";
pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// First line of a trace stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: String,
    pub version: u32,
    pub config_hash: String,
    pub modality: ModalitySet,
    pub gene_ids: Vec<String>,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub chain_id: u64,
}

/// One retained iteration. Effects are sparse (gene index, value) pairs since
/// most genes are null; `phi` is per-gene and empty when the RNA-seq branch is
/// inactive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub labels: Vec<u8>,
    pub log_fc: Vec<(usize, f64)>,
    pub gamma: Vec<(usize, f64)>,
    pub phi: Vec<f64>,
    pub hyper: HyperState,
    pub lambda: [f64; 3],
    pub log_post: f64,
}

/// Full output of one chain.
#[derive(Debug, Clone)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
    pub diagnostics: ChainDiagnostics,
}

impl Trace {
    /// Records at or past the burn-in boundary.
    pub fn retained(&self, burn_in: usize) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.iter >= burn_in)
    }

    /// Post-burn-in occupancy tallies per gene: [null, deleterious, beneficial].
    pub fn occupancy(&self, burn_in: usize) -> Vec<[u64; 3]> {
        let mut tallies = vec![[0u64; 3]; self.header.gene_ids.len()];
        for record in self.retained(burn_in) {
            for (j, &label) in record.labels.iter().enumerate() {
                tallies[j][(label - 1) as usize] += 1;
            }
        }
        tallies
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut writer, &self.header)?;
        writer.write_all(b"\n")?;
        for record in &self.records {
            serde_json::to_writer(&mut writer, record)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<Trace> {
        let (trace, warning) = Self::read_jsonl_lenient(path)?;
        match warning {
            Some(message) => Err(Error::InvalidData(message)),
            None => Ok(trace),
        }
    }

    /// Like `read_jsonl`, but a malformed or truncated record stops reading
    /// and returns the records seen so far together with a warning, so a
    /// partial report can still be produced.
    pub fn read_jsonl_lenient(path: &Path) -> Result<(Trace, Option<String>)> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        let mut lines = std::io::BufReader::new(file).lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Parse { path: path.to_path_buf(), line: 1, message: "empty trace file".into() })?
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        let header: TraceHeader = serde_json::from_str(&header_line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("bad trace header: {e}"),
        })?;
        if header.schema != TRACE_SCHEMA {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("unexpected schema `{}`", header.schema),
            });
        }
        let mut records = Vec::new();
        let mut warning = None;
        for (idx, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<TraceRecord>(&line) {
                Ok(record) => records.push(record),
                Err(e) => {
                    warning = Some(format!(
                        "{}:{}: truncated or malformed trace record ({e}); keeping the {} records before it",
                        path.display(),
                        idx + 2,
                        records.len()
                    ));
                    break;
                }
            }
        }
        Ok((Trace { header, records, diagnostics: ChainDiagnostics::default() }, warning))
    }
}

/// Posterior summary of one gene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneSummary {
    pub gene_id: String,
    pub p_null: f64,
    pub p_del: f64,
    pub p_ben: f64,
    /// Mean log fold change over iterations where the gene was non-null.
    pub cond_log_fc: Option<f64>,
    /// Mean log odds ratio over iterations where the gene was non-null.
    pub cond_gamma: Option<f64>,
    /// Mean log fold change over all retained iterations (zeros included).
    pub marginal_log_fc: f64,
    /// Mean log odds ratio over all retained iterations (zeros included).
    pub marginal_gamma: f64,
    pub dispersion_mean: Option<f64>,
    /// True when the gene was null in more than 99% of retained iterations;
    /// reported effects are then marked rather than trusted.
    pub mostly_null: bool,
}

impl GeneSummary {
    /// Conditional GWAS effect as an odds ratio.
    pub fn gwas_odds_ratio(&self) -> Option<f64> {
        self.cond_gamma.map(f64::exp)
    }

    /// Conditional RNA-seq effect as a fold change.
    pub fn rna_fold_change(&self) -> Option<f64> {
        self.cond_log_fc.map(f64::exp)
    }

    pub fn p_non_null(&self) -> f64 {
        1.0 - self.p_null
    }

    /// Label with the larger non-null occupancy.
    pub fn dominant_non_null_label(&self) -> GeneLabel {
        if self.p_ben > self.p_del {
            GeneLabel::Beneficial
        } else {
            GeneLabel::Deleterious
        }
    }
}

/// Posterior summary over all genes from the retained iterations of one or
/// more chains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub genes: Vec<GeneSummary>,
    pub retained_iterations: usize,
    pub modality: ModalitySet,
}

/// Occupancy proportions and conditional effect means over post-burn-in
/// iterations, pooled across the given chains.
pub fn summarize(traces: &[&Trace], burn_in: usize) -> Result<PosteriorSummary> {
    let first = traces.first().ok_or_else(|| Error::InvalidConfig("summarize needs at least one trace".into()))?;
    let gene_ids = &first.header.gene_ids;
    for t in traces {
        if &t.header.gene_ids != gene_ids {
            return Err(Error::InvalidData("traces disagree on gene ids".into()));
        }
        if !t.records.iter().any(|r| r.iter >= burn_in) {
            return Err(Error::InvalidData(format!(
                "chain {} has no records past burn-in {burn_in}",
                t.header.chain_id
            )));
        }
    }
    let j = gene_ids.len();
    let rna_active = first.header.modality.rna_active();
    let gwas_active = first.header.modality.gwas_active();

    let mut retained = 0usize;
    let mut tallies = vec![[0u64; 3]; j];
    let mut sum_log_fc = vec![0.0; j];
    let mut sum_gamma = vec![0.0; j];
    let mut cond_log_fc = vec![0.0; j];
    let mut cond_gamma = vec![0.0; j];
    let mut non_null_iters = vec![0u64; j];
    let mut sum_phi = vec![0.0; j];

    for trace in traces {
        for record in trace.retained(burn_in) {
            retained += 1;
            for (g, &label) in record.labels.iter().enumerate() {
                tallies[g][(label - 1) as usize] += 1;
                if label != 1 {
                    non_null_iters[g] += 1;
                }
            }
            for &(g, v) in &record.log_fc {
                sum_log_fc[g] += v;
                cond_log_fc[g] += v;
            }
            for &(g, v) in &record.gamma {
                sum_gamma[g] += v;
                cond_gamma[g] += v;
            }
            for (g, &phi) in record.phi.iter().enumerate() {
                sum_phi[g] += phi;
            }
        }
    }

    let genes = (0..j)
        .map(|g| {
            let n = retained as f64;
            let p_null = tallies[g][0] as f64 / n;
            let occupied = non_null_iters[g] > 0;
            GeneSummary {
                gene_id: gene_ids[g].clone(),
                p_null,
                p_del: tallies[g][1] as f64 / n,
                p_ben: tallies[g][2] as f64 / n,
                cond_log_fc: (occupied && rna_active).then(|| cond_log_fc[g] / non_null_iters[g] as f64),
                cond_gamma: (occupied && gwas_active).then(|| cond_gamma[g] / non_null_iters[g] as f64),
                marginal_log_fc: if rna_active { sum_log_fc[g] / n } else { 0.0 },
                marginal_gamma: if gwas_active { sum_gamma[g] / n } else { 0.0 },
                dispersion_mean: rna_active.then(|| sum_phi[g] / n),
                mostly_null: p_null > 0.99,
            }
        })
        .collect();

    Ok(PosteriorSummary { genes, retained_iterations: retained, modality: first.header.modality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::PriorConfig;

    fn toy_trace(labels_per_iter: Vec<Vec<u8>>, effects: Vec<Vec<(usize, f64)>>) -> Trace {
        let j = labels_per_iter[0].len();
        let hyper = HyperState::init(&PriorConfig::default());
        let records = labels_per_iter
            .into_iter()
            .zip(effects)
            .enumerate()
            .map(|(i, (labels, gamma))| TraceRecord {
                iter: i,
                labels,
                log_fc: vec![],
                gamma,
                phi: vec![0.5; j],
                hyper,
                lambda: [1.0 / 3.0; 3],
                log_post: 0.0,
            })
            .collect();
        Trace {
            header: TraceHeader {
                schema: TRACE_SCHEMA.into(),
                version: TRACE_SCHEMA_VERSION,
                config_hash: "test".into(),
                modality: ModalitySet::Joint,
                gene_ids: (0..j).map(|g| format!("G{g}")).collect(),
                n_iter: 4,
                burn_in: 0,
                thinning: 1,
                seed: 0,
                chain_id: 0,
            },
            records,
            diagnostics: ChainDiagnostics::default(),
        }
    }

    #[test]
    fn four_iteration_occupancy_counts() {
        // labels over 4 iterations: (1,2,2,3) for the single gene
        let trace = toy_trace(
            vec![vec![1], vec![2], vec![2], vec![3]],
            vec![vec![], vec![(0, 1.0)], vec![(0, 1.0)], vec![(0, -2.0)]],
        );
        let summary = summarize(&[&trace], 0).unwrap();
        let gene = &summary.genes[0];
        assert!((gene.p_null - 0.25).abs() < 1e-12);
        assert!((gene.p_del - 0.5).abs() < 1e-12);
        assert!((gene.p_ben - 0.25).abs() < 1e-12);
        assert!((gene.p_null + gene.p_del + gene.p_ben - 1.0).abs() < 1e-12);
        // conditional mean of gamma over the 3 non-null iterations
        assert!((gene.cond_gamma.unwrap() - 0.0).abs() < 1e-12);
        // odds ratio of a zero conditional mean is 1
        assert!((gene.gwas_odds_ratio().unwrap() - 1.0).abs() < 1e-12);
        // marginal includes the zero: (0 + 1 + 1 - 2)/4
        assert!((gene.marginal_gamma - 0.0).abs() < 1e-12);
    }

    #[test]
    fn always_null_gene_has_absent_conditionals() {
        let trace = toy_trace(vec![vec![1], vec![1]], vec![vec![], vec![]]);
        let summary = summarize(&[&trace], 0).unwrap();
        let gene = &summary.genes[0];
        assert_eq!(gene.p_null, 1.0);
        assert!(gene.cond_gamma.is_none());
        assert!(gene.cond_log_fc.is_none());
        assert!(gene.mostly_null);
        assert_eq!(gene.marginal_gamma, 0.0);
    }

    #[test]
    fn mixed_occupancy_marginal_is_scaled_conditional() {
        // non-null half the time with conditional mean 1.0 -> marginal 0.5
        let trace = toy_trace(
            vec![vec![2], vec![1], vec![2], vec![1]],
            vec![vec![(0, 1.0)], vec![], vec![(0, 1.0)], vec![]],
        );
        let summary = summarize(&[&trace], 0).unwrap();
        let gene = &summary.genes[0];
        assert!((gene.cond_gamma.unwrap() - 1.0).abs() < 1e-12);
        assert!((gene.marginal_gamma - 0.5).abs() < 1e-12);
    }

    #[test]
    fn burn_in_filters_records() {
        let trace = toy_trace(vec![vec![2], vec![1], vec![1], vec![1]], vec![vec![(0, 3.0)], vec![], vec![], vec![]]);
        let summary = summarize(&[&trace], 1).unwrap();
        assert_eq!(summary.retained_iterations, 3);
        assert_eq!(summary.genes[0].p_null, 1.0);
        assert!(summarize(&[&trace], 4).is_err());
    }

    #[test]
    fn jsonl_roundtrip() {
        let trace = toy_trace(vec![vec![1, 2], vec![3, 1]], vec![vec![(1, 0.4)], vec![(0, -0.2)]]);
        let mut buf = Vec::new();
        trace.write_jsonl(&mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.jsonl");
        std::fs::write(&path, &buf).unwrap();
        let back = Trace::read_jsonl(&path).unwrap();
        assert_eq!(back.records, trace.records);
        assert_eq!(back.header.gene_ids, trace.header.gene_ids);
    }
}
