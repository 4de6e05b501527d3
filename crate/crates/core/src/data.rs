//! Domain types shared by every sub-model: gene labels, datasets for the two
//! data modalities, and the gene alignment between them.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Latent group assignment of a gene. Serialized as 1/2/3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum GeneLabel {
    Null,
    Deleterious,
    Beneficial,
}

impl GeneLabel {
    pub const ALL: [GeneLabel; 3] = [GeneLabel::Null, GeneLabel::Deleterious, GeneLabel::Beneficial];

    /// Group index used on disk and in the trace: Null=1, Deleterious=2, Beneficial=3.
    pub fn index(self) -> u8 {
        match self {
            GeneLabel::Null => 1,
            GeneLabel::Deleterious => 2,
            GeneLabel::Beneficial => 3,
        }
    }

    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            1 => Ok(GeneLabel::Null),
            2 => Ok(GeneLabel::Deleterious),
            3 => Ok(GeneLabel::Beneficial),
            other => Err(Error::InvalidData(format!("gene label index {other} not in {{1,2,3}}"))),
        }
    }

    pub fn is_null(self) -> bool {
        self == GeneLabel::Null
    }

    /// Sign of the effect support for this label: +1 deleterious, -1 beneficial, 0 null.
    pub fn effect_sign(self) -> f64 {
        match self {
            GeneLabel::Null => 0.0,
            GeneLabel::Deleterious => 1.0,
            GeneLabel::Beneficial => -1.0,
        }
    }
}

impl From<GeneLabel> for u8 {
    fn from(label: GeneLabel) -> u8 {
        label.index()
    }
}

impl TryFrom<u8> for GeneLabel {
    type Error = Error;
    fn try_from(value: u8) -> Result<Self> {
        GeneLabel::from_index(value)
    }
}

/// Per-group gene counts (k1, k2, k3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub null: usize,
    pub deleterious: usize,
    pub beneficial: usize,
}

impl GroupCounts {
    pub fn total(&self) -> usize {
        self.null + self.deleterious + self.beneficial
    }

    pub fn non_null(&self) -> usize {
        self.deleterious + self.beneficial
    }

    pub fn of(&self, label: GeneLabel) -> usize {
        match label {
            GeneLabel::Null => self.null,
            GeneLabel::Deleterious => self.deleterious,
            GeneLabel::Beneficial => self.beneficial,
        }
    }

    fn of_mut(&mut self, label: GeneLabel) -> &mut usize {
        match label {
            GeneLabel::Null => &mut self.null,
            GeneLabel::Deleterious => &mut self.deleterious,
            GeneLabel::Beneficial => &mut self.beneficial,
        }
    }
}

/// Label assignment for all genes, with group counts kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<GeneLabel>,
    counts: GroupCounts,
}

impl LabelVector {
    pub fn all_null(n_genes: usize) -> Self {
        LabelVector {
            labels: vec![GeneLabel::Null; n_genes],
            counts: GroupCounts { null: n_genes, deleterious: 0, beneficial: 0 },
        }
    }

    pub fn from_labels(labels: Vec<GeneLabel>) -> Self {
        let counts = Self::count(&labels);
        LabelVector { labels, counts }
    }

    fn count(labels: &[GeneLabel]) -> GroupCounts {
        let mut counts = GroupCounts { null: 0, deleterious: 0, beneficial: 0 };
        for &label in labels {
            *counts.of_mut(label) += 1;
        }
        counts
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, gene: usize) -> GeneLabel {
        self.labels[gene]
    }

    pub fn set(&mut self, gene: usize, label: GeneLabel) {
        let old = self.labels[gene];
        if old != label {
            *self.counts.of_mut(old) -= 1;
            *self.counts.of_mut(label) += 1;
            self.labels[gene] = label;
        }
    }

    pub fn labels(&self) -> &[GeneLabel] {
        &self.labels
    }

    pub fn counts(&self) -> GroupCounts {
        self.counts
    }

    /// Recompute counts from the labels; must equal the stored counts.
    pub fn counts_consistent(&self) -> bool {
        Self::count(&self.labels) == self.counts
    }
}

/// Group probability vector λ with its stick-breaking representation
/// v1 = λ1 and v2 = λ2 / (λ2 + λ3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupProbabilities {
    lambda: [f64; 3],
}

impl GroupProbabilities {
    pub const SIMPLEX_TOL: f64 = 1e-12;

    pub fn new(lambda: [f64; 3]) -> Result<Self> {
        for (i, &l) in lambda.iter().enumerate() {
            if !(0.0..=1.0).contains(&l) || !l.is_finite() {
                return Err(Error::InvalidConfig(format!("lambda[{i}] = {l} outside [0,1]")));
            }
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > Self::SIMPLEX_TOL {
            return Err(Error::InvalidConfig(format!("lambda sums to {sum}, expected 1")));
        }
        Ok(GroupProbabilities { lambda })
    }

    pub fn uniform() -> Self {
        GroupProbabilities { lambda: [1.0 / 3.0; 3] }
    }

    /// Build λ from stick fractions: λ = (v1, (1−v1)·v2, (1−v1)·(1−v2)).
    pub fn from_sticks(v1: f64, v2: f64) -> Result<Self> {
        for (name, v) in [("v1", v1), ("v2", v2)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("stick fraction {name} = {v} outside [0,1]")));
            }
        }
        Ok(GroupProbabilities { lambda: [v1, (1.0 - v1) * v2, (1.0 - v1) * (1.0 - v2)] })
    }

    pub fn lambda(&self) -> [f64; 3] {
        self.lambda
    }

    /// Stick fractions (v1, v2). When λ2 + λ3 = 0 the second stick is
    /// unidentified and reported as 1/2.
    pub fn sticks(&self) -> (f64, f64) {
        let rest = self.lambda[1] + self.lambda[2];
        let v2 = if rest > 0.0 { self.lambda[1] / rest } else { 0.5 };
        (self.lambda[0], v2)
    }

    pub fn of(&self, label: GeneLabel) -> f64 {
        match label {
            GeneLabel::Null => self.lambda[0],
            GeneLabel::Deleterious => self.lambda[1],
            GeneLabel::Beneficial => self.lambda[2],
        }
    }
}

/// RNA-seq count data. Counts are sample-major: `counts[[i, j]]` is the count
/// for sample `i`, gene `j`.
#[derive(Debug, Clone)]
pub struct RnaSeqDataset {
    pub counts: Array2<u32>,
    /// Treatment/disease indicator per sample (0 control, 1 treatment).
    pub treatment: Vec<u8>,
    /// Log library size offset per sample.
    pub log_library_size: Vec<f64>,
    /// Log gene length offset per gene.
    pub log_gene_length: Vec<f64>,
    /// Sample-level covariates, one row per sample (may have zero columns).
    pub covariates: Array2<f64>,
    pub gene_ids: Vec<String>,
    pub sample_ids: Vec<String>,
}

impl RnaSeqDataset {
    pub fn new(
        counts: Array2<u32>,
        treatment: Vec<u8>,
        log_library_size: Vec<f64>,
        log_gene_length: Vec<f64>,
        covariates: Array2<f64>,
        gene_ids: Vec<String>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        let (n, j) = counts.dim();
        if treatment.len() != n
            || log_library_size.len() != n
            || sample_ids.len() != n
            || covariates.nrows() != n
        {
            return Err(Error::InvalidData(format!(
                "RNA-seq sample dimensions disagree: counts rows {n}, treatment {}, offsets {}, covariate rows {}, ids {}",
                treatment.len(),
                log_library_size.len(),
                covariates.nrows(),
                sample_ids.len()
            )));
        }
        if log_gene_length.len() != j || gene_ids.len() != j {
            return Err(Error::InvalidData(format!(
                "RNA-seq gene dimensions disagree: counts cols {j}, gene offsets {}, ids {}",
                log_gene_length.len(),
                gene_ids.len()
            )));
        }
        Ok(RnaSeqDataset {
            counts,
            treatment,
            log_library_size,
            log_gene_length,
            covariates,
            gene_ids,
            sample_ids,
        })
    }

    /// Zero-sample dataset over the given genes; contributes no likelihood.
    pub fn empty(gene_ids: Vec<String>) -> Self {
        let j = gene_ids.len();
        RnaSeqDataset {
            counts: Array2::zeros((0, j)),
            treatment: vec![],
            log_library_size: vec![],
            log_gene_length: vec![0.0; j],
            covariates: Array2::zeros((0, 0)),
            gene_ids,
            sample_ids: vec![],
        }
    }

    pub fn n_samples(&self) -> usize {
        self.counts.nrows()
    }

    pub fn n_genes(&self) -> usize {
        self.counts.ncols()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.ncols()
    }
}

/// GWAS case/control data on gene-level binary carrier indicators.
#[derive(Debug, Clone)]
pub struct GwasDataset {
    /// Disease status per individual (0/1).
    pub outcome: Vec<u8>,
    /// Carrier indicator per individual per gene (0/1).
    pub carrier: Array2<u8>,
    /// Individual-level covariates, one row per individual.
    pub covariates: Array2<f64>,
    pub gene_ids: Vec<String>,
    pub individual_ids: Vec<String>,
}

impl GwasDataset {
    pub fn new(
        outcome: Vec<u8>,
        carrier: Array2<u8>,
        covariates: Array2<f64>,
        gene_ids: Vec<String>,
        individual_ids: Vec<String>,
    ) -> Result<Self> {
        let (n, j) = carrier.dim();
        if outcome.len() != n || covariates.nrows() != n || individual_ids.len() != n {
            return Err(Error::InvalidData(format!(
                "GWAS individual dimensions disagree: carrier rows {n}, outcome {}, covariate rows {}, ids {}",
                outcome.len(),
                covariates.nrows(),
                individual_ids.len()
            )));
        }
        if gene_ids.len() != j {
            return Err(Error::InvalidData(format!(
                "GWAS gene dimensions disagree: carrier cols {j}, ids {}",
                gene_ids.len()
            )));
        }
        Ok(GwasDataset { outcome, carrier, covariates, gene_ids, individual_ids })
    }

    /// Zero-individual dataset over the given genes.
    pub fn empty(gene_ids: Vec<String>) -> Self {
        let j = gene_ids.len();
        GwasDataset {
            outcome: vec![],
            carrier: Array2::zeros((0, j)),
            covariates: Array2::zeros((0, 0)),
            gene_ids,
            individual_ids: vec![],
        }
    }

    pub fn n_individuals(&self) -> usize {
        self.carrier.nrows()
    }

    pub fn n_genes(&self) -> usize {
        self.carrier.ncols()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.ncols()
    }
}

/// Report of domain violations found in a dataset. Empty means valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check value-domain invariants of an RNA-seq dataset.
pub fn validate_rnaseq(dataset: &RnaSeqDataset) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, &t) in dataset.treatment.iter().enumerate() {
        if t > 1 {
            report.violations.push(format!("treatment indicator {t} at sample {i} not in {{0,1}}"));
        }
    }
    for (i, &l) in dataset.log_library_size.iter().enumerate() {
        if !l.is_finite() {
            report.violations.push(format!("non-finite library-size offset at sample {i}"));
        }
    }
    for (j, &m) in dataset.log_gene_length.iter().enumerate() {
        if !m.is_finite() {
            report.violations.push(format!("non-finite gene-length offset at gene {j}"));
        }
    }
    for ((i, l), &x) in dataset.covariates.indexed_iter() {
        if !x.is_finite() {
            report.violations.push(format!("non-finite covariate at sample row {i}, column {l}"));
        }
    }
    report
}

/// Check value-domain invariants of a GWAS dataset.
pub fn validate_gwas(dataset: &GwasDataset) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, &y) in dataset.outcome.iter().enumerate() {
        if y > 1 {
            report.violations.push(format!("outcome {y} at individual {i} not in {{0,1}}"));
        }
    }
    for ((i, j), &z) in dataset.carrier.indexed_iter() {
        if z > 1 {
            report.violations.push(format!("carrier value {z} at individual {i}, gene {j} not in {{0,1}}"));
        }
    }
    for ((i, l), &x) in dataset.covariates.indexed_iter() {
        if !x.is_finite() {
            report.violations.push(format!("non-finite covariate at individual row {i}, column {l}"));
        }
    }
    report
}

/// Alignment of the two modalities' gene lists onto their union,
/// in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneAlignment {
    pub union_ids: Vec<String>,
    /// Union position -> column in the RNA-seq dataset, when present.
    pub rna_index: Vec<Option<usize>>,
    /// Union position -> column in the GWAS dataset, when present.
    pub gwas_index: Vec<Option<usize>>,
}

impl GeneAlignment {
    pub fn n_genes(&self) -> usize {
        self.union_ids.len()
    }

    pub fn rna_mask(&self) -> Vec<bool> {
        self.rna_index.iter().map(Option::is_some).collect()
    }

    pub fn gwas_mask(&self) -> Vec<bool> {
        self.gwas_index.iter().map(Option::is_some).collect()
    }
}

fn check_unique(ids: &[String], modality: &str) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateGeneId { id: id.clone(), modality: modality.to_string() });
        }
    }
    Ok(())
}

/// Union the two gene lists in first-seen order (RNA-seq list first) and
/// record each modality's positions. Matching is exact on the id strings.
pub fn align_genes(rna_ids: &[String], gwas_ids: &[String]) -> Result<GeneAlignment> {
    check_unique(rna_ids, "RNA-seq")?;
    check_unique(gwas_ids, "GWAS")?;

    let mut union_ids: Vec<String> = Vec::with_capacity(rna_ids.len() + gwas_ids.len());
    let mut seen: std::collections::HashSet<&str> = std::collections::HashSet::new();
    for id in rna_ids.iter().chain(gwas_ids.iter()) {
        if seen.insert(id.as_str()) {
            union_ids.push(id.clone());
        }
    }

    let mut pos: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for (u, id) in union_ids.iter().enumerate() {
        pos.insert(id.as_str(), u);
    }

    let mut rna_index = vec![None; union_ids.len()];
    for (j, id) in rna_ids.iter().enumerate() {
        rna_index[pos[id.as_str()]] = Some(j);
    }
    let mut gwas_index = vec![None; union_ids.len()];
    for (j, id) in gwas_ids.iter().enumerate() {
        gwas_index[pos[id.as_str()]] = Some(j);
    }
    Ok(GeneAlignment { union_ids, rna_index, gwas_index })
}

/// Result of collapsing SNV genotypes to gene-level carrier indicators.
#[derive(Debug, Clone)]
pub struct CollapsedCarriers {
    /// Individual × gene carrier matrix (dominant coding).
    pub carrier: Array2<u8>,
    pub gene_ids: Vec<String>,
    /// Variants present in the genotype matrix that had no gene mapping.
    pub dropped_variants: usize,
}

/// Collapse a 0/1/2 genotype matrix to gene-level 0/1 carrier indicators
/// under a dominant model: an individual carries a gene iff it has at least
/// one minor allele among the variants mapped to that gene. A variant may
/// map to several genes; unmapped variants are dropped and counted.
pub fn collapse_snvs(
    variant_gene_map: &[(String, String)],
    variant_ids: &[String],
    genotypes: &Array2<u8>,
) -> Result<CollapsedCarriers> {
    if genotypes.ncols() != variant_ids.len() {
        return Err(Error::InvalidData(format!(
            "genotype matrix has {} columns but {} variant ids",
            genotypes.ncols(),
            variant_ids.len()
        )));
    }
    for ((i, v), &g) in genotypes.indexed_iter() {
        if g > 2 {
            return Err(Error::BadGenotype { value: g, row: i, col: v });
        }
    }

    // gene universe in first-seen map order
    let mut gene_ids: Vec<String> = Vec::new();
    let mut gene_pos: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for (_, gene) in variant_gene_map {
        if !gene_pos.contains_key(gene.as_str()) {
            gene_pos.insert(gene.as_str(), gene_ids.len());
            gene_ids.push(gene.clone());
        }
    }

    let mut genes_of_variant: std::collections::HashMap<&str, Vec<usize>> =
        std::collections::HashMap::new();
    for (variant, gene) in variant_gene_map {
        genes_of_variant.entry(variant.as_str()).or_default().push(gene_pos[gene.as_str()]);
    }

    let n = genotypes.nrows();
    let mut carrier = Array2::<u8>::zeros((n, gene_ids.len()));
    let mut dropped = 0usize;
    for (v, variant) in variant_ids.iter().enumerate() {
        let Some(genes) = genes_of_variant.get(variant.as_str()) else {
            dropped += 1;
            continue;
        };
        for i in 0..n {
            if genotypes[[i, v]] >= 1 {
                for &g in genes {
                    carrier[[i, g]] = 1;
                }
            }
        }
    }
    Ok(CollapsedCarriers { carrier, gene_ids, dropped_variants: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn ids(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn label_roundtrip_and_indices() {
        for label in GeneLabel::ALL {
            assert_eq!(GeneLabel::from_index(label.index()).unwrap(), label);
        }
        assert!(GeneLabel::from_index(0).is_err());
        assert!(GeneLabel::from_index(4).is_err());
    }

    #[test]
    fn label_vector_counts_stay_consistent() {
        let mut lv = LabelVector::all_null(5);
        lv.set(0, GeneLabel::Deleterious);
        lv.set(3, GeneLabel::Beneficial);
        lv.set(0, GeneLabel::Beneficial);
        let counts = lv.counts();
        assert_eq!((counts.null, counts.deleterious, counts.beneficial), (3, 0, 2));
        assert_eq!(counts.total(), 5);
        assert!(lv.counts_consistent());
    }

    #[test]
    fn group_probabilities_stick_roundtrip() {
        let gp = GroupProbabilities::new([0.5, 0.3, 0.2]).unwrap();
        let (v1, v2) = gp.sticks();
        let back = GroupProbabilities::from_sticks(v1, v2).unwrap();
        for i in 0..3 {
            assert!((gp.lambda()[i] - back.lambda()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn group_probabilities_rejects_off_simplex() {
        assert!(GroupProbabilities::new([0.5, 0.3, 0.3]).is_err());
        assert!(GroupProbabilities::new([-0.1, 0.6, 0.5]).is_err());
    }

    #[test]
    fn validate_rnaseq_accepts_all_zero_counts() {
        let ds = RnaSeqDataset::new(
            Array2::zeros((2, 2)),
            vec![0, 1],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            Array2::zeros((2, 0)),
            ids(&["A", "B"]),
            ids(&["s1", "s2"]),
        )
        .unwrap();
        assert!(validate_rnaseq(&ds).is_valid());
    }

    #[test]
    fn validate_gwas_flags_carrier_two() {
        let ds = GwasDataset::new(
            vec![0, 1],
            array![[0, 2], [1, 0]],
            Array2::zeros((2, 0)),
            ids(&["A", "B"]),
            ids(&["i1", "i2"]),
        )
        .unwrap();
        let report = validate_gwas(&ds);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("carrier value 2"));
    }

    #[test]
    fn validate_rnaseq_names_nan_covariate_row() {
        let mut cov = Array2::zeros((4, 1));
        cov[[3, 0]] = f64::NAN;
        let ds = RnaSeqDataset::new(
            Array2::zeros((4, 1)),
            vec![0, 0, 1, 1],
            vec![0.0; 4],
            vec![0.0],
            cov,
            ids(&["A"]),
            ids(&["s1", "s2", "s3", "s4"]),
        )
        .unwrap();
        let report = validate_rnaseq(&ds);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("row 3"));
    }

    #[test]
    fn align_basic_union_and_masks() {
        let alignment = align_genes(&ids(&["A", "B"]), &ids(&["B", "C"])).unwrap();
        assert_eq!(alignment.union_ids, ids(&["A", "B", "C"]));
        assert_eq!(alignment.rna_mask(), vec![true, true, false]);
        assert_eq!(alignment.gwas_mask(), vec![false, true, true]);
        assert_eq!(alignment.rna_index, vec![Some(0), Some(1), None]);
        assert_eq!(alignment.gwas_index, vec![None, Some(0), Some(1)]);
    }

    #[test]
    fn align_identical_lists() {
        let alignment = align_genes(&ids(&["A", "B"]), &ids(&["A", "B"])).unwrap();
        assert_eq!(alignment.union_ids, ids(&["A", "B"]));
        assert!(alignment.rna_mask().iter().all(|&m| m));
        assert!(alignment.gwas_mask().iter().all(|&m| m));
    }

    #[test]
    fn align_disjoint_lists() {
        let alignment = align_genes(&ids(&["A", "B", "C"]), &ids(&["D", "E"])).unwrap();
        assert_eq!(alignment.n_genes(), 5);
    }

    #[test]
    fn align_rejects_duplicates() {
        assert!(align_genes(&ids(&["A", "A"]), &ids(&["B"])).is_err());
    }

    #[test]
    fn collapse_dominant_coding() {
        // one variant mapped to gene A, genotype 2 -> carrier 1
        let map = vec![("v1".to_string(), "A".to_string())];
        let out = collapse_snvs(&map, &ids(&["v1"]), &array![[2u8]]).unwrap();
        assert_eq!(out.carrier, array![[1u8]]);

        // two variants on gene A, both genotype 0 -> carrier 0
        let map = vec![("v1".to_string(), "A".to_string()), ("v2".to_string(), "A".to_string())];
        let out = collapse_snvs(&map, &ids(&["v1", "v2"]), &array![[0u8, 0u8]]).unwrap();
        assert_eq!(out.carrier, array![[0u8]]);
    }

    #[test]
    fn collapse_shared_variant_hits_both_genes() {
        // three variants; v2 maps to both A and B, the others to one gene each.
        // An individual carrying only v2 hits both A and B but not C.
        let map = vec![
            ("v1".to_string(), "A".to_string()),
            ("v2".to_string(), "A".to_string()),
            ("v2".to_string(), "B".to_string()),
            ("v3".to_string(), "C".to_string()),
        ];
        let out = collapse_snvs(&map, &ids(&["v1", "v2", "v3"]), &array![[0u8, 1u8, 0u8]]).unwrap();
        assert_eq!(out.gene_ids, ids(&["A", "B", "C"]));
        assert_eq!(out.carrier, array![[1u8, 1u8, 0u8]]);
    }

    #[test]
    fn collapse_rejects_bad_genotype() {
        let map = vec![("v1".to_string(), "A".to_string())];
        assert!(collapse_snvs(&map, &ids(&["v1"]), &array![[3u8]]).is_err());
    }

    #[test]
    fn collapse_drops_unmapped_variants() {
        let map = vec![("v1".to_string(), "A".to_string())];
        let out = collapse_snvs(&map, &ids(&["v1", "orphan"]), &array![[1u8, 1u8]]).unwrap();
        assert_eq!(out.dropped_variants, 1);
        assert_eq!(out.gene_ids, ids(&["A"]));
    }
}
