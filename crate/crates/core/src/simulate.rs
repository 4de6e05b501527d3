//! Simulated GWAS + RNA-seq dataset pairs sharing one ground-truth label
//! vector, either from a fully synthetic negative-binomial baseline or by
//! binomial thinning of a real count matrix.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Beta as BetaDist, Binomial, Distribution, Gamma as GammaDist, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{GeneLabel, GwasDataset, LabelVector, RnaSeqDataset};
use crate::error::{Error, Result};

/// Baseline for the RNA-seq side of a replicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Baseline {
    /// Gene-level means and dispersions drawn log-normal; counts drawn NB.
    SyntheticNb,
    /// Binomial thinning of a user-supplied real count matrix.
    ThinCounts { path: String },
}

/// Simulation design: gene counts, sample sizes, effect magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_genes: usize,
    pub n_beneficial: usize,
    pub n_deleterious: usize,
    pub n_gwas: usize,
    pub n_rna: usize,
    /// Log-odds magnitudes cycled over the non-null genes; the group fixes the sign.
    pub gwas_effects: Vec<f64>,
    /// Log2 fold-change magnitudes cycled over the non-null genes.
    pub rna_log2_fc: Vec<f64>,
    /// Beta parameters of the per-gene minor allele frequency.
    pub maf_beta: (f64, f64),
    /// Standard deviation of the random GWAS intercept (0 pins it at zero).
    pub gwas_intercept_sd: f64,
    pub baseline: Baseline,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_genes: 250,
            n_beneficial: 5,
            n_deleterious: 5,
            n_gwas: 1000,
            n_rna: 100,
            gwas_effects: vec![0.5, 1.0],
            rna_log2_fc: vec![0.5, 1.0],
            maf_beta: (20.0, 35.0),
            gwas_intercept_sd: 1.0,
            baseline: Baseline::SyntheticNb,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_genes == 0 {
            return Err(Error::InvalidConfig("n_genes must be positive".into()));
        }
        if self.n_beneficial + self.n_deleterious > self.n_genes {
            return Err(Error::InvalidConfig(format!(
                "{} + {} non-null genes exceed n_genes = {}",
                self.n_beneficial, self.n_deleterious, self.n_genes
            )));
        }
        if self.gwas_effects.is_empty() || self.rna_log2_fc.is_empty() {
            return Err(Error::InvalidConfig("effect magnitude lists must be non-empty".into()));
        }
        if self.gwas_effects.iter().chain(&self.rna_log2_fc).any(|&e| !e.is_finite() || e <= 0.0) {
            return Err(Error::InvalidConfig("effect magnitudes must be positive".into()));
        }
        let (a, b) = self.maf_beta;
        if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= 0.0 {
            return Err(Error::InvalidConfig("maf_beta parameters must be positive".into()));
        }
        if !self.gwas_intercept_sd.is_finite() || self.gwas_intercept_sd < 0.0 {
            return Err(Error::InvalidConfig("gwas_intercept_sd must be non-negative".into()));
        }
        Ok(())
    }

    pub fn gene_ids(&self) -> Vec<String> {
        (0..self.n_genes).map(|g| format!("G{:04}", g)).collect()
    }
}

/// Ground truth for one replicate: shared labels plus the signed effects used
/// by each generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTruth {
    pub gene_ids: Vec<String>,
    pub labels: LabelVector,
    /// Log odds ratio per gene (0 for null genes).
    pub gwas_effect: Vec<f64>,
    /// Log2 fold change per gene (0 for null genes).
    pub rna_log2_fc: Vec<f64>,
}

impl SimTruth {
    pub fn n_non_null(&self) -> usize {
        self.labels.counts().non_null()
    }
}

/// Assign labels and signed effect sizes: non-null gene positions are drawn
/// without replacement; deleterious effects are positive, beneficial negative.
pub fn gen_truth<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> SimTruth {
    let mut positions: Vec<usize> = (0..config.n_genes).collect();
    positions.shuffle(rng);
    let mut labels = LabelVector::all_null(config.n_genes);
    let mut gwas_effect = vec![0.0; config.n_genes];
    let mut rna_log2_fc = vec![0.0; config.n_genes];
    for (rank, &gene) in positions.iter().take(config.n_deleterious + config.n_beneficial).enumerate() {
        let (label, sign) = if rank < config.n_deleterious {
            (GeneLabel::Deleterious, 1.0)
        } else {
            (GeneLabel::Beneficial, -1.0)
        };
        labels.set(gene, label);
        gwas_effect[gene] = sign * config.gwas_effects[rank % config.gwas_effects.len()];
        rna_log2_fc[gene] = sign * config.rna_log2_fc[rank % config.rna_log2_fc.len()];
    }
    SimTruth { gene_ids: config.gene_ids(), labels, gwas_effect, rna_log2_fc }
}

/// Simulate the GWAS side: per-gene MAF ~ Beta(maf_beta), carrier indicators
/// Bernoulli(MAF), disease status from a logistic model with a normally
/// distributed intercept and the true gene effects.
pub fn gen_gwas<R: Rng + ?Sized>(config: &SimConfig, truth: &SimTruth, rng: &mut R) -> GwasDataset {
    let (a, b) = config.maf_beta;
    let maf_dist = BetaDist::new(a, b).expect("validated Beta parameters");
    let mafs: Vec<f64> = (0..config.n_genes).map(|_| maf_dist.sample(rng)).collect();

    let n = config.n_gwas;
    let mut carrier = Array2::<u8>::zeros((n, config.n_genes));
    for g in 0..config.n_genes {
        let bern = Bernoulli::new(mafs[g]).expect("MAF in (0,1)");
        for i in 0..n {
            carrier[[i, g]] = bern.sample(rng) as u8;
        }
    }

    let z: f64 = StandardNormal.sample(rng);
    let intercept = config.gwas_intercept_sd * z;
    let mut outcome = Vec::with_capacity(n);
    for i in 0..n {
        let mut eta = intercept;
        for g in 0..config.n_genes {
            if carrier[[i, g]] == 1 {
                eta += truth.gwas_effect[g];
            }
        }
        let p = 1.0 / (1.0 + (-eta).exp());
        outcome.push((rng.gen::<f64>() < p) as u8);
    }

    // intercept column only; the fitted model estimates its coefficient
    let covariates = Array2::from_elem((n, 1), 1.0);
    let individual_ids = (0..n).map(|i| format!("i{:05}", i)).collect();
    GwasDataset::new(outcome, carrier, covariates, truth.gene_ids.clone(), individual_ids)
        .expect("generator dimensions are consistent")
}

const SYN_LOG_MEAN_LOCATION: f64 = 4.605170185988092; // ln 100
const SYN_LOG_MEAN_SCALE: f64 = 1.0;
const SYN_LOG_DISP_LOCATION: f64 = -1.2039728043259361; // ln 0.3
const SYN_LOG_DISP_SCALE: f64 = 0.5;
const SYN_OFFSET_SCALE: f64 = 0.2;

fn nb_draw<R: Rng + ?Sized>(mu: f64, phi: f64, rng: &mut R) -> u32 {
    let size = 1.0 / phi;
    let lambda: f64 = GammaDist::new(size, phi * mu).expect("positive NB parameters").sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u32
}

/// Fully synthetic RNA-seq replicate: log-normal gene means and dispersions,
/// NB counts, treatment-group means scaled by the true fold changes, offsets
/// drawn and recorded.
pub fn gen_rnaseq_synthetic<R: Rng + ?Sized>(
    config: &SimConfig,
    truth: &SimTruth,
    rng: &mut R,
) -> RnaSeqDataset {
    let n = config.n_rna;
    let j = config.n_genes;

    let mut treatment = vec![0u8; n];
    for t in treatment.iter_mut().take(n / 2) {
        *t = 1;
    }
    treatment.shuffle(rng);

    let std_normal = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };
    let log_means: Vec<f64> =
        (0..j).map(|_| SYN_LOG_MEAN_LOCATION + SYN_LOG_MEAN_SCALE * std_normal(rng)).collect();
    let phis: Vec<f64> =
        (0..j).map(|_| (SYN_LOG_DISP_LOCATION + SYN_LOG_DISP_SCALE * std_normal(rng)).exp()).collect();
    let log_library_size: Vec<f64> = (0..n).map(|_| SYN_OFFSET_SCALE * std_normal(rng)).collect();
    let log_gene_length: Vec<f64> = (0..j).map(|_| SYN_OFFSET_SCALE * std_normal(rng)).collect();

    let ln2 = std::f64::consts::LN_2;
    let mut counts = Array2::<u32>::zeros((n, j));
    for g in 0..j {
        let log_fc = ln2 * truth.rna_log2_fc[g];
        for i in 0..n {
            let eta = log_means[g]
                + log_fc * treatment[i] as f64
                + log_library_size[i]
                + log_gene_length[g];
            counts[[i, g]] = nb_draw(eta.exp(), phis[g], rng);
        }
    }

    let sample_ids = (0..n).map(|i| format!("s{:04}", i)).collect();
    RnaSeqDataset::new(
        counts,
        treatment,
        log_library_size,
        log_gene_length,
        Array2::zeros((n, 0)),
        truth.gene_ids.clone(),
        sample_ids,
    )
    .expect("generator dimensions are consistent")
}

/// Inject signal into a real count matrix by binomial thinning: samples are
/// split into two groups at random, and for a gene with target log2 fold
/// change b the disadvantaged group's counts are replaced by
/// Binomial(y, 2^−|b|) — the control group when b > 0, the treatment group
/// when b < 0 — so the realized treatment/control mean ratio is 2^b in
/// expectation. Null genes are untouched.
pub fn gen_rnaseq_thinned<R: Rng + ?Sized>(
    baseline_counts: &Array2<u32>,
    baseline_sample_ids: &[String],
    config: &SimConfig,
    truth: &SimTruth,
    rng: &mut R,
) -> Result<RnaSeqDataset> {
    let (n, j_baseline) = baseline_counts.dim();
    if j_baseline < config.n_genes {
        return Err(Error::InvalidData(format!(
            "baseline matrix has {j_baseline} genes but the design needs {}",
            config.n_genes
        )));
    }
    if n < 2 {
        return Err(Error::InvalidData("baseline matrix needs at least two samples to split".into()));
    }
    for &b in &truth.rna_log2_fc {
        let p = 2f64.powf(-b.abs());
        if b != 0.0 && p < 1e-6 {
            return Err(Error::InvalidConfig(format!(
                "target log2 fold change {b} gives thinning probability {p} below 1e-6"
            )));
        }
    }

    // random subset of baseline genes, in baseline order
    let mut gene_pool: Vec<usize> = (0..j_baseline).collect();
    gene_pool.shuffle(rng);
    let mut pick: Vec<usize> = gene_pool.into_iter().take(config.n_genes).collect();
    pick.sort_unstable();

    let mut treatment = vec![0u8; n];
    for t in treatment.iter_mut().take(n / 2) {
        *t = 1;
    }
    treatment.shuffle(rng);

    let mut counts = Array2::<u32>::zeros((n, config.n_genes));
    for (g_out, &g_in) in pick.iter().enumerate() {
        let b = truth.rna_log2_fc[g_out];
        let p = 2f64.powf(-b.abs());
        for i in 0..n {
            let y = baseline_counts[[i, g_in]];
            let thin_this_group = b != 0.0
                && ((b > 0.0 && treatment[i] == 0) || (b < 0.0 && treatment[i] == 1));
            counts[[i, g_out]] = if thin_this_group && y > 0 {
                Binomial::new(y as u64, p).expect("probability in (0,1]").sample(rng) as u32
            } else {
                y
            };
        }
    }

    RnaSeqDataset::new(
        counts,
        treatment,
        vec![0.0; n],
        vec![0.0; config.n_genes],
        Array2::zeros((n, 0)),
        truth.gene_ids.clone(),
        baseline_sample_ids.to_vec(),
    )
}

/// One simulated replicate.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub truth: SimTruth,
    pub gwas: GwasDataset,
    pub rna: RnaSeqDataset,
}

/// Deterministic RNG for one replicate: the master seed selects the key, the
/// replicate index selects the stream.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Generate one replicate in memory. `thin_baseline` supplies the real count
/// matrix (samples × genes) when the configured baseline is `ThinCounts`.
pub fn gen_replicate(
    config: &SimConfig,
    thin_baseline: Option<(&Array2<u32>, &[String])>,
    replicate: u64,
) -> Result<Replicate> {
    config.validate()?;
    let mut rng = replicate_rng(config.seed, replicate);
    let truth = gen_truth(config, &mut rng);
    let gwas = gen_gwas(config, &truth, &mut rng);
    let rna = match (&config.baseline, thin_baseline) {
        (Baseline::SyntheticNb, _) => gen_rnaseq_synthetic(config, &truth, &mut rng),
        (Baseline::ThinCounts { .. }, Some((counts, sample_ids))) => {
            gen_rnaseq_thinned(counts, sample_ids, config, &truth, &mut rng)?
        }
        (Baseline::ThinCounts { path }, None) => {
            return Err(Error::InvalidConfig(format!(
                "baseline thin-counts requires the matrix from `{path}` to be loaded"
            )))
        }
    };
    Ok(Replicate { truth, gwas, rna })
}
