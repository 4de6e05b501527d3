//! Exact log-likelihoods for the two sub-models: negative-binomial RNA-seq
//! counts and logistic GWAS outcomes, with incremental per-gene deltas used by
//! the reversible-jump moves.

use statrs::function::gamma::ln_gamma;

use crate::data::{GwasDataset, RnaSeqDataset};

/// Linear predictors are clamped here before exponentiation; silent overflow
/// would corrupt chains.
pub const LINPRED_CLAMP: f64 = 700.0;

/// Numerically stable log(1 + exp(x)).
pub fn log1p_exp(x: f64) -> f64 {
    if x > 33.0 {
        x
    } else if x < -37.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Negative-binomial log pmf with mean/dispersion parametrization:
/// E = μ, Var = μ(1 + μφ), size = 1/φ.
pub fn nb_log_pmf(y: u64, mu: f64, phi: f64) -> f64 {
    debug_assert!(mu > 0.0 && phi > 0.0);
    let size = 1.0 / phi;
    let y_f = y as f64;
    ln_gamma(y_f + size) - ln_gamma(size) - ln_gamma(y_f + 1.0)
        + y_f * (mu.ln() - (size + mu).ln())
        - size * (mu / size).ln_1p()
}

/// Per-gene RNA-seq parameters plus shared covariate coefficients, indexed by
/// the dataset's gene order.
#[derive(Debug, Clone, PartialEq)]
pub struct RnaSeqParams {
    pub alpha: Vec<f64>,
    /// Log fold change; exactly 0 for null genes.
    pub log_fc: Vec<f64>,
    pub phi: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Per-gene GWAS log-odds effects plus covariate coefficients, indexed by the
/// dataset's gene order.
#[derive(Debug, Clone, PartialEq)]
pub struct GwasParams {
    /// Log odds ratio; exactly 0 for null genes.
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Mean count exp(α + log(fc)·k + L + M + xᵀβ), with the linear predictor
/// clamped to ±700 so the mean neither overflows nor underflows to zero.
/// Returns the mean and whether clamping fired.
pub fn rnaseq_mean(
    alpha: f64,
    log_fc: f64,
    treatment: u8,
    log_library_size: f64,
    log_gene_length: f64,
    covariate_dot: f64,
) -> (f64, bool) {
    let eta = alpha + log_fc * treatment as f64 + log_library_size + log_gene_length + covariate_dot;
    if eta.abs() > LINPRED_CLAMP {
        (eta.clamp(-LINPRED_CLAMP, LINPRED_CLAMP).exp(), true)
    } else {
        (eta.exp(), false)
    }
}

/// xᵢᵀβ for every sample.
pub fn covariate_dots(covariates: &ndarray::Array2<f64>, beta: &[f64]) -> Vec<f64> {
    debug_assert_eq!(covariates.ncols(), beta.len());
    covariates
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(beta).map(|(x, b)| x * b).sum())
        .collect()
}

/// RNA-seq log-likelihood with a per-gene breakdown.
#[derive(Debug, Clone)]
pub struct RnaSeqLogLik {
    pub total: f64,
    /// Partial log-likelihood per gene; sums to `total`.
    pub per_gene: Vec<f64>,
    /// Number of linear-predictor clamps that fired.
    pub clamp_events: u64,
}

/// Log-likelihood contribution of a single gene column.
pub fn rnaseq_gene_loglik(
    dataset: &RnaSeqDataset,
    gene: usize,
    alpha: f64,
    log_fc: f64,
    phi: f64,
    covariate_dot: &[f64],
) -> (f64, u64) {
    let mut value = 0.0;
    let mut clamps = 0u64;
    let m = dataset.log_gene_length[gene];
    let column = dataset.counts.column(gene);
    for i in 0..dataset.n_samples() {
        let (mu, clamped) = rnaseq_mean(
            alpha,
            log_fc,
            dataset.treatment[i],
            dataset.log_library_size[i],
            m,
            covariate_dot[i],
        );
        clamps += clamped as u64;
        value += nb_log_pmf(column[i] as u64, mu, phi);
    }
    (value, clamps)
}

/// Full RNA-seq log-likelihood: Σ over samples and genes of the NB log pmf at
/// the model mean.
pub fn rnaseq_loglik(dataset: &RnaSeqDataset, params: &RnaSeqParams) -> RnaSeqLogLik {
    let dots = covariate_dots(&dataset.covariates, &params.beta);
    let mut per_gene = Vec::with_capacity(dataset.n_genes());
    let mut total = 0.0;
    let mut clamp_events = 0u64;
    for j in 0..dataset.n_genes() {
        let (value, clamps) =
            rnaseq_gene_loglik(dataset, j, params.alpha[j], params.log_fc[j], params.phi[j], &dots);
        total += value;
        clamp_events += clamps;
        per_gene.push(value);
    }
    RnaSeqLogLik { total, per_gene, clamp_events }
}

/// Linear predictor η_i = z_iᵀγ + x_iᵀβ for every individual.
pub fn logistic_eta(dataset: &GwasDataset, params: &GwasParams) -> Vec<f64> {
    let mut eta = covariate_dots(&dataset.covariates, &params.beta);
    for (j, &gamma_j) in params.gamma.iter().enumerate() {
        if gamma_j != 0.0 {
            let col = dataset.carrier.column(j);
            for i in 0..dataset.n_individuals() {
                if col[i] == 1 {
                    eta[i] += gamma_j;
                }
            }
        }
    }
    eta
}

/// Bernoulli log-likelihood Σ_i [y_i·η_i − log(1 + exp(η_i))].
pub fn logistic_loglik_from_eta(outcome: &[u8], eta: &[f64]) -> f64 {
    debug_assert_eq!(outcome.len(), eta.len());
    outcome
        .iter()
        .zip(eta)
        .map(|(&y, &e)| y as f64 * e - log1p_exp(e))
        .sum()
}

/// GWAS logistic log-likelihood; also returns the per-individual linear
/// predictors for delta updates.
pub fn logistic_loglik(dataset: &GwasDataset, params: &GwasParams) -> (f64, Vec<f64>) {
    let eta = logistic_eta(dataset, params);
    (logistic_loglik_from_eta(&dataset.outcome, &eta), eta)
}

/// Indices of carrier individuals per gene, for O(carriers) gene deltas.
pub fn carrier_lists(dataset: &GwasDataset) -> Vec<Vec<u32>> {
    (0..dataset.n_genes())
        .map(|j| {
            let col = dataset.carrier.column(j);
            (0..dataset.n_individuals()).filter(|&i| col[i] == 1).map(|i| i as u32).collect()
        })
        .collect()
}

/// Log-likelihood change from shifting gene j's effect by `d_gamma`, touching
/// only that gene's carriers. Does not modify `eta`.
pub fn logistic_gene_delta(outcome: &[u8], eta: &[f64], carriers: &[u32], d_gamma: f64) -> f64 {
    if d_gamma == 0.0 {
        return 0.0;
    }
    let mut delta = 0.0;
    for &i in carriers {
        let i = i as usize;
        let old = eta[i];
        let new = old + d_gamma;
        delta += outcome[i] as f64 * d_gamma - log1p_exp(new) + log1p_exp(old);
    }
    delta
}

/// Apply the shift that `logistic_gene_delta` scored.
pub fn apply_gene_delta(eta: &mut [f64], carriers: &[u32], d_gamma: f64) {
    for &i in carriers {
        eta[i as usize] += d_gamma;
    }
}

/// Joint log-likelihood under conditional independence given the labels:
/// the sub-model likelihoods add, and a modality with no data contributes 0.
pub fn joint_loglik(
    rna: Option<(&RnaSeqDataset, &RnaSeqParams)>,
    gwas: Option<(&GwasDataset, &GwasParams)>,
) -> f64 {
    let rna_part = rna.map(|(d, p)| rnaseq_loglik(d, p).total).unwrap_or(0.0);
    let gwas_part = gwas.map(|(d, p)| logistic_loglik(d, p).0).unwrap_or(0.0);
    rna_part + gwas_part
}
