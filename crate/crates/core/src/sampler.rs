//! Reversible-jump MCMC over gene labels, effect sizes, nuisance parameters,
//! and hyper-parameters, for joint or single-modality models.
//!
//! Label moves use the collapsed (λ integrated out) Dirichlet-categorical
//! prior, so a trans-dimensional move's acceptance ratio reduces to the
//! likelihood ratio times the label-count ratio: birth proposals draw the new
//! effect from its prior, which cancels the intractable piMOM normalization.
//! Effects of genes in the null group are held at exactly zero and contribute
//! exactly zero to the log-posterior; genes absent from a modality have their
//! modality-specific parameters refreshed from the priors each sweep
//! (posterior-predictive imputation) and contribute no likelihood there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{
    align_genes, GeneAlignment, GeneLabel, GroupProbabilities, GwasDataset, LabelVector,
    RnaSeqDataset,
};
use crate::diagnostics::{effective_sample_size, BlockStats, ChainDiagnostics};
use crate::error::{Error, Result};
use crate::likelihood::{
    apply_gene_delta, carrier_lists, covariate_dots, logistic_gene_delta, logistic_loglik_from_eta,
    log1p_exp, rnaseq_gene_loglik,
};
use crate::priors::{
    log_effect_prior, log_half_t, log_model_prior, log_model_prior_delta, log_normal_prec_pdf,
    log_scale_hyper_prior, sample_effect_prior, sample_lambda_given_labels, DirichletConfig,
    EffectSign, HyperState, Modality, PriorConfig, PriorFamily, COEFFICIENT_PRECISION,
    MU0_PRECISION,
};
use crate::trace::{Trace, TraceHeader, TraceRecord, TRACE_SCHEMA, TRACE_SCHEMA_VERSION};

/// Which sub-models a fit includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModalitySet {
    Rna,
    Gwas,
    Joint,
}

impl ModalitySet {
    pub fn rna_active(self) -> bool {
        matches!(self, ModalitySet::Rna | ModalitySet::Joint)
    }

    pub fn gwas_active(self) -> bool {
        matches!(self, ModalitySet::Gwas | ModalitySet::Joint)
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            ModalitySet::Rna => "rna",
            ModalitySet::Gwas => "gwas",
            ModalitySet::Joint => "joint",
        }
    }

    pub fn from_cli_name(name: &str) -> Result<Self> {
        match name {
            "rna" => Ok(ModalitySet::Rna),
            "gwas" => Ok(ModalitySet::Gwas),
            "joint" => Ok(ModalitySet::Joint),
            other => Err(Error::InvalidConfig(format!(
                "unknown modality `{other}` (expected rna, gwas, or joint)"
            ))),
        }
    }
}

/// Initial random-walk scales per proposal block; each scalar parameter then
/// adapts its own scale during burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProposalScales {
    pub effect: f64,
    pub alpha: f64,
    pub log_phi: f64,
    pub beta: f64,
    pub log_tau0: f64,
    pub log_hyper: f64,
}

impl Default for ProposalScales {
    fn default() -> Self {
        ProposalScales { effect: 0.5, alpha: 0.3, log_phi: 0.5, beta: 0.2, log_tau0: 0.5, log_hyper: 0.5 }
    }
}

/// Full configuration of one chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainConfig {
    pub modality: ModalitySet,
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chain_id: u64,
    pub thinning: usize,
    pub dirichlet: DirichletConfig,
    pub prior: PriorConfig,
    pub proposal: ProposalScales,
    /// Cadence of from-scratch log-posterior recomputation.
    pub checkpoint_interval: usize,
    /// Echoed into the trace header for provenance.
    pub config_hash: String,
}

impl ChainConfig {
    pub fn new(modality: ModalitySet, n_iter: usize, burn_in: usize, seed: u64) -> Self {
        ChainConfig {
            modality,
            n_iter,
            burn_in,
            seed,
            chain_id: 0,
            thinning: 1,
            dirichlet: DirichletConfig::uniform(),
            prior: PriorConfig::default(),
            proposal: ProposalScales::default(),
            checkpoint_interval: 1000,
            config_hash: String::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 || self.burn_in >= self.n_iter {
            return Err(Error::InvalidConfig(format!(
                "burn_in {} must be smaller than n_iter {}",
                self.burn_in, self.n_iter
            )));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        if self.checkpoint_interval == 0 {
            return Err(Error::InvalidConfig("checkpoint_interval must be at least 1".into()));
        }
        let scales = [
            self.proposal.effect,
            self.proposal.alpha,
            self.proposal.log_phi,
            self.proposal.beta,
            self.proposal.log_tau0,
            self.proposal.log_hyper,
        ];
        if scales.iter().any(|&s| !s.is_finite() || s <= 0.0) {
            return Err(Error::InvalidConfig("proposal scales must be positive".into()));
        }
        self.prior.validate()
    }
}

const ADAPT_BATCH: u64 = 50;
const TARGET_ACCEPT: f64 = 0.44;

/// Per-parameter random-walk scale, adapted toward the target acceptance rate
/// during burn-in and frozen afterwards.
#[derive(Debug, Clone)]
struct AdaptiveScale {
    ln_scale: f64,
    batch_accepted: u64,
    batch_attempted: u64,
    batches: u64,
}

impl AdaptiveScale {
    fn new(scale: f64) -> Self {
        AdaptiveScale { ln_scale: scale.ln(), batch_accepted: 0, batch_attempted: 0, batches: 0 }
    }

    fn scale(&self) -> f64 {
        self.ln_scale.exp()
    }

    fn record(&mut self, accepted: bool, adapting: bool) {
        if !adapting {
            return;
        }
        self.batch_attempted += 1;
        self.batch_accepted += accepted as u64;
        if self.batch_attempted == ADAPT_BATCH {
            self.batches += 1;
            let rate = self.batch_accepted as f64 / self.batch_attempted as f64;
            let step = (1.0 / (self.batches as f64).sqrt()).min(0.1);
            self.ln_scale += if rate > TARGET_ACCEPT { step } else { -step };
            self.ln_scale = self.ln_scale.clamp(-13.8, 6.9);
            self.batch_accepted = 0;
            self.batch_attempted = 0;
        }
    }
}

#[derive(Debug, Default, Clone)]
struct SamplerStats {
    labels: BlockStats,
    effects_rna: BlockStats,
    effects_gwas: BlockStats,
    alpha: BlockStats,
    dispersion: BlockStats,
    beta_rna: BlockStats,
    beta_gwas: BlockStats,
    tau0: BlockStats,
    effect_hypers: BlockStats,
}

/// A scored label-move proposal; applying it is separate so tests can inspect
/// the acceptance ratio directly.
#[derive(Debug, Clone, Copy)]
struct ScoredLabelMove {
    target: GeneLabel,
    new_log_fc: f64,
    new_gamma: f64,
    new_rna_ll: f64,
    d_lik_rna: f64,
    d_lik_gwas: f64,
    d_prior_counts: f64,
}

impl ScoredLabelMove {
    fn log_accept(&self) -> f64 {
        // prior-as-proposal birth/death: effect-prior terms cancel, and every
        // label has exactly two valid moves so the move-probability ratio is 1
        self.d_lik_rna + self.d_lik_gwas + self.d_prior_counts
    }
}

pub(crate) struct Sampler<'a> {
    config: &'a ChainConfig,
    rna: Option<&'a RnaSeqDataset>,
    gwas: Option<&'a GwasDataset>,
    alignment: GeneAlignment,
    carriers: Vec<Vec<u32>>,
    rng: ChaCha8Rng,

    labels: LabelVector,
    lambda: GroupProbabilities,
    log_fc: Vec<f64>,
    gamma: Vec<f64>,
    alpha: Vec<f64>,
    log_phi: Vec<f64>,
    beta_rna: Vec<f64>,
    beta_gwas: Vec<f64>,
    hyper: HyperState,

    rna_dots: Vec<f64>,
    gwas_eta: Vec<f64>,
    rna_gene_ll: Vec<f64>,
    gwas_ll: f64,
    log_post: f64,

    scale_effect_rna: Vec<AdaptiveScale>,
    scale_effect_gwas: Vec<AdaptiveScale>,
    scale_alpha: Vec<AdaptiveScale>,
    scale_log_phi: Vec<AdaptiveScale>,
    scale_beta_rna: Vec<AdaptiveScale>,
    scale_beta_gwas: Vec<AdaptiveScale>,
    scale_tau0: AdaptiveScale,
    scale_hypers: Vec<AdaptiveScale>,

    stats: SamplerStats,
    clamp_events: u64,
    max_drift: f64,
    n_checkpoints: u64,
}

fn hyper_slot(modality: Modality, kind: usize, sign: EffectSign) -> usize {
    let m = match modality {
        Modality::Rna => 0,
        Modality::Gwas => 1,
    };
    let s = match sign {
        EffectSign::Positive => 0,
        EffectSign::Negative => 1,
    };
    m * 6 + kind * 2 + s
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(
        config: &'a ChainConfig,
        rna: Option<&'a RnaSeqDataset>,
        gwas: Option<&'a GwasDataset>,
    ) -> Result<Self> {
        config.validate()?;
        let rna = if config.modality.rna_active() { rna } else { None };
        let gwas = if config.modality.gwas_active() { gwas } else { None };
        if config.modality.rna_active() && rna.is_none() {
            return Err(Error::InvalidConfig("modality includes RNA-seq but no RNA-seq dataset given".into()));
        }
        if config.modality.gwas_active() && gwas.is_none() {
            return Err(Error::InvalidConfig("modality includes GWAS but no GWAS dataset given".into()));
        }

        let empty: Vec<String> = Vec::new();
        let alignment = align_genes(
            rna.map(|d| d.gene_ids.as_slice()).unwrap_or(&empty),
            gwas.map(|d| d.gene_ids.as_slice()).unwrap_or(&empty),
        )?;
        let j = alignment.n_genes();
        if j == 0 {
            return Err(Error::InvalidData("no genes in the union of the datasets".into()));
        }

        let carriers = gwas.map(carrier_lists).unwrap_or_default();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(config.chain_id);

        let hyper = HyperState::init(&config.prior);
        let beta_rna = vec![0.0; rna.map(|d| d.n_covariates()).unwrap_or(0)];
        let beta_gwas = vec![0.0; gwas.map(|d| d.n_covariates()).unwrap_or(0)];

        // alpha starts at the log mean count net of mean offsets
        let mut alpha = vec![0.0; j];
        if let Some(rna) = rna {
            let n = rna.n_samples();
            if n > 0 {
                let mean_lib: f64 = rna.log_library_size.iter().sum::<f64>() / n as f64;
                for (u, idx) in alignment.rna_index.iter().enumerate() {
                    if let Some(rj) = idx {
                        let mean = rna.counts.column(*rj).iter().map(|&c| c as f64).sum::<f64>() / n as f64;
                        alpha[u] = mean.max(0.5 / n as f64).ln() - mean_lib - rna.log_gene_length[*rj];
                    }
                }
            }
        }

        let proposal = &config.proposal;
        let mut sampler = Sampler {
            config,
            rna,
            gwas,
            alignment,
            carriers,
            rng,
            labels: LabelVector::all_null(j),
            lambda: GroupProbabilities::uniform(),
            log_fc: vec![0.0; j],
            gamma: vec![0.0; j],
            alpha,
            log_phi: vec![0.5f64.ln(); j],
            beta_rna,
            beta_gwas,
            hyper,
            rna_dots: vec![],
            gwas_eta: vec![],
            rna_gene_ll: vec![0.0; j],
            gwas_ll: 0.0,
            log_post: 0.0,
            scale_effect_rna: (0..j).map(|_| AdaptiveScale::new(proposal.effect)).collect(),
            scale_effect_gwas: (0..j).map(|_| AdaptiveScale::new(proposal.effect)).collect(),
            scale_alpha: (0..j).map(|_| AdaptiveScale::new(proposal.alpha)).collect(),
            scale_log_phi: (0..j).map(|_| AdaptiveScale::new(proposal.log_phi)).collect(),
            scale_beta_rna: (0..rna.map(|d| d.n_covariates()).unwrap_or(0))
                .map(|_| AdaptiveScale::new(proposal.beta))
                .collect(),
            scale_beta_gwas: (0..gwas.map(|d| d.n_covariates()).unwrap_or(0))
                .map(|_| AdaptiveScale::new(proposal.beta))
                .collect(),
            scale_tau0: AdaptiveScale::new(proposal.log_tau0),
            scale_hypers: (0..12).map(|_| AdaptiveScale::new(proposal.log_hyper)).collect(),
            stats: SamplerStats::default(),
            clamp_events: 0,
            max_drift: 0.0,
            n_checkpoints: 0,
        };
        sampler.resync_caches();
        sampler.log_post = sampler.compute_log_post();
        if !sampler.log_post.is_finite() {
            return Err(Error::NonFiniteInit(format!(
                "log-posterior is {} after initialization; check offsets and covariates",
                sampler.log_post
            )));
        }
        Ok(sampler)
    }

    fn rna_active(&self) -> bool {
        self.rna.is_some()
    }

    fn gwas_active(&self) -> bool {
        self.gwas.is_some()
    }

    fn n_genes(&self) -> usize {
        self.alignment.n_genes()
    }

    /// RNA-seq log-likelihood of union gene `u` under tentative parameters;
    /// zero when the gene has no RNA-seq data.
    fn gene_rna_ll(&self, u: usize, alpha: f64, log_fc: f64, phi: f64) -> (f64, u64) {
        match (self.rna, self.alignment.rna_index[u]) {
            (Some(rna), Some(rj)) => rnaseq_gene_loglik(rna, rj, alpha, log_fc, phi, &self.rna_dots),
            _ => (0.0, 0),
        }
    }

    /// Effect-prior log terms of union gene `u` in all active modalities.
    fn gene_effect_prior(&self, u: usize) -> f64 {
        let label = self.labels.get(u);
        let mut value = 0.0;
        if self.rna_active() {
            value += log_effect_prior(self.log_fc[u], label, Modality::Rna, &self.config.prior, &self.hyper);
        }
        if self.gwas_active() {
            value += log_effect_prior(self.gamma[u], label, Modality::Gwas, &self.config.prior, &self.hyper);
        }
        value
    }

    fn resync_caches(&mut self) {
        if let Some(rna) = self.rna {
            self.rna_dots = covariate_dots(&rna.covariates, &self.beta_rna);
            for u in 0..self.n_genes() {
                let (ll, clamps) = self.gene_rna_ll(u, self.alpha[u], self.log_fc[u], self.log_phi[u].exp());
                self.rna_gene_ll[u] = ll;
                self.clamp_events += clamps;
            }
        }
        if let Some(gwas) = self.gwas {
            let mut eta = covariate_dots(&gwas.covariates, &self.beta_gwas);
            for (u, idx) in self.alignment.gwas_index.iter().enumerate() {
                if let Some(gj) = idx {
                    if self.gamma[u] != 0.0 {
                        apply_gene_delta(&mut eta, &self.carriers[*gj], self.gamma[u]);
                    }
                }
            }
            self.gwas_eta = eta;
            self.gwas_ll = logistic_loglik_from_eta(&gwas.outcome, &self.gwas_eta);
        }
    }

    /// Log-posterior from the current caches: likelihood + collapsed label
    /// prior + effect priors + nuisance priors + hyper-priors. λ is
    /// integrated out of the label prior and therefore not a term here.
    fn compute_log_post(&self) -> f64 {
        let mut lp: f64 = self.rna_gene_ll.iter().sum::<f64>() + self.gwas_ll;
        lp += log_model_prior(self.labels.counts(), &self.config.dirichlet);
        for u in 0..self.n_genes() {
            lp += self.gene_effect_prior(u);
        }
        if self.rna_active() {
            for &a in &self.alpha {
                lp += log_normal_prec_pdf(a, 0.0, COEFFICIENT_PRECISION);
            }
            for &b in &self.beta_rna {
                lp += log_normal_prec_pdf(b, 0.0, COEFFICIENT_PRECISION);
            }
        }
        if self.gwas_active() {
            for &b in &self.beta_gwas {
                lp += log_normal_prec_pdf(b, 0.0, COEFFICIENT_PRECISION);
            }
        }
        let log_phis: &[f64] = if self.rna_active() { &self.log_phi } else { &[] };
        lp += crate::priors::log_hyper_prior(
            log_phis,
            &self.hyper,
            &self.config.prior,
            self.rna_active(),
            self.gwas_active(),
        );
        lp
    }

    /// From-scratch recomputation of caches and log-posterior; records the
    /// drift of the incrementally-maintained value before resyncing. The
    /// clamp counter is restored afterwards: re-evaluating the current state
    /// is not a new clamp event.
    fn checkpoint(&mut self) {
        let incremental = self.log_post;
        let clamp_events = self.clamp_events;
        self.resync_caches();
        self.clamp_events = clamp_events;
        let fresh = self.compute_log_post();
        let drift = (incremental - fresh).abs();
        if drift > self.max_drift {
            self.max_drift = drift;
        }
        self.n_checkpoints += 1;
        self.log_post = fresh;
    }

    fn accept(&mut self, log_accept: f64) -> bool {
        if log_accept >= 0.0 {
            true
        } else {
            self.rng.gen::<f64>().ln() < log_accept
        }
    }

    /// Score a proposed label change for gene `u` without applying it. Birth
    /// effects are drawn from the effect prior at the current hyper state.
    fn score_label_move(&mut self, u: usize, target: GeneLabel) -> ScoredLabelMove {
        let current = self.labels.get(u);
        debug_assert_ne!(current, target);
        let new_log_fc = if self.rna_active() {
            sample_effect_prior(target, Modality::Rna, &self.config.prior, &self.hyper, &mut self.rng)
        } else {
            0.0
        };
        let new_gamma = if self.gwas_active() {
            sample_effect_prior(target, Modality::Gwas, &self.config.prior, &self.hyper, &mut self.rng)
        } else {
            0.0
        };

        let mut d_lik_rna = 0.0;
        let mut new_rna_ll = self.rna_gene_ll[u];
        if self.rna_active() && self.alignment.rna_index[u].is_some() {
            let (ll, clamps) = self.gene_rna_ll(u, self.alpha[u], new_log_fc, self.log_phi[u].exp());
            self.clamp_events += clamps;
            d_lik_rna = ll - self.rna_gene_ll[u];
            new_rna_ll = ll;
        }
        let mut d_lik_gwas = 0.0;
        if let (Some(gwas), Some(gj)) = (self.gwas, self.alignment.gwas_index[u]) {
            d_lik_gwas =
                logistic_gene_delta(&gwas.outcome, &self.gwas_eta, &self.carriers[gj], new_gamma - self.gamma[u]);
        }
        let d_prior_counts = log_model_prior_delta(self.labels.counts(), current, target, &self.config.dirichlet);
        ScoredLabelMove { target, new_log_fc, new_gamma, new_rna_ll, d_lik_rna, d_lik_gwas, d_prior_counts }
    }

    fn apply_label_move(&mut self, u: usize, proposal: ScoredLabelMove) {
        let old_effect_prior = self.gene_effect_prior(u);
        self.labels.set(u, proposal.target);
        if self.rna_active() {
            self.log_fc[u] = proposal.new_log_fc;
            self.rna_gene_ll[u] = proposal.new_rna_ll;
        }
        if self.gwas_active() {
            if let Some(gj) = self.alignment.gwas_index[u] {
                apply_gene_delta(&mut self.gwas_eta, &self.carriers[gj], proposal.new_gamma - self.gamma[u]);
            }
            self.gamma[u] = proposal.new_gamma;
            self.gwas_ll += proposal.d_lik_gwas;
        }
        let new_effect_prior = self.gene_effect_prior(u);
        self.log_post += proposal.d_lik_rna + proposal.d_lik_gwas + proposal.d_prior_counts
            + new_effect_prior
            - old_effect_prior;
    }

    /// One reversible-jump move for gene `u`: propose one of the two label
    /// changes uniformly, draw any newborn effects from their priors, accept
    /// by likelihood ratio × label-count ratio.
    fn rj_label_move(&mut self, u: usize) -> bool {
        let current = self.labels.get(u);
        let targets: [GeneLabel; 2] = match current {
            GeneLabel::Null => [GeneLabel::Deleterious, GeneLabel::Beneficial],
            GeneLabel::Deleterious => [GeneLabel::Null, GeneLabel::Beneficial],
            GeneLabel::Beneficial => [GeneLabel::Null, GeneLabel::Deleterious],
        };
        let target = targets[self.rng.gen_range(0..2usize)];
        let proposal = self.score_label_move(u, target);
        let accepted = self.accept(proposal.log_accept());
        if accepted {
            self.apply_label_move(u, proposal);
        }
        self.stats.labels.record(accepted);
        accepted
    }

    /// Random-walk on log|effect| (sign preserved) for every non-null gene
    /// with data in the modality; Jacobian-corrected for the log-scale walk.
    fn update_effects(&mut self, adapting: bool) {
        for u in 0..self.n_genes() {
            let label = self.labels.get(u);
            if label.is_null() {
                continue;
            }
            if self.rna_active() && self.alignment.rna_index[u].is_some() {
                let old = self.log_fc[u];
                let scale = self.scale_effect_rna[u].scale();
                let z: f64 = StandardNormal.sample(&mut self.rng);
                let new = old.signum() * (old.abs().ln() + scale * z).exp();
                let (new_ll, clamps) = self.gene_rna_ll(u, self.alpha[u], new, self.log_phi[u].exp());
                self.clamp_events += clamps;
                let d_lik = new_ll - self.rna_gene_ll[u];
                let d_prior = log_effect_prior(new, label, Modality::Rna, &self.config.prior, &self.hyper)
                    - log_effect_prior(old, label, Modality::Rna, &self.config.prior, &self.hyper);
                let jacobian = new.abs().ln() - old.abs().ln();
                let accepted = self.accept(d_lik + d_prior + jacobian);
                if accepted {
                    self.log_fc[u] = new;
                    self.rna_gene_ll[u] = new_ll;
                    self.log_post += d_lik + d_prior;
                }
                self.stats.effects_rna.record(accepted);
                self.scale_effect_rna[u].record(accepted, adapting);
            }
            if self.gwas_active() && self.alignment.gwas_index[u].is_some() {
                let gwas = self.gwas.expect("gwas active");
                let gj = self.alignment.gwas_index[u].expect("gwas gene present");
                let old = self.gamma[u];
                let scale = self.scale_effect_gwas[u].scale();
                let z: f64 = StandardNormal.sample(&mut self.rng);
                let new = old.signum() * (old.abs().ln() + scale * z).exp();
                let d_lik = logistic_gene_delta(&gwas.outcome, &self.gwas_eta, &self.carriers[gj], new - old);
                let d_prior = log_effect_prior(new, label, Modality::Gwas, &self.config.prior, &self.hyper)
                    - log_effect_prior(old, label, Modality::Gwas, &self.config.prior, &self.hyper);
                let jacobian = new.abs().ln() - old.abs().ln();
                let accepted = self.accept(d_lik + d_prior + jacobian);
                if accepted {
                    apply_gene_delta(&mut self.gwas_eta, &self.carriers[gj], new - old);
                    self.gamma[u] = new;
                    self.gwas_ll += d_lik;
                    self.log_post += d_lik + d_prior;
                }
                self.stats.effects_gwas.record(accepted);
                self.scale_effect_gwas[u].record(accepted, adapting);
            }
        }
    }

    fn update_rna_nuisance(&mut self, adapting: bool) {
        for u in 0..self.n_genes() {
            if self.alignment.rna_index[u].is_none() {
                continue;
            }
            // gene intercept
            {
                let old = self.alpha[u];
                let scale = self.scale_alpha[u].scale();
                let z: f64 = StandardNormal.sample(&mut self.rng);
                let new = old + scale * z;
                let (new_ll, clamps) = self.gene_rna_ll(u, new, self.log_fc[u], self.log_phi[u].exp());
                self.clamp_events += clamps;
                let d_lik = new_ll - self.rna_gene_ll[u];
                let d_prior = log_normal_prec_pdf(new, 0.0, COEFFICIENT_PRECISION)
                    - log_normal_prec_pdf(old, 0.0, COEFFICIENT_PRECISION);
                let accepted = self.accept(d_lik + d_prior);
                if accepted {
                    self.alpha[u] = new;
                    self.rna_gene_ll[u] = new_ll;
                    self.log_post += d_lik + d_prior;
                }
                self.stats.alpha.record(accepted);
                self.scale_alpha[u].record(accepted, adapting);
            }
            // log dispersion; the prior is stated on log φ so no Jacobian
            {
                let old = self.log_phi[u];
                let scale = self.scale_log_phi[u].scale();
                let z: f64 = StandardNormal.sample(&mut self.rng);
                let new = old + scale * z;
                let (new_ll, clamps) = self.gene_rna_ll(u, self.alpha[u], self.log_fc[u], new.exp());
                self.clamp_events += clamps;
                let d_lik = new_ll - self.rna_gene_ll[u];
                let d_prior = log_normal_prec_pdf(new, self.hyper.mu0, self.hyper.tau0)
                    - log_normal_prec_pdf(old, self.hyper.mu0, self.hyper.tau0);
                let accepted = self.accept(d_lik + d_prior);
                if accepted {
                    self.log_phi[u] = new;
                    self.rna_gene_ll[u] = new_ll;
                    self.log_post += d_lik + d_prior;
                }
                self.stats.dispersion.record(accepted);
                self.scale_log_phi[u].record(accepted, adapting);
            }
        }

        // covariate coefficients: a shift touches every sample
        let rna = self.rna.expect("rna active");
        for l in 0..self.beta_rna.len() {
            let old = self.beta_rna[l];
            let scale = self.scale_beta_rna[l].scale();
            let z: f64 = StandardNormal.sample(&mut self.rng);
            let new = old + scale * z;
            let d_beta = new - old;
            let column = rna.covariates.column(l);
            let new_dots: Vec<f64> =
                self.rna_dots.iter().zip(column.iter()).map(|(d, x)| d + d_beta * x).collect();
            let mut new_lls = vec![0.0; self.n_genes()];
            let mut d_lik = 0.0;
            let mut clamps = 0u64;
            for (u, slot) in new_lls.iter_mut().enumerate() {
                if let Some(rj) = self.alignment.rna_index[u] {
                    let (ll, c) = rnaseq_gene_loglik(
                        rna,
                        rj,
                        self.alpha[u],
                        self.log_fc[u],
                        self.log_phi[u].exp(),
                        &new_dots,
                    );
                    clamps += c;
                    d_lik += ll - self.rna_gene_ll[u];
                    *slot = ll;
                }
            }
            self.clamp_events += clamps;
            let d_prior = log_normal_prec_pdf(new, 0.0, COEFFICIENT_PRECISION)
                - log_normal_prec_pdf(old, 0.0, COEFFICIENT_PRECISION);
            let accepted = self.accept(d_lik + d_prior);
            if accepted {
                self.beta_rna[l] = new;
                self.rna_dots = new_dots;
                for (u, &ll) in new_lls.iter().enumerate() {
                    if self.alignment.rna_index[u].is_some() {
                        self.rna_gene_ll[u] = ll;
                    }
                }
                self.log_post += d_lik + d_prior;
            }
            self.stats.beta_rna.record(accepted);
            self.scale_beta_rna[l].record(accepted, adapting);
        }

        self.update_dispersion_hierarchy(adapting);
    }

    fn update_dispersion_hierarchy(&mut self, adapting: bool) {
        // μ0: conjugate normal-normal Gibbs given the log dispersions
        let (mean, sd) = mu0_full_conditional(&self.log_phi, self.hyper.tau0);
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let new_mu0 = mean + sd * z;
        let mut d = log_normal_prec_pdf(new_mu0, 0.0, MU0_PRECISION)
            - log_normal_prec_pdf(self.hyper.mu0, 0.0, MU0_PRECISION);
        for &lp in &self.log_phi {
            d += log_normal_prec_pdf(lp, new_mu0, self.hyper.tau0)
                - log_normal_prec_pdf(lp, self.hyper.mu0, self.hyper.tau0);
        }
        self.hyper.mu0 = new_mu0;
        self.log_post += d;

        // τ0: log-scale random walk with the half-t prior
        let old = self.hyper.tau0;
        let scale = self.scale_tau0.scale();
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let new = (old.ln() + scale * z).exp();
        let mut d = log_half_t(new, self.config.prior.half_t_nu, self.config.prior.half_t_scale)
            - log_half_t(old, self.config.prior.half_t_nu, self.config.prior.half_t_scale);
        for &lp in &self.log_phi {
            d += log_normal_prec_pdf(lp, self.hyper.mu0, new) - log_normal_prec_pdf(lp, self.hyper.mu0, old);
        }
        let jacobian = new.ln() - old.ln();
        let accepted = self.accept(d + jacobian);
        if accepted {
            self.hyper.tau0 = new;
            self.log_post += d;
        }
        self.stats.tau0.record(accepted);
        self.scale_tau0.record(accepted, adapting);
    }

    fn update_gwas_nuisance(&mut self, adapting: bool) {
        let gwas = self.gwas.expect("gwas active");
        for l in 0..self.beta_gwas.len() {
            let old = self.beta_gwas[l];
            let scale = self.scale_beta_gwas[l].scale();
            let z: f64 = StandardNormal.sample(&mut self.rng);
            let new = old + scale * z;
            let d_beta = new - old;
            let column = gwas.covariates.column(l);
            let mut d_lik = 0.0;
            for i in 0..gwas.n_individuals() {
                let shifted = self.gwas_eta[i] + d_beta * column[i];
                d_lik += gwas.outcome[i] as f64 * d_beta * column[i] - log1p_exp(shifted)
                    + log1p_exp(self.gwas_eta[i]);
            }
            let d_prior = log_normal_prec_pdf(new, 0.0, COEFFICIENT_PRECISION)
                - log_normal_prec_pdf(old, 0.0, COEFFICIENT_PRECISION);
            let accepted = self.accept(d_lik + d_prior);
            if accepted {
                for i in 0..gwas.n_individuals() {
                    self.gwas_eta[i] += d_beta * column[i];
                }
                self.beta_gwas[l] = new;
                self.gwas_ll += d_lik;
                self.log_post += d_lik + d_prior;
            }
            self.stats.beta_gwas.record(accepted);
            self.scale_beta_gwas[l].record(accepted, adapting);
        }
    }

    /// Sum of the effect-prior terms of one modality and sign under the given
    /// hyper state; used by the scale-hyper updates, whose "likelihood" is the
    /// set of currently non-null effects (excluded effects contribute exactly
    /// zero, matching the zeroed-parameter reversible-jump bookkeeping).
    fn effect_prior_sum_for(&self, modality: Modality, sign: EffectSign, hyper: &HyperState) -> f64 {
        let effects: &[f64] = match modality {
            Modality::Rna => &self.log_fc,
            Modality::Gwas => &self.gamma,
        };
        let mut total = 0.0;
        for (u, &effect) in effects.iter().enumerate() {
            let label = self.labels.get(u);
            if EffectSign::of_label(label) == Some(sign) {
                total += log_effect_prior(effect, label, modality, &self.config.prior, hyper);
            }
        }
        total
    }

    fn update_scale_hyper_param(
        &mut self,
        modality: Modality,
        sign: EffectSign,
        kind: usize,
        adapting: bool,
    ) {
        let slot = hyper_slot(modality, kind, sign);
        let scale = self.scale_hypers[slot].scale();
        let z: f64 = StandardNormal.sample(&mut self.rng);

        let read = |h: &HyperState| -> f64 {
            let s = h.scales(modality);
            match kind {
                0 => s.tau(sign),
                1 => s.mu(sign),
                _ => s.sigma(sign),
            }
        };
        let old = read(&self.hyper);
        let new = (old.ln() + scale * z).exp();
        let mut proposed = self.hyper;
        {
            let s = proposed.scales_mut(modality);
            match (kind, sign) {
                (0, EffectSign::Positive) => s.tau_pos = new,
                (0, EffectSign::Negative) => s.tau_neg = new,
                (1, EffectSign::Positive) => s.mu_pos = new,
                (1, EffectSign::Negative) => s.mu_neg = new,
                (_, EffectSign::Positive) => s.sigma_pos = new,
                (_, EffectSign::Negative) => s.sigma_neg = new,
            }
        }
        let d_effects = self.effect_prior_sum_for(modality, sign, &proposed)
            - self.effect_prior_sum_for(modality, sign, &self.hyper);
        let d_hyper = log_scale_hyper_prior(proposed.scales(modality), &self.config.prior)
            - log_scale_hyper_prior(self.hyper.scales(modality), &self.config.prior);
        let jacobian = new.ln() - old.ln();
        let accepted = self.accept(d_effects + d_hyper + jacobian);
        if accepted {
            self.hyper = proposed;
            self.log_post += d_effects + d_hyper;
        }
        self.stats.effect_hypers.record(accepted);
        self.scale_hypers[slot].record(accepted, adapting);
    }

    fn update_scale_hypers(&mut self, adapting: bool) {
        if !self.config.prior.has_effect_hypers() {
            return;
        }
        let modalities: [(bool, Modality); 2] =
            [(self.rna_active(), Modality::Rna), (self.gwas_active(), Modality::Gwas)];
        for (active, modality) in modalities {
            if !active {
                continue;
            }
            match self.config.prior.family {
                PriorFamily::NonlocalPimomHyper | PriorFamily::NonlocalInvGammaHyper => {
                    for sign in [EffectSign::Positive, EffectSign::Negative] {
                        self.update_scale_hyper_param(modality, sign, 0, adapting);
                    }
                }
                PriorFamily::LocalHyper => {
                    for sign in [EffectSign::Positive, EffectSign::Negative] {
                        self.update_scale_hyper_param(modality, sign, 1, adapting);
                        self.update_scale_hyper_param(modality, sign, 2, adapting);
                    }
                }
                PriorFamily::LocalFixed | PriorFamily::NonlocalFixed => {}
            }
        }
    }

    /// Posterior-predictive refresh of the modality-specific parameters of
    /// genes absent from a modality. They carry no likelihood there, so their
    /// full conditionals are the priors at the current label and hyper state.
    fn impute_missing_gene(&mut self, u: usize, modality: Modality) {
        match modality {
            Modality::Rna => {
                debug_assert!(self.alignment.rna_index[u].is_none());
                let label = self.labels.get(u);

                let sd = COEFFICIENT_PRECISION.sqrt().recip();
                let z: f64 = StandardNormal.sample(&mut self.rng);
                let new_alpha = sd * z;
                self.log_post += log_normal_prec_pdf(new_alpha, 0.0, COEFFICIENT_PRECISION)
                    - log_normal_prec_pdf(self.alpha[u], 0.0, COEFFICIENT_PRECISION);
                self.alpha[u] = new_alpha;

                let z: f64 = StandardNormal.sample(&mut self.rng);
                let new_log_phi = self.hyper.mu0 + z / self.hyper.tau0.sqrt();
                self.log_post += log_normal_prec_pdf(new_log_phi, self.hyper.mu0, self.hyper.tau0)
                    - log_normal_prec_pdf(self.log_phi[u], self.hyper.mu0, self.hyper.tau0);
                self.log_phi[u] = new_log_phi;

                let new_fc =
                    sample_effect_prior(label, Modality::Rna, &self.config.prior, &self.hyper, &mut self.rng);
                self.log_post += log_effect_prior(new_fc, label, Modality::Rna, &self.config.prior, &self.hyper)
                    - log_effect_prior(self.log_fc[u], label, Modality::Rna, &self.config.prior, &self.hyper);
                self.log_fc[u] = new_fc;
            }
            Modality::Gwas => {
                debug_assert!(self.alignment.gwas_index[u].is_none());
                let label = self.labels.get(u);
                let new_gamma =
                    sample_effect_prior(label, Modality::Gwas, &self.config.prior, &self.hyper, &mut self.rng);
                self.log_post += log_effect_prior(new_gamma, label, Modality::Gwas, &self.config.prior, &self.hyper)
                    - log_effect_prior(self.gamma[u], label, Modality::Gwas, &self.config.prior, &self.hyper);
                self.gamma[u] = new_gamma;
            }
        }
    }

    fn impute_missing(&mut self) {
        for u in 0..self.n_genes() {
            if self.rna_active() && self.alignment.rna_index[u].is_none() {
                self.impute_missing_gene(u, Modality::Rna);
            }
            if self.gwas_active() && self.alignment.gwas_index[u].is_none() {
                self.impute_missing_gene(u, Modality::Gwas);
            }
        }
    }

    fn sweep(&mut self, iter: usize) {
        let adapting = iter < self.config.burn_in;
        for u in 0..self.n_genes() {
            self.rj_label_move(u);
        }
        self.update_effects(adapting);
        if self.rna_active() {
            self.update_rna_nuisance(adapting);
        }
        if self.gwas_active() {
            self.update_gwas_nuisance(adapting);
        }
        self.update_scale_hypers(adapting);
        self.impute_missing();
        self.lambda = sample_lambda_given_labels(self.labels.counts(), &self.config.dirichlet, &mut self.rng);
    }

    fn record(&self, iter: usize) -> TraceRecord {
        let mut log_fc = Vec::new();
        let mut gamma = Vec::new();
        for u in 0..self.n_genes() {
            if self.labels.get(u).is_null() {
                debug_assert_eq!(self.log_fc[u].to_bits(), 0.0f64.to_bits());
                debug_assert_eq!(self.gamma[u].to_bits(), 0.0f64.to_bits());
                continue;
            }
            if self.rna_active() {
                log_fc.push((u, self.log_fc[u]));
            }
            if self.gwas_active() {
                gamma.push((u, self.gamma[u]));
            }
        }
        TraceRecord {
            iter,
            labels: self.labels.labels().iter().map(|l| l.index()).collect(),
            log_fc,
            gamma,
            phi: if self.rna_active() { self.log_phi.iter().map(|lp| lp.exp()).collect() } else { vec![] },
            hyper: self.hyper,
            lambda: self.lambda.lambda(),
            log_post: self.log_post,
        }
    }

    fn diagnostics(&self, records: &[TraceRecord]) -> ChainDiagnostics {
        let retained: Vec<&TraceRecord> =
            records.iter().filter(|r| r.iter >= self.config.burn_in).collect();
        let series = |f: &dyn Fn(&TraceRecord) -> f64| -> Vec<f64> {
            retained.iter().map(|r| f(r)).collect()
        };
        let log_post = series(&|r| r.log_post);

        let mut blocks = vec![("labels".to_string(), self.stats.labels.clone())];
        let mut ess: Vec<(String, f64)> = vec![
            ("log_post".into(), effective_sample_size(&log_post)),
            (
                "non_null_count".into(),
                effective_sample_size(&series(&|r| {
                    r.labels.iter().filter(|&&l| l != 1).count() as f64
                })),
            ),
            ("lambda_null".into(), effective_sample_size(&series(&|r| r.lambda[0]))),
        ];
        if self.rna_active() {
            blocks.push(("effects_rna".into(), self.stats.effects_rna.clone()));
            blocks.push(("alpha".into(), self.stats.alpha.clone()));
            blocks.push(("dispersion".into(), self.stats.dispersion.clone()));
            if !self.beta_rna.is_empty() {
                blocks.push(("beta_rna".into(), self.stats.beta_rna.clone()));
            }
            blocks.push(("tau0".into(), self.stats.tau0.clone()));
            ess.push(("mu0".into(), effective_sample_size(&series(&|r| r.hyper.mu0))));
            ess.push(("tau0".into(), effective_sample_size(&series(&|r| r.hyper.tau0))));
        }
        if self.gwas_active() {
            blocks.push(("effects_gwas".into(), self.stats.effects_gwas.clone()));
            if !self.beta_gwas.is_empty() {
                blocks.push(("beta_gwas".into(), self.stats.beta_gwas.clone()));
            }
        }
        if self.config.prior.has_effect_hypers() {
            blocks.push(("effect_hypers".into(), self.stats.effect_hypers.clone()));
        }
        ChainDiagnostics {
            blocks,
            ess_log_post: effective_sample_size(&log_post),
            ess,
            clamp_events: self.clamp_events,
            max_log_post_drift: self.max_drift,
            n_checkpoints: self.n_checkpoints,
        }
    }
}

/// Full conditional of the dispersion-hierarchy mean given the log
/// dispersions: normal-normal conjugacy with the N(0, precision 1e-2) prior.
pub(crate) fn mu0_full_conditional(log_phis: &[f64], tau0: f64) -> (f64, f64) {
    let precision = MU0_PRECISION + tau0 * log_phis.len() as f64;
    let mean = tau0 * log_phis.iter().sum::<f64>() / precision;
    (mean, precision.sqrt().recip())
}

/// Streaming events emitted while a chain runs: the header first, then one
/// event per retained record.
#[derive(Debug)]
pub enum TraceEvent<'a> {
    Header(&'a TraceHeader),
    Record(&'a TraceRecord),
}

/// Callback receiving `TraceEvent`s as the chain produces them.
pub type TraceSink<'a> = &'a mut dyn FnMut(TraceEvent<'_>) -> std::io::Result<()>;

/// Run one chain. Datasets outside the configured modality set are ignored.
/// The header and each retained record are handed to `sink` as they are
/// produced, so traces can stream to disk while the chain runs.
pub fn run_chain(
    rna: Option<&RnaSeqDataset>,
    gwas: Option<&GwasDataset>,
    config: &ChainConfig,
    mut sink: Option<TraceSink<'_>>,
) -> Result<Trace> {
    let mut sampler = Sampler::new(config, rna, gwas)?;
    let header = TraceHeader {
        schema: TRACE_SCHEMA.into(),
        version: TRACE_SCHEMA_VERSION,
        config_hash: config.config_hash.clone(),
        modality: config.modality,
        gene_ids: sampler.alignment.union_ids.clone(),
        n_iter: config.n_iter,
        burn_in: config.burn_in,
        thinning: config.thinning,
        seed: config.seed,
        chain_id: config.chain_id,
    };
    let sink_err = |e| Error::Io { path: "<trace sink>".into(), source: e };
    if let Some(sink) = sink.as_mut() {
        sink(TraceEvent::Header(&header)).map_err(sink_err)?;
    }
    let mut records = Vec::with_capacity(config.n_iter / config.thinning + 1);
    for iter in 0..config.n_iter {
        sampler.sweep(iter);
        if iter % config.thinning == 0 {
            let record = sampler.record(iter);
            if let Some(sink) = sink.as_mut() {
                sink(TraceEvent::Record(&record)).map_err(sink_err)?;
            }
            records.push(record);
        }
        if (iter + 1) % config.checkpoint_interval == 0 {
            sampler.checkpoint();
        }
    }
    let diagnostics = sampler.diagnostics(&records);
    Ok(Trace { header, records, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{GwasDataset, RnaSeqDataset};
    use crate::priors::{log_half_pimom, PriorConfig, PriorFamily};
    use ndarray::Array2;
    use rand_distr::{Gamma as GammaDist, Poisson};

    fn gene_ids(j: usize) -> Vec<String> {
        (0..j).map(|g| format!("G{g:03}")).collect()
    }

    fn flat_config(modality: ModalitySet, n_iter: usize, burn_in: usize, seed: u64) -> ChainConfig {
        let mut cfg = ChainConfig::new(modality, n_iter, burn_in, seed);
        cfg.prior = PriorConfig::with_family(PriorFamily::NonlocalFixed);
        cfg
    }

    /// Joint chain over empty datasets: the likelihood is flat, so label
    /// marginals must recover the Dirichlet-categorical prior (1/3 each).
    #[test]
    fn flat_likelihood_recovers_uniform_prior() {
        let j = 10;
        let rna = RnaSeqDataset::empty(gene_ids(j));
        let gwas = GwasDataset::empty(gene_ids(j));
        let cfg = flat_config(ModalitySet::Joint, 6000, 1000, 42);
        let trace = run_chain(Some(&rna), Some(&gwas), &cfg, None).unwrap();
        let occupancy = trace.occupancy(cfg.burn_in);
        let retained: u64 = occupancy[0].iter().sum();
        for (g, tally) in occupancy.iter().enumerate() {
            for (k, &count) in tally.iter().enumerate() {
                let p = count as f64 / retained as f64;
                assert!((p - 1.0 / 3.0).abs() < 0.06, "gene {g} group {k}: {p}");
            }
        }
    }

    #[test]
    fn fixed_seed_is_bitwise_deterministic() {
        let j = 6;
        let rna = RnaSeqDataset::empty(gene_ids(j));
        let gwas = GwasDataset::empty(gene_ids(j));
        let cfg = flat_config(ModalitySet::Joint, 400, 100, 7);
        let a = run_chain(Some(&rna), Some(&gwas), &cfg, None).unwrap();
        let b = run_chain(Some(&rna), Some(&gwas), &cfg, None).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn null_effects_are_bit_exact_zero_and_lambda_on_simplex() {
        let j = 8;
        let rna = RnaSeqDataset::empty(gene_ids(j));
        let gwas = GwasDataset::empty(gene_ids(j));
        let cfg = flat_config(ModalitySet::Joint, 500, 0, 3);
        let trace = run_chain(Some(&rna), Some(&gwas), &cfg, None).unwrap();
        for record in &trace.records {
            for &(g, v) in record.log_fc.iter().chain(&record.gamma) {
                assert_ne!(record.labels[g], 1, "effect recorded for a null gene");
                assert!(v != 0.0);
            }
            let sum: f64 = record.lambda.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            let counts = [1u8, 2, 3]
                .map(|k| record.labels.iter().filter(|&&l| l == k).count());
            assert_eq!(counts.iter().sum::<usize>(), j);
        }
    }

    /// Hand-computed flat-likelihood acceptance ratio: from the all-null state
    /// at J=3 with κ=1, a=(1,1,1), a Null→Deleterious birth has acceptance
    /// ratio (κa2 + 0) / (κa1 + J − 1) = 1/3, and the likelihood terms vanish.
    #[test]
    fn flat_birth_acceptance_is_label_prior_ratio() {
        let j = 3;
        let rna = RnaSeqDataset::empty(gene_ids(j));
        let gwas = GwasDataset::empty(gene_ids(j));
        let cfg = flat_config(ModalitySet::Joint, 10, 5, 1);
        let mut sampler = Sampler::new(&cfg, Some(&rna), Some(&gwas)).unwrap();
        let proposal = sampler.score_label_move(0, GeneLabel::Deleterious);
        assert_eq!(proposal.d_lik_rna, 0.0);
        assert_eq!(proposal.d_lik_gwas, 0.0);
        assert!((proposal.log_accept() - (1.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    /// With a flat likelihood and k2 = k3 before the move, a Del→Ben swap has
    /// acceptance probability exactly 1: the count ratio is (1+k)/k ≥ 1 and
    /// the prior-as-proposal effect terms cancel.
    #[test]
    fn flat_swap_with_balanced_counts_always_accepts() {
        let j = 4;
        let rna = RnaSeqDataset::empty(gene_ids(j));
        let gwas = GwasDataset::empty(gene_ids(j));
        let cfg = flat_config(ModalitySet::Joint, 10, 5, 2);
        let mut sampler = Sampler::new(&cfg, Some(&rna), Some(&gwas)).unwrap();
        // force k2 = k3 = 1
        let birth_del = sampler.score_label_move(0, GeneLabel::Deleterious);
        sampler.apply_label_move(0, birth_del);
        let birth_ben = sampler.score_label_move(1, GeneLabel::Beneficial);
        sampler.apply_label_move(1, birth_ben);
        for _ in 0..200 {
            let swap = sampler.score_label_move(0, GeneLabel::Beneficial);
            assert!(swap.log_accept() >= 0.0, "swap log-accept {}", swap.log_accept());
            // proposed effect always lands on the target half-line
            assert!(swap.new_log_fc < 0.0);
            assert!(swap.new_gamma < 0.0);
        }
    }

    #[test]
    fn mu0_full_conditional_hand_value() {
        let (mean, sd) = mu0_full_conditional(&[1.0, 1.0], 1.0);
        assert!((mean - 2.0 / 2.01).abs() < 1e-10);
        assert!((sd - (1.0f64 / 2.01).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_drift_stays_tiny() {
        let j = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        // small dataset with real signal so all update blocks engage
        let n = 30;
        let counts = Array2::from_shape_fn((n, j), |(i, g)| {
            let base = 20.0 * (1.0 + 0.1 * g as f64);
            let mu = if g == 0 && i % 2 == 1 { base * 3.0 } else { base };
            let gamma: f64 = GammaDist::new(2.0, mu / 2.0).unwrap().sample(&mut rng);
            Poisson::new(gamma.max(1e-9)).unwrap().sample(&mut rng) as u32
        });
        let rna = RnaSeqDataset::new(
            counts,
            (0..n).map(|i| (i % 2) as u8).collect(),
            vec![0.0; n],
            vec![0.0; j],
            Array2::zeros((n, 0)),
            gene_ids(j),
            (0..n).map(|i| format!("s{i}")).collect(),
        )
        .unwrap();
        let mut cfg = ChainConfig::new(ModalitySet::Rna, 3000, 500, 5);
        cfg.checkpoint_interval = 500;
        let trace = run_chain(Some(&rna), None, &cfg, None).unwrap();
        assert!(trace.diagnostics.n_checkpoints >= 5);
        assert!(
            trace.diagnostics.max_log_post_drift < 1e-6,
            "drift {}",
            trace.diagnostics.max_log_post_drift
        );
    }

    /// Detailed-balance smoke test for the within-model effect walk: on a
    /// single deleterious gene with α and φ held fixed, the chain's
    /// stationary distribution of the effect must match the 1-D posterior
    /// computed by grid quadrature.
    #[test]
    fn effect_walk_matches_quadrature_posterior() {
        let n = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let counts = Array2::from_shape_fn((n, 1), |(i, _)| {
            let mu = if i % 2 == 1 { 60.0 } else { 20.0 };
            let gamma: f64 = GammaDist::new(5.0, mu / 5.0).unwrap().sample(&mut rng);
            Poisson::new(gamma.max(1e-9)).unwrap().sample(&mut rng) as u32
        });
        let rna = RnaSeqDataset::new(
            counts,
            (0..n).map(|i| (i % 2) as u8).collect(),
            vec![0.0; n],
            vec![0.0],
            Array2::zeros((n, 0)),
            gene_ids(1),
            (0..n).map(|i| format!("s{i}")).collect(),
        )
        .unwrap();
        let mut cfg = ChainConfig::new(ModalitySet::Rna, 10, 5, 23);
        cfg.prior = PriorConfig::with_family(PriorFamily::NonlocalFixed);
        let mut sampler = Sampler::new(&cfg, Some(&rna), None).unwrap();

        // pin the gene in the deleterious group with fixed nuisance values
        let birth = sampler.score_label_move(0, GeneLabel::Deleterious);
        sampler.apply_label_move(0, birth);
        sampler.log_fc[0] = 0.5;
        sampler.alpha[0] = 20f64.ln();
        sampler.log_phi[0] = 0.2f64.ln();
        sampler.resync_caches();
        sampler.log_post = sampler.compute_log_post();

        let burn = 2_000;
        let keep = 120_000;
        let mut sum = 0.0;
        for t in 0..burn + keep {
            sampler.update_effects(t < burn);
            // the log-scale walk never crosses zero
            assert!(sampler.log_fc[0] > 0.0);
            if t >= burn {
                sum += sampler.log_fc[0];
            }
        }
        let chain_mean = sum / keep as f64;

        // grid quadrature oracle over the positive half-line
        let log_target = |beta: f64| -> f64 {
            let (ll, _) = sampler.gene_rna_ll(0, sampler.alpha[0], beta, sampler.log_phi[0].exp());
            ll + log_half_pimom(beta, cfg.prior.fixed_tau, cfg.prior.r, EffectSign::Positive)
        };
        let grid = 40_000;
        let hi = 4.0;
        let step = hi / grid as f64;
        let mut max_lt = f64::NEG_INFINITY;
        let values: Vec<(f64, f64)> = (1..=grid)
            .map(|k| {
                let beta = k as f64 * step;
                let lt = log_target(beta);
                max_lt = max_lt.max(lt);
                (beta, lt)
            })
            .collect();
        let mut mass = 0.0;
        let mut first_moment = 0.0;
        for (beta, lt) in values {
            let w = (lt - max_lt).exp();
            mass += w;
            first_moment += beta * w;
        }
        let quad_mean = first_moment / mass;
        let rel = (chain_mean - quad_mean).abs() / quad_mean;
        assert!(rel < 0.02, "chain {chain_mean} vs quadrature {quad_mean} (rel {rel})");
    }

    /// Imputed effects of a gene absent from the RNA-seq data follow the
    /// effect prior conditional on the label (two-sample KS test against the
    /// prior sampler).
    #[test]
    fn imputation_draws_match_prior_sampler() {
        let rna = RnaSeqDataset::empty(vec!["OTHER".to_string()]);
        let gwas = GwasDataset::empty(vec!["OTHER".to_string(), "TARGET".to_string()]);
        let cfg = flat_config(ModalitySet::Joint, 10, 5, 31);
        let mut sampler = Sampler::new(&cfg, Some(&rna), Some(&gwas)).unwrap();
        let target = 1; // union index of the GWAS-only gene
        assert!(sampler.alignment.rna_index[target].is_none());
        let birth = sampler.score_label_move(target, GeneLabel::Deleterious);
        sampler.apply_label_move(target, birth);

        let n = 10_000;
        let mut imputed = Vec::with_capacity(n);
        for _ in 0..n {
            sampler.impute_missing_gene(target, Modality::Rna);
            imputed.push(sampler.log_fc[target]);
        }
        let mut oracle = Vec::with_capacity(n);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..n {
            oracle.push(sample_effect_prior(
                GeneLabel::Deleterious,
                Modality::Rna,
                &cfg.prior,
                &sampler.hyper,
                &mut rng,
            ));
        }
        let d = two_sample_ks(&mut imputed, &mut oracle);
        // asymptotic p-value via the Kolmogorov distribution
        let ne = (n * n) as f64 / (2 * n) as f64;
        let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
        let p: f64 = 2.0
            * (1..=100)
                .map(|k| (-1.0f64).powi(k - 1) * (-2.0 * (f64::from(k) * lambda).powi(2)).exp())
                .sum::<f64>();
        assert!(p > 0.01, "KS D = {d}, p = {p}");
    }

    fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> f64 {
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (mut i, mut j) = (0usize, 0usize);
        let mut d: f64 = 0.0;
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            let fa = i as f64 / a.len() as f64;
            let fb = j as f64 / b.len() as f64;
            d = d.max((fa - fb).abs());
        }
        d
    }

    #[test]
    fn imputation_is_noop_for_present_genes() {
        // all genes present in both modalities: impute_missing must not touch state
        let j = 3;
        let rna = RnaSeqDataset::empty(gene_ids(j));
        let gwas = GwasDataset::empty(gene_ids(j));
        let cfg = flat_config(ModalitySet::Joint, 10, 5, 8);
        let mut sampler = Sampler::new(&cfg, Some(&rna), Some(&gwas)).unwrap();
        let before = (sampler.alpha.clone(), sampler.log_phi.clone(), sampler.log_fc.clone(), sampler.gamma.clone());
        sampler.impute_missing();
        assert_eq!(before.0, sampler.alpha);
        assert_eq!(before.1, sampler.log_phi);
        assert_eq!(before.2, sampler.log_fc);
        assert_eq!(before.3, sampler.gamma);
    }

    #[test]
    fn modality_gating_skips_rna_blocks() {
        let j = 4;
        let gwas = GwasDataset::empty(gene_ids(j));
        let cfg = flat_config(ModalitySet::Gwas, 200, 50, 12);
        let trace = run_chain(None, Some(&gwas), &cfg, None).unwrap();
        assert!(trace.records.iter().all(|r| r.phi.is_empty() && r.log_fc.is_empty()));
        assert!(!trace.diagnostics.blocks.iter().any(|(name, _)| name == "alpha" || name == "tau0"));
    }

    #[test]
    fn rejects_missing_dataset_for_modality() {
        let cfg = flat_config(ModalitySet::Joint, 10, 5, 1);
        let gwas = GwasDataset::empty(gene_ids(2));
        assert!(run_chain(None, Some(&gwas), &cfg, None).is_err());
    }
}
