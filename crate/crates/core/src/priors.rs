//! Prior and hyper-prior log-densities and samplers: the Dirichlet-categorical
//! marginal model pmf, its stick-breaking conjugate update, the piMOM family,
//! and the five effect-prior variants.
//!
//! Everything is computed in log space via `ln_gamma`; raw gamma evaluations
//! overflow once the gene count reaches the thousands.

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::data::{GeneLabel, GroupCounts, GroupProbabilities};
use crate::error::{Error, Result};

/// Precision of the vague Normal(0, precision) priors on gene intercepts and
/// covariate coefficients.
pub const COEFFICIENT_PRECISION: f64 = 1e-3;
/// Precision of the Normal(0, precision) prior on the dispersion-hierarchy mean.
pub const MU0_PRECISION: f64 = 1e-2;

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Side of the real line an effect lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EffectSign {
    Positive,
    Negative,
}

impl EffectSign {
    pub fn of_label(label: GeneLabel) -> Option<EffectSign> {
        match label {
            GeneLabel::Null => None,
            GeneLabel::Deleterious => Some(EffectSign::Positive),
            GeneLabel::Beneficial => Some(EffectSign::Negative),
        }
    }

    fn contains(self, x: f64) -> bool {
        match self {
            EffectSign::Positive => x > 0.0,
            EffectSign::Negative => x < 0.0,
        }
    }

    pub fn signum(self) -> f64 {
        match self {
            EffectSign::Positive => 1.0,
            EffectSign::Negative => -1.0,
        }
    }
}

/// Dirichlet(κ·a) hyper-prior on the group probability vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDirichletConfig")]
pub struct DirichletConfig {
    kappa: f64,
    a: [f64; 3],
}

#[derive(Deserialize)]
#[serde(default)]
struct RawDirichletConfig {
    kappa: f64,
    a: [f64; 3],
}

impl Default for RawDirichletConfig {
    fn default() -> Self {
        RawDirichletConfig { kappa: 1.0, a: [1.0; 3] }
    }
}

impl TryFrom<RawDirichletConfig> for DirichletConfig {
    type Error = Error;
    fn try_from(raw: RawDirichletConfig) -> Result<Self> {
        DirichletConfig::new(raw.kappa, raw.a)
    }
}

impl Default for DirichletConfig {
    fn default() -> Self {
        DirichletConfig::uniform()
    }
}

impl DirichletConfig {
    pub fn new(kappa: f64, a: [f64; 3]) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::InvalidConfig(format!("kappa = {kappa} must be positive")));
        }
        for (i, &ai) in a.iter().enumerate() {
            if !ai.is_finite() || ai <= 0.0 {
                return Err(Error::InvalidConfig(format!("a[{i}] = {ai} must be positive")));
            }
        }
        Ok(DirichletConfig { kappa, a })
    }

    /// κ = 1, a = (1,1,1): uniform on the simplex.
    pub fn uniform() -> Self {
        DirichletConfig { kappa: 1.0, a: [1.0; 3] }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn a(&self) -> [f64; 3] {
        self.a
    }

    /// Concentration κ·a_i for group index 0..3.
    fn weight(&self, i: usize) -> f64 {
        self.kappa * self.a[i]
    }

    fn weight_sum(&self) -> f64 {
        self.kappa * (self.a[0] + self.a[1] + self.a[2])
    }
}

/// Log marginal prior pmf of a specific label assignment with group counts
/// (k1, k2, k3), with λ integrated out:
///
/// Γ(Σκaᵢ)·ΠΓ(κaᵢ+kᵢ) / [ΠΓ(κaᵢ)·Γ(Σκaᵢ + J)]
///
/// This is the multiplicity penalty: for fixed J it decays rapidly in the
/// number of non-null genes.
pub fn log_model_prior(counts: GroupCounts, config: &DirichletConfig) -> f64 {
    let ks = [counts.null as f64, counts.deleterious as f64, counts.beneficial as f64];
    let mut value = ln_gamma(config.weight_sum()) - ln_gamma(config.weight_sum() + counts.total() as f64);
    for (i, &k) in ks.iter().enumerate() {
        value += ln_gamma(config.weight(i) + k) - ln_gamma(config.weight(i));
    }
    value
}

/// Change in `log_model_prior` when one gene moves from `from` to `to`,
/// computed without re-evaluating the full expression.
pub fn log_model_prior_delta(counts: GroupCounts, from: GeneLabel, to: GeneLabel, config: &DirichletConfig) -> f64 {
    if from == to {
        return 0.0;
    }
    let idx = |label: GeneLabel| (label.index() - 1) as usize;
    let k_from = counts.of(from) as f64;
    let k_to = counts.of(to) as f64;
    // Γ(w_to + k_to + 1)/Γ(w_to + k_to) · Γ(w_from + k_from − 1)/Γ(w_from + k_from)
    (config.weight(idx(to)) + k_to).ln() - (config.weight(idx(from)) + k_from - 1.0).ln()
}

/// Gibbs draw of λ given the label counts via the stick-breaking
/// representation: v1 ~ Beta(κa1+k1, κ(a2+a3)+k2+k3), v2 ~ Beta(κa2+k2, κa3+k3).
pub fn sample_lambda_given_labels<R: Rng + ?Sized>(
    counts: GroupCounts,
    config: &DirichletConfig,
    rng: &mut R,
) -> GroupProbabilities {
    let v1 = BetaDist::new(
        config.weight(0) + counts.null as f64,
        config.weight(1) + config.weight(2) + counts.non_null() as f64,
    )
    .expect("valid Beta parameters")
    .sample(rng);
    let v2 = BetaDist::new(
        config.weight(1) + counts.deleterious as f64,
        config.weight(2) + counts.beneficial as f64,
    )
    .expect("valid Beta parameters")
    .sample(rng);
    GroupProbabilities::from_sticks(v1.clamp(0.0, 1.0), v2.clamp(0.0, 1.0))
        .expect("stick fractions in [0,1]")
}

/// Log density of the product inverse-moment (piMOM) prior,
/// [τ^{r/2}/Γ(r/2)]·|β|^{-(r+1)}·exp(−τ/β²). Zero (−∞ in log space) at the
/// origin, which is what makes it non-local.
pub fn log_pimom(beta: f64, tau: f64, r: f64) -> f64 {
    if beta == 0.0 {
        return f64::NEG_INFINITY;
    }
    let abs = beta.abs();
    0.5 * r * tau.ln() - ln_gamma(0.5 * r) - (r + 1.0) * abs.ln() - tau / (beta * beta)
}

/// piMOM truncated to one half-line; the symmetric density doubles.
pub fn log_half_pimom(beta: f64, tau: f64, r: f64, sign: EffectSign) -> f64 {
    if !sign.contains(beta) {
        return f64::NEG_INFINITY;
    }
    std::f64::consts::LN_2 + log_pimom(beta, tau, r)
}

/// Draw from the half-piMOM: if β ~ piMOM(τ, r) then τ/β² ~ Gamma(r/2, 1).
pub fn sample_half_pimom<R: Rng + ?Sized>(tau: f64, r: f64, sign: EffectSign, rng: &mut R) -> f64 {
    let g: f64 = GammaDist::new(0.5 * r, 1.0).expect("valid Gamma parameters").sample(rng);
    sign.signum() * (tau / g.max(f64::MIN_POSITIVE)).sqrt()
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Log density of a Normal(mean, sd) evaluated at x.
pub fn log_normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * LN_2PI - sd.ln() - 0.5 * z * z
}

/// Log density of a Normal(mean, precision) evaluated at x.
pub fn log_normal_prec_pdf(x: f64, mean: f64, precision: f64) -> f64 {
    let d = x - mean;
    0.5 * precision.ln() - 0.5 * LN_2PI - 0.5 * precision * d * d
}

/// Half-normal on one half-line: N(0, σ) truncated and doubled.
pub fn log_half_normal(beta: f64, sigma: f64, sign: EffectSign) -> f64 {
    if !sign.contains(beta) {
        return f64::NEG_INFINITY;
    }
    std::f64::consts::LN_2 + log_normal_pdf(beta, 0.0, sigma)
}

/// Normal with location pushed into the half-line, truncated to it.
/// For the positive side this is N(location, σ) on (0, ∞); the negative side
/// mirrors to N(−location, σ) on (−∞, 0). `location` is non-negative.
pub fn log_truncated_normal(beta: f64, location: f64, sigma: f64, sign: EffectSign) -> f64 {
    if !sign.contains(beta) {
        return f64::NEG_INFINITY;
    }
    let z = beta.abs();
    log_normal_pdf(z, location, sigma) - normal_cdf(location / sigma).ln()
}

/// Inverse-CDF draw from the truncated normal of `log_truncated_normal`.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    location: f64,
    sigma: f64,
    sign: EffectSign,
    rng: &mut R,
) -> f64 {
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
    use statrs::distribution::ContinuousCDF;
    let lower = normal_cdf(-location / sigma);
    let u: f64 = rng.gen::<f64>().clamp(1e-15, 1.0 - 1e-15);
    let p = (lower + u * (1.0 - lower)).clamp(1e-15, 1.0 - 1e-15);
    let z = location + sigma * normal.inverse_cdf(p);
    sign.signum() * z.max(f64::MIN_POSITIVE)
}

/// Half-t density with `nu` degrees of freedom and the given scale, on (0, ∞).
pub fn log_half_t(x: f64, nu: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = x / scale;
    std::f64::consts::LN_2 + ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - scale.ln()
        - 0.5 * (nu + 1.0) * (z * z / nu).ln_1p()
}

/// Inverse-gamma log density with shape/scale parametrization.
pub fn log_inv_gamma(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

/// The five effect-prior families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorFamily {
    /// Symmetric half-normal slabs with fixed scale.
    LocalFixed,
    /// Asymmetric truncated-normal slabs; inverse-gamma hyper-priors on the
    /// locations and half-piMOM hyper-priors on the scales.
    LocalHyper,
    /// Symmetric half-piMOM slabs with fixed τ.
    NonlocalFixed,
    /// Asymmetric half-piMOM slabs; half-piMOM hyper-priors on each τ.
    NonlocalPimomHyper,
    /// Asymmetric half-piMOM slabs; inverse-gamma hyper-priors on each τ.
    NonlocalInvGammaHyper,
}

impl PriorFamily {
    pub fn is_local(self) -> bool {
        matches!(self, PriorFamily::LocalFixed | PriorFamily::LocalHyper)
    }

    /// CLI name, e.g. `nonlocal-pimom`.
    pub fn cli_name(self) -> &'static str {
        match self {
            PriorFamily::LocalFixed => "local-fixed",
            PriorFamily::LocalHyper => "local-hyper",
            PriorFamily::NonlocalFixed => "nonlocal-fixed",
            PriorFamily::NonlocalPimomHyper => "nonlocal-pimom",
            PriorFamily::NonlocalInvGammaHyper => "nonlocal-invgamma",
        }
    }

    pub fn from_cli_name(name: &str) -> Result<Self> {
        match name {
            "local-fixed" => Ok(PriorFamily::LocalFixed),
            "local-hyper" => Ok(PriorFamily::LocalHyper),
            "nonlocal-fixed" => Ok(PriorFamily::NonlocalFixed),
            "nonlocal-pimom" => Ok(PriorFamily::NonlocalPimomHyper),
            "nonlocal-invgamma" => Ok(PriorFamily::NonlocalInvGammaHyper),
            other => Err(Error::InvalidConfig(format!(
                "unknown prior family `{other}` (expected one of local-fixed, local-hyper, nonlocal-fixed, nonlocal-pimom, nonlocal-invgamma)"
            ))),
        }
    }
}

/// Effect-prior family selection plus every fixed hyper-parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub family: PriorFamily,
    /// piMOM tail decay; r = 2 gives model-selection consistency.
    pub r: f64,
    /// Fixed τ for the nonlocal-fixed family (both signs, both modalities).
    pub fixed_tau: f64,
    /// Fixed half-normal scale for the local-fixed family.
    pub fixed_sigma: f64,
    /// (τ, r) of the half-piMOM hyper-prior on each τ (nonlocal-pimom family).
    pub tau_hyper_pimom_tau: f64,
    pub tau_hyper_pimom_r: f64,
    /// Inverse-gamma (shape, scale) hyper-prior on each τ (nonlocal-invgamma
    /// family). Defaults keep mass away from zero.
    pub tau_inv_gamma_shape: f64,
    pub tau_inv_gamma_scale: f64,
    /// Inverse-gamma (shape, scale) hyper-prior on the truncated-normal
    /// locations (local-hyper family).
    pub mu_inv_gamma_shape: f64,
    pub mu_inv_gamma_scale: f64,
    /// (τ, r) of the half-piMOM hyper-prior on the truncated-normal scales
    /// (local-hyper family).
    pub sigma_hyper_pimom_tau: f64,
    pub sigma_hyper_pimom_r: f64,
    /// Half-t prior on the dispersion-hierarchy precision τ0.
    pub half_t_nu: f64,
    pub half_t_scale: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            family: PriorFamily::NonlocalPimomHyper,
            r: 2.0,
            fixed_tau: 1.0,
            fixed_sigma: 1.0,
            tau_hyper_pimom_tau: 1.0,
            tau_hyper_pimom_r: 2.0,
            tau_inv_gamma_shape: 2.0,
            tau_inv_gamma_scale: 2.0,
            mu_inv_gamma_shape: 2.0,
            mu_inv_gamma_scale: 2.0,
            sigma_hyper_pimom_tau: 1.0,
            sigma_hyper_pimom_r: 2.0,
            half_t_nu: 4.0,
            half_t_scale: 1.0,
        }
    }
}

impl PriorConfig {
    pub fn with_family(family: PriorFamily) -> Self {
        PriorConfig { family, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r", self.r),
            ("fixed_tau", self.fixed_tau),
            ("fixed_sigma", self.fixed_sigma),
            ("tau_hyper_pimom_tau", self.tau_hyper_pimom_tau),
            ("tau_hyper_pimom_r", self.tau_hyper_pimom_r),
            ("tau_inv_gamma_shape", self.tau_inv_gamma_shape),
            ("tau_inv_gamma_scale", self.tau_inv_gamma_scale),
            ("mu_inv_gamma_shape", self.mu_inv_gamma_shape),
            ("mu_inv_gamma_scale", self.mu_inv_gamma_scale),
            ("sigma_hyper_pimom_tau", self.sigma_hyper_pimom_tau),
            ("sigma_hyper_pimom_r", self.sigma_hyper_pimom_r),
            ("half_t_nu", self.half_t_nu),
            ("half_t_scale", self.half_t_scale),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidConfig(format!("{name} = {value} must be positive")));
            }
        }
        Ok(())
    }

    /// Whether the family carries sampled hyper-parameters.
    pub fn has_effect_hypers(&self) -> bool {
        !matches!(self.family, PriorFamily::LocalFixed | PriorFamily::NonlocalFixed)
    }
}

/// Per-sign effect hyper-parameters for one modality. Only the fields the
/// configured family uses are ever read or updated; the rest stay at their
/// initial values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedScales {
    pub tau_pos: f64,
    pub tau_neg: f64,
    pub mu_pos: f64,
    pub mu_neg: f64,
    pub sigma_pos: f64,
    pub sigma_neg: f64,
}

impl SignedScales {
    fn init(config: &PriorConfig) -> Self {
        SignedScales {
            tau_pos: config.fixed_tau,
            tau_neg: config.fixed_tau,
            mu_pos: if config.family == PriorFamily::LocalHyper { 1.0 } else { 0.0 },
            mu_neg: if config.family == PriorFamily::LocalHyper { 1.0 } else { 0.0 },
            sigma_pos: config.fixed_sigma,
            sigma_neg: config.fixed_sigma,
        }
    }

    pub fn tau(&self, sign: EffectSign) -> f64 {
        match sign {
            EffectSign::Positive => self.tau_pos,
            EffectSign::Negative => self.tau_neg,
        }
    }

    pub fn mu(&self, sign: EffectSign) -> f64 {
        match sign {
            EffectSign::Positive => self.mu_pos,
            EffectSign::Negative => self.mu_neg,
        }
    }

    pub fn sigma(&self, sign: EffectSign) -> f64 {
        match sign {
            EffectSign::Positive => self.sigma_pos,
            EffectSign::Negative => self.sigma_neg,
        }
    }
}

/// Which experiment a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Rna,
    Gwas,
}

/// All sampled hyper-parameters: per-modality per-sign effect scales plus the
/// dispersion hierarchy (μ0, τ0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperState {
    pub rna: SignedScales,
    pub gwas: SignedScales,
    pub mu0: f64,
    pub tau0: f64,
}

impl HyperState {
    pub fn init(config: &PriorConfig) -> Self {
        HyperState {
            rna: SignedScales::init(config),
            gwas: SignedScales::init(config),
            mu0: 0.5f64.ln(),
            tau0: 1.0,
        }
    }

    pub fn scales(&self, modality: Modality) -> &SignedScales {
        match modality {
            Modality::Rna => &self.rna,
            Modality::Gwas => &self.gwas,
        }
    }

    pub fn scales_mut(&mut self, modality: Modality) -> &mut SignedScales {
        match modality {
            Modality::Rna => &mut self.rna,
            Modality::Gwas => &mut self.gwas,
        }
    }
}

/// Log prior density of one gene effect given its label. A null label with an
/// exactly-zero effect contributes 0 (the point mass); any sign/label mismatch
/// has zero prior support.
pub fn log_effect_prior(
    effect: f64,
    label: GeneLabel,
    modality: Modality,
    config: &PriorConfig,
    hyper: &HyperState,
) -> f64 {
    let Some(sign) = EffectSign::of_label(label) else {
        return if effect == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    };
    if !sign.contains(effect) {
        return f64::NEG_INFINITY;
    }
    let scales = hyper.scales(modality);
    match config.family {
        PriorFamily::LocalFixed => log_half_normal(effect, scales.sigma(sign), sign),
        PriorFamily::LocalHyper => log_truncated_normal(effect, scales.mu(sign), scales.sigma(sign), sign),
        PriorFamily::NonlocalFixed | PriorFamily::NonlocalPimomHyper | PriorFamily::NonlocalInvGammaHyper => {
            log_half_pimom(effect, scales.tau(sign), config.r, sign)
        }
    }
}

/// Draw one effect from its prior given the label; this is also the
/// reversible-jump birth proposal, which is what makes the prior terms cancel
/// in the acceptance ratio.
pub fn sample_effect_prior<R: Rng + ?Sized>(
    label: GeneLabel,
    modality: Modality,
    config: &PriorConfig,
    hyper: &HyperState,
    rng: &mut R,
) -> f64 {
    let Some(sign) = EffectSign::of_label(label) else {
        return 0.0;
    };
    let scales = hyper.scales(modality);
    match config.family {
        PriorFamily::LocalFixed => {
            let z: f64 = StandardNormal.sample(rng);
            sign.signum() * (scales.sigma(sign) * z).abs().max(f64::MIN_POSITIVE)
        }
        PriorFamily::LocalHyper => sample_truncated_normal(scales.mu(sign), scales.sigma(sign), sign, rng),
        PriorFamily::NonlocalFixed | PriorFamily::NonlocalPimomHyper | PriorFamily::NonlocalInvGammaHyper => {
            sample_half_pimom(scales.tau(sign), config.r, sign, rng)
        }
    }
}

/// Log hyper-prior density of the family-specific scales for one modality.
pub fn log_scale_hyper_prior(scales: &SignedScales, config: &PriorConfig) -> f64 {
    match config.family {
        PriorFamily::LocalFixed | PriorFamily::NonlocalFixed => 0.0,
        PriorFamily::NonlocalPimomHyper => {
            log_half_pimom(scales.tau_pos, config.tau_hyper_pimom_tau, config.tau_hyper_pimom_r, EffectSign::Positive)
                + log_half_pimom(scales.tau_neg, config.tau_hyper_pimom_tau, config.tau_hyper_pimom_r, EffectSign::Positive)
        }
        PriorFamily::NonlocalInvGammaHyper => {
            log_inv_gamma(scales.tau_pos, config.tau_inv_gamma_shape, config.tau_inv_gamma_scale)
                + log_inv_gamma(scales.tau_neg, config.tau_inv_gamma_shape, config.tau_inv_gamma_scale)
        }
        PriorFamily::LocalHyper => {
            log_inv_gamma(scales.mu_pos, config.mu_inv_gamma_shape, config.mu_inv_gamma_scale)
                + log_inv_gamma(scales.mu_neg, config.mu_inv_gamma_shape, config.mu_inv_gamma_scale)
                + log_half_pimom(scales.sigma_pos, config.sigma_hyper_pimom_tau, config.sigma_hyper_pimom_r, EffectSign::Positive)
                + log_half_pimom(scales.sigma_neg, config.sigma_hyper_pimom_tau, config.sigma_hyper_pimom_r, EffectSign::Positive)
        }
    }
}

/// Log density of the full hyper-parameter block: the dispersion hierarchy
/// (log φ_j ~ N(μ0, precision τ0), μ0 ~ N(0, precision 1e-2), τ0 ~ half-t)
/// when the RNA-seq branch is active, plus the family-specific scale
/// hyper-priors for each active modality.
pub fn log_hyper_prior(
    log_phis: &[f64],
    hyper: &HyperState,
    config: &PriorConfig,
    rna_active: bool,
    gwas_active: bool,
) -> f64 {
    let mut value = 0.0;
    if rna_active {
        if hyper.tau0 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        for &lp in log_phis {
            value += log_normal_prec_pdf(lp, hyper.mu0, hyper.tau0);
        }
        value += log_normal_prec_pdf(hyper.mu0, 0.0, MU0_PRECISION);
        value += log_half_t(hyper.tau0, config.half_t_nu, config.half_t_scale);
        value += log_scale_hyper_prior(&hyper.rna, config);
    }
    if gwas_active {
        value += log_scale_hyper_prior(&hyper.gwas, config);
    }
    value
}
