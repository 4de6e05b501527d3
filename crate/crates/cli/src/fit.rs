use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use three_groups::data::{validate_gwas, validate_rnaseq, GwasDataset, RnaSeqDataset};
use three_groups::io::{
    read_gwas_dataset, read_gwas_dataset_from_genotypes, read_rna_dataset, schema_line, write_summary,
};
use three_groups::priors::PriorFamily;
use three_groups::sampler::{run_chain, ModalitySet, TraceEvent};
use three_groups::trace::{summarize, Trace};

use crate::config::{DataSection, RunConfig};
use crate::{FitArgs, ValidationFailure};

fn resolve_data_paths(data: &DataSection) -> DataSection {
    match &data.replicate {
        None => data.clone(),
        Some(dir) => {
            let in_dir = |name: &str| -> Option<PathBuf> {
                let path = dir.join(name);
                path.exists().then_some(path)
            };
            DataSection {
                replicate: data.replicate.clone(),
                rna_counts: data.rna_counts.clone().or_else(|| in_dir("rna_counts.tsv")),
                rna_samples: data.rna_samples.clone().or_else(|| in_dir("rna_samples.tsv")),
                rna_genes: data.rna_genes.clone().or_else(|| in_dir("rna_genes.tsv")),
                rna_covariates: data.rna_covariates.clone().or_else(|| in_dir("rna_covariates.tsv")),
                gwas_carrier: data.gwas_carrier.clone().or_else(|| in_dir("gwas_carrier.tsv")),
                gwas_genotypes: data.gwas_genotypes.clone(),
                gwas_variant_map: data.gwas_variant_map.clone(),
                gwas_outcome: data.gwas_outcome.clone().or_else(|| in_dir("gwas_outcome.tsv")),
                gwas_covariates: data.gwas_covariates.clone().or_else(|| in_dir("gwas_covariates.tsv")),
            }
        }
    }
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| {
        ValidationFailure(format!("the configured modality needs {what}; set it in [data] or pass --replicate")).into()
    })
}

fn load_datasets(
    data: &DataSection,
    modality: ModalitySet,
) -> Result<(Option<RnaSeqDataset>, Option<GwasDataset>)> {
    let rna = if modality.rna_active() {
        let counts = require(&data.rna_counts, "an RNA-seq counts file")?;
        let samples = require(&data.rna_samples, "an RNA-seq sample table")?;
        Some(read_rna_dataset(counts, samples, data.rna_genes.as_deref(), data.rna_covariates.as_deref())?)
    } else {
        None
    };
    let gwas = if modality.gwas_active() {
        let outcome = require(&data.gwas_outcome, "a GWAS outcome file")?;
        let dataset = match (&data.gwas_carrier, &data.gwas_genotypes) {
            (Some(carrier), _) => read_gwas_dataset(carrier, outcome, data.gwas_covariates.as_deref())?,
            (None, Some(genotypes)) => {
                let map = require(&data.gwas_variant_map, "a variant-to-gene map for the genotype matrix")?;
                let (dataset, dropped) =
                    read_gwas_dataset_from_genotypes(genotypes, map, outcome, data.gwas_covariates.as_deref())?;
                if dropped > 0 {
                    eprintln!("fit: dropped {dropped} unmapped variant(s) during SNV collapse");
                }
                dataset
            }
            (None, None) => {
                return Err(ValidationFailure(
                    "the configured modality needs a GWAS carrier matrix or genotypes + variant map".into(),
                )
                .into())
            }
        };
        Some(dataset)
    } else {
        None
    };
    Ok((rna, gwas))
}

fn check_validity(rna: Option<&RnaSeqDataset>, gwas: Option<&GwasDataset>) -> Result<()> {
    let mut violations = Vec::new();
    if let Some(rna) = rna {
        violations.extend(validate_rnaseq(rna).violations.into_iter().map(|v| format!("rna-seq: {v}")));
    }
    if let Some(gwas) = gwas {
        violations.extend(validate_gwas(gwas).violations.into_iter().map(|v| format!("gwas: {v}")));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationFailure(format!("dataset validation failed:\n  {}", violations.join("\n  "))).into())
    }
}

/// Rough memory footprint: datasets, per-gene chain state, and the retained
/// trace records.
fn estimate_ram_bytes(rna: Option<&RnaSeqDataset>, gwas: Option<&GwasDataset>, config: &RunConfig) -> u64 {
    let mut union: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
    let mut data = 0u64;
    if let Some(rna) = rna {
        union.extend(rna.gene_ids.iter().map(String::as_str));
        data += (rna.n_samples() * rna.n_genes()) as u64 * 4;
    }
    if let Some(gwas) = gwas {
        union.extend(gwas.gene_ids.iter().map(String::as_str));
        data += (gwas.n_individuals() * gwas.n_genes()) as u64 * 5;
    }
    let j = union.len() as u64;
    let state = j * 16 * 8;
    let records = (config.chain.n_iter / config.chain.thinning) as u64 * config.chain.chains;
    let per_record = j * (1 + 8 * rna.is_some() as u64) + 200;
    data + state + records * per_record
}

pub fn run(args: FitArgs) -> Result<()> {
    let mut config = RunConfig::load(args.config.as_deref())?;
    if let Some(replicate) = &args.replicate {
        config.data.replicate = Some(replicate.clone());
    }
    if let Some(modality) = &args.modality {
        config.chain.modality = ModalitySet::from_cli_name(modality)?;
    }
    if let Some(family) = &args.family {
        config.prior.family = PriorFamily::from_cli_name(family)?;
    }
    if let Some(iters) = args.iters {
        config.chain.n_iter = iters;
    }
    if let Some(burnin) = args.burnin {
        config.chain.burn_in = burnin;
    }
    if let Some(chains) = args.chains {
        config.chain.chains = chains;
    }
    if let Some(workers) = args.workers {
        config.chain.workers = workers;
    }
    if let Some(seed) = args.seed {
        config.chain.seed = seed;
    }
    if config.chain.chains == 0 {
        return Err(ValidationFailure("at least one chain is required".into()).into());
    }
    let hash = config.hash();

    let data = resolve_data_paths(&config.data);
    let (rna, gwas) = load_datasets(&data, config.chain.modality)?;
    check_validity(rna.as_ref(), gwas.as_ref())?;

    let estimate = estimate_ram_bytes(rna.as_ref(), gwas.as_ref(), &config);
    eprintln!("fit: estimated memory footprint {:.1} MB (datasets + state + trace)", estimate as f64 / 1e6);
    if let Some(limit_gb) = args.max_ram_estimate {
        if estimate as f64 > limit_gb * 1e9 {
            return Err(ValidationFailure(format!(
                "estimated footprint {:.2} GB exceeds --max-ram-estimate {limit_gb} GB",
                estimate as f64 / 1e9
            ))
            .into());
        }
    }

    crate::prepare_out_dir(&args.out, args.force)?;
    let started = std::time::Instant::now();

    let n_chains = config.chain.chains;
    let workers = config.chain.workers.max(1).min(n_chains as usize);
    let next = AtomicU64::new(0);
    let results: Vec<Mutex<Option<three_groups::Result<Trace>>>> =
        (0..n_chains).map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let chain_id = next.fetch_add(1, Ordering::SeqCst);
                if chain_id >= n_chains {
                    break;
                }
                let result = run_one_chain(&config, chain_id, &hash, &args.out, rna.as_ref(), gwas.as_ref());
                *results[chain_id as usize].lock().unwrap() = Some(result);
            });
        }
    });

    let mut traces = Vec::with_capacity(n_chains as usize);
    for slot in results {
        traces.push(slot.into_inner().unwrap().expect("worker stored a result")?);
    }

    let trace_refs: Vec<&Trace> = traces.iter().collect();
    let summary = summarize(&trace_refs, config.chain.burn_in)?;
    write_summary(&args.out.join("summary.tsv"), &summary, &hash)?;
    write_diagnostics(&args.out.join("diagnostics.tsv"), &traces, &hash)?;

    eprintln!(
        "fit: {} chain(s) × {} iterations ({} burn-in) finished in {:.2}s; outputs in {} (config {hash})",
        n_chains,
        config.chain.n_iter,
        config.chain.burn_in,
        started.elapsed().as_secs_f64(),
        args.out.display()
    );
    Ok(())
}

fn run_one_chain(
    config: &RunConfig,
    chain_id: u64,
    hash: &str,
    out: &Path,
    rna: Option<&RnaSeqDataset>,
    gwas: Option<&GwasDataset>,
) -> three_groups::Result<Trace> {
    let chain_config = config.chain_config(chain_id, hash);
    let path = out.join(format!("trace_chain{chain_id:02}.jsonl"));
    let file = std::fs::File::create(&path)
        .map_err(|e| three_groups::Error::Io { path: path.clone(), source: e })?;
    let mut writer = std::io::BufWriter::new(file);
    let mut sink = |event: TraceEvent<'_>| -> std::io::Result<()> {
        match event {
            TraceEvent::Header(header) => serde_json::to_writer(&mut writer, header)?,
            TraceEvent::Record(record) => serde_json::to_writer(&mut writer, record)?,
        }
        writer.write_all(b"\n")
    };
    let trace = run_chain(rna, gwas, &chain_config, Some(&mut sink))?;
    writer.flush().map_err(|e| three_groups::Error::Io { path, source: e })?;
    Ok(trace)
}

fn write_diagnostics(path: &Path, traces: &[Trace], hash: &str) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(schema_line("diagnostics", hash).as_bytes())?;
    writeln!(w, "chain\tmetric\tvalue")?;
    for trace in traces {
        let chain = trace.header.chain_id;
        let d = &trace.diagnostics;
        for (block, stats) in &d.blocks {
            writeln!(w, "{chain}\tacceptance_{block}\t{}", stats.rate())?;
            writeln!(w, "{chain}\tattempts_{block}\t{}", stats.attempted)?;
        }
        for (name, value) in &d.ess {
            writeln!(w, "{chain}\tess_{name}\t{value}")?;
        }
        writeln!(w, "{chain}\tclamp_events\t{}", d.clamp_events)?;
        writeln!(w, "{chain}\tmax_log_post_drift\t{}", d.max_log_post_drift)?;
        writeln!(w, "{chain}\tcheckpoints\t{}", d.n_checkpoints)?;
    }
    Ok(())
}
