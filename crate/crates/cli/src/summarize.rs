use anyhow::Result;
use three_groups::io::{write_log_prior_curve, write_summary, write_volcano};
use three_groups::metrics::volcano_data;
use three_groups::priors::Modality;
use three_groups::trace::{summarize, Trace};

use crate::config::RunConfig;
use crate::{SummarizeArgs, ValidationFailure};

pub fn run(args: SummarizeArgs) -> Result<()> {
    let config = RunConfig::load(args.config.as_deref())?;
    let hash = config.hash();

    let mut traces = Vec::new();
    for path in &args.trace {
        let (trace, warning) = Trace::read_jsonl_lenient(path)?;
        if let Some(warning) = warning {
            eprintln!("summarize: warning: {warning}");
        }
        if trace.records.is_empty() {
            return Err(ValidationFailure(format!("{} has no readable records", path.display())).into());
        }
        traces.push(trace);
    }
    let burn_in = args.burnin.unwrap_or(traces[0].header.burn_in);

    crate::prepare_out_dir(&args.out, args.force)?;
    let trace_refs: Vec<&Trace> = traces.iter().collect();
    let summary = summarize(&trace_refs, burn_in)?;
    write_summary(&args.out.join("summary.tsv"), &summary, &hash)?;

    for table in volcano_data(&summary) {
        let name = match table.modality {
            Modality::Rna => "volcano_rna.tsv",
            Modality::Gwas => "volcano_gwas.tsv",
        };
        write_volcano(&args.out.join(name), &table, &hash)?;
    }

    write_log_prior_curve(&args.out.join("log_prior_curve.tsv"), args.prior_curve_j, &config.dirichlet, &hash)?;

    eprintln!(
        "summarize: {} gene(s) over {} retained iteration(s); outputs in {}",
        summary.genes.len(),
        summary.retained_iterations,
        args.out.display()
    );
    Ok(())
}
