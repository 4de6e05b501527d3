//! Delimited-text readers and writers for datasets, ground truth, replicate
//! archives, summaries, and metric tables.
//!
//! The delimiter is autodetected from the extension (`.csv` is comma,
//! anything else tab). Every emitted file starts with a `#` comment line
//! carrying the schema name, version, and config hash; readers skip `#`
//! lines. Missing values are not permitted in any input.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::data::{GeneLabel, GwasDataset, LabelVector, RnaSeqDataset};
use crate::error::{Error, Result};
use crate::metrics::VolcanoTable;
use crate::priors::{DirichletConfig, Modality};
use crate::simulate::{gen_replicate, Baseline, Replicate, SimConfig, SimTruth};
use crate::trace::PosteriorSummary;

pub const SCHEMA_VERSION: u32 = 1;

fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => b',',
        _ => b'\t',
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    path: PathBuf,
}

fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter_for(path))
        .comment(Some(b'#'))
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let header: Vec<String> =
        reader.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, i + 2, e.to_string()))?;
        let row: Vec<String> = record.iter().map(String::from).collect();
        if row.iter().any(|f| f.is_empty()) {
            return Err(parse_err(path, i + 2, "missing value (empty field)"));
        }
        rows.push(row);
    }
    Ok(Table { header, rows, path: path.to_path_buf() })
}

impl Table {
    fn parse<T: std::str::FromStr>(&self, row: usize, col: usize, what: &str) -> Result<T> {
        self.rows[row][col].parse().map_err(|_| {
            parse_err(&self.path, row + 2, format!("bad {what} `{}` in column {}", self.rows[row][col], col + 1))
        })
    }
}

/// Counts file: genes as rows, samples as columns, header row of sample ids,
/// first column the gene id. Returns (gene_ids, sample_ids, sample × gene).
pub fn read_counts(path: &Path) -> Result<(Vec<String>, Vec<String>, Array2<u32>)> {
    let table = read_table(path)?;
    if table.header.len() < 2 {
        return Err(parse_err(path, 1, "counts file needs a gene id column and at least one sample"));
    }
    let sample_ids: Vec<String> = table.header[1..].to_vec();
    let n = sample_ids.len();
    let j = table.rows.len();
    let mut gene_ids = Vec::with_capacity(j);
    let mut counts = Array2::<u32>::zeros((n, j));
    for (g, row) in table.rows.iter().enumerate() {
        gene_ids.push(row[0].clone());
        for i in 0..n {
            counts[[i, g]] = table.parse(g, i + 1, "count")?;
        }
    }
    Ok((gene_ids, sample_ids, counts))
}

/// Sample metadata: columns sample_id, treatment, log_library_size.
pub fn read_rna_samples(path: &Path) -> Result<(Vec<String>, Vec<u8>, Vec<f64>)> {
    let table = read_table(path)?;
    let mut ids = Vec::new();
    let mut treatment = Vec::new();
    let mut log_lib = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() < 3 {
            return Err(parse_err(path, r + 2, "expected sample_id, treatment, log_library_size"));
        }
        ids.push(row[0].clone());
        treatment.push(table.parse(r, 1, "treatment indicator")?);
        log_lib.push(table.parse(r, 2, "log library size")?);
    }
    Ok((ids, treatment, log_lib))
}

/// Gene metadata: columns gene_id, log_gene_length.
pub fn read_rna_genes(path: &Path) -> Result<Vec<(String, f64)>> {
    let table = read_table(path)?;
    let mut out = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() < 2 {
            return Err(parse_err(path, r + 2, "expected gene_id, log_gene_length"));
        }
        out.push((row[0].clone(), table.parse(r, 1, "log gene length")?));
    }
    Ok(out)
}

/// Covariates: first column the row id, remaining columns real-valued.
pub fn read_covariates(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let table = read_table(path)?;
    let l = table.header.len().saturating_sub(1);
    let n = table.rows.len();
    let mut ids = Vec::with_capacity(n);
    let mut values = Array2::<f64>::zeros((n, l));
    for (r, row) in table.rows.iter().enumerate() {
        ids.push(row[0].clone());
        for c in 0..l {
            values[[r, c]] = table.parse(r, c + 1, "covariate")?;
        }
    }
    Ok((ids, values))
}

/// 0/1/2-valued matrix with individuals as rows: first column the individual
/// id, header row of column ids (genes for carrier files, variants for
/// genotype files).
pub fn read_indicator_matrix(path: &Path) -> Result<(Vec<String>, Vec<String>, Array2<u8>)> {
    let table = read_table(path)?;
    if table.header.is_empty() {
        return Err(parse_err(path, 1, "empty header"));
    }
    let col_ids: Vec<String> = table.header[1..].to_vec();
    let n = table.rows.len();
    let mut row_ids = Vec::with_capacity(n);
    let mut values = Array2::<u8>::zeros((n, col_ids.len()));
    for (r, row) in table.rows.iter().enumerate() {
        row_ids.push(row[0].clone());
        for c in 0..col_ids.len() {
            values[[r, c]] = table.parse(r, c + 1, "indicator")?;
        }
    }
    Ok((row_ids, col_ids, values))
}

/// Outcome file: columns individual_id, outcome (0/1).
pub fn read_outcome(path: &Path) -> Result<(Vec<String>, Vec<u8>)> {
    let table = read_table(path)?;
    let mut ids = Vec::new();
    let mut outcome = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() < 2 {
            return Err(parse_err(path, r + 2, "expected individual_id, outcome"));
        }
        ids.push(row[0].clone());
        outcome.push(table.parse(r, 1, "outcome")?);
    }
    Ok((ids, outcome))
}

/// Variant-to-gene map: two columns, variant id then gene id. A variant may
/// appear on several rows (one per gene).
pub fn read_variant_map(path: &Path) -> Result<Vec<(String, String)>> {
    let table = read_table(path)?;
    let mut out = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() < 2 {
            return Err(parse_err(path, r + 2, "expected variant, gene"));
        }
        out.push((row[0].clone(), row[1].clone()));
    }
    Ok(out)
}

fn reorder_by<T: Clone>(
    reference: &[String],
    ids: &[String],
    values: impl Fn(usize) -> T,
    path: &Path,
    what: &str,
) -> Result<Vec<T>> {
    let pos: std::collections::HashMap<&str, usize> =
        ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    reference
        .iter()
        .map(|id| {
            pos.get(id.as_str())
                .map(|&i| values(i))
                .ok_or_else(|| parse_err(path, 0, format!("{what} is missing id `{id}`")))
        })
        .collect()
}

/// Assemble an RNA-seq dataset from its component files. The counts file
/// fixes both the gene order and the sample order; the other files may list
/// rows in any order but must cover the same ids.
pub fn read_rna_dataset(
    counts_path: &Path,
    samples_path: &Path,
    genes_path: Option<&Path>,
    covariates_path: Option<&Path>,
) -> Result<RnaSeqDataset> {
    let (gene_ids, sample_ids, counts) = read_counts(counts_path)?;
    let (meta_ids, treatment, log_lib) = read_rna_samples(samples_path)?;
    let treatment = reorder_by(&sample_ids, &meta_ids, |i| treatment[i], samples_path, "sample table")?;
    let log_library_size = reorder_by(&sample_ids, &meta_ids, |i| log_lib[i], samples_path, "sample table")?;

    let log_gene_length = match genes_path {
        Some(path) => {
            let entries = read_rna_genes(path)?;
            let ids: Vec<String> = entries.iter().map(|(id, _)| id.clone()).collect();
            reorder_by(&gene_ids, &ids, |i| entries[i].1, path, "gene table")?
        }
        None => vec![0.0; gene_ids.len()],
    };

    let covariates = match covariates_path {
        Some(path) => {
            let (ids, values) = read_covariates(path)?;
            let rows =
                reorder_by(&sample_ids, &ids, |i| values.row(i).to_vec(), path, "covariate table")?;
            let l = values.ncols();
            Array2::from_shape_vec((sample_ids.len(), l), rows.concat())
                .expect("row-major covariate reshape")
        }
        None => Array2::zeros((sample_ids.len(), 0)),
    };

    RnaSeqDataset::new(counts, treatment, log_library_size, log_gene_length, covariates, gene_ids, sample_ids)
}

fn assemble_gwas(
    individual_ids: Vec<String>,
    gene_ids: Vec<String>,
    carrier: Array2<u8>,
    outcome_path: &Path,
    covariates_path: Option<&Path>,
) -> Result<GwasDataset> {
    let (outcome_ids, outcome) = read_outcome(outcome_path)?;
    let outcome = reorder_by(&individual_ids, &outcome_ids, |i| outcome[i], outcome_path, "outcome table")?;

    let n = individual_ids.len();
    let covariates = match covariates_path {
        Some(path) => {
            let (ids, values) = read_covariates(path)?;
            let rows = reorder_by(&individual_ids, &ids, |i| values.row(i).to_vec(), path, "covariate table")?;
            let l = values.ncols();
            let mut with_intercept = Array2::<f64>::zeros((n, l + 1));
            for (r, row) in rows.iter().enumerate() {
                with_intercept[[r, 0]] = 1.0;
                for (c, &v) in row.iter().enumerate() {
                    with_intercept[[r, c + 1]] = v;
                }
            }
            with_intercept
        }
        None => Array2::from_elem((n, 1), 1.0),
    };

    GwasDataset::new(outcome, carrier, covariates, gene_ids, individual_ids)
}

/// Assemble a GWAS dataset from a carrier matrix, outcomes, and optional
/// covariates. An all-ones intercept column is prepended to the covariates.
pub fn read_gwas_dataset(
    carrier_path: &Path,
    outcome_path: &Path,
    covariates_path: Option<&Path>,
) -> Result<GwasDataset> {
    let (individual_ids, gene_ids, carrier) = read_indicator_matrix(carrier_path)?;
    assemble_gwas(individual_ids, gene_ids, carrier, outcome_path, covariates_path)
}

/// Assemble a GWAS dataset from raw 0/1/2 genotypes and a variant-to-gene
/// map, collapsing to carrier indicators under the dominant model. Also
/// returns the number of unmapped variants that were dropped.
pub fn read_gwas_dataset_from_genotypes(
    genotypes_path: &Path,
    variant_map_path: &Path,
    outcome_path: &Path,
    covariates_path: Option<&Path>,
) -> Result<(GwasDataset, usize)> {
    let (individual_ids, variant_ids, genotypes) = read_indicator_matrix(genotypes_path)?;
    let map = read_variant_map(variant_map_path)?;
    let collapsed = crate::data::collapse_snvs(&map, &variant_ids, &genotypes)?;
    let dataset = assemble_gwas(
        individual_ids,
        collapsed.gene_ids,
        collapsed.carrier,
        outcome_path,
        covariates_path,
    )?;
    Ok((dataset, collapsed.dropped_variants))
}

/// Ground-truth file layout: gene_id, label (1/2/3), gwas_effect, rna_log2_fc.
pub fn read_truth(path: &Path) -> Result<SimTruth> {
    let table = read_table(path)?;
    let mut gene_ids = Vec::new();
    let mut labels = Vec::new();
    let mut gwas_effect = Vec::new();
    let mut rna_log2_fc = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() < 4 {
            return Err(parse_err(path, r + 2, "expected gene_id, label, gwas_effect, rna_log2_fc"));
        }
        gene_ids.push(row[0].clone());
        let index: u8 = table.parse(r, 1, "label")?;
        labels.push(GeneLabel::from_index(index)?);
        gwas_effect.push(table.parse(r, 2, "gwas effect")?);
        rna_log2_fc.push(table.parse(r, 3, "rna log2 fold change")?);
    }
    Ok(SimTruth { gene_ids, labels: LabelVector::from_labels(labels), gwas_effect, rna_log2_fc })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// The `#` comment line that opens every emitted file.
pub fn schema_line(kind: &str, config_hash: &str) -> String {
    format!("# three-groups {kind} schema={SCHEMA_VERSION} config={config_hash}\n")
}

pub fn write_rna_dataset(dir: &Path, dataset: &RnaSeqDataset, config_hash: &str) -> Result<()> {
    let counts_path = dir.join("rna_counts.tsv");
    let mut w = create(&counts_path)?;
    w.write_all(schema_line("rna-counts", config_hash).as_bytes()).map_err(io_err(&counts_path))?;
    let mut header = String::from("gene_id");
    for id in &dataset.sample_ids {
        header.push('\t');
        header.push_str(id);
    }
    writeln!(w, "{header}").map_err(io_err(&counts_path))?;
    for g in 0..dataset.n_genes() {
        let mut line = dataset.gene_ids[g].clone();
        for i in 0..dataset.n_samples() {
            line.push('\t');
            line.push_str(&dataset.counts[[i, g]].to_string());
        }
        writeln!(w, "{line}").map_err(io_err(&counts_path))?;
    }

    let samples_path = dir.join("rna_samples.tsv");
    let mut w = create(&samples_path)?;
    w.write_all(schema_line("rna-samples", config_hash).as_bytes()).map_err(io_err(&samples_path))?;
    writeln!(w, "sample_id\ttreatment\tlog_library_size").map_err(io_err(&samples_path))?;
    for i in 0..dataset.n_samples() {
        writeln!(
            w,
            "{}\t{}\t{}",
            dataset.sample_ids[i], dataset.treatment[i], dataset.log_library_size[i]
        )
        .map_err(io_err(&samples_path))?;
    }

    let genes_path = dir.join("rna_genes.tsv");
    let mut w = create(&genes_path)?;
    w.write_all(schema_line("rna-genes", config_hash).as_bytes()).map_err(io_err(&genes_path))?;
    writeln!(w, "gene_id\tlog_gene_length").map_err(io_err(&genes_path))?;
    for g in 0..dataset.n_genes() {
        writeln!(w, "{}\t{}", dataset.gene_ids[g], dataset.log_gene_length[g]).map_err(io_err(&genes_path))?;
    }

    if dataset.n_covariates() > 0 {
        let cov_path = dir.join("rna_covariates.tsv");
        let mut w = create(&cov_path)?;
        w.write_all(schema_line("rna-covariates", config_hash).as_bytes()).map_err(io_err(&cov_path))?;
        let mut header = String::from("sample_id");
        for c in 0..dataset.n_covariates() {
            header.push_str(&format!("\tx{c}"));
        }
        writeln!(w, "{header}").map_err(io_err(&cov_path))?;
        for i in 0..dataset.n_samples() {
            let mut line = dataset.sample_ids[i].clone();
            for c in 0..dataset.n_covariates() {
                line.push('\t');
                line.push_str(&dataset.covariates[[i, c]].to_string());
            }
            writeln!(w, "{line}").map_err(io_err(&cov_path))?;
        }
    }
    Ok(())
}

/// Write the GWAS files. The intercept column that `read_gwas_dataset`
/// prepends is not written, so a write/read round trip is stable.
pub fn write_gwas_dataset(dir: &Path, dataset: &GwasDataset, config_hash: &str) -> Result<()> {
    let carrier_path = dir.join("gwas_carrier.tsv");
    let mut w = create(&carrier_path)?;
    w.write_all(schema_line("gwas-carrier", config_hash).as_bytes()).map_err(io_err(&carrier_path))?;
    let mut header = String::from("individual_id");
    for id in &dataset.gene_ids {
        header.push('\t');
        header.push_str(id);
    }
    writeln!(w, "{header}").map_err(io_err(&carrier_path))?;
    for i in 0..dataset.n_individuals() {
        let mut line = dataset.individual_ids[i].clone();
        for g in 0..dataset.n_genes() {
            line.push('\t');
            line.push_str(&dataset.carrier[[i, g]].to_string());
        }
        writeln!(w, "{line}").map_err(io_err(&carrier_path))?;
    }

    let outcome_path = dir.join("gwas_outcome.tsv");
    let mut w = create(&outcome_path)?;
    w.write_all(schema_line("gwas-outcome", config_hash).as_bytes()).map_err(io_err(&outcome_path))?;
    writeln!(w, "individual_id\toutcome").map_err(io_err(&outcome_path))?;
    for i in 0..dataset.n_individuals() {
        writeln!(w, "{}\t{}", dataset.individual_ids[i], dataset.outcome[i]).map_err(io_err(&outcome_path))?;
    }

    if dataset.n_covariates() > 1 {
        let cov_path = dir.join("gwas_covariates.tsv");
        let mut w = create(&cov_path)?;
        w.write_all(schema_line("gwas-covariates", config_hash).as_bytes()).map_err(io_err(&cov_path))?;
        let mut header = String::from("individual_id");
        for c in 1..dataset.n_covariates() {
            header.push_str(&format!("\tx{c}"));
        }
        writeln!(w, "{header}").map_err(io_err(&cov_path))?;
        for i in 0..dataset.n_individuals() {
            let mut line = dataset.individual_ids[i].clone();
            for c in 1..dataset.n_covariates() {
                line.push('\t');
                line.push_str(&dataset.covariates[[i, c]].to_string());
            }
            writeln!(w, "{line}").map_err(io_err(&cov_path))?;
        }
    }
    Ok(())
}

pub fn write_truth(path: &Path, truth: &SimTruth, config_hash: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(schema_line("truth", config_hash).as_bytes()).map_err(io_err(path))?;
    writeln!(w, "gene_id\tlabel\tgwas_effect\trna_log2_fc").map_err(io_err(path))?;
    for g in 0..truth.gene_ids.len() {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            truth.gene_ids[g],
            truth.labels.get(g).index(),
            truth.gwas_effect[g],
            truth.rna_log2_fc[g]
        )
        .map_err(io_err(path))?;
    }
    Ok(())
}

pub fn replicate_dir_name(replicate: u64) -> String {
    format!("rep_{replicate:03}")
}

/// Write one replicate's dataset files plus its truth file.
pub fn write_replicate(dir: &Path, replicate: &Replicate, config_hash: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_rna_dataset(dir, &replicate.rna, config_hash)?;
    write_gwas_dataset(dir, &replicate.gwas, config_hash)?;
    write_truth(&dir.join("truth.tsv"), &replicate.truth, config_hash)
}

/// Read one replicate directory back into memory.
pub fn read_replicate(dir: &Path) -> Result<Replicate> {
    let rna = read_rna_dataset(
        &dir.join("rna_counts.tsv"),
        &dir.join("rna_samples.tsv"),
        Some(&dir.join("rna_genes.tsv")),
        dir.join("rna_covariates.tsv").exists().then(|| dir.join("rna_covariates.tsv")).as_deref(),
    )?;
    let gwas = read_gwas_dataset(
        &dir.join("gwas_carrier.tsv"),
        &dir.join("gwas_outcome.tsv"),
        dir.join("gwas_covariates.tsv").exists().then(|| dir.join("gwas_covariates.tsv")).as_deref(),
    )?;
    let truth = read_truth(&dir.join("truth.tsv"))?;
    Ok(Replicate { truth, gwas, rna })
}

/// Generate `n_reps` replicates and write the archive: one directory per
/// replicate plus a manifest. Fails if the output directory is non-empty.
pub fn write_archive(
    config: &SimConfig,
    n_reps: u64,
    thin_baseline: Option<(&Array2<u32>, &[String])>,
    out_dir: &Path,
    config_hash: &str,
) -> Result<()> {
    if out_dir.exists() {
        let occupied = std::fs::read_dir(out_dir).map_err(io_err(out_dir))?.next().is_some();
        if occupied {
            return Err(Error::OutputCollision(out_dir.to_path_buf()));
        }
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let manifest_path = out_dir.join("manifest.tsv");
    let mut manifest = create(&manifest_path)?;
    manifest.write_all(schema_line("sim-archive", config_hash).as_bytes()).map_err(io_err(&manifest_path))?;
    writeln!(manifest, "replicate\tseed\tstream\tpath").map_err(io_err(&manifest_path))?;
    for rep in 0..n_reps {
        let replicate = gen_replicate(config, thin_baseline, rep)?;
        let name = replicate_dir_name(rep);
        write_replicate(&out_dir.join(&name), &replicate, config_hash)?;
        writeln!(manifest, "{name}\t{}\t{rep}\t{name}", config.seed).map_err(io_err(&manifest_path))?;
    }
    Ok(())
}

/// Baseline counts for the thinning generator, from a counts-format file.
pub fn read_thin_baseline(baseline: &Baseline) -> Result<Option<(Array2<u32>, Vec<String>)>> {
    match baseline {
        Baseline::SyntheticNb => Ok(None),
        Baseline::ThinCounts { path } => {
            let (_, sample_ids, counts) = read_counts(Path::new(path))?;
            Ok(Some((counts, sample_ids)))
        }
    }
}

fn fmt_opt(value: Option<f64>, mark: bool) -> String {
    match value {
        Some(v) if !mark => v.to_string(),
        _ => "*".to_string(),
    }
}

/// Per-gene report table: occupancy
/// proportions, conditional effects as odds ratios / fold changes (starred
/// when the gene was null in more than 99% of iterations), dispersion mean,
/// and the median-probability-model selection.
pub fn write_summary(path: &Path, summary: &PosteriorSummary, config_hash: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(schema_line("summary", config_hash).as_bytes()).map_err(io_err(path))?;
    writeln!(
        w,
        "gene_id\tp_null\tp_del\tp_ben\tgwas_odds_ratio\trna_fold_change\tdispersion\tmm_selected\tmm_label"
    )
    .map_err(io_err(path))?;
    for gene in &summary.genes {
        let selected = gene.p_null < 0.5;
        let mm_label = if selected { gene.dominant_non_null_label().index().to_string() } else { "1".to_string() };
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            gene.gene_id,
            gene.p_null,
            gene.p_del,
            gene.p_ben,
            fmt_opt(gene.gwas_odds_ratio(), gene.mostly_null),
            fmt_opt(gene.rna_fold_change(), gene.mostly_null),
            fmt_opt(gene.dispersion_mean, false),
            selected as u8,
            mm_label,
        )
        .map_err(io_err(path))?;
    }
    Ok(())
}

/// Read back the columns of `write_summary` needed for scoring:
/// (gene_id, p_null) pairs.
pub fn read_summary_p_null(path: &Path) -> Result<Vec<(String, f64)>> {
    let table = read_table(path)?;
    let p_null_col = table
        .header
        .iter()
        .position(|h| h == "p_null")
        .ok_or_else(|| parse_err(path, 1, "summary file lacks a p_null column"))?;
    let mut out = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        out.push((row[0].clone(), table.parse(r, p_null_col, "p_null")?));
    }
    Ok(out)
}

/// One tidy metrics row: (model, replicate, metric, value).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub model: String,
    pub replicate: String,
    pub metric: String,
    pub value: f64,
}

pub fn write_metrics(path: &Path, rows: &[MetricRow], config_hash: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(schema_line("metrics", config_hash).as_bytes()).map_err(io_err(path))?;
    writeln!(w, "model\treplicate\tmetric\tvalue").map_err(io_err(path))?;
    for row in rows {
        writeln!(w, "{}\t{}\t{}\t{}", row.model, row.replicate, row.metric, row.value).map_err(io_err(path))?;
    }
    Ok(())
}

pub fn write_volcano(path: &Path, table: &VolcanoTable, config_hash: &str) -> Result<()> {
    let mut w = create(path)?;
    let kind = match table.modality {
        Modality::Rna => "volcano-rna",
        Modality::Gwas => "volcano-gwas",
    };
    w.write_all(schema_line(kind, config_hash).as_bytes()).map_err(io_err(path))?;
    writeln!(w, "gene_id\tmarginal_log_effect\tp_include\tmm_cutoff").map_err(io_err(path))?;
    for point in &table.points {
        writeln!(w, "{}\t{}\t{}\t{}", point.gene_id, point.marginal_log_effect, point.p_include, table.mm_cutoff)
            .map_err(io_err(path))?;
    }
    Ok(())
}

/// The log-prior penalty curve: log marginal pmf of a label assignment with k
/// non-null genes (split evenly when k is even, k2 = k3) for the configured J.
pub fn write_log_prior_curve(
    path: &Path,
    n_genes: usize,
    dirichlet: &DirichletConfig,
    config_hash: &str,
) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(schema_line("log-prior-curve", config_hash).as_bytes()).map_err(io_err(path))?;
    writeln!(w, "k_non_null\tlog_prior").map_err(io_err(path))?;
    for k in 0..=n_genes / 2 {
        let counts = crate::data::GroupCounts {
            null: n_genes - 2 * (k / 2) - (k % 2),
            deleterious: k / 2 + (k % 2),
            beneficial: k / 2,
        };
        let lp = crate::priors::log_model_prior(counts, dirichlet);
        writeln!(w, "{k}\t{lp}").map_err(io_err(path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::gen_replicate;

    #[test]
    fn replicate_roundtrip() {
        let config = SimConfig {
            n_genes: 6,
            n_beneficial: 1,
            n_deleterious: 1,
            n_gwas: 15,
            n_rna: 8,
            seed: 3,
            ..Default::default()
        };
        let replicate = gen_replicate(&config, None, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_replicate(dir.path(), &replicate, "deadbeef").unwrap();
        let back = read_replicate(dir.path()).unwrap();
        assert_eq!(back.rna.counts, replicate.rna.counts);
        assert_eq!(back.rna.treatment, replicate.rna.treatment);
        assert_eq!(back.rna.gene_ids, replicate.rna.gene_ids);
        assert_eq!(back.gwas.carrier, replicate.gwas.carrier);
        assert_eq!(back.gwas.outcome, replicate.gwas.outcome);
        // intercept column restored on read
        assert_eq!(back.gwas.covariates, replicate.gwas.covariates);
        assert_eq!(back.truth, replicate.truth);
    }

    #[test]
    fn archive_is_byte_identical_across_runs() {
        let config = SimConfig {
            n_genes: 5,
            n_beneficial: 1,
            n_deleterious: 1,
            n_gwas: 10,
            n_rna: 6,
            seed: 8,
            ..Default::default()
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        write_archive(&config, 2, None, &dir_a.path().join("out"), "cafe").unwrap();
        write_archive(&config, 2, None, &dir_b.path().join("out"), "cafe").unwrap();
        let mut paths: Vec<_> = walk(&dir_a.path().join("out"));
        paths.sort();
        assert!(!paths.is_empty());
        for rel in paths {
            let a = std::fs::read(dir_a.path().join("out").join(&rel)).unwrap();
            let b = std::fs::read(dir_b.path().join("out").join(&rel)).unwrap();
            assert_eq!(a, b, "file {rel:?} differs");
        }
    }

    #[test]
    fn archive_rejects_non_empty_output() {
        let config = SimConfig { n_genes: 3, n_gwas: 4, n_rna: 4, n_beneficial: 0, n_deleterious: 0, ..Default::default() };
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("occupied"), b"x").unwrap();
        assert!(matches!(
            write_archive(&config, 1, None, dir.path(), ""),
            Err(Error::OutputCollision(_))
        ));
    }

    fn walk(root: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for entry in std::fs::read_dir(&dir).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    out.push(path.strip_prefix(root).unwrap().to_path_buf());
                }
            }
        }
        out
    }

    #[test]
    fn rejects_missing_values_and_reads_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        std::fs::write(&path, "# comment\ngene_id,s1,s2\nG1,3,4\nG2,0,9\n").unwrap();
        let (genes, samples, counts) = read_counts(&path).unwrap();
        assert_eq!(genes, vec!["G1", "G2"]);
        assert_eq!(samples, vec!["s1", "s2"]);
        assert_eq!(counts[[1, 0]], 4); // sample s2, gene G1
        assert_eq!(counts[[0, 1]], 0);

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "gene_id,s1\nG1,\n").unwrap();
        assert!(read_counts(&bad).is_err());
    }

    #[test]
    fn truth_file_roundtrip() {
        let config = SimConfig { n_genes: 4, n_beneficial: 1, n_deleterious: 2, n_gwas: 5, n_rna: 4, ..Default::default() };
        let replicate = gen_replicate(&config, None, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.tsv");
        write_truth(&path, &replicate.truth, "").unwrap();
        let back = read_truth(&path).unwrap();
        assert_eq!(back, replicate.truth);
    }

    #[test]
    fn log_prior_curve_is_strictly_decreasing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.tsv");
        write_log_prior_curve(&path, 1000, &DirichletConfig::uniform(), "").unwrap();
        let table = read_table(&path).unwrap();
        let values: Vec<f64> = (0..table.rows.len()).map(|r| table.parse(r, 1, "lp").unwrap()).collect();
        assert_eq!(values.len(), 501);
        for pair in values.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }
}
