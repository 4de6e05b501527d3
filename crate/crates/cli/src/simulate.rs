use anyhow::{Context, Result};
use three_groups::io::{read_thin_baseline, write_archive};

use crate::config::RunConfig;
use crate::SimulateArgs;

pub fn run(args: SimulateArgs) -> Result<()> {
    let mut config = RunConfig::load(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.sim.design.seed = seed;
    }
    if let Some(reps) = args.reps {
        config.sim.replicates = reps;
    }
    config.sim.design.validate()?;
    let hash = config.hash();

    let baseline = read_thin_baseline(&config.sim.design.baseline).context("loading thinning baseline")?;
    let baseline_ref = baseline.as_ref().map(|(counts, ids)| (counts, ids.as_slice()));

    crate::prepare_out_dir(&args.out, args.force)?;
    let started = std::time::Instant::now();
    write_archive(&config.sim.design, config.sim.replicates, baseline_ref, &args.out, &hash)?;
    eprintln!(
        "simulate: wrote {} replicate(s) to {} in {:.2}s (config {hash})",
        config.sim.replicates,
        args.out.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
