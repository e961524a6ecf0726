use std::io::Write;

use metamix::da2::{sample_candidates, SamplerConfig, TokenDistribution};
use metamix::synth::{
    generate_dataset, generate_world, oracle_fit_samples, oracle_loss, DatasetOptions, SyntheticWorld,
};
use metamix::{DomainVector, Error, MixtureRatio, Result};
use serde_json::json;

use crate::args::{DatasetArgs, FitSamplesArgs, OracleArgs, WorldArgs};
use crate::load;
use crate::output::Run;

pub fn world(args: &WorldArgs) -> Result<()> {
    let world = generate_world(args.n, args.alphabet, args.doc_length, args.seed)?;
    Run::new(Some(args.seed), args)?.write_json(&args.out, &world)
}

pub fn dataset(args: &DatasetArgs) -> Result<()> {
    let world = SyntheticWorld::read(&args.world)?;
    let weights = DomainVector::from_input(&args.weights)?;
    let options = DatasetOptions {
        doc_count: args.docs,
        seed: args.seed,
        include_labels: args.labels,
    };
    let generated = generate_dataset(&world, &weights, &options, &args.out)?;
    Run::new(Some(args.seed), args)?
        .input("world", &args.world)?
        .write_sidecar(&args.out)?;
    crate::output::report(json!({ "docs": generated.labels.len(), "truth": generated.truth_path }));
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<()> {
    let world = SyntheticWorld::read(&args.world)?;
    let (matrix, _) = load::matrix(&args.matrix)?;
    let target = load::vector(&args.valid)?;
    let mut run = Run::new(None, args)?
        .input("world", &args.world)?
        .input("matrix", &args.matrix)?
        .input("valid", &args.valid)?;
    match (&args.ratio, &args.grid) {
        (Some(ratio), _) => {
            let r = MixtureRatio::from_input(ratio)?;
            let loss = oracle_loss(&world, &r, &matrix, &target)?;
            run.write_json(&args.out, &json!({ "ratio": r, "loss": loss }))
        }
        (None, Some(grid)) => {
            run = run.input("grid", grid)?;
            let rows = load::grid(grid)?
                .into_iter()
                .map(|(label, r)| Ok((label, oracle_loss(&world, &r, &matrix, &target)?.weighted)))
                .collect::<Result<Vec<_>>>()?;
            run.write_csv(&args.out, &super::scores_csv(rows))
        }
        (None, None) => unreachable!("clap requires --ratio or --grid"),
    }
}

pub fn fit_samples(args: &FitSamplesArgs) -> Result<()> {
    let world = SyntheticWorld::read(&args.world)?;
    let (matrix, _) = load::matrix(&args.matrix)?;
    let set = sample_candidates(
        &TokenDistribution::uniform(matrix.m())?,
        &SamplerConfig::new(args.count, args.gamma, args.seed),
        None,
    )?;
    let samples = oracle_fit_samples(&world, &matrix, &set.candidates)?;
    let mut text = Vec::new();
    for s in &samples {
        serde_json::to_writer(&mut text, s)?;
        text.push(b'\n');
    }
    let mut file = std::fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
    file.write_all(&text).map_err(|e| Error::io(&args.out, e))?;
    Run::new(Some(args.seed), args)?
        .input("world", &args.world)?
        .input("matrix", &args.matrix)?
        .write_sidecar(&args.out)
}
