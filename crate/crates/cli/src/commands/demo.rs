//! The full pipeline on the bundled six-meta-domain world.
//!
//! Every stage goes through the same code as its subcommand and leaves its file in
//! the output directory, so any step can be rerun by hand.

use std::path::{Path, PathBuf};

use metamix::synth::SyntheticWorld;
use metamix::{DatasetMatrix, DomainVector, Error, Result};
use serde_json::json;

use crate::args::*;
use crate::output::Run;

pub const WORLD: &str = include_str!("../../demo/world.json");
pub const MATRIX: &str = include_str!("../../demo/matrix.json");
pub const VALID: &str = include_str!("../../demo/valid.json");

/// Weight of the first dataset in each grid point; the second gets the rest.
pub const GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn run(args: &DemoArgs) -> Result<()> {
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let at = |name: &str| -> PathBuf { dir.join(name) };
    let seed = args.seed;

    let world: SyntheticWorld = serde_json::from_str(WORLD)?;
    world.validate()?;
    let truth: Vec<Vec<f64>> = serde_json::from_str(MATRIX)?;
    let v_true = DatasetMatrix::new(
        truth
            .iter()
            .map(|c| DomainVector::from_input(c))
            .collect::<Result<_>>()?,
    )?;
    write(&at("world.json"), WORLD)?;
    write(&at("matrix.true.json"), MATRIX)?;
    write(&at("valid.true.json"), VALID)?;
    let valid_true: Vec<f64> = serde_json::from_str(VALID)?;

    super::synth::dataset(&DatasetArgs {
        world: at("world.json"),
        weights: vec![1.0 / world.n as f64; world.n],
        docs: args.train_docs * world.n,
        labels: true,
        seed,
        out: at("train.jsonl"),
    })?;
    super::classifier::train(&TrainArgs {
        corpus: at("train.jsonl"),
        n: world.n,
        seed,
        epochs: 5,
        batch_size: 64,
        learning_rate: 0.1,
        l2: 1e-5,
        buckets: 1 << 18,
        orders: vec![2, 3, 4],
        holdout: 0.1,
        out: at("model.json"),
    })?;

    let mut corpora = Vec::new();
    for (j, column) in v_true.columns().iter().enumerate() {
        let name = format!("d{j}");
        super::synth::dataset(&DatasetArgs {
            world: at("world.json"),
            weights: column.as_slice().to_vec(),
            docs: args.dataset_docs,
            labels: false,
            seed: seed.wrapping_add(100 + j as u64),
            out: at(&format!("{name}.jsonl")),
        })?;
        corpora.push(json!({ "name": name, "path": format!("{name}.jsonl") }));
    }
    super::synth::dataset(&DatasetArgs {
        world: at("world.json"),
        weights: valid_true.clone(),
        docs: args.dataset_docs,
        labels: false,
        seed: seed.wrapping_add(200),
        out: at("valid.jsonl"),
    })?;
    write(&at("corpora.json"), &serde_json::to_string_pretty(&corpora)?)?;

    super::vectorize::run(&VectorizeArgs {
        corpora: Some(at("corpora.json")),
        corpus: None,
        name: None,
        model: Some(at("model.json")),
        proba: None,
        n_samples: args.n_samples,
        seed,
        out: at("matrix.json"),
    })?;
    super::vectorize::run(&VectorizeArgs {
        corpora: None,
        corpus: Some(at("valid.jsonl")),
        name: Some("valid".into()),
        model: Some(at("model.json")),
        proba: None,
        n_samples: args.n_samples,
        seed,
        out: at("valid.json"),
    })?;

    let candidates = |top_k: usize| CandidateArgs {
        k: args.k,
        gamma: 1.0,
        top_k,
        seed,
        budget: None,
        token_shares: None,
        retry_ceiling: None,
    };
    let huber = || DistanceArgs {
        distance: DistanceArg::Huber,
        delta: 0.005,
        reduction: ReductionArg::Mean,
    };
    super::mix::da2(&Da2Args {
        matrix: at("matrix.json"),
        valid: at("valid.json"),
        candidates: candidates(100),
        distance: huber(),
        out: at("da2.json"),
    })?;

    super::synth::fit_samples(&FitSamplesArgs {
        world: at("world.json"),
        matrix: at("matrix.true.json"),
        count: args.fit_samples,
        gamma: 1.0,
        seed,
        out: at("samples.jsonl"),
    })?;
    super::mix::regress_fit(&RegressFitArgs {
        samples: at("samples.jsonl"),
        matrix: Some(at("matrix.json")),
        kind: KindArg::Gbdt,
        trees: 200,
        depth: 4,
        learning_rate: 0.1,
        subsample: 0.8,
        lambda: 1e-3,
        holdout: 0.1,
        seed,
        out: at("models.json"),
    })?;
    super::mix::regress_search(&RegressSearchArgs {
        models: at("models.json"),
        matrix: at("matrix.json"),
        valid: at("valid.json"),
        candidates: candidates(100),
        out: at("regress.json"),
    })?;

    let m = v_true.m();
    let mut grid = String::from("label");
    for j in 0..m {
        grid.push_str(&format!(",w{j}"));
    }
    grid.push('\n');
    for x in GRID {
        grid.push_str(&format!("{x},{x},{}", 1.0 - x));
        grid.push_str(&",0".repeat(m - 2));
        grid.push('\n');
    }
    write(&at("grid.csv"), &grid)?;
    super::mix::score(&ScoreArgs {
        matrix: at("matrix.json"),
        valid: at("valid.json"),
        grid: at("grid.csv"),
        distance: huber(),
        out: at("grid.da2.csv"),
    })?;
    super::synth::oracle(&OracleArgs {
        world: at("world.json"),
        matrix: at("matrix.true.json"),
        valid: at("valid.true.json"),
        ratio: None,
        grid: Some(at("grid.csv")),
        out: at("grid.oracle.csv"),
    })?;
    super::eval::rank(&RankArgs {
        pred: at("grid.da2.csv"),
        actual: at("grid.oracle.csv"),
        out: at("rank.json"),
    })?;

    let run = Run::new(Some(seed), args)?;
    let summary = json!({
        "files": [
            "world.json", "train.jsonl", "model.json", "corpora.json", "matrix.json", "valid.json",
            "da2.json", "da2.top.csv", "samples.jsonl", "models.json", "regress.json",
            "grid.csv", "grid.da2.csv", "grid.oracle.csv", "rank.json", "rank.table.csv",
        ],
    });
    run.write_json(&at("summary.json"), &summary)
}
