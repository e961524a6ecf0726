use std::collections::HashMap;

use metamix::eval::{knn_domain_vector, knn_pooled_domain_vector, random_baseline, rank_mixtures};
use metamix::{EmbeddingSet, Error, MetaDomainVocabulary, Result};
use serde_json::json;

use crate::args::{KnnArgs, PoolArg, RandomArgs, RankArgs};
use crate::load;
use crate::output::{companion_path, file_name, Run};

pub fn rank(args: &RankArgs) -> Result<()> {
    let pred = load::scores(&args.pred)?;
    let actual: HashMap<String, f64> = load::scores(&args.actual)?.into_iter().collect();
    if actual.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: actual.len(),
        });
    }
    let mut labels = Vec::with_capacity(pred.len());
    let mut predicted = Vec::with_capacity(pred.len());
    let mut observed = Vec::with_capacity(pred.len());
    for (label, p) in pred {
        let a = *actual.get(&label).ok_or_else(|| Error::MalformedRecord {
            line: 0,
            reason: format!("label {label:?} missing from the actual scores"),
        })?;
        labels.push(label);
        predicted.push(p);
        observed.push(a);
    }
    let report = rank_mixtures(&labels, &predicted, &observed)?;
    let run = Run::new(None, args)?
        .input("pred", &args.pred)?
        .input("actual", &args.actual)?;
    let table = companion_path(&args.out, "table.csv");
    run.write_csv(&table, &report.table_csv())?;
    run.write_json(
        &args.out,
        &json!({
            "spearman": report.spearman,
            "pearson": report.pearson,
            "n": report.n,
            "table_csv": file_name(&table),
        }),
    )?;
    crate::output::report(json!({ "spearman": report.spearman, "pearson": report.pearson, "n": report.n }));
    Ok(())
}

pub fn knn(args: &KnnArgs) -> Result<()> {
    let embeddings = EmbeddingSet::read_jsonl(&args.embeddings)?;
    let vocab: MetaDomainVocabulary = load::json(&args.vocab)?;
    let vector = match args.pool {
        PoolArg::Vote => knn_domain_vector(&embeddings, vocab.centroids(), args.k)?,
        PoolArg::Mean => knn_pooled_domain_vector(&embeddings, vocab.centroids(), args.k)?,
    };
    let dataset = args.name.clone().unwrap_or_else(|| load::stem(&args.embeddings));
    Run::new(None, args)?
        .input("embeddings", &args.embeddings)?
        .input("vocab", &args.vocab)?
        .write_json(
            &args.out,
            &json!({ "dataset": dataset, "n": vector.len(), "vector": vector, "k": args.k, "pool": args.pool }),
        )
}

pub fn random(args: &RandomArgs) -> Result<()> {
    let labels: Vec<String> = match (&args.labels, args.count) {
        (Some(l), _) => l.clone(),
        (None, Some(c)) => (0..c).map(|i| i.to_string()).collect(),
        (None, None) => unreachable!("clap requires --count or --labels"),
    };
    if labels.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 scores".into()));
    }
    let scores = random_baseline(labels.len(), args.seed);
    Run::new(Some(args.seed), args)?.write_csv(&args.out, &super::scores_csv(labels.into_iter().zip(scores)))
}
