use metamix::classifier::{export_proba, FeatureConfig, LinearClassifierModel, TrainConfig};
use metamix::corpus::{stream_documents, CorpusHandle, Document};
use metamix::{DomainVector, Error, Result};
use rayon::prelude::*;

use crate::args::{PredictArgs, TrainArgs};
use crate::load;
use crate::output::Run;

pub fn train(args: &TrainArgs) -> Result<()> {
    let docs: Vec<Document> = stream_documents(&CorpusHandle::new(&args.corpus))?.collect::<Result<_>>()?;
    let config = TrainConfig {
        n_classes: args.n,
        features: FeatureConfig {
            orders: args.orders.clone(),
            buckets: args.buckets,
            ..FeatureConfig::default()
        },
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
        l2: args.l2,
        holdout_fraction: args.holdout,
        seed: args.seed,
    };
    let model = metamix::classifier::train(&docs, &config)?;
    Run::new(Some(args.seed), args)?
        .input("corpus", &args.corpus)?
        .write_json(&args.out, &model)?;
    crate::output::report(serde_json::to_string(&model.report())?);
    Ok(())
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let model: LinearClassifierModel = load::json(&args.model)?;
    let docs: Vec<Document> = stream_documents(&CorpusHandle::new(&args.corpus))?.collect::<Result<_>>()?;
    let ids = docs
        .iter()
        .enumerate()
        .map(|(index, d)| d.id.as_deref().ok_or(Error::MissingId { index }))
        .collect::<Result<Vec<_>>>()?;
    let proba: Vec<DomainVector> = docs.par_iter().map(|d| model.predict_proba(d)).collect::<Result<_>>()?;
    export_proba(&args.out, ids.into_iter().zip(&proba))?;
    Run::new(None, args)?
        .input("corpus", &args.corpus)?
        .input("model", &args.model)?
        .write_sidecar(&args.out)
}
