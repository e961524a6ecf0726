use metamix::corpus::{stream_documents, CorpusHandle, Document};
use metamix::vocab::{inertia_curve, kmeans_fit, partition_passthrough, KMeansParams};
use metamix::{EmbeddingSet, Result};

use crate::args::{VocabBuildArgs, VocabCurveArgs};
use crate::output::Run;

pub fn build(args: &VocabBuildArgs) -> Result<()> {
    let embeddings = EmbeddingSet::read_jsonl(&args.embeddings)?;
    let params = KMeansParams::new(args.k)
        .seed(args.seed)
        .restarts(args.restarts)
        .max_iter(args.max_iter);
    let fit = kmeans_fit(&embeddings, &params)?;
    let mut run = Run::new(Some(args.seed), args)?.input("embeddings", &args.embeddings)?;
    let mut vocabulary = fit.vocabulary;
    if let (Some(path), Some(key)) = (&args.passthrough_corpus, &args.passthrough_key) {
        let docs: Vec<Document> = stream_documents(&CorpusHandle::new(path))?.collect::<Result<_>>()?;
        vocabulary = vocabulary.with_passthrough(partition_passthrough(&docs, key)?)?;
        run = run.input("passthrough_corpus", path)?;
    }
    run.write_json(&args.out, &vocabulary)?;
    crate::output::report(serde_json::json!({ "n": vocabulary.n(), "inertia": fit.inertia, "best_restart": fit.best }));
    Ok(())
}

pub fn curve(args: &VocabCurveArgs) -> Result<()> {
    let embeddings = EmbeddingSet::read_jsonl(&args.embeddings)?;
    let base = KMeansParams::new(1)
        .seed(args.seed)
        .restarts(args.restarts)
        .max_iter(args.max_iter);
    let points = inertia_curve(&embeddings, &args.ks, &base)?;
    let mut body = String::from("k,inertia\n");
    for (k, inertia) in points {
        body.push_str(&format!("{k},{inertia}\n"));
    }
    Run::new(Some(args.seed), args)?
        .input("embeddings", &args.embeddings)?
        .write_csv(&args.out, &body)
}
