use metamix::classifier::LinearClassifierModel;
use metamix::corpus::CorpusHandle;
use metamix::vectorize::{dataset_matrix, domain_vector, DocumentClassifier, ImportedProba, MatrixRecords};
use metamix::Result;

use crate::args::VectorizeArgs;
use crate::load;
use crate::output::Run;

pub fn run(args: &VectorizeArgs) -> Result<()> {
    let datasets: Vec<(String, std::path::PathBuf)> = match (&args.corpora, &args.corpus) {
        (Some(list), _) => load::corpus_list(list)?,
        (None, Some(path)) => vec![(args.name.clone().unwrap_or_else(|| load::stem(path)), path.clone())],
        (None, None) => unreachable!("clap requires one input"),
    };
    let mut run = Run::new(Some(args.seed), args)?;
    for (name, path) in &datasets {
        run = run.input(&format!("corpus:{name}"), path)?;
    }

    let per_dataset_proba = args.proba.as_ref().filter(|p| p.is_dir());
    let shared: Option<Box<dyn DocumentClassifier>> = match (&args.model, &args.proba) {
        (Some(model), _) => {
            run = run.input("model", model)?;
            let m: LinearClassifierModel = load::json(model)?;
            Some(Box::new(m))
        }
        (None, Some(p)) if !p.is_dir() => {
            run = run.input("proba", p)?;
            Some(Box::new(ImportedProba::read(p)?))
        }
        _ => None,
    };

    let records = match (&shared, per_dataset_proba) {
        (Some(clf), _) => {
            let handles: Vec<(String, CorpusHandle)> = datasets
                .iter()
                .map(|(n, p)| (n.clone(), CorpusHandle::new(p)))
                .collect();
            dataset_matrix(&handles, clf.as_ref(), args.n_samples, args.seed)?
        }
        (None, Some(dir)) => {
            run = run.input("proba", dir)?;
            let columns = datasets
                .iter()
                .enumerate()
                .map(|(j, (name, path))| {
                    let clf = ImportedProba::read(&dir.join(format!("{name}.jsonl")))?;
                    domain_vector(
                        name,
                        &CorpusHandle::new(path),
                        &clf,
                        args.n_samples,
                        args.seed.wrapping_add(j as u64),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            MatrixRecords { columns }
        }
        (None, None) => unreachable!("clap requires a classifier source"),
    };

    if args.corpus.is_some() {
        let record = &records.columns[0];
        run.write_json(&args.out, record)?;
        crate::output::report(serde_json::json!({ "dataset": record.dataset, "vector": record.vector }));
    } else {
        run.write_json(&args.out, &records)?;
        crate::output::report(serde_json::json!({ "datasets": records.names(), "n": records.columns[0].n }));
    }
    Ok(())
}
