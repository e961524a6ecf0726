use metamix::da2::{optimize_da2, sample_candidates, CandidateSet, SamplerConfig, TokenDistribution};
use metamix::distance::{distance, DistanceKind, DistanceSpec, Reduction};
use metamix::gbdt::GbdtParams;
use metamix::regress::{fit_regressors, read_samples, search_regress, FitOptions, LossModelSet, RegressorParams};
use metamix::{DatasetMatrix, Error, Result, TokenBudget};
use serde_json::json;

use crate::args::{
    CandidateArgs, Da2Args, DistanceArg, DistanceArgs, KindArg, ReductionArg, RegressFitArgs, RegressSearchArgs,
    ScoreArgs,
};
use crate::load;
use crate::output::{companion_path, file_name, Run};

fn distance_spec(args: &DistanceArgs) -> Result<DistanceSpec> {
    let spec = DistanceSpec {
        kind: match args.distance {
            DistanceArg::Huber => DistanceKind::Huber,
            DistanceArg::L1 => DistanceKind::L1,
            DistanceArg::L2 => DistanceKind::L2,
            DistanceArg::Js => DistanceKind::Js,
        },
        huber_delta: args.delta,
        reduction: match args.reduction {
            ReductionArg::Mean => Reduction::Mean,
            ReductionArg::Sum => Reduction::Sum,
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// Dirichlet candidates with the prior taken from the budget, explicit shares, or uniform.
fn candidates(args: &CandidateArgs, m: usize, run: Run) -> Result<(CandidateSet, Option<TokenBudget>, Run)> {
    let (budget, run) = match &args.budget {
        Some(path) => (Some(load::budget(path)?), run.input("budget", path)?),
        None => (None, run),
    };
    let tokens = match (&budget, &args.token_shares) {
        (Some(b), _) => TokenDistribution::from_counts(&b.dataset_tokens)?,
        (None, Some(shares)) => TokenDistribution::new(shares)?,
        (None, None) => TokenDistribution::uniform(m)?,
    };
    if tokens.m() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: tokens.m(),
        });
    }
    let mut config = SamplerConfig::new(args.k, args.gamma, args.seed);
    config.retry_ceiling = args.retry_ceiling;
    let set = sample_candidates(&tokens, &config, budget.as_ref())?;
    Ok((set, budget, run))
}

fn with_names(value: &mut serde_json::Value, names: Option<Vec<String>>) {
    if let Some(names) = names {
        value["datasets"] = json!(names);
    }
}

pub fn da2(args: &Da2Args) -> Result<()> {
    let (matrix, names) = load::matrix(&args.matrix)?;
    let valid = load::vector(&args.valid)?;
    let spec = distance_spec(&args.distance)?;
    let run = Run::new(Some(args.candidates.seed), args)?
        .input("matrix", &args.matrix)?
        .input("valid", &args.valid)?;
    let (set, _, run) = candidates(&args.candidates, matrix.m(), run)?;
    let outcome = optimize_da2(&matrix, &valid, &set, &spec, args.candidates.top_k)?;

    let table = companion_path(&args.out, "top.csv");
    run.write_csv(&table, &outcome.search.table_csv(&set.candidates))?;
    let mut result = json!({
        "ratio": outcome.search.ratio,
        "distance": outcome.search.score,
        "best_candidate_distance": outcome.search.best_score,
        "top_k": outcome.search.top_k,
        "mixed_vector": matrix.mix(&outcome.search.ratio)?,
        "spec": outcome.spec,
        "candidates_meta": set,
        "budget_feasible": outcome.budget_feasible,
        "top_table_csv": file_name(&table),
    });
    with_names(&mut result, names);
    run.write_json(&args.out, &result)?;
    crate::output::report(json!({ "ratio": result["ratio"], "distance": result["distance"] }));
    Ok(())
}

pub fn score(args: &ScoreArgs) -> Result<()> {
    let (matrix, _) = load::matrix(&args.matrix)?;
    let valid = load::vector(&args.valid)?;
    let spec = distance_spec(&args.distance)?;
    let grid = load::grid(&args.grid)?;
    let rows = grid
        .into_iter()
        .map(|(label, r)| {
            let v = matrix.mix_raw(r.as_slice())?;
            Ok((label, distance(&v, valid.as_slice(), &spec)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Run::new(None, args)?
        .input("matrix", &args.matrix)?
        .input("valid", &args.valid)?
        .input("grid", &args.grid)?
        .write_csv(&args.out, &super::scores_csv(rows))
}

pub fn regress_fit(args: &RegressFitArgs) -> Result<()> {
    let samples = read_samples(&args.samples)?;
    let mut run = Run::new(Some(args.seed), args)?.input("samples", &args.samples)?;
    let matrix: Option<DatasetMatrix> = match &args.matrix {
        Some(path) => {
            run = run.input("matrix", path)?;
            Some(load::matrix(path)?.0)
        }
        None => None,
    };
    let params = match args.kind {
        KindArg::Gbdt => RegressorParams {
            gbdt: GbdtParams {
                n_trees: args.trees,
                max_depth: args.depth,
                learning_rate: args.learning_rate,
                subsample: args.subsample,
                seed: args.seed,
                ..GbdtParams::default()
            },
            ..RegressorParams::gbdt()
        },
        KindArg::Ridge => RegressorParams::ridge(args.lambda),
    };
    let options = FitOptions {
        params,
        holdout_fraction: args.holdout,
        seed: args.seed,
    };
    let models = fit_regressors(&samples, matrix.as_ref(), &options)?;
    run.write_json(&args.out, &models)?;
    crate::output::report(json!({
        "n": models.n(),
        "holdout_count": models.metadata.holdout_count,
        "median_holdout_spearman": models.metadata.median_spearman(),
    }));
    Ok(())
}

pub fn regress_search(args: &RegressSearchArgs) -> Result<()> {
    let models: LossModelSet = load::json(&args.models)?;
    let (matrix, names) = load::matrix(&args.matrix)?;
    let valid = load::vector(&args.valid)?;
    let run = Run::new(Some(args.candidates.seed), args)?
        .input("models", &args.models)?
        .input("matrix", &args.matrix)?
        .input("valid", &args.valid)?;
    let (set, _, run) = candidates(&args.candidates, matrix.m(), run)?;
    let outcome = search_regress(&matrix, &valid, &models, &set, args.candidates.top_k)?;

    let table = companion_path(&args.out, "top.csv");
    run.write_csv(&table, &outcome.search.table_csv(&set.candidates))?;
    let mut result = json!({
        "ratio": outcome.search.ratio,
        "predicted_loss": outcome.search.score,
        "best_candidate_predicted_loss": outcome.search.best_score,
        "top_k": outcome.search.top_k,
        "candidates_meta": set,
        "budget_feasible": outcome.budget_feasible,
        "top_table_csv": file_name(&table),
    });
    with_names(&mut result, names);
    run.write_json(&args.out, &result)?;
    crate::output::report(json!({ "ratio": result["ratio"], "predicted_loss": result["predicted_loss"] }));
    Ok(())
}
