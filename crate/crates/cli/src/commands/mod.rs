mod classifier;
mod demo;
mod eval;
mod mix;
mod synth;
mod vectorize;
mod vocab;

use metamix::Result;

use crate::args::{ClassifierCommand, Command, EvalCommand, MixCommand, RegressCommand, SynthCommand, VocabCommand};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Vocab(VocabCommand::Build(a)) => vocab::build(&a),
        Command::Vocab(VocabCommand::Curve(a)) => vocab::curve(&a),
        Command::Classifier(ClassifierCommand::Train(a)) => classifier::train(&a),
        Command::Classifier(ClassifierCommand::Predict(a)) => classifier::predict(&a),
        Command::Vectorize(a) => vectorize::run(&a),
        Command::Mix(MixCommand::Da2(a)) => mix::da2(&a),
        Command::Mix(MixCommand::Score(a)) => mix::score(&a),
        Command::Mix(MixCommand::Regress(RegressCommand::Fit(a))) => mix::regress_fit(&a),
        Command::Mix(MixCommand::Regress(RegressCommand::Search(a))) => mix::regress_search(&a),
        Command::Eval(EvalCommand::Rank(a)) => eval::rank(&a),
        Command::Eval(EvalCommand::KnnBaseline(a)) => eval::knn(&a),
        Command::Eval(EvalCommand::RandomBaseline(a)) => eval::random(&a),
        Command::Synth(SynthCommand::World(a)) => synth::world(&a),
        Command::Synth(SynthCommand::Dataset(a)) => synth::dataset(&a),
        Command::Synth(SynthCommand::Oracle(a)) => synth::oracle(&a),
        Command::Synth(SynthCommand::FitSamples(a)) => synth::fit_samples(&a),
        Command::Demo(a) => demo::run(&a),
    }
}

/// `label,score` rows.
fn scores_csv(rows: impl IntoIterator<Item = (String, f64)>) -> String {
    let mut out = String::from("label,score\n");
    for (label, score) in rows {
        out.push_str(&format!("{label},{score}\n"));
    }
    out
}
