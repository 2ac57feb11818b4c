// bagstack: synthetic data, training, prediction, evaluation and the
// four-method benchmark from the command line.

#include <bagstack/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"BagStacking ensemble toolkit for freezing-of-gait detection"};
    app.require_subcommand(1);
    app.footer("Config file keys (flat 'key = value', '#' comments) and defaults:\n\n" +
               bagstack::config_reference());

    bagstack::CommandOptions opts;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "Config file");
        sub->add_option("--seed", seed, "Override the config seed")->each([&](const std::string&) { opts.seed = seed; });
        sub->add_option("--parallel", opts.parallel, "Worker threads")->check(CLI::PositiveNumber);
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic recording directory");
    add_common(synth);
    synth->add_option("--out", opts.out, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Train a model on a recording directory");
    add_common(train);
    train->add_option("--data-dir", opts.data_dir, "Directory of <subject>_<index>.csv recordings")->required();
    train->add_option("--out", opts.out, "Model file to write")->required();
    train->add_option("--dump-features", opts.dump_features, "Write the feature matrix as CSV");

    auto* predict = app.add_subcommand("predict", "Write per-sample class probabilities");
    add_common(predict);
    predict->add_option("--model", opts.model_path, "Model file")->required();
    predict->add_option("--data-dir", opts.data_dir, "Recording directory")->required();
    predict->add_option("--out", opts.out, "Prediction CSV to write")->required();
    predict->add_option("--dump-features", opts.dump_features, "Write the feature matrix as CSV");

    auto* evaluate = app.add_subcommand("evaluate", "Validity-masked MAP of a model on a recording directory");
    add_common(evaluate);
    evaluate->add_option("--model", opts.model_path, "Model file")->required();
    evaluate->add_option("--data-dir", opts.data_dir, "Recording directory")->required();
    evaluate->add_option("--out", opts.out, "Report file (key=value lines)");
    evaluate->add_option("--dump-features", opts.dump_features, "Write the feature matrix as CSV");

    auto* benchmark = app.add_subcommand("benchmark", "Compare gbm, bagging, stacking and bagstacking over seeds");
    add_common(benchmark);
    benchmark->add_option("--out", opts.out, "Benchmark CSV to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*synth) return bagstack::cmd_synth(opts, std::cout, std::cerr);
    if (*train) return bagstack::cmd_train(opts, std::cout, std::cerr);
    if (*predict) return bagstack::cmd_predict(opts, std::cout, std::cerr);
    if (*evaluate) return bagstack::cmd_evaluate(opts, std::cout, std::cerr);
    return bagstack::cmd_benchmark(opts, std::cout, std::cerr);
}
