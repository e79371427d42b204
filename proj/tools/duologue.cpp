// Command-line front end: subcommands for generating fixtures, annotating
// transcripts, computing speaker statistics, predicting trait alignment, and
// scoring predictions. See README.md for file formats.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "duologue/core.hpp"
#include "duologue/pipeline.hpp"

namespace pl = duologue::pipeline;

namespace {

void add_common(CLI::App* cmd, pl::CommonOptions& common, bool llm_flags) {
    cmd->add_option("--config", common.config_path, "JSON configuration file");
    cmd->add_option("--out-dir", common.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", [&common](const CLI::results_t& res) {
        try {
            common.seed = std::stoull(res[0]);
        } catch (const std::exception&) {
            return false;
        }
        return true;
    }, "root seed, overrides the config file")->expected(1);
    if (llm_flags) {
        cmd->add_flag("--mock", common.mock, "use the offline stand-in services");
        cmd->add_option("--endpoint", [&common](const CLI::results_t& res) {
            common.endpoint = res[0];
            return true;
        }, "chat completion endpoint URL")->expected(1);
        cmd->add_option("--model", [&common](const CLI::results_t& res) {
            common.model = res[0];
            return true;
        }, "chat completion model name")->expected(1);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-channel dialog annotation and trait-alignment pipeline"};
    app.require_subcommand(1);

    pl::CommonOptions common;
    pl::SynthOptions synth_opts;
    pl::AnnotateOptions annotate_opts;
    pl::AttributesOptions attributes_opts;
    pl::PredictOptions predict_opts;
    pl::EvalOptions eval_opts;

    auto* synth = app.add_subcommand("synth", "generate fixture conversations with ground truth");
    add_common(synth, common, false);
    synth->add_option("--count", synth_opts.count, "conversations to generate")
        ->capture_default_str();
    synth->add_option("--beats", synth_opts.beats, "scripted events per conversation")
        ->capture_default_str();
    synth->add_flag_callback(
        "--no-boundary-fixtures", [&synth_opts] { synth_opts.boundary_fixtures = false; },
        "skip exact-threshold gap/overlap cases");
    synth->add_option("--silence-rate", synth_opts.silence_rate,
                      "chance a turn is followed by recorded silence")
        ->capture_default_str();

    auto* annotate = app.add_subcommand("annotate", "transcripts -> annotated dialog datasets");
    add_common(annotate, common, true);
    annotate->add_option("inputs", annotate_opts.inputs, "transcript files")->required();

    auto* attributes =
        app.add_subcommand("attributes", "dialog datasets -> speaker statistics and buckets");
    add_common(attributes, common, false);
    attributes->add_option("inputs", attributes_opts.inputs, "dialog dataset files")->required();

    auto* predict = app.add_subcommand("predict", "datasets + statistics -> trait predictions");
    add_common(predict, common, true);
    predict->add_option("inputs", predict_opts.inputs, "dialog dataset files")->required();
    predict->add_option("--attributes", predict_opts.attributes_path,
                        "attributes.jsonl from the attributes command")
        ->required();
    predict->add_option("--features", [&common](const CLI::results_t& res) {
        common.features_csv = res[0];
        return true;
    }, "prompt sections to include: samples,emotions,sentiment,basics")->expected(1);

    auto* eval = app.add_subcommand("eval", "predictions vs. statistics and human labels");
    add_common(eval, common, false);
    eval->add_option("--predictions", eval_opts.predictions_path, "predictions.jsonl")
        ->required();
    eval->add_option("--labels", eval_opts.labels_path, "human trait labels jsonl")->required();
    eval->add_option("--attributes", eval_opts.attributes_path, "attributes.jsonl")->required();
    eval->add_option("--trend-table", eval_opts.trend_table_path,
                     "attribute/trait weight table CSV (default: built-in)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return pl::cmd_synth(common, synth_opts);
        if (annotate->parsed()) return pl::cmd_annotate(common, annotate_opts);
        if (attributes->parsed()) return pl::cmd_attributes(common, attributes_opts);
        if (predict->parsed()) return pl::cmd_predict(common, predict_opts);
        if (eval->parsed()) return pl::cmd_eval(common, eval_opts);
    } catch (const duologue::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const duologue::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
