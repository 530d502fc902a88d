#include <CLI11.hpp>
#include <json.hpp>

#include "gcan/explain.hpp"
#include "gcan/harness.hpp"
#include "gcan/model.hpp"
#include "gcan/synthgen.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

// Experiment configuration document: GcanConfig plus harness options.
// Unknown keys are rejected so typos cannot silently fall back to defaults.
struct RunConfig {
    gcan::model::GcanConfig model;
    int repeats = 20;
    uint64_t base_seed = 1;
    std::vector<int> n_values = {10, 20, 30, 40, 50};
    int top_k = 5;
};

RunConfig run_config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j = json::parse(in);
    if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");
    RunConfig rc;
    for (const auto& [key, value] : j.items()) {
        if (key == "max_tweet_len") rc.model.max_tweet_len = value.get<int>();
        else if (key == "num_users") rc.model.num_users = value.get<int>();
        else if (key == "embed_dim") rc.model.embed_dim = value.get<int>();
        else if (key == "gcn_dim") rc.model.gcn_dim = value.get<int>();
        else if (key == "filter_size") rc.model.filter_size = value.get<int>();
        else if (key == "attn_dim") rc.model.attn_dim = value.get<int>();
        else if (key == "head_hidden") rc.model.head_hidden = value.get<int>();
        else if (key == "epochs") rc.model.epochs = value.get<int>();
        else if (key == "batch_size") rc.model.batch_size = value.get<int>();
        else if (key == "min_count") rc.model.min_count = value.get<int>();
        else if (key == "learning_rate") rc.model.learning_rate = value.get<double>();
        else if (key == "train_fraction") rc.model.train_fraction = value.get<double>();
        else if (key == "seed") rc.model.seed = value.get<uint64_t>();
        else if (key == "variant")
            rc.model.variant = gcan::model::variant_from_string(value.get<std::string>());
        else if (key == "repeats") rc.repeats = value.get<int>();
        else if (key == "base_seed") rc.base_seed = value.get<uint64_t>();
        else if (key == "n_values") rc.n_values = value.get<std::vector<int>>();
        else if (key == "top_k") rc.top_k = value.get<int>();
        else throw std::invalid_argument("unknown config key: " + key);
    }
    rc.model.validate();
    return rc;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write to " + path);
    out << text;
}

struct Options {
    std::string config_path, data_path, out_path, checkpoint_path, story_id;
    std::string variant, format = "text";
    std::optional<uint64_t> seed;
    std::optional<int> repeats, epochs;
    std::vector<int> n_values;
    int top_k = -1;
};

RunConfig load_run_config(const Options& opt) {
    RunConfig rc;
    if (!opt.config_path.empty()) rc = run_config_from_file(opt.config_path);
    // flags win over the config file
    if (!opt.variant.empty()) rc.model.variant = gcan::model::variant_from_string(opt.variant);
    if (opt.seed) {
        rc.model.seed = *opt.seed;
        rc.base_seed = *opt.seed;
    }
    if (opt.epochs) rc.model.epochs = *opt.epochs;
    if (opt.repeats) rc.repeats = *opt.repeats;
    if (!opt.n_values.empty()) rc.n_values = opt.n_values;
    if (opt.top_k > 0) rc.top_k = opt.top_k;
    rc.model.validate();
    return rc;
}

void print_metrics(const char* tag, const gcan::harness::Metrics& m) {
    std::printf("%-6s acc %.4f  prec(M) %.4f  rec(M) %.4f  F1(M) %.4f  [tp %d fp %d tn %d fn %d]\n",
                tag, m.accuracy, m.precision, m.recall, m.f1, m.tp, m.fp, m.tn, m.fn);
}

int cmd_synth(const Options& opt) {
    gcan::synth::GeneratorConfig cfg;
    if (!opt.config_path.empty()) {
        cfg = gcan::synth::generator_config_from_json_file(opt.config_path);
    }
    if (opt.seed) cfg.seed = *opt.seed;
    cfg.validate();
    gcan::data::Dataset ds = gcan::synth::generate(cfg);
    gcan::data::save_jsonl(ds, opt.out_path);
    int fake = 0;
    for (const auto& s : ds.stories) fake += s.label;
    std::printf("wrote %zu stories to %s (%d fake / %zu real, seed %llu)\n", ds.stories.size(),
                opt.out_path.c_str(), fake, ds.stories.size() - fake,
                static_cast<unsigned long long>(cfg.seed));
    return 0;
}

int cmd_train(const Options& opt) {
    RunConfig rc = load_run_config(opt);
    gcan::data::Dataset ds = gcan::data::load_jsonl(opt.data_path);
    auto [train, test] = gcan::data::split(ds, rc.model.train_fraction, rc.model.seed);
    gcan::model::ModelState state = gcan::model::train_model(train, rc.model);
    gcan::harness::Metrics train_m = gcan::harness::evaluate(state, train);
    print_metrics("train", train_m);
    gcan::harness::Metrics test_m;
    if (!test.stories.empty()) {
        test_m = gcan::harness::evaluate(state, test);
        print_metrics("test", test_m);
    }
    if (!opt.checkpoint_path.empty()) {
        state.save(opt.checkpoint_path);
        std::printf("checkpoint saved to %s\n", opt.checkpoint_path.c_str());
    }
    if (!opt.out_path.empty()) {
        json rep{{"variant", gcan::model::variant_to_string(rc.model.variant)},
                 {"seed", rc.model.seed},
                 {"epochs", rc.model.epochs},
                 {"train", json::parse(gcan::harness::metrics_to_json(train_m))},
                 {"test", test.stories.empty()
                              ? json(nullptr)
                              : json::parse(gcan::harness::metrics_to_json(test_m))}};
        write_file(opt.out_path, rep.dump(2) + "\n");
    }
    return 0;
}

int cmd_eval(const Options& opt) {
    gcan::model::ModelState state = gcan::model::ModelState::load(opt.checkpoint_path);
    gcan::data::Dataset ds = gcan::data::load_jsonl(opt.data_path);
    gcan::harness::Metrics m = gcan::harness::evaluate(state, ds);
    print_metrics("eval", m);
    if (!opt.out_path.empty()) write_file(opt.out_path, gcan::harness::metrics_to_json(m) + "\n");
    return 0;
}

int cmd_sweep(const Options& opt) {
    RunConfig rc = load_run_config(opt);
    gcan::data::Dataset ds = gcan::data::load_jsonl(opt.data_path);
    auto rows = gcan::harness::early_detection_sweep(ds, rc.model, rc.n_values, rc.repeats,
                                                     rc.base_seed);
    std::fputs(gcan::harness::sweep_table(rows).c_str(), stdout);
    if (!opt.out_path.empty()) write_file(opt.out_path, gcan::harness::sweep_to_json(rows) + "\n");
    return 0;
}

int cmd_ablate(const Options& opt) {
    RunConfig rc = load_run_config(opt);
    gcan::data::Dataset ds = gcan::data::load_jsonl(opt.data_path);
    auto rows = gcan::harness::ablation_suite(ds, rc.model, rc.repeats, rc.base_seed);
    std::fputs(gcan::harness::ablation_table(rows).c_str(), stdout);
    if (!opt.out_path.empty())
        write_file(opt.out_path, gcan::harness::ablation_to_json(rows) + "\n");
    return 0;
}

int cmd_explain(const Options& opt) {
    RunConfig rc = load_run_config(opt);
    gcan::model::ModelState state = gcan::model::ModelState::load(opt.checkpoint_path);
    gcan::data::Dataset ds = gcan::data::load_jsonl(opt.data_path);
    const gcan::data::Story* story = nullptr;
    for (const auto& s : ds.stories) {
        if (s.story_id == opt.story_id) story = &s;
    }
    if (!story) throw std::invalid_argument("story_id not found in dataset: " + opt.story_id);
    gcan::explain::AttentionReport rep = gcan::explain::explain_story(state, *story, rc.top_k);
    std::string text = gcan::explain::render_report(rep, opt.format);
    std::fputs(text.c_str(), stdout);
    if (text.empty() || text.back() != '\n') std::fputs("\n", stdout);
    if (!opt.out_path.empty())
        write_file(opt.out_path, gcan::explain::render_report(rep, "json") + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GCAN fake-news detection pipeline"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--out", opt.out_path, "output path for the JSON report");
        sub->add_option("--seed", opt.seed, "seed override (model seed and base seed)");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth);
    synth->get_option("--out")->required();

    CLI::App* train = app.add_subcommand("train", "train on a single split");
    add_common(train);
    train->add_option("--data", opt.data_path, "dataset JSONL")->required();
    train->add_option("--checkpoint", opt.checkpoint_path, "checkpoint output path");
    train->add_option("--variant", opt.variant, "model variant name");
    train->add_option("--epochs", opt.epochs, "epochs override");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(eval);
    eval->add_option("--data", opt.data_path, "dataset JSONL")->required();
    eval->add_option("--checkpoint", opt.checkpoint_path, "checkpoint path")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "early-detection sweep over n");
    add_common(sweep);
    sweep->add_option("--data", opt.data_path, "dataset JSONL")->required();
    sweep->add_option("--n", opt.n_values, "retweet-user counts")->delimiter(',');
    sweep->add_option("--repeats", opt.repeats, "train/test repeats per n");
    sweep->add_option("--epochs", opt.epochs, "epochs override");

    CLI::App* ablate = app.add_subcommand("ablate", "run the ablation suite");
    add_common(ablate);
    ablate->add_option("--data", opt.data_path, "dataset JSONL")->required();
    ablate->add_option("--repeats", opt.repeats, "train/test repeats per variant");
    ablate->add_option("--epochs", opt.epochs, "epochs override");

    CLI::App* explain = app.add_subcommand("explain", "attention report for one story");
    add_common(explain);
    explain->add_option("--data", opt.data_path, "dataset JSONL")->required();
    explain->add_option("--checkpoint", opt.checkpoint_path, "checkpoint path")->required();
    explain->add_option("--story-id", opt.story_id, "story to explain")->required();
    explain->add_option("--format", opt.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    explain->add_option("--top-k", opt.top_k, "ranked words/users to keep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(opt);
        if (train->parsed()) return cmd_train(opt);
        if (eval->parsed()) return cmd_eval(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (ablate->parsed()) return cmd_ablate(opt);
        if (explain->parsed()) return cmd_explain(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
