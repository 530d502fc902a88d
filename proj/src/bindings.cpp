#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gcan/explain.hpp"
#include "gcan/harness.hpp"
#include "gcan/model.hpp"
#include "gcan/synthgen.hpp"

namespace py = pybind11;

using gcan::data::Dataset;
using gcan::data::Story;
using gcan::data::UserRecord;
using gcan::model::GcanConfig;
using gcan::model::ModelState;
using gcan::model::Prediction;

namespace {

py::dict metrics_dict(const gcan::harness::Metrics& m) {
    py::dict d;
    d["accuracy"] = m.accuracy;
    d["precision_macro"] = m.precision;
    d["recall_macro"] = m.recall;
    d["f1_macro"] = m.f1;
    d["precision_fake"] = m.fake_precision;
    d["recall_fake"] = m.fake_recall;
    d["f1_fake"] = m.fake_f1;
    d["tp"] = m.tp;
    d["fp"] = m.fp;
    d["tn"] = m.tn;
    d["fn"] = m.fn;
    return d;
}

py::dict report_dict(const gcan::harness::ExperimentReport& r) {
    py::dict d;
    py::list per;
    for (const auto& m : r.per_repeat) per.append(metrics_dict(m));
    d["per_repeat"] = per;
    d["mean"] = metrics_dict(r.mean);
    d["stddev"] = metrics_dict(r.stddev);
    d["base_seed"] = r.base_seed;
    d["wall_seconds"] = r.wall_seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_gcan, m) {
    m.doc() = "GCAN fake-news detection core";

    py::class_<UserRecord>(m, "UserRecord")
        .def(py::init<>())
        .def_readwrite("user_id", &UserRecord::user_id)
        .def_readwrite("desc_word_count", &UserRecord::desc_word_count)
        .def_readwrite("screen_name_word_count", &UserRecord::screen_name_word_count)
        .def_readwrite("follower_count", &UserRecord::follower_count)
        .def_readwrite("following_count", &UserRecord::following_count)
        .def_readwrite("story_count", &UserRecord::story_count)
        .def_readwrite("account_age", &UserRecord::account_age)
        .def_readwrite("is_verified", &UserRecord::is_verified)
        .def_readwrite("geo_enabled", &UserRecord::geo_enabled)
        .def_readwrite("retweet_delay", &UserRecord::retweet_delay)
        .def_readwrite("path_length", &UserRecord::path_length);

    py::class_<Story>(m, "Story")
        .def(py::init<>())
        .def_readwrite("story_id", &Story::story_id)
        .def_readwrite("tokens", &Story::tokens)
        .def_readwrite("label", &Story::label)
        .def_readwrite("retweets", &Story::retweets);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("stories", &Dataset::stories)
        .def("__len__", [](const Dataset& d) { return d.stories.size(); })
        .def("__getitem__",
             [](const Dataset& d, size_t i) {
                 if (i >= d.stories.size()) throw py::index_error();
                 return d.stories[i];
             })
        .def("save", [](const Dataset& d, const std::string& path) {
            gcan::data::save_jsonl(d, path);
        });

    m.def("load_dataset", [](const std::string& path) { return gcan::data::load_jsonl(path); },
          py::arg("path"));
    m.def("split", &gcan::data::split, py::arg("dataset"), py::arg("train_fraction"),
          py::arg("seed"));

    py::class_<gcan::synth::GeneratorConfig>(m, "GeneratorConfig")
        .def(py::init<>())
        .def_readwrite("n_stories", &gcan::synth::GeneratorConfig::n_stories)
        .def_readwrite("vocab_size", &gcan::synth::GeneratorConfig::vocab_size)
        .def_readwrite("tokens_per_story", &gcan::synth::GeneratorConfig::tokens_per_story)
        .def_readwrite("retweets_min", &gcan::synth::GeneratorConfig::retweets_min)
        .def_readwrite("retweets_max", &gcan::synth::GeneratorConfig::retweets_max)
        .def_readwrite("signal_strength", &gcan::synth::GeneratorConfig::signal_strength)
        .def_readwrite("evidence_tokens", &gcan::synth::GeneratorConfig::evidence_tokens)
        .def_readwrite("seed", &gcan::synth::GeneratorConfig::seed);

    m.def("generate", &gcan::synth::generate, py::arg("config"));
    m.def("oracle_baseline",
          [](const Dataset& train, const Dataset& test) {
              auto r = gcan::synth::oracle_baseline(train, test);
              py::dict d;
              d["accuracy"] = r.accuracy;
              d["precision"] = r.precision;
              d["recall"] = r.recall;
              d["f1"] = r.f1;
              return d;
          },
          py::arg("train"), py::arg("test"));

    py::class_<GcanConfig>(m, "GcanConfig")
        .def(py::init<>())
        .def_readwrite("max_tweet_len", &GcanConfig::max_tweet_len)
        .def_readwrite("num_users", &GcanConfig::num_users)
        .def_readwrite("embed_dim", &GcanConfig::embed_dim)
        .def_readwrite("gcn_dim", &GcanConfig::gcn_dim)
        .def_readwrite("filter_size", &GcanConfig::filter_size)
        .def_readwrite("attn_dim", &GcanConfig::attn_dim)
        .def_readwrite("head_hidden", &GcanConfig::head_hidden)
        .def_readwrite("epochs", &GcanConfig::epochs)
        .def_readwrite("batch_size", &GcanConfig::batch_size)
        .def_readwrite("min_count", &GcanConfig::min_count)
        .def_readwrite("learning_rate", &GcanConfig::learning_rate)
        .def_readwrite("train_fraction", &GcanConfig::train_fraction)
        .def_readwrite("seed", &GcanConfig::seed)
        .def_property(
            "variant",
            [](const GcanConfig& c) { return gcan::model::variant_to_string(c.variant); },
            [](GcanConfig& c, const std::string& v) {
                c.variant = gcan::model::variant_from_string(v);
            });

    py::class_<Prediction>(m, "Prediction")
        .def_property_readonly("probs",
                               [](const Prediction& p) {
                                   return py::make_tuple(p.probs[0], p.probs[1]);
                               })
        .def_readonly("label", &Prediction::label)
        .def_readonly("word_attention", &Prediction::word_attention)
        .def_readonly("window_attention", &Prediction::window_attention);

    py::class_<ModelState>(m, "Model")
        .def_property_readonly("trained", &ModelState::trained)
        .def_property_readonly("config", [](ModelState& s) { return s.config(); })
        .def("predict",
             [](ModelState& s, const Story& story) { return s.predict(story); },
             py::arg("story"))
        .def("save", &ModelState::save, py::arg("path"))
        .def_static("load", &ModelState::load, py::arg("path"));

    m.def("train",
          [](const Dataset& train, const GcanConfig& cfg) {
              return gcan::model::train_model(train, cfg);
          },
          py::arg("train"), py::arg("config"));

    m.def("evaluate",
          [](ModelState& state, const Dataset& test) {
              return metrics_dict(gcan::harness::evaluate(state, test));
          },
          py::arg("model"), py::arg("test"));

    m.def("run_experiment",
          [](const Dataset& ds, const GcanConfig& cfg, int repeats, uint64_t base_seed) {
              return report_dict(gcan::harness::run_experiment(ds, cfg, repeats, base_seed));
          },
          py::arg("dataset"), py::arg("config"), py::arg("repeats"), py::arg("base_seed"));

    m.def("explain_json",
          [](ModelState& state, const Story& story, int top_k) {
              return gcan::explain::render_report(
                  gcan::explain::explain_story(state, story, top_k), "json");
          },
          py::arg("model"), py::arg("story"), py::arg("top_k") = 5);

    // End-to-end finite-difference gradient check on a freshly initialized
    // model; returns (pass, max_rel_error).
    m.def("grad_check",
          [](const Dataset& ds, const GcanConfig& cfg, int samples_per_tensor) {
              ModelState state(cfg, gcan::data::build_vocab(ds, cfg.min_count),
                               gcan::data::fit_scaler(ds));
              gcan::model::EncodedStory story = state.preprocess(ds.stories.at(0));
              auto loss_fn = [&](bool with_grad) {
                  gcan::num::Tape tape;
                  auto f = state.forward(tape, story);
                  auto loss = tape.cross_entropy(f.y_hat, story.label);
                  if (with_grad) tape.backward(loss);
                  return tape.value(loss).v[0];
              };
              gcan::num::Rng pick(cfg.seed + 1);
              auto rep = gcan::num::grad_check(loss_fn, state.params(), 1e-3, 1e-4,
                                               samples_per_tensor, pick);
              return py::make_tuple(rep.pass, rep.max_rel_error);
          },
          py::arg("dataset"), py::arg("config"), py::arg("samples_per_tensor") = 2);
}
