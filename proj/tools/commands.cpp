#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "tnet/checkpoint.hpp"
#include "tnet/dataset.hpp"
#include "tnet/head.hpp"
#include "tnet/metrics.hpp"
#include "tnet/report.hpp"

namespace tnet::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path.string());
}

json read_json_file(const fs::path& path) {
  require_file(path, "config file");
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

data::ParseResult load_dataset(const fs::path& path, const std::string& what, std::ostream& log) {
  require_file(path, what);
  auto parsed = data::parse_dataset(path);
  for (const auto& w : parsed.warnings) log << "warning: " << w << "\n";
  return parsed;
}

std::vector<data::Instance> instances_for(std::span<const data::TargetedSentence> records,
                                          const data::Vocabulary& vocab, std::size_t pad_len) {
  return data::make_instances(records, vocab, std::max(pad_len, data::longest_sentence(records)));
}

std::vector<Label> golds_of(std::span<const data::Instance> instances) {
  std::vector<Label> out;
  for (const auto& inst : instances) out.push_back(inst.label);
  return out;
}

metrics::EvalReport evaluate_model(const TNet& model, std::span<const data::Instance> instances) {
  std::vector<Label> predictions;
  for (const auto& p : model.predict(instances)) predictions.push_back(p.label);
  return metrics::evaluate(predictions, golds_of(instances));
}

struct LoadedData {
  data::ParseResult train, valid, test;
  bool has_valid = false;
  bool has_test = false;
  data::Vocabulary vocab;
  std::size_t pad_len = 1;
};

LoadedData load_data(const DataFiles& files, std::ostream& log) {
  if (files.embeddings) require_file(*files.embeddings, "embedding file");
  LoadedData d;
  d.train = load_dataset(files.train, "training file", log);
  if (d.train.records.empty()) throw ConfigError("training file has no usable records: " + files.train.string());
  std::vector<std::vector<data::TargetedSentence>> all{d.train.records};
  if (files.valid) {
    d.valid = load_dataset(*files.valid, "validation file", log);
    d.has_valid = true;
    all.push_back(d.valid.records);
  }
  if (files.test) {
    d.test = load_dataset(*files.test, "test file", log);
    d.has_test = true;
    all.push_back(d.test.records);
  }
  d.vocab = data::Vocabulary::build(all);
  for (const auto& set : all) d.pad_len = std::max(d.pad_len, data::longest_sentence(set));
  return d;
}

data::EmbeddingStore embeddings_for(const DataFiles& files, const data::Vocabulary& vocab, std::size_t dim_w,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (files.embeddings) return data::load_embeddings(*files.embeddings, vocab, dim_w, rng);
  return data::random_embeddings(vocab, dim_w, rng);
}

struct RunOutcome {
  Checkpoint checkpoint;
  train::RunHistory history;
  std::optional<metrics::EvalReport> test;
  std::size_t pretrained = 0;
};

RunOutcome train_one(const LoadedData& d, const DataFiles& files, train::Hyperparams hyper) {
  auto store = embeddings_for(files, d.vocab, hyper.dim_w, hyper.seed);
  auto train_all = data::make_instances(d.train.records, d.vocab, d.pad_len);
  std::vector<data::Instance> train_set, heldout;
  if (d.has_valid) {
    train_set = std::move(train_all);
    heldout = data::make_instances(d.valid.records, d.vocab, d.pad_len);
  } else {
    std::tie(train_set, heldout) = train::heldout_split<data::Instance>(train_all, 0.2, hyper.seed);
  }
  auto model = TNet::initialize(hyper.model_config(d.vocab.size()), store.matrix, hyper.seed);
  auto result = train::train(std::move(model), train_set, heldout, hyper);
  RunOutcome out{Checkpoint{hyper, d.vocab, result.model.params(), d.pad_len}, result.history, std::nullopt,
                 store.pretrained};
  if (d.has_test) {
    out.test = evaluate_model(result.model, data::make_instances(d.test.records, d.vocab, d.pad_len));
  }
  return out;
}

double best_heldout(const train::RunHistory& h) {
  if (h.best_epoch == 0) return 0.0;
  const auto& curve = h.heldout_accuracy.empty() ? h.train_accuracy : h.heldout_accuracy;
  return curve.empty() ? 0.0 : curve[h.best_epoch - 1];
}

json data_summary(const LoadedData& d) {
  return json{{"train", d.train.records.size()},
              {"valid", d.has_valid ? json(d.valid.records.size()) : json(nullptr)},
              {"test", d.has_test ? json(d.test.records.size()) : json(nullptr)},
              {"skipped_conflict",
               d.train.skipped_conflict + d.valid.skipped_conflict + d.test.skipped_conflict},
              {"vocab_size", d.vocab.size()},
              {"pad_len", d.pad_len}};
}

double mean(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<fs::path> expand_system(const fs::path& path) {
  if (fs::is_regular_file(path)) return {path};
  if (!fs::is_directory(path)) throw UsageError("checkpoint not found: " + path.string());
  if (fs::is_regular_file(path / "checkpoint.json")) return {path / "checkpoint.json"};
  std::vector<std::pair<std::size_t, fs::path>> runs;
  const std::regex pattern("run-([0-9]+)");
  for (const auto& entry : fs::directory_iterator(path)) {
    std::smatch m;
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && std::regex_match(name, m, pattern) &&
        fs::is_regular_file(entry.path() / "checkpoint.json")) {
      runs.emplace_back(std::stoul(m[1]), entry.path() / "checkpoint.json");
    }
  }
  if (runs.empty()) throw UsageError("no checkpoint.json under " + path.string());
  std::sort(runs.begin(), runs.end());
  std::vector<fs::path> out;
  for (auto& [index, p] : runs) out.push_back(p);
  return out;
}

// Identical per-run differences leave t undefined; that is reported, not thrown.
json ttest_json(const std::vector<double>& a, const std::vector<double>& b) {
  try {
    return report::to_json(metrics::paired_t_test(a, b));
  } catch (const DegenerateInputError& e) {
    return json{{"error", e.what()}};
  }
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

train::Hyperparams resolve_hyperparams(const Overrides& o) {
  json file = json::object();
  if (o.config_file) file = read_json_file(*o.config_file);
  if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
  Variant variant = Variant::TNetLF;
  if (o.variant) {
    variant = *o.variant;
  } else if (file.contains("variant")) {
    train::Hyperparams probe;
    report::merge_json(json{{"variant", file["variant"]}}, probe);
    variant = probe.variant;
  }
  auto h = train::Hyperparams::defaults(variant, o.dataset);
  report::merge_json(file, h);
  h.variant = variant;
  if (o.seed) h.seed = *o.seed;
  if (o.epochs) h.epochs = *o.epochs;
  if (o.share_target_encoder) h.share_target_encoder = true;
  if (o.per_layer_params) h.per_layer_params = true;
  if (o.freeze_embeddings) h.freeze_embeddings = true;
  h.validate();
  return h;
}

json train_command(const TrainRequest& request, std::ostream& log) {
  if (request.runs == 0) throw UsageError("--runs must be at least 1");
  const auto base = resolve_hyperparams(request.overrides);
  const auto d = load_data(request.files, log);
  write_json(request.out / "config.json", report::to_json(base));

  json runs = json::array();
  std::vector<double> test_acc, test_f1;
  for (std::size_t r = 0; r < request.runs; ++r) {
    auto hyper = base;
    hyper.seed = base.seed + r;
    const auto dir = request.runs == 1 ? request.out : request.out / ("run-" + std::to_string(r + 1));
    log << "run " << r + 1 << "/" << request.runs << " (seed " << hyper.seed << ")\n";
    auto outcome = train_one(d, request.files, hyper);
    save_checkpoint(dir / "checkpoint.json", outcome.checkpoint);
    write_json(dir / "history.json", report::to_json(outcome.history));
    json entry{{"seed", hyper.seed},
               {"checkpoint", (dir / "checkpoint.json").string()},
               {"best_epoch", outcome.history.best_epoch},
               {"best_heldout_accuracy", best_heldout(outcome.history)},
               {"pretrained_vectors", outcome.pretrained}};
    if (outcome.test) {
      write_json(dir / "eval.json", report::to_json(*outcome.test));
      entry["test"] = {{"accuracy", outcome.test->accuracy}, {"macro_f1", outcome.test->macro_f1}};
      test_acc.push_back(outcome.test->accuracy);
      test_f1.push_back(outcome.test->macro_f1);
    }
    runs.push_back(entry);
  }
  json summary{{"command", "train"},
               {"variant", std::string(variant_name(base.variant))},
               {"hyperparams", report::to_json(base)},
               {"data", data_summary(d)},
               {"runs", runs}};
  if (!test_acc.empty()) {
    summary["mean_test_accuracy"] = mean(test_acc);
    summary["mean_test_macro_f1"] = mean(test_f1);
  }
  write_json(request.out / "summary.json", summary);
  return summary;
}

json eval_command(const std::vector<fs::path>& systems, const fs::path& test_file, bool ttest) {
  if (systems.empty()) throw UsageError("eval needs at least one --checkpoint");
  require_file(test_file, "test file");
  const auto parsed = data::parse_dataset(test_file);
  if (parsed.records.empty()) throw ConfigError("test file has no usable records: " + test_file.string());

  json out{{"command", "eval"}, {"test_file", test_file.string()}, {"records", parsed.records.size()}};
  json entries = json::array();
  std::vector<std::vector<double>> accs, f1s;
  for (const auto& system : systems) {
    json runs = json::array();
    std::vector<double> acc, f1;
    for (const auto& path : expand_system(system)) {
      const auto ckpt = load_checkpoint(path);
      const auto instances = instances_for(parsed.records, ckpt.vocab, ckpt.pad_len);
      const auto rep = evaluate_model(ckpt.model(), instances);
      acc.push_back(rep.accuracy);
      f1.push_back(rep.macro_f1);
      runs.push_back({{"checkpoint", path.string()},
                      {"variant", std::string(variant_name(ckpt.hyper.variant))},
                      {"report", report::to_json(rep)}});
    }
    entries.push_back({{"path", system.string()},
                       {"runs", runs},
                       {"mean_accuracy", mean(acc)},
                       {"mean_macro_f1", mean(f1)}});
    accs.push_back(std::move(acc));
    f1s.push_back(std::move(f1));
  }
  out["systems"] = entries;
  if (ttest) {
    if (systems.size() != 2) throw UsageError("--ttest compares exactly two systems");
    if (accs[0].size() != accs[1].size() || accs[0].size() < 2) {
      throw UsageError("--ttest needs the same number of runs (at least 2) in both systems");
    }
    out["ttest"] = {{"runs", accs[0].size()},
                    {"accuracy", ttest_json(accs[0], accs[1])},
                    {"macro_f1", ttest_json(f1s[0], f1s[1])}};
  }
  return out;
}

json predict_command(const fs::path& checkpoint, const std::string& sentence, const std::string& target,
                     std::optional<std::size_t> occurrence) {
  require_file(checkpoint, "checkpoint");
  const auto ckpt = load_checkpoint(checkpoint);
  const auto record = data::make_record(sentence, target, occurrence, Label::Neutral);
  const std::vector<data::TargetedSentence> records{record};
  const auto instance = instances_for(records, ckpt.vocab, ckpt.pad_len).front();
  const auto model = ckpt.model();
  const auto prediction = model.predict(instance);

  const auto choice = head::most_informative_ngram(prediction.windows);
  json tokens = json::array();
  for (std::size_t i = 0; i < model.config().kernel_size; ++i) {
    const auto pos = choice.start + i;
    tokens.push_back(pos < record.tokens.size() ? record.tokens[pos] : std::string(data::Vocabulary::kPad));
  }
  json probabilities = json::object();
  for (auto label : kAllLabels) probabilities[std::string(label_code(label))] = prediction.probabilities[index_of(label)];
  std::size_t unknown = 0;
  for (const auto& t : record.tokens) unknown += !ckpt.vocab.find(t).has_value();
  return json{{"command", "predict"},
              {"label", std::string(label_code(prediction.label))},
              {"label_name", std::string(label_name(prediction.label))},
              {"probabilities", probabilities},
              {"target", {{"start", record.target_start}, {"length", record.target_len}}},
              {"unknown_tokens", unknown},
              {"ngram",
               {{"kernel", choice.kernel},
                {"start", choice.start + 1},
                {"votes", choice.votes},
                {"kernels", prediction.windows.size()},
                {"tokens", tokens}}}};
}

json gradcheck_command(const std::vector<Variant>& variants, std::uint64_t seed, std::optional<diag::Fault> fault) {
  json results = json::array();
  bool passed = true;
  double worst = 0.0;
  for (auto v : variants) {
    auto setup = diag::tiny_setup(v, {}, seed);
    auto rep = diag::model_gradcheck(setup.model, setup.instances, 1e-4, 1e-5, fault);
    passed = passed && rep.passed;
    worst = std::max(worst, rep.max_relative_error);
    auto entry = report::to_json(rep);
    entry["variant"] = std::string(variant_name(v));
    results.push_back(entry);
  }
  json out{{"command", "gradcheck"},
           {"tolerance", 1e-4},
           {"seed", seed},
           {"passed", passed},
           {"max_relative_error", worst},
           {"variants", results}};
  if (fault) out["fault"] = {{"op", std::string(ag::op_name(fault->op))}, {"factor", fault->factor}};
  return out;
}

json ablate_command(const Overrides& overrides, const DataFiles& files, std::size_t runs, std::ostream& log) {
  if (!files.test) throw UsageError("ablate needs --test-file");
  if (runs == 0) throw UsageError("--runs must be at least 1");
  const auto d = load_data(files, log);
  json rows = json::array();
  for (auto v : all_variants()) {
    auto o = overrides;
    o.variant = v;
    const auto base = resolve_hyperparams(o);
    std::vector<double> acc, f1;
    for (std::size_t r = 0; r < runs; ++r) {
      auto hyper = base;
      hyper.seed = base.seed + r;
      log << variant_name(v) << " run " << r + 1 << "/" << runs << "\n";
      auto outcome = train_one(d, files, hyper);
      acc.push_back(outcome.test->accuracy);
      f1.push_back(outcome.test->macro_f1);
    }
    rows.push_back({{"variant", std::string(variant_name(v))},
                    {"accuracy", mean(acc)},
                    {"macro_f1", mean(f1)},
                    {"run_accuracy", acc},
                    {"run_macro_f1", f1}});
  }
  return json{{"command", "ablate"}, {"runs", runs}, {"data", data_summary(d)}, {"rows", rows}};
}

std::string ablation_table(const json& ablation) {
  std::size_t width = 7;
  for (const auto& row : ablation.at("rows")) width = std::max(width, row.at("variant").get<std::string>().size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "variant" << "  " << std::right << std::setw(8)
     << "acc" << "  " << std::setw(8) << "macro-f1" << "\n";
  for (const auto& row : ablation.at("rows")) {
    os << std::left << std::setw(static_cast<int>(width)) << row.at("variant").get<std::string>() << "  "
       << std::right << std::setw(8) << fixed(row.at("accuracy").get<double>()) << "  " << std::setw(8)
       << fixed(row.at("macro_f1").get<double>()) << "\n";
  }
  return os.str();
}

std::string eval_table(const json& evaluation) {
  std::ostringstream os;
  for (const auto& system : evaluation.at("systems")) {
    os << system.at("path").get<std::string>() << ": accuracy " << fixed(system.at("mean_accuracy").get<double>())
       << ", macro-f1 " << fixed(system.at("mean_macro_f1").get<double>()) << " over "
       << system.at("runs").size() << " run(s)\n";
  }
  if (evaluation.contains("ttest")) {
    const auto& t = evaluation.at("ttest");
    auto p = [](const json& r) { return r.contains("p") ? fixed(r.at("p").get<double>()) : std::string("n/a"); };
    os << "paired t-test: accuracy p=" << p(t.at("accuracy")) << ", macro-f1 p=" << p(t.at("macro_f1")) << "\n";
  }
  return os.str();
}

namespace {

void add_hyper_options(CLI::App& cmd, Overrides& o, std::string& variant, std::string& dataset) {
  cmd.add_option("--variant", variant, "Model variant (default tnet-lf)");
  cmd.add_option("--dataset", dataset, "Defaults column: laptop, rest or twitter")->default_str("laptop");
  cmd.add_option("--config", o.config_file, "JSON file of hyperparameter overrides");
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--epochs", o.epochs, "Training epochs");
  cmd.add_flag("--share-target-encoder", o.share_target_encoder, "Encode the target with the sentence BiLSTM");
  cmd.add_flag("--per-layer-params", o.per_layer_params, "Separate transformation weights per layer");
  cmd.add_flag("--freeze-embeddings", o.freeze_embeddings, "Keep word vectors fixed");
}

void finish_overrides(Overrides& o, const std::string& variant, const std::string& dataset) {
  if (!variant.empty()) {
    o.variant = parse_variant(variant);
    if (!o.variant) throw UsageError("unknown variant '" + variant + "'");
  }
  auto ds = train::parse_dataset_name(dataset);
  if (!ds) throw UsageError("unknown dataset '" + dataset + "'");
  o.dataset = *ds;
}

void add_data_options(CLI::App& cmd, DataFiles& files, std::optional<fs::path>& train_file) {
  cmd.add_option("--train-file", train_file, "Training records (JSONL)")->required();
  cmd.add_option("--valid-file", files.valid, "Held-out records; default is 20% of the training file");
  cmd.add_option("--test-file", files.test, "Test records (JSONL)");
  cmd.add_option("--embeddings", files.embeddings, "Word vector text file; random vectors when absent");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Target-specific transformation networks for targeted sentiment classification", "tnet");
  app.require_subcommand(1);

  Overrides overrides;
  DataFiles files;
  std::optional<fs::path> train_file;
  std::string variant, dataset = "laptop";
  std::size_t runs = 1;
  fs::path out_dir = "tnet-out";
  std::optional<fs::path> out_file;

  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoints");
  add_hyper_options(*train_cmd, overrides, variant, dataset);
  add_data_options(*train_cmd, files, train_file);
  train_cmd->add_option("--runs", runs, "Independent runs with consecutive seeds");
  train_cmd->add_option("--out", out_dir, "Output directory");

  std::vector<fs::path> checkpoints;
  std::optional<fs::path> test_file;
  bool ttest = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints on a test file");
  eval_cmd->add_option("--checkpoint", checkpoints, "Checkpoint file or train output directory")->required();
  eval_cmd->add_option("--test-file", test_file, "Test records (JSONL)")->required();
  eval_cmd->add_flag("--ttest", ttest, "Paired t-test between two systems over their runs");
  eval_cmd->add_option("--out", out_file, "Also write the report JSON here");

  fs::path checkpoint;
  std::string sentence, target;
  std::optional<std::size_t> occurrence;
  auto* predict_cmd = app.add_subcommand("predict", "Classify one target in one sentence");
  predict_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  predict_cmd->add_option("--sentence", sentence, "Pre-tokenized sentence")->required();
  predict_cmd->add_option("--target", target, "Target phrase")->required();
  predict_cmd->add_option("--occurrence", occurrence, "0-based match of the target when it repeats");

  std::uint64_t gc_seed = 1;
  std::string corrupt_op;
  double corrupt_factor = 1.5;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Compare backward gradients with finite differences");
  gradcheck_cmd->add_option("--variant", variant, "Check one variant (default: all)");
  gradcheck_cmd->add_option("--seed", gc_seed, "Seed for the tiny model and inputs");
  gradcheck_cmd->add_option("--corrupt-op", corrupt_op, "Scale the backward pass of this primitive (negative control)");
  gradcheck_cmd->add_option("--corrupt-factor", corrupt_factor, "Scale factor for --corrupt-op");
  gradcheck_cmd->add_option("--out", out_file, "Also write the report JSON here");

  auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate every variant");
  add_hyper_options(*ablate_cmd, overrides, variant, dataset);
  add_data_options(*ablate_cmd, files, train_file);
  ablate_cmd->add_option("--runs", runs, "Runs per variant");
  ablate_cmd->add_option("--out", out_dir, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (train_file) files.train = *train_file;
    if (*train_cmd) {
      finish_overrides(overrides, variant, dataset);
      out << train_command({overrides, files, runs, out_dir}, err).dump(2) << "\n";
    } else if (*eval_cmd) {
      auto result = eval_command(checkpoints, *test_file, ttest);
      if (out_file) write_json(*out_file, result);
      out << result.dump(2) << "\n";
      err << eval_table(result);
      if (result.contains("ttest") &&
          (result["ttest"]["accuracy"].contains("error") || result["ttest"]["macro_f1"].contains("error"))) {
        err << "error: t-test undefined for identical per-run differences\n";
        return 1;
      }
    } else if (*predict_cmd) {
      out << predict_command(checkpoint, sentence, target, occurrence).dump(2) << "\n";
    } else if (*gradcheck_cmd) {
      std::vector<Variant> variants = all_variants();
      if (!variant.empty()) {
        auto v = parse_variant(variant);
        if (!v) throw UsageError("unknown variant '" + variant + "'");
        variants = {*v};
      }
      std::optional<diag::Fault> fault;
      if (!corrupt_op.empty()) {
        auto op = ag::op_from_name(corrupt_op);
        if (!op) throw UsageError("unknown primitive '" + corrupt_op + "'");
        fault = diag::Fault{*op, corrupt_factor};
      }
      auto result = gradcheck_command(variants, gc_seed, fault);
      if (out_file) write_json(*out_file, result);
      out << result.dump(2) << "\n";
      if (!result.at("passed").get<bool>()) {
        err << "gradient check FAILED (max relative error " << result.at("max_relative_error").get<double>()
            << ")\n";
        return 1;
      }
    } else if (*ablate_cmd) {
      finish_overrides(overrides, variant, dataset);
      auto result = ablate_command(overrides, files, runs, err);
      const auto table = ablation_table(result);
      write_json(out_dir / "ablation.json", result);
      write_text(out_dir / "ablation.txt", table);
      out << table;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace tnet::cli
