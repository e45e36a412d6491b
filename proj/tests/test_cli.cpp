#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "commands.hpp"
#include "tnet/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tnet;

namespace {

const std::string kData = TNET_TEST_DATA;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    // One directory per process: ctest may run these tests concurrently.
    root_ = fs::temp_directory_path() / ("tnet-cli-" + std::to_string(::getpid()));
    fs::remove_all(root_);
    auto lf = invoke(train_args(root_ / "lf", "tnet-lf", "1", "3"));
    ASSERT_EQ(lf.code, 0) << lf.err;
    auto as = invoke(train_args(root_ / "as", "tnet-as", "7", "3"));
    ASSERT_EQ(as.code, 0) << as.err;
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::vector<std::string> train_args(const fs::path& out, const std::string& variant, const std::string& seed,
                                             const std::string& runs) {
    return {"train", "--train-file", kData + "/train.jsonl", "--test-file", kData + "/test.jsonl",
            "--embeddings", kData + "/vectors8.txt", "--config", kData + "/tiny_config.json",
            "--variant", variant, "--seed", seed, "--runs", runs, "--out", out.string()};
  }

  static fs::path root_;
};

fs::path CliTest::root_;

TEST(CliHyperparams, PublishedDefaultsForVariantAndDataset) {
  cli::Overrides o;
  o.variant = Variant::TNetAS;
  o.dataset = train::DatasetName::Rest;
  auto h = cli::resolve_hyperparams(o);
  EXPECT_EQ(h.batch_size, 32u);
  EXPECT_EQ(h.C, 30.0);
  EXPECT_EQ(h.num_kernels, 100u);
}

TEST(CliHyperparams, FlagsBeatConfigFileBeatsDefaults) {
  cli::Overrides o;
  o.config_file = kData + "/tiny_config.json";
  o.epochs = 2;
  o.freeze_embeddings = true;
  auto h = cli::resolve_hyperparams(o);
  EXPECT_EQ(h.epochs, 2u);           // flag over file (30)
  EXPECT_EQ(h.batch_size, 4u);       // file over default (64)
  EXPECT_EQ(h.p_lstm, 0.3);          // default
  EXPECT_TRUE(h.freeze_embeddings);
  EXPECT_EQ(h.variant, Variant::TNetLF);
}

TEST(CliHyperparams, VariantFromConfigSelectsItsDefaults) {
  auto path = fs::temp_directory_path() / ("tnet-variant-config-" + std::to_string(::getpid()) + ".json");
  std::ofstream(path) << R"({"variant": "tnet-as"})";
  cli::Overrides o;
  o.config_file = path;
  o.dataset = train::DatasetName::Rest;
  auto h = cli::resolve_hyperparams(o);
  fs::remove(path);
  EXPECT_EQ(h.variant, Variant::TNetAS);
  EXPECT_EQ(h.batch_size, 32u);
}

TEST(CliUsage, MissingEmbeddingFileExitsTwo) {
  auto r = invoke({"train", "--train-file", kData + "/train.jsonl", "--embeddings", "/nonexistent/vectors.txt",
                   "--out", (fs::temp_directory_path() / "tnet-never").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("embedding file not found"), std::string::npos) << r.err;
}

TEST(CliUsage, BadInvocationsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"train"}).code, 2);
  EXPECT_EQ(invoke({"gradcheck", "--variant", "tnet-xx"}).code, 2);
  EXPECT_EQ(invoke({"gradcheck", "--corrupt-op", "not-an-op"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(CliUsage, UnknownConfigKeyFails) {
  auto path = fs::temp_directory_path() / ("tnet-bad-config-" + std::to_string(::getpid()) + ".json");
  std::ofstream(path) << R"({"dim_x": 3})";
  auto r = invoke({"train", "--train-file", kData + "/train.jsonl", "--config", path.string(), "--out",
                   (fs::temp_directory_path() / "tnet-never").string()});
  fs::remove(path);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("dim_x"), std::string::npos);
}

TEST_F(CliTest, TrainWritesCheckpointHistoryAndSummary) {
  for (int run = 1; run <= 3; ++run) {
    auto dir = root_ / "lf" / ("run-" + std::to_string(run));
    EXPECT_TRUE(fs::exists(dir / "checkpoint.json"));
    EXPECT_TRUE(fs::exists(dir / "history.json"));
    EXPECT_TRUE(fs::exists(dir / "eval.json"));
  }
  auto summary = json::parse(slurp(root_ / "lf" / "summary.json"));
  EXPECT_EQ(summary["runs"].size(), 3u);
  EXPECT_EQ(summary["runs"][2]["seed"], 3);
  EXPECT_EQ(summary["data"]["train"], 30);
  EXPECT_EQ(summary["runs"][0]["pretrained_vectors"], 24);
  auto history = json::parse(slurp(root_ / "lf" / "run-1" / "history.json"));
  EXPECT_EQ(history["train_loss"].size(), 30u);
  auto config = json::parse(slurp(root_ / "lf" / "config.json"));
  EXPECT_EQ(config["batch_size"], 4);
}

TEST_F(CliTest, TrainIsDeterministicGivenSeed) {
  auto again = root_ / "lf-again";
  auto r = invoke(train_args(again, "tnet-lf", "1", "1"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(again / "checkpoint.json"), slurp(root_ / "lf" / "run-1" / "checkpoint.json"));
  EXPECT_EQ(slurp(again / "history.json"), slurp(root_ / "lf" / "run-1" / "history.json"));
}

TEST_F(CliTest, EvalReportFieldsAndConfusionAgree) {
  auto r = invoke({"eval", "--checkpoint", (root_ / "lf" / "run-1" / "checkpoint.json").string(), "--test-file",
                   kData + "/test.jsonl"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  const auto& rep = j["systems"][0]["runs"][0]["report"];
  for (const char* key : {"accuracy", "macro_f1", "total", "labels", "confusion", "per_class"}) {
    EXPECT_TRUE(rep.contains(key)) << key;
  }
  std::size_t diagonal = 0, total = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t p = 0; p < 3; ++p) {
      total += rep["confusion"][g][p].get<std::size_t>();
      if (g == p) diagonal += rep["confusion"][g][p].get<std::size_t>();
    }
  }
  EXPECT_EQ(total, 12u);
  EXPECT_EQ(rep["accuracy"].get<double>(), static_cast<double>(diagonal) / static_cast<double>(total));
  // Same numbers as the evaluation written at training time.
  EXPECT_EQ(rep, json::parse(slurp(root_ / "lf" / "run-1" / "eval.json")));
}

TEST_F(CliTest, EvalTTestEmitsPValue) {
  auto r = invoke({"eval", "--checkpoint", (root_ / "lf").string(), "--checkpoint", (root_ / "as").string(),
                   "--test-file", kData + "/test.jsonl", "--ttest"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["ttest"]["runs"], 3);
  const double p = j["ttest"]["accuracy"]["p"].get<double>();
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
  EXPECT_EQ(j["ttest"]["accuracy"]["df"], 2);
  EXPECT_NE(r.err.find("paired t-test"), std::string::npos);
}

TEST_F(CliTest, EvalTTestNeedsTwoSystemsWithMatchingRuns) {
  auto r = invoke({"eval", "--checkpoint", (root_ / "lf").string(), "--test-file", kData + "/test.jsonl", "--ttest"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, EvalRejectsVocabularyHashMismatch) {
  auto text = slurp(root_ / "lf" / "run-1" / "checkpoint.json");
  auto j = json::parse(text);
  j["vocab_hash"] = "0000000000000000";
  auto path = root_ / "tampered.json";
  std::ofstream(path) << j.dump();
  auto r = invoke({"eval", "--checkpoint", path.string(), "--test-file", kData + "/test.jsonl"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("hash"), std::string::npos) << r.err;
}

TEST_F(CliTest, PredictIsDeterministicAndNormalized) {
  const std::vector<std::string> args{"predict", "--checkpoint", (root_ / "lf" / "run-1" / "checkpoint.json").string(),
                                      "--sentence", "the food was great but the service was awful",
                                      "--target", "service"};
  auto first = invoke(args);
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(first.out, invoke(args).out);
  auto j = json::parse(first.out);
  double total = 0.0;
  for (const auto& [label, p] : j["probabilities"].items()) total += p.get<double>();
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_TRUE(j["label"] == "P" || j["label"] == "N" || j["label"] == "O");
  EXPECT_EQ(j["target"]["start"], 7);
  EXPECT_EQ(j["ngram"]["tokens"].size(), 3u);
  EXPECT_EQ(j["ngram"]["kernels"], 10);
}

TEST_F(CliTest, PredictAcceptsUnknownWordsAndRepeatedTargets) {
  auto ckpt = (root_ / "lf" / "run-1" / "checkpoint.json").string();
  auto oov = invoke({"predict", "--checkpoint", ckpt, "--sentence", "zorp blix quux", "--target", "blix"});
  ASSERT_EQ(oov.code, 0) << oov.err;
  EXPECT_EQ(json::parse(oov.out)["unknown_tokens"], 3);

  auto repeated = invoke({"predict", "--checkpoint", ckpt, "--sentence", "the food was great but the food was cold",
                          "--target", "food", "--occurrence", "1"});
  ASSERT_EQ(repeated.code, 0) << repeated.err;
  EXPECT_EQ(json::parse(repeated.out)["target"]["start"], 7);

  auto ambiguous = invoke({"predict", "--checkpoint", ckpt, "--sentence", "the food was great but the food was cold",
                           "--target", "food"});
  EXPECT_EQ(ambiguous.code, 1);
}

TEST(CliGradcheck, AllVariantsPassAndListEveryParameter) {
  auto r = invoke({"gradcheck"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_LT(j["max_relative_error"].get<double>(), 1e-4);
  ASSERT_EQ(j["variants"].size(), all_variants().size());
  for (const auto& entry : j["variants"]) {
    auto variant = *parse_variant(entry["variant"].get<std::string>());
    auto setup = diag::tiny_setup(variant, {}, 1);
    std::set<std::string> expected, listed;
    for (const auto& [name, t] : setup.model.params()) expected.insert(name);
    for (const auto& p : entry["parameters"]) listed.insert(p["name"].get<std::string>());
    EXPECT_EQ(listed, expected) << entry["variant"];
  }
}

TEST(CliGradcheck, CorruptedDerivativeFails) {
  auto r = invoke({"gradcheck", "--variant", "tnet-as", "--corrupt-op", "sigmoid"});
  EXPECT_EQ(r.code, 1);
  auto j = json::parse(r.out);
  EXPECT_FALSE(j["passed"].get<bool>());
  EXPECT_EQ(j["fault"]["op"], "sigmoid");
}

TEST(CliAblate, AllVariantsAsJsonAndTable) {
  auto out = fs::temp_directory_path() / ("tnet-cli-ablate-" + std::to_string(::getpid()));
  fs::remove_all(out);
  auto r = invoke({"ablate", "--train-file", kData + "/train.jsonl", "--test-file", kData + "/test.jsonl",
                   "--embeddings", kData + "/vectors8.txt", "--config", kData + "/tiny_config.json", "--out",
                   out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(out / "ablation.json"));
  std::set<std::string> names;
  for (const auto& row : j["rows"]) {
    names.insert(row["variant"].get<std::string>());
    EXPECT_GE(row["accuracy"].get<double>(), 0.0);
    EXPECT_LE(row["accuracy"].get<double>(), 1.0);
  }
  EXPECT_EQ(names.size(), all_variants().size());
  EXPECT_TRUE(names.count("tnet-lf"));
  EXPECT_TRUE(names.count("tnet-as"));
  const auto table = slurp(out / "ablation.txt");
  EXPECT_EQ(table, r.out);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 10);
  fs::remove_all(out);
}

TEST(CliAblate, RequiresTestFile) {
  auto r = invoke({"ablate", "--train-file", kData + "/train.jsonl"});
  EXPECT_EQ(r.code, 2);
}

}  // namespace
