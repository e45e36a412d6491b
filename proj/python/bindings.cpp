#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "tnet/head.hpp"
#include "tnet/label.hpp"
#include "tnet/metrics.hpp"
#include "tnet/report.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace tnet;

namespace {

// Documents cross the boundary as JSON text; the Python package decodes them.
std::string dump(const nlohmann::json& j) { return j.dump(); }

std::vector<Label> labels_from(const std::vector<std::string>& codes) {
  std::vector<Label> out;
  for (const auto& c : codes) {
    auto label = parse_label(c);
    if (!label) throw ConfigError("unknown label '" + c + "'");
    out.push_back(*label);
  }
  return out;
}

cli::Overrides overrides_from(std::optional<std::string> variant, const std::string& dataset,
                              std::optional<fs::path> config, std::optional<std::uint64_t> seed,
                              std::optional<std::size_t> epochs) {
  cli::Overrides o;
  if (variant) {
    o.variant = parse_variant(*variant);
    if (!o.variant) throw cli::UsageError("unknown variant '" + *variant + "'");
  }
  auto ds = train::parse_dataset_name(dataset);
  if (!ds) throw cli::UsageError("unknown dataset '" + dataset + "'");
  o.dataset = *ds;
  o.config_file = std::move(config);
  o.seed = seed;
  o.epochs = epochs;
  return o;
}

}  // namespace

PYBIND11_MODULE(_tnet, m) {
  m.doc() = "Native core of the tnet package";

  auto base = py::register_exception<Error>(m, "TNetError", PyExc_RuntimeError);
  py::register_exception<cli::UsageError>(m, "UsageError", base.ptr());

  m.def(
      "position_relevance",
      [](std::size_t k, std::size_t m_, std::size_t n, std::size_t padded_len, double C) {
        return head::position_relevance(k, m_, n, padded_len, C).v;
      },
      py::arg("target_start"), py::arg("target_len"), py::arg("length"), py::arg("padded_len"), py::arg("C"));

  m.def(
      "accuracy",
      [](const std::vector<std::string>& predictions, const std::vector<std::string>& golds) {
        return metrics::accuracy(labels_from(predictions), labels_from(golds));
      },
      py::arg("predictions"), py::arg("golds"));
  m.def(
      "macro_f1",
      [](const std::vector<std::string>& predictions, const std::vector<std::string>& golds) {
        return metrics::macro_f1(labels_from(predictions), labels_from(golds));
      },
      py::arg("predictions"), py::arg("golds"));
  m.def(
      "paired_t_test",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return dump(report::to_json(metrics::paired_t_test(a, b)));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "train",
      [](const fs::path& train_file, const fs::path& out, std::optional<fs::path> test_file,
         std::optional<fs::path> valid_file, std::optional<fs::path> embeddings, std::optional<fs::path> config,
         std::optional<std::string> variant, const std::string& dataset, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> epochs, std::size_t runs) {
        cli::TrainRequest request{overrides_from(variant, dataset, config, seed, epochs),
                                  {train_file, valid_file, test_file, embeddings}, runs, out};
        std::ostringstream log;
        py::gil_scoped_release release;
        return dump(cli::train_command(request, log));
      },
      py::arg("train_file"), py::arg("out"), py::arg("test_file") = py::none(), py::arg("valid_file") = py::none(),
      py::arg("embeddings") = py::none(), py::arg("config") = py::none(), py::arg("variant") = py::none(),
      py::arg("dataset") = "laptop", py::arg("seed") = py::none(), py::arg("epochs") = py::none(),
      py::arg("runs") = 1);

  m.def(
      "evaluate",
      [](const std::vector<fs::path>& checkpoints, const fs::path& test_file, bool ttest) {
        return dump(cli::eval_command(checkpoints, test_file, ttest));
      },
      py::arg("checkpoints"), py::arg("test_file"), py::arg("ttest") = false);

  m.def(
      "predict",
      [](const fs::path& checkpoint, const std::string& sentence, const std::string& target,
         std::optional<std::size_t> occurrence) {
        return dump(cli::predict_command(checkpoint, sentence, target, occurrence));
      },
      py::arg("checkpoint"), py::arg("sentence"), py::arg("target"), py::arg("occurrence") = py::none());

  m.def(
      "gradcheck",
      [](std::optional<std::string> variant, std::uint64_t seed) {
        std::vector<Variant> variants = all_variants();
        if (variant) {
          auto v = parse_variant(*variant);
          if (!v) throw cli::UsageError("unknown variant '" + *variant + "'");
          variants = {*v};
        }
        py::gil_scoped_release release;
        return dump(cli::gradcheck_command(variants, seed, std::nullopt));
      },
      py::arg("variant") = py::none(), py::arg("seed") = 1);

  m.def("variants", [] {
    std::vector<std::string> names;
    for (auto v : all_variants()) names.emplace_back(variant_name(v));
    return names;
  });
}
