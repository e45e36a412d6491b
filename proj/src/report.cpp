#include "tnet/report.hpp"

#include <string>

#include "tnet/error.hpp"
#include "tnet/label.hpp"

namespace tnet::report {

json to_json(const train::Hyperparams& h) {
  return json{
      {"dim_w", h.dim_w},
      {"dim_h", h.dim_h},
      {"p_lstm", h.p_lstm},
      {"p_sent", h.p_sent},
      {"layers", h.layers},
      {"batch_size", h.batch_size},
      {"kernel_size", h.kernel_size},
      {"num_kernels", h.num_kernels},
      {"C", h.C},
      {"variant", std::string(variant_name(h.variant))},
      {"epochs", h.epochs},
      {"seed", h.seed},
      {"learning_rate", h.learning_rate},
      {"beta1", h.beta1},
      {"beta2", h.beta2},
      {"adam_epsilon", h.adam_epsilon},
      {"init_range", h.init_range},
      {"share_target_encoder", h.share_target_encoder},
      {"per_layer_params", h.per_layer_params},
      {"freeze_embeddings", h.freeze_embeddings},
      {"scale_final_extra", h.scale_final_extra},
  };
}

namespace {

template <class T>
void read(const json& source, const char* key, T& field) {
  try {
    field = source.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("hyperparameter '") + key + "': " + e.what());
  }
}

}  // namespace

void merge_json(const json& source, train::Hyperparams& h) {
  if (!source.is_object()) throw ConfigError("hyperparameters: expected a JSON object");
  for (const auto& [key, value] : source.items()) {
    if (key == "dim_w") read(source, "dim_w", h.dim_w);
    else if (key == "dim_h") read(source, "dim_h", h.dim_h);
    else if (key == "p_lstm") read(source, "p_lstm", h.p_lstm);
    else if (key == "p_sent") read(source, "p_sent", h.p_sent);
    else if (key == "layers") read(source, "layers", h.layers);
    else if (key == "batch_size") read(source, "batch_size", h.batch_size);
    else if (key == "kernel_size") read(source, "kernel_size", h.kernel_size);
    else if (key == "num_kernels") read(source, "num_kernels", h.num_kernels);
    else if (key == "C") read(source, "C", h.C);
    else if (key == "epochs") read(source, "epochs", h.epochs);
    else if (key == "seed") read(source, "seed", h.seed);
    else if (key == "learning_rate") read(source, "learning_rate", h.learning_rate);
    else if (key == "beta1") read(source, "beta1", h.beta1);
    else if (key == "beta2") read(source, "beta2", h.beta2);
    else if (key == "adam_epsilon") read(source, "adam_epsilon", h.adam_epsilon);
    else if (key == "init_range") read(source, "init_range", h.init_range);
    else if (key == "share_target_encoder") read(source, "share_target_encoder", h.share_target_encoder);
    else if (key == "per_layer_params") read(source, "per_layer_params", h.per_layer_params);
    else if (key == "freeze_embeddings") read(source, "freeze_embeddings", h.freeze_embeddings);
    else if (key == "scale_final_extra") read(source, "scale_final_extra", h.scale_final_extra);
    else if (key == "variant") {
      std::string name;
      read(source, "variant", name);
      auto v = parse_variant(name);
      if (!v) throw ConfigError("hyperparameters: unknown variant '" + name + "'");
      h.variant = *v;
    } else {
      throw ConfigError("hyperparameters: unknown key '" + key + "'");
    }
  }
}

train::Hyperparams hyperparams_from_json(const json& source) {
  train::Hyperparams h;
  merge_json(source, h);
  h.validate();
  return h;
}

json to_json(const metrics::EvalReport& r) {
  json per_class = json::object();
  for (auto label : kAllLabels) {
    const auto& m = r.per_class[index_of(label)];
    per_class[std::string(label_name(label))] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  json labels = json::array();
  for (auto label : kAllLabels) labels.push_back(std::string(label_name(label)));
  return json{{"accuracy", r.accuracy},
              {"macro_f1", r.macro_f1},
              {"total", r.total},
              {"labels", labels},
              {"confusion", r.confusion},
              {"per_class", per_class}};
}

json to_json(const metrics::TTestResult& t) {
  return json{{"t", t.t}, {"p", t.p}, {"df", t.degrees_of_freedom}, {"mean_difference", t.mean_difference}};
}

json to_json(const train::RunHistory& h) {
  json out{{"train_loss", h.train_loss},
           {"heldout_accuracy", h.heldout_accuracy},
           {"heldout_macro_f1", h.heldout_macro_f1},
           {"best_epoch", h.best_epoch}};
  if (!h.train_accuracy.empty()) out["train_accuracy"] = h.train_accuracy;
  return out;
}

json to_json(const ag::GradCheckReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"name", e.name},
                       {"elements", e.elements},
                       {"max_relative_error", e.max_relative_error},
                       {"worst_index", e.worst_index},
                       {"analytic", e.analytic},
                       {"numeric", e.numeric},
                       {"passed", e.passed}});
  }
  return json{{"passed", r.passed}, {"max_relative_error", r.max_relative_error}, {"parameters", entries}};
}

}  // namespace tnet::report
