#pragma once

#include <json.hpp>

#include "tnet/gradcheck.hpp"
#include "tnet/metrics.hpp"
#include "tnet/trainer.hpp"

// JSON views of the artifacts written by the command-line tool.
namespace tnet::report {

using nlohmann::json;

json to_json(const train::Hyperparams& hyper);
/// Missing keys keep the values already in `into`; unknown keys are rejected.
void merge_json(const json& source, train::Hyperparams& into);
train::Hyperparams hyperparams_from_json(const json& source);

json to_json(const metrics::EvalReport& report);
json to_json(const metrics::TTestResult& result);
json to_json(const train::RunHistory& history);
json to_json(const ag::GradCheckReport& report);

}  // namespace tnet::report
