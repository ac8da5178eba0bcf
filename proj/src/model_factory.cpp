#include "escape_predictor.hpp"
#include "model.hpp"
#include "prefix_code.hpp"
#include "tree_predictor.hpp"

namespace tpc {

namespace {

AdditiveEstimator estimator_field(const nlohmann::json& j, const char* fallback) {
    return AdditiveEstimator::from_name(j.value("estimator", fallback));
}

std::size_t size_field(const nlohmann::json& j) {
    require(j.contains("alphabet_size") && j["alphabet_size"].is_number_integer() &&
                j["alphabet_size"].get<std::int64_t>() >= 0,
            ErrorCode::parse, "predictor spec: missing or invalid \"alphabet_size\"");
    return j["alphabet_size"].get<std::size_t>();
}

} // namespace

std::unique_ptr<SequentialModel> model_from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::parse, "predictor spec: expected a JSON object");
    const std::string name = j.value("predictor", "");
    if (name == "flat") {
        return std::make_unique<PredictorTree>(
            PredictorTree::flat(size_field(j), estimator_field(j, "laplace")));
    }
    if (name == "partition") {
        require(j.contains("groups") && j["groups"].is_array(), ErrorCode::parse,
                "predictor spec: partition needs a \"groups\" array");
        return std::make_unique<PredictorTree>(PredictorTree::from_partition(
            j["groups"].get<std::vector<std::vector<Letter>>>(), estimator_field(j, "laplace")));
    }
    if (name == "tree") {
        require(j.contains("tree"), ErrorCode::parse, "predictor spec: tree needs a \"tree\" topology");
        return std::make_unique<PredictorTree>(
            PredictorTree::from_json(j["tree"], estimator_field(j, "laplace")));
    }
    if (name == "escape") {
        return std::make_unique<EscapeModel>(size_field(j), estimator_field(j, "laplace"), false);
    }
    if (name == "escape-kt") {
        return std::make_unique<EscapeModel>(size_field(j), estimator_field(j, "krichevsky"), true);
    }
    if (name == "code-tree") {
        require(j.contains("code"), ErrorCode::parse, "predictor spec: code-tree needs a \"code\" spec");
        return std::make_unique<LazyCodeTree>(PrefixCode::from_json(j["code"]),
                                              estimator_field(j, "laplace"));
    }
    fail(ErrorCode::parse, "predictor spec: unknown predictor \"" + name + "\"");
}

} // namespace tpc
