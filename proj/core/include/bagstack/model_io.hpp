#pragma once

#include <bagstack/ensembles.hpp>
#include <bagstack/features.hpp>
#include <bagstack/learners.hpp>

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace bagstack {

/// Sets one flat-keyed hyperparameter, e.g. ("gbm.n_rounds", "40") or ("kind", "tree").
void set_spec_field(LearnerSpec& spec, std::string_view key, std::string_view value);

/// Every hyperparameter as (key, value) pairs, in a fixed order.
std::vector<std::pair<std::string, std::string>> spec_fields(const LearnerSpec& spec);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
double parse_double_strict(std::string_view text);

/// Everything needed to score raw recordings: the featurization, column
/// names, and one of the four model families.
struct ModelBundle {
    using Model = std::variant<TrainedModel, BaggingModel, StackingModel, BagStackingModel>;

    FeatureConfig features;
    std::vector<std::string> column_names;
    Model model;

    std::string_view method_name() const;
    ProbabilityMatrix predict(const Matrix& x, const EnsembleOptions& options = {}) const;
};

/// Text format, first line `bagstack-model v1`. Doubles are written in
/// shortest round-trip form, so save/load is prediction-exact.
void write_model(std::ostream& out, const ModelBundle& bundle);
ModelBundle read_model(std::istream& in);

void save_model(const std::string& path, const ModelBundle& bundle);
ModelBundle load_model(const std::string& path);

}  // namespace bagstack
