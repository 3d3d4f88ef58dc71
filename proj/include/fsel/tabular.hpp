#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fsel {

enum class TaskKind { classification, regression };

enum class ColumnKind { numeric, categorical };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::categorical;
    std::vector<std::optional<std::string>> values;  // nullopt = missing cell
    std::vector<double> numeric;                     // parsed values, NaN where missing (numeric kind only)

    std::size_t size() const { return values.size(); }
    bool missing(std::size_t row) const { return !values[row].has_value(); }
};

struct Dataset {
    std::string name;
    std::vector<Column> features;
    Column target;
    TaskKind task = TaskKind::classification;

    std::size_t n_rows() const { return target.size(); }
    std::size_t n_features() const { return features.size(); }
    std::size_t feature_index(const std::string& feature_name) const;  // throws DataError if unknown
    std::vector<std::string> target_classes() const;                   // sorted distinct labels (classification)
};

struct Descriptor {
    std::string dataset_description;
    std::map<std::string, std::string> features;  // feature name -> description
};

struct SamplePairs {
    std::string feature;
    std::vector<std::pair<std::string, std::string>> pairs;  // (feature value, target value), rendered
    std::size_t shots = 0;
};

// Render a cell for prompt text: categorical labels verbatim, numerics in
// shortest round-trip decimal form, missing cells as "NA".
std::string render_value(const Column& col, std::size_t row);
std::string render_number(double v);

Dataset load_dataset(const std::string& csv_path,
                     const std::string& target,
                     TaskKind task,
                     const std::string& dataset_name = "");

Descriptor load_descriptor(const std::string& descriptor_path, const Dataset& d);

// k distinct row indices, ascending; class-stratified for classification.
std::vector<std::size_t> subsample_shots(const Dataset& d, std::size_t k, std::uint64_t seed);

SamplePairs make_sample_pairs(const Dataset& d,
                              const std::string& feature,
                              const std::vector<std::size_t>& rows);

// Fitted preprocessing state: one-hot for categoricals (categories learned on
// fit rows, unseen -> all zeros), standardization and median imputation for
// numerics, mode imputation for categoricals. One-hot column groups are
// tracked back to their source feature.
class Encoder {
public:
    static Encoder fit(const Dataset& d, const std::vector<std::size_t>& fit_rows);

    Eigen::MatrixXd transform(const Dataset& d, const std::vector<std::size_t>& rows) const;

    std::size_t width() const { return width_; }
    // Output-column index -> source feature index.
    const std::vector<std::size_t>& column_feature() const { return column_feature_; }
    // Source feature index -> [first, last) output-column range.
    std::pair<std::size_t, std::size_t> feature_columns(std::size_t feature) const {
        return {offsets_[feature], offsets_[feature + 1]};
    }

private:
    struct NumericStats {
        double median = 0.0;
        double mean = 0.0;
        double std = 0.0;  // population std on fit rows; 0 for constant columns
    };
    struct CategoricalStats {
        std::vector<std::string> categories;  // sorted
        std::string mode;
    };

    std::vector<ColumnKind> kinds_;
    std::vector<NumericStats> numeric_;
    std::vector<CategoricalStats> categorical_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> column_feature_;
    std::size_t width_ = 0;
};

struct PreprocessResult {
    Eigen::MatrixXd design;  // fit_rows transformed
    Eigen::VectorXd target;  // class index (classification) or numeric value (regression)
    Encoder encoder;
};

PreprocessResult preprocess(const Dataset& d, const std::vector<std::size_t>& fit_rows);

// Target vector for an arbitrary row subset (class index / numeric value).
Eigen::VectorXd target_vector(const Dataset& d, const std::vector<std::size_t>& rows);

std::vector<std::size_t> all_rows(const Dataset& d);

}  // namespace fsel
