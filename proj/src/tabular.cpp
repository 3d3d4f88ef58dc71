#include "fsel/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "fsel/error.hpp"
#include "fsel/rng.hpp"

namespace fsel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

// Minimal RFC-4180 reader: quoted fields, embedded commas/newlines, "" escapes.
std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CSV file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.empty()) throw DataError("empty CSV file: " + path);

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    auto end_field = [&] {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_row();
        } else {
            field += c;
        }
        ++i;
    }
    if (!field.empty() || !row.empty()) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        end_row();
    }
    return rows;
}

}  // namespace

std::size_t Dataset::feature_index(const std::string& feature_name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].name == feature_name) return i;
    }
    throw DataError("unknown feature: " + feature_name);
}

std::vector<std::string> Dataset::target_classes() const {
    std::set<std::string> classes;
    for (const auto& v : target.values) {
        if (v) classes.insert(*v);
    }
    return {classes.begin(), classes.end()};
}

std::string render_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string render_value(const Column& col, std::size_t row) {
    if (col.missing(row)) return "NA";
    if (col.kind == ColumnKind::numeric) return render_number(col.numeric[row]);
    return *col.values[row];
}

Dataset load_dataset(const std::string& csv_path,
                     const std::string& target,
                     TaskKind task,
                     const std::string& dataset_name) {
    auto rows = read_csv(csv_path);
    const auto& header = rows.front();
    if (rows.size() < 2) throw DataError("CSV has no data rows: " + csv_path);

    std::size_t target_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == target) target_idx = i;
    }
    if (target_idx == header.size()) {
        throw DataError("target column '" + target + "' not found in " + csv_path);
    }
    if (header.size() < 2) throw DataError("dataset needs at least one feature column");

    const std::size_t n = rows.size() - 1;
    std::vector<Column> cols(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        cols[c].name = header[c];
        cols[c].values.resize(n);
    }
    for (std::size_t r = 0; r < n; ++r) {
        const auto& line = rows[r + 1];
        if (line.size() != header.size()) {
            throw DataError("row " + std::to_string(r + 2) + " has " + std::to_string(line.size()) +
                            " cells, expected " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (!line[c].empty()) cols[c].values[r] = line[c];
        }
    }

    // Kind inference: every non-missing cell parses as a finite real -> numeric.
    for (auto& col : cols) {
        bool numeric = true;
        bool any = false;
        for (const auto& v : col.values) {
            if (!v) continue;
            any = true;
            double x;
            if (!parse_double(*v, x)) {
                numeric = false;
                break;
            }
        }
        col.kind = (numeric && any) ? ColumnKind::numeric : ColumnKind::categorical;
        if (col.kind == ColumnKind::numeric) {
            col.numeric.assign(n, kNaN);
            for (std::size_t r = 0; r < n; ++r) {
                if (col.values[r]) {
                    double x;
                    parse_double(*col.values[r], x);
                    col.numeric[r] = x;
                }
            }
        }
    }

    Dataset d;
    d.name = dataset_name.empty() ? csv_path : dataset_name;
    d.task = task;
    d.target = std::move(cols[target_idx]);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c != target_idx) d.features.push_back(std::move(cols[c]));
    }

    for (std::size_t r = 0; r < n; ++r) {
        if (d.target.missing(r)) {
            throw DataError("target column has a missing value at row " + std::to_string(r + 2));
        }
    }
    if (task == TaskKind::classification && d.target_classes().size() < 2) {
        throw DataError("classification target has fewer than 2 distinct classes");
    }
    if (task == TaskKind::regression && d.target.kind != ColumnKind::numeric) {
        throw DataError("regression target must be numeric");
    }
    return d;
}

Descriptor load_descriptor(const std::string& descriptor_path, const Dataset& d) {
    std::ifstream in(descriptor_path);
    if (!in) throw DataError("cannot open descriptor file: " + descriptor_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid descriptor JSON: ") + e.what());
    }
    Descriptor desc;
    desc.dataset_description = j.value("dataset_description", std::string{});
    if (j.contains("features")) {
        for (auto& [name, text] : j.at("features").items()) {
            d.feature_index(name);  // throws on unknown feature
            desc.features[name] = text.get<std::string>();
        }
    }
    return desc;
}

std::vector<std::size_t> subsample_shots(const Dataset& d, std::size_t k, std::uint64_t seed) {
    const std::size_t n = d.n_rows();
    if (k < 1 || k > n) {
        throw DataError("shot count " + std::to_string(k) + " out of range for " +
                        std::to_string(n) + " rows");
    }

    std::vector<std::size_t> picked;
    if (d.task == TaskKind::classification) {
        auto classes = d.target_classes();
        std::vector<std::vector<std::size_t>> members(classes.size());
        std::unordered_map<std::string, std::size_t> class_of;
        for (std::size_t c = 0; c < classes.size(); ++c) class_of[classes[c]] = c;
        for (std::size_t r = 0; r < n; ++r) members[class_of[*d.target.values[r]]].push_back(r);

        // Largest-remainder allocation of k across classes, each present class
        // guaranteed one row when k >= class count.
        std::vector<std::size_t> counts(classes.size());
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            double exact = static_cast<double>(k) * members[c].size() / n;
            counts[c] = static_cast<std::size_t>(exact);
            assigned += counts[c];
            remainders.push_back({exact - counts[c], c});
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; assigned < k; ++i, ++assigned) {
            counts[remainders[i % remainders.size()].second] += 1;
        }
        if (k >= classes.size()) {
            for (std::size_t c = 0; c < classes.size(); ++c) {
                while (counts[c] == 0) {
                    auto big = std::max_element(counts.begin(), counts.end()) - counts.begin();
                    counts[big] -= 1;
                    counts[c] += 1;
                }
            }
        }
        for (std::size_t c = 0; c < classes.size(); ++c) {
            counts[c] = std::min(counts[c], members[c].size());
        }
        // Rebalance if a class had fewer rows than its quota.
        std::size_t total = 0;
        for (auto cnt : counts) total += cnt;
        for (std::size_t c = 0; total < k; c = (c + 1) % classes.size()) {
            if (counts[c] < members[c].size()) {
                counts[c] += 1;
                ++total;
            }
        }
        for (std::size_t c = 0; c < classes.size(); ++c) {
            Rng rng(Rng::mix(seed, c));
            auto order = rng.sample_without_replacement(members[c].size(), counts[c]);
            for (auto o : order) picked.push_back(members[c][o]);
        }
    } else {
        Rng rng(seed);
        auto order = rng.sample_without_replacement(n, k);
        picked.assign(order.begin(), order.end());
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

SamplePairs make_sample_pairs(const Dataset& d,
                              const std::string& feature,
                              const std::vector<std::size_t>& rows) {
    const auto& col = d.features[d.feature_index(feature)];
    SamplePairs sp;
    sp.feature = feature;
    sp.shots = rows.size();
    sp.pairs.reserve(rows.size());
    for (auto r : rows) {
        if (r >= d.n_rows()) throw DataError("row index out of range");
        sp.pairs.emplace_back(render_value(col, r), render_value(d.target, r));
    }
    return sp;
}

Encoder Encoder::fit(const Dataset& d, const std::vector<std::size_t>& fit_rows) {
    if (fit_rows.empty()) throw DataError("preprocess: fit_rows is empty");
    Encoder e;
    const std::size_t l = d.n_features();
    e.kinds_.resize(l);
    e.numeric_.resize(l);
    e.categorical_.resize(l);
    e.offsets_.assign(l + 1, 0);

    for (std::size_t f = 0; f < l; ++f) {
        const auto& col = d.features[f];
        e.kinds_[f] = col.kind;
        std::size_t w = 0;
        if (col.kind == ColumnKind::numeric) {
            std::vector<double> vals;
            for (auto r : fit_rows) {
                if (!col.missing(r)) vals.push_back(col.numeric[r]);
            }
            NumericStats s;
            if (!vals.empty()) {
                std::sort(vals.begin(), vals.end());
                std::size_t m = vals.size();
                s.median = (m % 2) ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
            }
            double sum = 0.0;
            for (auto r : fit_rows) {
                sum += col.missing(r) ? s.median : col.numeric[r];
            }
            s.mean = sum / fit_rows.size();
            double ss = 0.0;
            for (auto r : fit_rows) {
                double v = (col.missing(r) ? s.median : col.numeric[r]) - s.mean;
                ss += v * v;
            }
            s.std = std::sqrt(ss / fit_rows.size());
            e.numeric_[f] = s;
            w = 1;
        } else {
            std::map<std::string, std::size_t> freq;
            for (auto r : fit_rows) {
                if (!col.missing(r)) freq[*col.values[r]]++;
            }
            CategoricalStats s;
            std::size_t best = 0;
            for (const auto& [cat, cnt] : freq) {
                s.categories.push_back(cat);
                if (cnt > best) {
                    best = cnt;
                    s.mode = cat;
                }
            }
            if (s.categories.empty()) {
                s.categories.push_back("NA");
                s.mode = "NA";
            }
            e.categorical_[f] = s;
            w = e.categorical_[f].categories.size();
        }
        e.offsets_[f + 1] = e.offsets_[f] + w;
        for (std::size_t c = 0; c < w; ++c) e.column_feature_.push_back(f);
    }
    e.width_ = e.offsets_[l];
    return e;
}

Eigen::MatrixXd Encoder::transform(const Dataset& d, const std::vector<std::size_t>& rows) const {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rows.size(), width_);
    for (std::size_t f = 0; f < d.n_features(); ++f) {
        const auto& col = d.features[f];
        const std::size_t base = offsets_[f];
        if (kinds_[f] == ColumnKind::numeric) {
            const auto& s = numeric_[f];
            for (std::size_t i = 0; i < rows.size(); ++i) {
                double v = col.missing(rows[i]) ? s.median : col.numeric[rows[i]];
                X(i, base) = (s.std > 0.0) ? (v - s.mean) / s.std : 0.0;
            }
        } else {
            const auto& s = categorical_[f];
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const std::string& label = col.missing(rows[i]) ? s.mode : *col.values[rows[i]];
                auto it = std::lower_bound(s.categories.begin(), s.categories.end(), label);
                if (it != s.categories.end() && *it == label) {
                    X(i, base + static_cast<std::size_t>(it - s.categories.begin())) = 1.0;
                }
                // unseen category: row stays all-zero in this group
            }
        }
    }
    return X;
}

Eigen::VectorXd target_vector(const Dataset& d, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd y(rows.size());
    if (d.task == TaskKind::classification) {
        auto classes = d.target_classes();
        std::unordered_map<std::string, double> code;
        for (std::size_t c = 0; c < classes.size(); ++c) code[classes[c]] = static_cast<double>(c);
        for (std::size_t i = 0; i < rows.size(); ++i) y[i] = code[*d.target.values[rows[i]]];
    } else {
        for (std::size_t i = 0; i < rows.size(); ++i) y[i] = d.target.numeric[rows[i]];
    }
    return y;
}

PreprocessResult preprocess(const Dataset& d, const std::vector<std::size_t>& fit_rows) {
    PreprocessResult r{Eigen::MatrixXd{}, Eigen::VectorXd{}, Encoder::fit(d, fit_rows)};
    r.design = r.encoder.transform(d, fit_rows);
    r.target = target_vector(d, fit_rows);
    return r;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
    std::vector<std::size_t> rows(d.n_rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

}  // namespace fsel
