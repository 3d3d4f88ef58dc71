#include "fsel/mi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "fsel/error.hpp"

namespace fsel {

namespace {

int max_code(std::span<const int> x) {
    int m = -1;
    for (int v : x) m = std::max(m, v);
    return m;
}

}  // namespace

double mutual_information(std::span<const int> x, std::span<const int> y) {
    if (x.size() != y.size()) throw DataError("mutual_information: length mismatch");
    if (x.empty()) throw DataError("mutual_information: empty input");
    const std::size_t n = x.size();
    const int kx = max_code(x) + 1;
    const int ky = max_code(y) + 1;
    std::vector<double> joint(static_cast<std::size_t>(kx) * ky, 0.0);
    std::vector<double> px(kx, 0.0), py(ky, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(x[i]) * ky + y[i]] += 1.0;
        px[x[i]] += 1.0;
        py[y[i]] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(n);
    double mi = 0.0;
    for (int a = 0; a < kx; ++a) {
        for (int b = 0; b < ky; ++b) {
            double pab = joint[static_cast<std::size_t>(a) * ky + b] * inv;
            if (pab <= 0.0) continue;
            mi += pab * std::log(pab / (px[a] * inv * py[b] * inv));
        }
    }
    return std::max(mi, 0.0);
}

double entropy(std::span<const int> x) {
    if (x.empty()) throw DataError("entropy: empty input");
    std::unordered_map<int, std::size_t> counts;
    for (int v : x) counts[v]++;
    double h = 0.0;
    const double inv = 1.0 / static_cast<double>(x.size());
    for (const auto& [_, c] : counts) {
        double p = c * inv;
        h -= p * std::log(p);
    }
    return h;
}

std::vector<int> discretize(const Column& col,
                            const std::vector<std::size_t>& rows,
                            std::size_t max_bins) {
    std::vector<int> codes(rows.size());
    if (col.kind == ColumnKind::categorical) {
        std::map<std::string, int> lut;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string& label = col.missing(rows[i]) ? std::string("\x01missing") : *col.values[rows[i]];
            auto [it, _] = lut.try_emplace(label, static_cast<int>(lut.size()));
            codes[i] = it->second;
        }
        return codes;
    }

    std::vector<double> sorted;
    for (auto r : rows) {
        if (!col.missing(r)) sorted.push_back(col.numeric[r]);
    }
    std::sort(sorted.begin(), sorted.end());
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i == 0 || sorted[i] != sorted[i - 1]) ++distinct;
    }
    const std::size_t bins = std::min(max_bins, std::max<std::size_t>(distinct, 1));

    // Equal-frequency binning by midrank: each distinct value maps to
    // floor(midrank * bins / n), so tied values always share a bin and bin
    // occupancies stay balanced.
    std::map<double, int> bin_of;
    const double n_present = static_cast<double>(std::max<std::size_t>(sorted.size(), 1));
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        double midrank = 0.5 * static_cast<double>(i + j);
        int b = static_cast<int>(midrank * static_cast<double>(bins) / n_present);
        bin_of[sorted[i]] = std::min(b, static_cast<int>(bins) - 1);
        i = j + 1;
    }

    const int missing_code = static_cast<int>(bins);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        codes[k] = col.missing(rows[k]) ? missing_code : bin_of.at(col.numeric[rows[k]]);
    }
    return codes;
}

std::vector<std::vector<int>> discretize_dataset(const Dataset& d,
                                                 const std::vector<std::size_t>& rows,
                                                 std::size_t max_bins) {
    std::vector<std::vector<int>> codes;
    codes.reserve(d.n_features() + 1);
    for (const auto& col : d.features) codes.push_back(discretize(col, rows, max_bins));
    codes.push_back(discretize(d.target, rows, max_bins));
    return codes;
}

std::vector<double> relevance_serial(const std::vector<std::vector<int>>& codes) {
    const std::size_t l = codes.size() - 1;
    const auto& y = codes[l];
    std::vector<double> rel(l);
    for (std::size_t f = 0; f < l; ++f) {
        rel[f] = mutual_information(codes[f], y);
    }
    return rel;
}

std::vector<double> relevance_parallel(const std::vector<std::vector<int>>& codes) {
    const std::size_t l = codes.size() - 1;
    const auto& y = codes[l];
    std::vector<double> rel(l);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t f = 0; f < l; ++f) {
        rel[f] = mutual_information(codes[f], y);
    }
    return rel;
}

std::vector<std::vector<double>> redundancy_serial(const std::vector<std::vector<int>>& codes) {
    const std::size_t l = codes.size() - 1;
    std::vector<std::vector<double>> m(l, std::vector<double>(l, 0.0));
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i; j < l; ++j) {
            m[i][j] = m[j][i] = mutual_information(codes[i], codes[j]);
        }
    }
    return m;
}

std::vector<std::vector<double>> redundancy_parallel(const std::vector<std::vector<int>>& codes) {
    const std::size_t l = codes.size() - 1;
    std::vector<std::vector<double>> m(l, std::vector<double>(l, 0.0));
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i; j < l; ++j) {
            double v = mutual_information(codes[i], codes[j]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    return m;
}

}  // namespace fsel
