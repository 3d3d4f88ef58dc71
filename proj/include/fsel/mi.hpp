#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fsel/tabular.hpp"

namespace fsel {

// Plug-in mutual information (nats) over the empirical joint distribution of
// two equal-length discrete code sequences.
double mutual_information(std::span<const int> x, std::span<const int> y);

double entropy(std::span<const int> x);

// Discretize a column over the given rows: categorical labels map to dense
// codes; numeric values are equal-frequency binned into
// min(max_bins, distinct-value-count) bins. Missing cells get their own code.
std::vector<int> discretize(const Column& col,
                            const std::vector<std::size_t>& rows,
                            std::size_t max_bins = 10);

// Discrete codes for every feature plus the target, over the given rows.
// codes[0..l-1] = features, codes[l] = target.
std::vector<std::vector<int>> discretize_dataset(const Dataset& d,
                                                 const std::vector<std::size_t>& rows,
                                                 std::size_t max_bins = 10);

// MI of every feature against the target. The parallel kernel splits feature
// columns across OpenMP threads; the serial version is the reference
// implementation the tests and benchmark compare against.
std::vector<double> relevance_serial(const std::vector<std::vector<int>>& codes);
std::vector<double> relevance_parallel(const std::vector<std::vector<int>>& codes);

// Full pairwise feature-feature MI matrix (l x l, symmetric), used by mRMR.
std::vector<std::vector<double>> redundancy_serial(const std::vector<std::vector<int>>& codes);
std::vector<std::vector<double>> redundancy_parallel(const std::vector<std::vector<int>>& codes);

}  // namespace fsel
