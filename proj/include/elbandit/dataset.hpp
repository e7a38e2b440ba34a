#ifndef ELBANDIT_DATASET_HPP
#define ELBANDIT_DATASET_HPP

#include <vector>

#include "elbandit/types.hpp"

namespace elbandit {

struct LoggedSample {
  double reward = 0.0;
  Vector weights;
};

/// Validates and assembles a dataset. Throws Error on out-of-range rewards,
/// weights outside the declared box (with row/column/value), or n < 2.
LoggedDataset build_dataset(const Matrix& weight_rows, const Vector& rewards,
                            const BoxSupport& support);

LoggedSample sample_at(const LoggedDataset& ds, std::size_t i);

/// Corners of the support in lexicographic order with the reward fastest.
/// Collapsed weight axes contribute a single value.
std::vector<SupportVertex> support_vertices(const BoxSupport& support);

/// Corners of the weight box only (no reward coordinate).
std::vector<Vector> weight_vertices(const BoxSupport& support);

Vector is_estimate(const LoggedDataset& ds);
Vector snis_estimate(const LoggedDataset& ds);

}  // namespace elbandit

#endif  // ELBANDIT_DATASET_HPP
