#pragma once

#include <cstdint>
#include <vector>

#include "gtbench/types.hpp"

namespace gtbench {

// Row partition shared by training and evaluation: a fixed slice of the
// dataset is held out for point-error measurement and never seen by the
// trainer. The slice is a function of the dataset seed alone, so every
// model evaluated against one dataset sees the same holdout.
struct EvaluationSplit {
  std::vector<Index> pool;     // available for train/validation
  std::vector<Index> holdout;  // point-error (MAE/MSE) rows
};

EvaluationSplit evaluation_split(std::uint64_t dataset_seed, Index n_obs,
                                 double holdout_fraction = 0.1);

}  // namespace gtbench
