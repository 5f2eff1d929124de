#include "gtbench/split.hpp"

#include <numeric>
#include <stdexcept>

#include "gtbench/rng.hpp"

namespace gtbench {

EvaluationSplit evaluation_split(std::uint64_t dataset_seed, Index n_obs,
                                 double holdout_fraction) {
  if (n_obs < 1) throw std::invalid_argument("evaluation_split: empty dataset");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
    throw std::invalid_argument("evaluation_split: holdout fraction outside [0,1)");
  }
  std::vector<Index> order(static_cast<std::size_t>(n_obs));
  std::iota(order.begin(), order.end(), Index{0});
  rng::Stream stream(rng::derive(dataset_seed, rng::tag("holdout")));
  stream.shuffle(order);

  const auto n_holdout = static_cast<std::size_t>(
      static_cast<double>(n_obs) * holdout_fraction);
  EvaluationSplit split;
  split.holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_holdout));
  split.pool.assign(order.begin() + static_cast<std::ptrdiff_t>(n_holdout), order.end());
  return split;
}

}  // namespace gtbench
