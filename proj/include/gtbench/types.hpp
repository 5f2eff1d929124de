#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>

namespace gtbench {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Eigen::Index;

// A trained model viewed as a plain function of one input row.
using Predictor = std::function<Scalar(const Vec&)>;

}  // namespace gtbench
