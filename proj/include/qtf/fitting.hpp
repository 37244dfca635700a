#pragma once

#include <utility>
#include <vector>

#include "json.hpp"

namespace qtf::fitting {

/// power: y = a * N^b, fitted by linear regression in log-log space.
/// gate:  y = a * N^b * ln(N) + c, fitted by damped Gauss-Newton on relative
/// residuals with a fixed iteration schedule (no randomized starts).
enum class FitModel { power, gate };

struct FitResult {
  FitModel model = FitModel::power;
  double a = 0, b = 0, c = 0;
  double se_a = 0, se_b = 0, se_c = 0;
  double r_squared = 0;
  int iterations = 0;
  bool converged = false;
  bool ill_conditioned = false;
};

FitResult fit_power_law(const std::vector<std::pair<double, double>>& points,
                        FitModel model);

void to_json(nlohmann::json& j, const FitResult& fit);
void from_json(const nlohmann::json& j, FitResult& fit);

}  // namespace qtf::fitting
