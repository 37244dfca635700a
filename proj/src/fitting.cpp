#include "qtf/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "qtf/errors.hpp"

namespace qtf::fitting {

namespace {

FitResult fit_power(const std::vector<std::pair<double, double>>& points) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd logy(n);
  for (int i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::log(points[static_cast<std::size_t>(i)].first);
    logy(i) = std::log(points[static_cast<std::size_t>(i)].second);
  }
  const Eigen::MatrixXd gram = design.transpose() * design;
  FitResult fit;
  fit.model = FitModel::power;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) {
    fit.ill_conditioned = true;
    return fit;
  }
  const Eigen::VectorXd beta = lu.solve(design.transpose() * logy);
  const Eigen::VectorXd residual = logy - design * beta;
  const double ss_res = residual.squaredNorm();
  const double mean = logy.mean();
  const double ss_tot = (logy.array() - mean).square().sum();

  fit.a = std::exp(beta(0));
  fit.b = beta(1);
  fit.converged = true;
  fit.iterations = 1;
  fit.r_squared = ss_tot < 1e-300 ? (ss_res < 1e-300 ? 1.0 : 0.0)
                                  : 1.0 - ss_res / ss_tot;
  if (n > 2) {
    const double sigma2 = ss_res / (n - 2);
    const Eigen::MatrixXd cov = sigma2 * lu.inverse();
    fit.se_a = fit.a * std::sqrt(std::max(0.0, cov(0, 0)));
    fit.se_b = std::sqrt(std::max(0.0, cov(1, 1)));
  }
  return fit;
}

FitResult fit_gate(const std::vector<std::pair<double, double>>& points) {
  const int n = static_cast<int>(points.size());
  Eigen::VectorXd xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs(i) = points[static_cast<std::size_t>(i)].first;
    ys(i) = points[static_cast<std::size_t>(i)].second;
  }

  // Deterministic start: b = 0.5, a matched to the largest point, c = 0.
  int top = 0;
  for (int i = 1; i < n; ++i)
    if (xs(i) > xs(top)) top = i;
  Eigen::Vector3d params;
  params << ys(top) / (std::sqrt(xs(top)) * std::log(xs(top))), 0.5, 0.0;

  auto residuals = [&](const Eigen::Vector3d& p, Eigen::VectorXd& r,
                       Eigen::MatrixXd* jac) {
    for (int i = 0; i < n; ++i) {
      const double nb = std::pow(xs(i), p(1));
      const double ln = std::log(xs(i));
      const double f = p(0) * nb * ln + p(2);
      r(i) = (ys(i) - f) / ys(i);
      if (jac) {
        (*jac)(i, 0) = -nb * ln / ys(i);
        (*jac)(i, 1) = -p(0) * nb * ln * ln / ys(i);
        (*jac)(i, 2) = -1.0 / ys(i);
      }
    }
  };

  FitResult fit;
  fit.model = FitModel::gate;
  Eigen::VectorXd r(n);
  Eigen::MatrixXd jac(n, 3);
  residuals(params, r, &jac);
  double ssr = r.squaredNorm();
  double damping = 1e-3;
  const int max_iterations = 200;

  for (int iter = 0; iter < max_iterations; ++iter) {
    fit.iterations = iter + 1;
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * r;
    bool stepped = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() += damping * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::LDLT<Eigen::Matrix3d> ldlt(damped);
      if (ldlt.info() != Eigen::Success) {
        fit.ill_conditioned = true;
        break;
      }
      const Eigen::Vector3d step = ldlt.solve(-jtr);
      if (!step.allFinite()) {
        fit.ill_conditioned = true;
        break;
      }
      const Eigen::Vector3d trial = params + step;
      Eigen::VectorXd r_trial(n);
      residuals(trial, r_trial, nullptr);
      const double ssr_trial = r_trial.squaredNorm();
      if (std::isfinite(ssr_trial) && ssr_trial <= ssr) {
        const double improvement = ssr - ssr_trial;
        params = trial;
        ssr = ssr_trial;
        damping = std::max(damping * 0.1, 1e-12);
        residuals(params, r, &jac);
        stepped = true;
        if (improvement <= 1e-12 * std::max(ssr, 1e-30)) iter = max_iterations;
        break;
      }
      damping *= 10;
    }
    if (!stepped) break;
  }

  fit.a = params(0);
  fit.b = params(1);
  fit.c = params(2);
  fit.converged = !fit.ill_conditioned;

  double ss_tot = 0;
  const double mean = ys.mean();
  for (int i = 0; i < n; ++i) {
    const double z = (ys(i) - mean) / ys(i);
    ss_tot += z * z;
  }
  fit.r_squared = ss_tot < 1e-300 ? (ssr < 1e-300 ? 1.0 : 0.0)
                                  : 1.0 - ssr / ss_tot;

  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
  if (lu.isInvertible() && n > 3) {
    const double sigma2 = ssr / (n - 3);
    const Eigen::Matrix3d cov = sigma2 * lu.inverse();
    fit.se_a = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.se_b = std::sqrt(std::max(0.0, cov(1, 1)));
    fit.se_c = std::sqrt(std::max(0.0, cov(2, 2)));
  } else if (!lu.isInvertible()) {
    fit.ill_conditioned = true;
    fit.converged = false;
  }
  return fit;
}

}  // namespace

FitResult fit_power_law(const std::vector<std::pair<double, double>>& points,
                        FitModel model) {
  const std::size_t min_points = model == FitModel::power ? 2 : 4;
  if (points.size() < min_points)
    throw ValidationError("fit needs at least " + std::to_string(min_points) +
                          " points");
  for (const auto& [x, y] : points) {
    if (!(x > 0)) throw ValidationError("fit abscissae must be positive");
    if (!(y > 0)) throw ValidationError("fit ordinates must be positive");
  }
  return model == FitModel::power ? fit_power(points) : fit_gate(points);
}

void to_json(nlohmann::json& j, const FitResult& fit) {
  j = {{"model", fit.model == FitModel::power ? "power" : "gate"},
       {"a", fit.a},
       {"b", fit.b},
       {"c", fit.c},
       {"se_a", fit.se_a},
       {"se_b", fit.se_b},
       {"se_c", fit.se_c},
       {"r_squared", fit.r_squared},
       {"iterations", fit.iterations},
       {"converged", fit.converged},
       {"ill_conditioned", fit.ill_conditioned}};
}

void from_json(const nlohmann::json& j, FitResult& fit) {
  fit.model = j.at("model").get<std::string>() == "gate" ? FitModel::gate
                                                         : FitModel::power;
  fit.a = j.at("a").get<double>();
  fit.b = j.at("b").get<double>();
  fit.c = j.at("c").get<double>();
  fit.se_a = j.value("se_a", 0.0);
  fit.se_b = j.value("se_b", 0.0);
  fit.se_c = j.value("se_c", 0.0);
  fit.r_squared = j.value("r_squared", 0.0);
  fit.iterations = j.value("iterations", 0);
  fit.converged = j.value("converged", false);
  fit.ill_conditioned = j.value("ill_conditioned", false);
}

}  // namespace qtf::fitting
