// Apache License, Version 2.0, refer to LICENSE.txt

#include "mcomp/scores.hpp"

#include <cmath>
#include <limits>

#include "mcomp/errors.hpp"

namespace mcomp {

namespace {

ScoreEstimate from_weights(const Eigen::Ref<const Eigen::VectorXd>& w,
                           const ModelParams& theta, const MCDraws& draws) {
  ScoreEstimate est;
  const int p = theta.p();
  est.mean = Eigen::VectorXd::Zero(p);
  est.std_error = Eigen::VectorXd::Zero(p);
  if (p == 0) {
    est.ess = 1.0;
    return est;
  }
  const Eigen::MatrixXd U = draws.Z * theta.sigma.asDiagonal();
  est.mean.noalias() = U.transpose() * w;
  const Eigen::VectorXd w2 = w.array().square();
  for (int k = 0; k < p; ++k) {
    est.std_error(k) =
        std::sqrt(w2.dot((U.col(k).array() - est.mean(k)).square().matrix()));
  }
  est.ess = 1.0 / w2.sum();
  est.low_ess = est.ess < 10.0;
  return est;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double den = std::sqrt(da.square().sum() * db.square().sum());
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (da * db).sum() / den;
}

}  // namespace

ScoreEstimate posterior_scores(const PointPattern& pattern,
                               const ModelParams& theta, const MCDraws& draws) {
  theta.validate();
  const Eigen::VectorXd w =
      posterior_weights(summarize(pattern, *theta.space), theta, draws);
  return from_weights(w, theta, draws);
}

std::vector<ScoreEstimate> posterior_scores(const Dataset& data,
                                            const ModelParams& theta,
                                            const MCDraws& draws, int threads) {
  theta.validate();
  const Eigen::MatrixXd W =
      posterior_weights(summarize(data, *theta.space), theta, draws, threads);
  std::vector<ScoreEstimate> out;
  out.reserve(data.patterns.size());
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    out.push_back(from_weights(W.row(i).transpose(), theta, draws));
  }
  return out;
}

int compute_scores(FitResult& fit, const Dataset& data) {
  const int p = fit.theta.p();
  const MCDraws draws = evaluation_draws(fit.config, p);
  const auto est = posterior_scores(data, fit.theta, draws, fit.config.threads);
  fit.scores.resize(data.n(), p);
  int low = 0;
  for (int i = 0; i < data.n(); ++i) {
    fit.scores.row(i) = est[i].mean.transpose();
    if (est[i].low_ess) ++low;
  }
  return low;
}

ComponentCurves component_curves(const ModelParams& theta, int resolution,
                                 double multiplier) {
  theta.validate();
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) {
    throw UsageError("curve multiplier must be positive");
  }
  const ObservationDomain& domain = theta.space->domain();
  ComponentCurves out;
  out.multiplier = multiplier;
  if (domain.dim() == 1) {
    if (resolution < 2) throw UsageError("curve resolution must be >= 2 in 1D");
    out.grid.reserve(resolution);
    for (int i = 0; i < resolution; ++i) {
      const double t = i == resolution - 1
                           ? domain.b()
                           : domain.a() + (domain.b() - domain.a()) * i /
                                              (resolution - 1);
      out.grid.emplace_back(t);
    }
  } else {
    if (resolution < 1) throw UsageError("curve resolution must be >= 1");
    out.grid = build_quadrature(domain, resolution).nodes;
  }

  const auto exp = [](double v) { return std::exp(v); };
  const Eigen::MatrixXd B = theta.space->basis.eval(out.grid);
  out.mu = B * theta.c0;
  out.lambda0 = out.mu.unaryExpr(exp);
  out.phi = B * theta.C;
  out.xi = out.phi.unaryExpr(exp);
  const Eigen::MatrixXd shift = multiplier * out.phi * theta.sigma.asDiagonal();
  out.lambda_plus = (shift.colwise() + out.mu).unaryExpr(exp);
  out.lambda_minus = ((-shift).colwise() + out.mu).unaryExpr(exp);
  return out;
}

ScoreTable score_summary(const FitResult& fit, const Dataset& data) {
  const int p = fit.theta.p();
  if (fit.scores.rows() != data.n() || fit.scores.cols() != p) {
    throw UsageError("scores have not been computed for this dataset");
  }
  ScoreTable table;
  table.scores = fit.scores;
  Eigen::VectorXd m(data.n());
  for (int i = 0; i < data.n(); ++i) {
    table.ids.push_back(data.patterns[i].replicate_id);
    table.counts.push_back(data.patterns[i].m());
    m(i) = data.patterns[i].m();
  }
  table.corr_u1_count = p == 0 ? std::numeric_limits<double>::quiet_NaN()
                               : pearson(fit.scores.col(0), m);
  return table;
}

}  // namespace mcomp
