// Apache License, Version 2.0, refer to LICENSE.txt

#include "mcomp/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mcomp/errors.hpp"
#include "mcomp/parallel.hpp"

namespace mcomp {

namespace {

constexpr double kMaxExponent = 700.0;

// Per-draw quantities shared by every replicate: the linear predictor
// eta_s = c0 + C u_s with u_s = sigma .* z_s, and the integral of
// exp(eta_s^T beta) over B.  At the quadrature nodes the exponent is
// base + dir u_s, so a draw costs O(nodes * p) rather than O(nodes * q).
struct DrawTerms {
  Eigen::MatrixXd eta;       // q x S
  Eigen::VectorXd integral;  // S
  Eigen::VectorXd base;      // B c0 at the nodes
  Eigen::MatrixXd dir;       // B C at the nodes
  Eigen::MatrixXd U;         // S x p

  Eigen::Index count() const { return eta.cols(); }
};

// Node blocks for the gradient pass.  The partition does not depend on the
// thread count, so neither do the sums.
constexpr Eigen::Index kNodeBlock = 256;

int effective_draws(const ModelParams& theta, const MCDraws& draws) {
  if (theta.p() == 0) return 1;
  if (draws.p() != theta.p()) {
    throw UsageError("draws have p = " + std::to_string(draws.p()) +
                     ", model has p = " + std::to_string(theta.p()));
  }
  if (draws.S() < 1) throw UsageError("no Monte Carlo draws");
  return draws.S();
}

void check_exponent(double e) {
  if (!(e <= kMaxExponent)) {
    throw NumericError("log-intensity exponent " + std::to_string(e) +
                       " overflows exp()");
  }
}

DrawTerms draw_terms(const ModelParams& theta, const MCDraws& draws, int threads) {
  theta.validate();
  const ModelSpace& space = *theta.space;
  const int S = effective_draws(theta, draws);
  const int p = theta.p();

  DrawTerms terms;
  terms.U = p > 0 ? Eigen::MatrixXd(draws.Z * theta.sigma.asDiagonal())
                  : Eigen::MatrixXd::Zero(S, 0);
  terms.eta = (theta.C * terms.U.transpose()).colwise() + theta.c0;
  terms.base = space.quad_basis * theta.c0;
  terms.dir = space.quad_basis * theta.C;
  terms.integral.resize(S);

  std::vector<double> max_exponent(S);
  parallel_for(S, threads, [&](std::int64_t s) {
    Eigen::VectorXd expo = terms.base;
    if (p > 0) expo.noalias() += terms.dir * terms.U.row(s).transpose();
    max_exponent[s] = expo.maxCoeff();
    if (!(max_exponent[s] <= kMaxExponent)) return;
    terms.integral(s) = space.quad_weights.dot(expo.array().exp().matrix());
  });
  for (double e : max_exponent) check_exponent(e);
  return terms;
}

// sum_s a_s int beta exp(eta_s^T beta) and sum_s a_s int beta exp(eta_s^T beta) z_s^T
// for draw weights a, as (q, q x p).
struct WeightedIntegralGrad {
  Eigen::VectorXd total;
  Eigen::MatrixXd with_z;
};

WeightedIntegralGrad weighted_integral_grad(const ModelSpace& space,
                                            const DrawTerms& terms,
                                            const Eigen::VectorXd& a,
                                            const Eigen::MatrixXd& Z, int threads) {
  const Eigen::Index N = terms.base.size();
  const Eigen::Index p = terms.dir.cols();
  const Eigen::Index blocks = (N + kNodeBlock - 1) / kNodeBlock;
  Eigen::VectorXd v0(N);
  Eigen::MatrixXd vz(N, p);
  const Eigen::MatrixXd aZ = p > 0 ? Eigen::MatrixXd(a.asDiagonal() * Z)
                                   : Eigen::MatrixXd::Zero(a.size(), 0);
  parallel_for(blocks, threads, [&](std::int64_t b) {
    const Eigen::Index lo = b * kNodeBlock;
    const Eigen::Index len = std::min(kNodeBlock, N - lo);
    Eigen::MatrixXd E(len, terms.count());
    if (p > 0) {
      E.noalias() = terms.dir.middleRows(lo, len) * terms.U.transpose();
    } else {
      E.setZero();
    }
    E.colwise() += terms.base.segment(lo, len);
    E = E.array().exp().matrix();
    const auto w = space.quad_weights.segment(lo, len).array();
    v0.segment(lo, len) = (E * a).array() * w;
    if (p > 0) vz.middleRows(lo, len) = (E * aZ).array().colwise() * w;
  });
  return {space.quad_basis.transpose() * v0, space.quad_basis.transpose() * vz};
}

Eigen::MatrixXd stats_matrix(const std::vector<PatternStats>& stats, int q) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(stats.size()), q);
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (stats[i].basis_sum.size() != q) {
      throw UsageError("pattern statistics do not match the basis size");
    }
    M.row(static_cast<Eigen::Index>(i)) = stats[i].basis_sum.transpose();
  }
  return M;
}

// L(i, s) = log f(x_i | u_s).
Eigen::MatrixXd cond_logliks(const std::vector<PatternStats>& stats,
                             const DrawTerms& terms, int threads) {
  const Eigen::MatrixXd M = stats_matrix(stats, static_cast<int>(terms.eta.rows()));
  Eigen::VectorXd logfact(M.rows());
  for (Eigen::Index i = 0; i < M.rows(); ++i) logfact(i) = stats[i].log_m_factorial;

  Eigen::MatrixXd L(M.rows(), terms.count());
  parallel_for(terms.count(), threads, [&](std::int64_t s) {
    L.col(s).noalias() = M * terms.eta.col(s);
    L.col(s).array() -= logfact.array() + terms.integral(s);
  });
  return L;
}

// Log of the mean of exp(row), stabilized by the row maximum; also returns
// the normalized weights exp(row - max) / sum.
MarginalEstimate log_mean_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                              bool antithetic, Eigen::RowVectorXd* weights) {
  const double top = row.maxCoeff();
  if (!std::isfinite(top)) {
    throw NumericError("conditional log-likelihood is not finite");
  }
  const Eigen::RowVectorXd e = (row.array() - top).exp();
  const double total = e.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("all Monte Carlo summands underflow");
  }
  const auto S = row.size();
  MarginalEstimate est;
  est.value = top + std::log(total / static_cast<double>(S));
  if (weights) *weights = e / total;

  // Antithetic pairs are the independent units for the standard error.
  const double mean = total / static_cast<double>(S);
  if (antithetic && S >= 4 && S % 2 == 0) {
    const auto half = S / 2;
    const Eigen::RowVectorXd pairs = 0.5 * (e.head(half) + e.tail(half));
    const double var = (pairs.array() - mean).square().sum() /
                       static_cast<double>(half - 1);
    est.std_error = std::sqrt(var / static_cast<double>(half)) / mean;
  } else if (S >= 2) {
    const double var =
        (e.array() - mean).square().sum() / static_cast<double>(S - 1);
    est.std_error = std::sqrt(var / static_cast<double>(S)) / mean;
  }
  return est;
}

double mean_penalty(const ModelParams& theta, double nu1, double nu2) {
  if (nu1 < 0.0 || nu2 < 0.0) {
    throw UsageError("smoothing parameters must be nonnegative");
  }
  if ((nu1 > 0.0 || nu2 > 0.0) && !theta.space->has_penalty) {
    throw UsageError("roughness penalty needs a spline of degree >= 2");
  }
  double out = 0.0;
  if (nu1 > 0.0) out += nu1 * theta.c0.dot(theta.space->penalty * theta.c0);
  if (nu2 > 0.0) out += nu2 * component_penalty(theta);
  return out;
}

}  // namespace

MCDraws make_draws(int S, int p, std::uint64_t seed) {
  if (S < 1) throw UsageError("number of draws must be >= 1");
  if (p < 0) throw UsageError("number of components must be >= 0");
  if (p > 0 && S % 2 != 0) {
    throw UsageError("number of draws must be even for antithetic pairing");
  }
  MCDraws draws;
  draws.seed = seed;
  draws.Z.resize(S, p);
  if (p == 0) return draws;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int half = S / 2;
  for (int s = 0; s < half; ++s) {
    for (int k = 0; k < p; ++k) draws.Z(s, k) = normal(rng);
  }
  draws.Z.bottomRows(half) = -draws.Z.topRows(half);
  return draws;
}

PatternStats summarize(const PointPattern& pattern, const ModelSpace& space) {
  PatternStats st;
  st.m = pattern.m();
  st.log_m_factorial = std::lgamma(static_cast<double>(st.m) + 1.0);
  if (st.m == 0) {
    st.basis_sum = Eigen::VectorXd::Zero(space.q());
  } else {
    st.basis_sum = space.basis.eval(pattern.points).colwise().sum().transpose();
  }
  return st;
}

std::vector<PatternStats> summarize(const Dataset& data, const ModelSpace& space) {
  std::vector<PatternStats> out;
  out.reserve(data.patterns.size());
  for (const auto& pattern : data.patterns) out.push_back(summarize(pattern, space));
  return out;
}

double cond_loglik(const PointPattern& pattern, const Eigen::VectorXd& u,
                   const ModelParams& theta) {
  theta.validate();
  if (u.size() != theta.p()) {
    throw UsageError("score vector has length " + std::to_string(u.size()) +
                     ", model has p = " + std::to_string(theta.p()));
  }
  const ModelSpace& space = *theta.space;
  Eigen::VectorXd eta = theta.c0;
  if (theta.p() > 0) eta += theta.C * u;
  const Eigen::VectorXd expo = space.quad_basis * eta;
  const double top = expo.maxCoeff();
  if (!(top <= kMaxExponent)) {
    throw NumericError("log-intensity exponent " + std::to_string(top) +
                       " overflows exp()");
  }
  const double integral = space.quad_weights.dot(expo.array().exp().matrix());
  const PatternStats st = summarize(pattern, space);
  return -integral + eta.dot(st.basis_sum) - st.log_m_factorial;
}

double prior_loglik(const Eigen::VectorXd& u, const Eigen::VectorXd& sigma) {
  if (u.size() != sigma.size()) {
    throw UsageError("score and sigma vectors differ in length");
  }
  double out = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double s = sigma(k);
    if (!(s > 0.0)) throw UsageError("sigma must be positive");
    out += -0.5 * std::log(2.0 * std::numbers::pi * s * s) -
           u(k) * u(k) / (2.0 * s * s);
  }
  return out;
}

MarginalEstimate marginal_loglik_estimate(const PointPattern& pattern,
                                          const ModelParams& theta,
                                          const MCDraws& draws) {
  const DrawTerms terms = draw_terms(theta, draws, 1);
  const std::vector<PatternStats> st{summarize(pattern, *theta.space)};
  const Eigen::MatrixXd L = cond_logliks(st, terms, 1);
  return log_mean_exp(L.row(0), theta.p() > 0, nullptr);
}

double marginal_loglik(const PointPattern& pattern, const ModelParams& theta,
                       const MCDraws& draws) {
  return marginal_loglik_estimate(pattern, theta, draws).value;
}

std::vector<MarginalEstimate> marginal_logliks(const Dataset& data,
                                               const ModelParams& theta,
                                               const MCDraws& draws,
                                               int threads) {
  const DrawTerms terms = draw_terms(theta, draws, threads);
  const auto stats = summarize(data, *theta.space);
  const Eigen::MatrixXd L = cond_logliks(stats, terms, threads);
  std::vector<MarginalEstimate> out(stats.size());
  parallel_for(L.rows(), threads, [&](std::int64_t i) {
    out[i] = log_mean_exp(L.row(i), theta.p() > 0, nullptr);
  });
  return out;
}

double component_penalty(const ModelParams& theta) {
  if (theta.p() == 0) return 0.0;
  const ModelSpace& space = *theta.space;
  const Eigen::MatrixXd A = theta.C.transpose() * space.gram * theta.C;
  const Eigen::MatrixXd B = theta.C.transpose() * space.penalty * theta.C;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw NumericError("component coefficient matrix is rank deficient");
  }
  return ldlt.solve(B).trace();
}

double penalized_objective(const std::vector<PatternStats>& stats,
                           const ModelParams& theta, double nu1, double nu2,
                           const MCDraws& draws, int threads) {
  if (stats.empty()) throw UsageError("dataset has no replicates");
  const double pen = mean_penalty(theta, nu1, nu2);
  const DrawTerms terms = draw_terms(theta, draws, threads);
  const Eigen::MatrixXd L = cond_logliks(stats, terms, threads);
  std::vector<double> marg(L.rows());
  parallel_for(L.rows(), threads, [&](std::int64_t i) {
    marg[i] = log_mean_exp(L.row(i), theta.p() > 0, nullptr).value;
  });
  double sum = 0.0;
  for (double v : marg) sum += v;
  return sum / static_cast<double>(stats.size()) - pen;
}

double penalized_objective(const Dataset& data, const ModelParams& theta,
                           double nu1, double nu2, const MCDraws& draws,
                           int threads) {
  theta.validate();
  return penalized_objective(summarize(data, *theta.space), theta, nu1, nu2,
                             draws, threads);
}

ObjectiveGradient objective_gradient(const std::vector<PatternStats>& stats,
                                     const ModelParams& theta, double nu1,
                                     double nu2, const MCDraws& draws,
                                     int threads) {
  if (stats.empty()) throw UsageError("dataset has no replicates");
  const double pen = mean_penalty(theta, nu1, nu2);
  const DrawTerms terms = draw_terms(theta, draws, threads);
  const Eigen::MatrixXd L = cond_logliks(stats, terms, threads);
  const auto n = L.rows();
  const auto S = L.cols();
  const int q = theta.q();
  const int p = theta.p();

  // W(i, s): self-normalized weight of draw s for replicate i.
  Eigen::MatrixXd W(n, S);
  std::vector<double> marg(n);
  parallel_for(n, threads, [&](std::int64_t i) {
    Eigen::RowVectorXd w;
    marg[i] = log_mean_exp(L.row(i), p > 0, &w).value;
    W.row(i) = w;
  });

  // With column sums a_s = sum_i W(i, s), the gradient of the summed
  // marginal log-likelihoods along c0 + C u_s is
  //   sum_s (M^T W(:, s) - a_s int beta exp(eta_s^T beta)) [1, u_s^T].
  const Eigen::MatrixXd M = stats_matrix(stats, q);
  const Eigen::VectorXd a = W.colwise().sum().transpose();
  const Eigen::MatrixXd MW = M.transpose() * W;  // q x S
  const Eigen::MatrixXd Zs = p > 0 ? draws.Z : Eigen::MatrixXd::Zero(S, 0);
  const WeightedIntegralGrad ig =
      weighted_integral_grad(*theta.space, terms, a, Zs, threads);

  const double inv_n = 1.0 / static_cast<double>(n);
  ObjectiveGradient g;
  double sum = 0.0;
  for (double v : marg) sum += v;
  g.value = sum * inv_n - pen;

  g.c0 = (MW.rowwise().sum() - ig.total) * inv_n;
  if (nu1 > 0.0) g.c0 -= 2.0 * nu1 * theta.space->penalty * theta.c0;

  g.C = Eigen::MatrixXd::Zero(q, p);
  g.log_sigma = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    const Eigen::MatrixXd RZ = MW * draws.Z - ig.with_z;  // q x p
    g.C = RZ * theta.sigma.asDiagonal() * inv_n;
    const Eigen::MatrixXd CtRZ = theta.C.transpose() * RZ;
    for (int k = 0; k < p; ++k) {
      g.log_sigma(k) = theta.sigma(k) * CtRZ(k, k) * inv_n;
    }
    if (nu2 > 0.0) {
      // d/dC tr(A^{-1} B) = 2 Omega C A^{-1} - 2 J C A^{-1} B A^{-1},
      // A = C^T J C, B = C^T Omega C.
      const ModelSpace& space = *theta.space;
      const Eigen::MatrixXd A = theta.C.transpose() * space.gram * theta.C;
      const Eigen::MatrixXd B = theta.C.transpose() * space.penalty * theta.C;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      const Eigen::MatrixXd Ainv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
      const Eigen::MatrixXd dpen = 2.0 * space.penalty * theta.C * Ainv -
                                   2.0 * space.gram * theta.C * Ainv * B * Ainv;
      g.C -= nu2 * dpen;
    }
  }
  return g;
}

ObjectiveGradient objective_gradient(const Dataset& data,
                                     const ModelParams& theta, double nu1,
                                     double nu2, const MCDraws& draws,
                                     int threads) {
  theta.validate();
  return objective_gradient(summarize(data, *theta.space), theta, nu1, nu2,
                            draws, threads);
}

Eigen::VectorXd posterior_weights(const PatternStats& stats,
                                  const ModelParams& theta,
                                  const MCDraws& draws) {
  const DrawTerms terms = draw_terms(theta, draws, 1);
  const Eigen::MatrixXd L = cond_logliks({stats}, terms, 1);
  Eigen::RowVectorXd w;
  log_mean_exp(L.row(0), theta.p() > 0, &w);
  return w.transpose();
}

Eigen::MatrixXd posterior_weights(const std::vector<PatternStats>& stats,
                                  const ModelParams& theta,
                                  const MCDraws& draws, int threads) {
  const DrawTerms terms = draw_terms(theta, draws, threads);
  const Eigen::MatrixXd L = cond_logliks(stats, terms, threads);
  Eigen::MatrixXd W(L.rows(), L.cols());
  parallel_for(L.rows(), threads, [&](std::int64_t i) {
    Eigen::RowVectorXd w;
    log_mean_exp(L.row(i), theta.p() > 0, &w);
    W.row(i) = w;
  });
  return W;
}

}  // namespace mcomp
