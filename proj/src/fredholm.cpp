#include "ginprod/fredholm.hpp"

#include <algorithm>
#include <cmath>

namespace ginprod {

namespace {

bool near_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) < tol;
}

}  // namespace

void IntervalUnion::validate() const {
  if (endpoints.empty() || endpoints.size() % 2 != 0)
    throw ConfigError("IntervalUnion: need an even, positive endpoint count");
  if (endpoints.front() < 0)
    throw ConfigError("IntervalUnion: endpoints must be nonnegative");
  for (size_t i = 1; i < endpoints.size(); ++i)
    if (!(endpoints[i] > endpoints[i - 1]))
      throw ConfigError("IntervalUnion: endpoints must be strictly increasing");
}

NystromOperator build_operator(const EnsembleSpec& spec, const IntervalUnion& J,
                               int order, QRoute route) {
  spec.validate();
  J.validate();
  if (order < 4) throw ConfigError("build_operator: order must be >= 4");

  NystromOperator op;
  op.spec = spec;
  op.domain = J;
  op.route = route;

  auto append = [&](const QuadratureRule& r) {
    op.nodes.insert(op.nodes.end(), r.nodes.begin(), r.nodes.end());
    op.weights.insert(op.weights.end(), r.weights.begin(), r.weights.end());
  };

  const QuadratureRule& base = gauss_legendre(order);
  for (int iv = 0; iv < J.interval_count(); ++iv) {
    double a = J.endpoints[2 * iv], b = J.endpoints[2 * iv + 1];
    if (a != 0.0) {
      append(map_affine(base, a, b));
    } else if (!near_integer(spec.nu_min_tail())) {
      // x = b u^2 turns the x^nu endpoint behavior into a smooth power of u.
      append(map_sqrt_left(base, b));
    } else {
      // Integer nu puts logarithmic factors in the weight at 0; geometric
      // panels toward the origin restore spectral convergence, and the
      // mass of the final (0, b*4^-24) scrap is below 1e-11.
      const QuadratureRule& panel = gauss_legendre(std::max(6, order / 8));
      double lo = b * std::pow(0.25, 24);
      append(map_sqrt_left(panel, lo));
      for (double hi = lo * 4; hi <= b * 1.0000001; hi *= 4)
        append(map_affine(panel, hi * 0.25, hi));
    }
  }

  KernelEvaluator ev(spec, route);
  const int N = static_cast<int>(op.nodes.size());
  std::vector<KernelNodeData> data(N);
  for (int i = 0; i < N; ++i) data[i] = ev.node_data(op.nodes[i]);

  op.matrix.resize(N, N);
  for (int i = 0; i < N; ++i) {
    double si = std::sqrt(op.weights[i]);
    for (int j = 0; j < N; ++j) {
      double k = ev.pair_eval(data[i], data[j]);
      if (!std::isfinite(k))
        throw NumericalError("build_operator: non-finite kernel entry");
      op.matrix(i, j) = si * std::sqrt(op.weights[j]) * k;
    }
  }
  return op;
}

LogDet log_fredholm_det(const NystromOperator& op, double lambda) {
  const auto N = op.matrix.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N, N) - lambda * op.matrix;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  double log_abs = 0;
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  for (Eigen::Index i = 0; i < N; ++i) {
    double d = lu.matrixLU()(i, i);
    if (d == 0) throw NumericalError("log_fredholm_det: singular factor");
    if (d < 0) sign = -sign;
    log_abs += std::log(std::abs(d));
  }
  return {log_abs, sign};
}

double fredholm_det(const NystromOperator& op, std::optional<double> lambda_override) {
  double lambda = lambda_override.value_or(op.spec.lambda);
  return log_fredholm_det(op, lambda).value();
}

double gap_probability(const EnsembleSpec& spec, const IntervalUnion& J,
                       double* est_error, QRoute route) {
  if (spec.lambda == 0) {
    if (est_error) *est_error = 0;
    return 1.0;
  }
  double prev = 0;
  bool have_prev = false;
  for (int order = 32; order <= 512; order *= 2) {
    double e = fredholm_det(build_operator(spec, J, order, route));
    if (have_prev && std::abs(e - prev) <= 1e-9) {
      if (est_error) *est_error = std::abs(e - prev);
      if (e > 1.0 + 1e-9 || e <= 0)
        throw NumericalError("gap_probability: determinant escaped (0, 1]");
      return std::min(e, 1.0);
    }
    prev = e;
    have_prev = true;
  }
  throw NumericalError("gap_probability: no convergence at order cap 512");
}

double gap_probability(const EnsembleSpec& spec, double s, double* est_error,
                       QRoute route) {
  if (!(s > 0)) throw ConfigError("gap_probability: requires s > 0");
  return gap_probability(spec, IntervalUnion::single(0.0, s), est_error, route);
}

std::vector<double> resolvent_apply(const NystromOperator& op, double lambda,
                                    std::span<const double> f, bool transpose) {
  const auto N = op.matrix.rows();
  if (static_cast<Eigen::Index>(f.size()) != N)
    throw ConfigError("resolvent_apply: size mismatch with node count");
  Eigen::VectorXd rhs(N);
  for (Eigen::Index i = 0; i < N; ++i) rhs(i) = std::sqrt(op.weights[i]) * f[i];
  Eigen::MatrixXd A = transpose ? Eigen::MatrixXd(op.matrix.transpose()) : op.matrix;
  A = Eigen::MatrixXd::Identity(N, N) - lambda * A;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (std::abs(lu.determinant()) == 0)
    throw NumericalError("resolvent_apply: singular system");
  Eigen::VectorXd z = lu.solve(rhs);
  std::vector<double> g(N);
  for (Eigen::Index i = 0; i < N; ++i) g[i] = z(i) / std::sqrt(op.weights[i]);
  return g;
}

double resolvent_extend(const NystromOperator& op, double lambda,
                        std::span<const double> g_nodes, double f_at_t, double t,
                        bool transpose) {
  const size_t N = op.nodes.size();
  if (g_nodes.size() != N)
    throw ConfigError("resolvent_extend: size mismatch with node count");
  KernelEvaluator ev(op.spec, op.route);
  KernelNodeData at_t = ev.node_data(t);
  double acc = f_at_t;
  for (size_t j = 0; j < N; ++j) {
    KernelNodeData nj = ev.node_data(op.nodes[j]);
    double k = transpose ? ev.pair_eval(nj, at_t) : ev.pair_eval(at_t, nj);
    acc += lambda * op.weights[j] * k * g_nodes[j];
  }
  return acc;
}

double log_det_derivative(const EnsembleSpec& spec, double s, double h) {
  if (!(s > 0) || !(s - h > 0))
    throw ConfigError("log_det_derivative: need 0 < h < s");
  double ep = gap_probability(spec, s + h);
  double em = gap_probability(spec, s - h);
  return (std::log(ep) - std::log(em)) / (2 * h);
}

}  // namespace ginprod
