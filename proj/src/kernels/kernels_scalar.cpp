#include <cmath>
#include <limits>

#include "pnarm/kernels.hpp"

namespace pnarm::kernels::detail {
namespace {

double poisson_loglik(const double* theta, double v, const double* x, const double* ylag,
                      const double* y, const double* log_fact, std::size_t n) {
  const double base = theta[0] * v;
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double lambda = base + theta[1] * x[t] + theta[2] * ylag[t];
    if (y[t] > 0.0) {
      if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
      sum += y[t] * std::log(lambda);
    }
    sum -= lambda + log_fact[t];
  }
  return sum;
}

double mixture_pmf(const double* rates, const double* weights, std::size_t m, double y,
                   double log_fact_y) {
  double p = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double lambda = rates[k];
    if (lambda <= 0.0) {
      if (y == 0.0) p += weights[k];
      continue;
    }
    p += weights[k] * std::exp(y * std::log(lambda) - lambda - log_fact_y);
  }
  return p;
}

void accumulate_cocluster(const std::int32_t* labels, std::size_t n, std::uint32_t* counts) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      counts[i * n + j] += labels[i] == labels[j] ? 1u : 0u;
    }
  }
}

double ls_loss(const std::int32_t* labels, const double* c_hat, std::size_t n) {
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (labels[i] == labels[j] ? 1.0 : 0.0) - c_hat[i * n + j];
      loss += d * d;
    }
  }
  return loss;
}

void log_n(const double* in, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = std::log(in[k]);
}

void exp_n(const double* in, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = std::exp(in[k]);
}

constexpr Table kScalar{Isa::scalar, poisson_loglik, mixture_pmf, accumulate_cocluster,
                        ls_loss,     log_n,          exp_n};

}  // namespace

const Table& scalar_table() { return kScalar; }

}  // namespace pnarm::kernels::detail
