#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2+FMA version; the table is picked at runtime from CPUID
// and can be forced with PNARM_ISA=scalar|avx2.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace pnarm::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct Table {
  Isa isa;

  // Sum over n steps of y log(lambda) - lambda - log(y!), where
  // lambda = theta[0]*v + theta[1]*x + theta[2]*ylag. Returns -inf as soon as
  // a step has lambda <= 0 with y > 0. 0 log 0 is taken as 0.
  double (*poisson_loglik)(const double* theta, double v, const double* x,
                           const double* ylag, const double* y,
                           const double* log_fact, std::size_t n);

  // sum_m weights[m] * Poisson(y; rates[m]); log_fact_y = log(y!).
  double (*mixture_pmf)(const double* rates, const double* weights, std::size_t m,
                        double y, double log_fact_y);

  // counts[i*n + j] += 1 wherever labels[i] == labels[j].
  void (*accumulate_cocluster)(const std::int32_t* labels, std::size_t n,
                               std::uint32_t* counts);

  // sum_{i,j} (1{labels[i]==labels[j]} - c_hat[i*n+j])^2.
  double (*ls_loss)(const std::int32_t* labels, const double* c_hat, std::size_t n);

  // Elementwise log / exp, exposed so the vector math can be tested alone.
  void (*log_n)(const double* in, double* out, std::size_t n);
  void (*exp_n)(const double* in, double* out, std::size_t n);
};

bool supported(Isa isa);
const Table& table(Isa isa);

// Best supported ISA unless overridden by PNARM_ISA. Resolved once.
const Table& active();

namespace detail {
const Table& scalar_table();
const Table* avx2_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace pnarm::kernels
