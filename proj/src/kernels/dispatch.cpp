#include <cstdlib>
#include <stdexcept>
#include <string>

#include "pnarm/kernels.hpp"

namespace pnarm::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const Table& table(Isa isa) {
  if (!supported(isa)) {
    throw std::runtime_error("kernel ISA not supported on this CPU: " + std::string(isa_name(isa)));
  }
  return isa == Isa::avx2 ? *detail::avx2_table() : detail::scalar_table();
}

namespace {

const Table& resolve() {
  if (const char* forced = std::getenv("PNARM_ISA")) {
    const std::string name(forced);
    if (name == "scalar") return table(Isa::scalar);
    if (name == "avx2") return table(Isa::avx2);
  }
  return supported(Isa::avx2) ? table(Isa::avx2) : table(Isa::scalar);
}

}  // namespace

const Table& active() {
  static const Table& chosen = resolve();
  return chosen;
}

}  // namespace pnarm::kernels
