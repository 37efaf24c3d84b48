#include "coopcomp/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace coopcomp::kernels {
namespace {

struct Table {
  Isa isa;
  double (*entropy)(std::span<const double>) noexcept;
  double (*cross)(std::span<const double>, std::span<const double>) noexcept;
  void (*log2)(std::span<const double>, std::span<double>) noexcept;
  double (*dot)(std::span<const double>, std::span<const double>) noexcept;
};

bool cpu_has_avx2() noexcept {
#if defined(COOPCOMP_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool forced_scalar() noexcept {
  const char* v = std::getenv("COOPCOMP_FORCE_SCALAR");
  return v != nullptr && std::strcmp(v, "0") != 0 && v[0] != '\0';
}

Table select() noexcept {
#if defined(COOPCOMP_WITH_AVX2)
  if (cpu_has_avx2() && !forced_scalar()) {
    return {Isa::avx2, &avx2::entropy_bits, &avx2::cross_entropy_bits, &avx2::log2_array,
            &avx2::dot};
  }
#endif
  return {Isa::scalar, &scalar::entropy_bits, &scalar::cross_entropy_bits, &scalar::log2_array,
          &scalar::dot};
}

const Table& table() noexcept {
  static const Table t = select();
  return t;
}

}  // namespace

Isa active_isa() noexcept { return table().isa; }

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool avx2_available() noexcept { return cpu_has_avx2(); }

double entropy_bits(std::span<const double> p) noexcept { return table().entropy(p); }

double cross_entropy_bits(std::span<const double> p, std::span<const double> q) noexcept {
  return table().cross(p, q);
}

void log2_array(std::span<const double> in, std::span<double> out) noexcept {
  table().log2(in, out);
}

double dot(std::span<const double> p, std::span<const double> q) noexcept {
  return table().dot(p, q);
}

}  // namespace coopcomp::kernels
