#pragma once
// Inner-loop arithmetic for information measures and the alternating solvers.
//
// Every kernel has a portable scalar reference in kernels::scalar and, on
// x86-64 builds with AVX2+FMA, a vectorized twin in kernels::avx2. The free
// functions in kernels:: route to whichever variant was selected at startup.
// Set COOPCOMP_FORCE_SCALAR=1 in the environment to pin the scalar path.

#include <cstddef>
#include <span>
#include <string_view>

namespace coopcomp::kernels {

enum class Isa { scalar, avx2 };

/// ISA the dispatching entry points use in this process.
Isa active_isa() noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// True when the AVX2 variant was compiled in and the CPU supports it.
bool avx2_available() noexcept;

// -sum p*log2(p) over entries with p > 0.
double entropy_bits(std::span<const double> p) noexcept;

// -sum p*log2(q) over entries with p > 0. q must be positive wherever p is.
double cross_entropy_bits(std::span<const double> p, std::span<const double> q) noexcept;

// out[i] = log2(in[i]); non-positive inputs map to -infinity.
void log2_array(std::span<const double> in, std::span<double> out) noexcept;

// sum p*q
double dot(std::span<const double> p, std::span<const double> q) noexcept;

namespace scalar {
double entropy_bits(std::span<const double> p) noexcept;
double cross_entropy_bits(std::span<const double> p, std::span<const double> q) noexcept;
void log2_array(std::span<const double> in, std::span<double> out) noexcept;
double dot(std::span<const double> p, std::span<const double> q) noexcept;
}  // namespace scalar

#if defined(COOPCOMP_WITH_AVX2)
namespace avx2 {
double entropy_bits(std::span<const double> p) noexcept;
double cross_entropy_bits(std::span<const double> p, std::span<const double> q) noexcept;
void log2_array(std::span<const double> in, std::span<double> out) noexcept;
double dot(std::span<const double> p, std::span<const double> q) noexcept;
}  // namespace avx2
#endif

}  // namespace coopcomp::kernels
