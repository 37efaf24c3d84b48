#pragma once
// Hard-coded reproductions of the worked examples. Every instance is rebuilt
// from its defining construction (uniform masses, stated supports), never from
// stored floating-point tables.

#include "coopcomp/regions.hpp"

#include <vector>

namespace coopcomp {

// ---------------------------------------------------------------- example 1
// X uniform on {1..a}; Y = (Y_1..Y_a) i.i.d. uniform on 2^b values; the
// receiver wants (X, Y_X). Only (X,U) is ever materialized.

struct Example1Instance {
  std::size_t a = 2;
  std::size_t b = 1;
  Channel u_channel;  // X -> U
};

struct Example1Rates {
  double r0 = 0.0;
  double sum = 0.0;
};

Alphabet example1_x(std::size_t a);
Example1Rates example1_rates(const Example1Instance& inst);

struct Example1Sweep {
  FrontierCurve curve;             // r0_bits, min_sum_bits
  std::vector<Channel> u_witness;  // one X -> U channel per curve point
};

Example1Sweep example1_sweep(std::size_t a, std::size_t b, const SearchConfig& cfg);

// ---------------------------------------------------------------- example 2

JointPmf example2_pmf();
FunctionSpec example2_function();

struct Example2Result {
  JointPmf base;
  FunctionSpec f;
  double h_x_given_y = 0.0;
  bool partially_invertible = false;
  std::vector<double> ry_grid;
  FrontierCurve full_cooperation;  // r0 = H(X|Y)
  FrontierCurve no_cooperation;    // r0 = 0
};

Example2Result example2_regions(const SearchConfig& cfg);

// ---------------------------------------------------------------- appendix example

JointPmf appendix_pmf();
/// f1 = x, f2 = y with sign distortions and D1 = D2 = 0.
RdConstraint appendix_rd();
/// U = X, T and V constant, W from the closed-form full-cooperation table.
AuxiliarySystem appendix_claim2_system();
/// T and V constant, U and W from the stated two-symbol tables.
AuxiliarySystem appendix_claim3_system();

struct AppendixClaims {
  double h_x_given_y = 0.0;
  SumRateResult claim1;       // min I(X,Y;T,W), T=U form, |T| <= 7, |W| <= 2
  RdEvaluation claim2;        // closed-form W; rates.sum = I(X,Y;W)
  RdEvaluation claim3;        // rates.r0 = I(X;U|Y), rates.sum = full sum bound
  double claim3_ixy_w = 0.0;  // the I(X,Y;W) term alone
};

AppendixClaims appendix_example_claims(const SearchConfig& cfg);

}  // namespace coopcomp
