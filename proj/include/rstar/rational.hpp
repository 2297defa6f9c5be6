#pragma once

// Rational approximations r_1 ... r_6 to log z and the partial-fraction
// forms of the odd orders. Every r_k satisfies r_k(1) = 0 and
// r_k(z) = -r_k(1/z); the denominators of the odd orders have only negative
// real roots, so each pole turns into a positive shift in a linear solve.

#include <span>
#include <utility>
#include <vector>

namespace rstar {

/// r(z) = (scale_num / scale_den) * N(z) / D(z), coefficients in descending
/// powers of z. Coefficients are small integers, kept exact.
struct RationalClosedForm {
  int order = 0;
  long long scale_num = 1;
  long long scale_den = 1;
  std::vector<long long> numerator;
  std::vector<long long> denominator;

  double scale() const { return static_cast<double>(scale_num) / static_cast<double>(scale_den); }
};

/// r(x) = offset + sum_j residues[j] / (x - poles[j]), poles ascending.
struct RationalPartialFraction {
  int order = 0;
  double offset = 0.0;
  std::vector<double> poles;
  std::vector<double> residues;
};

/// Orders 1 through 6. Throws InvalidArgument otherwise.
RationalClosedForm closed_form(int order);

/// Throws InvalidArgument when z is a root of the denominator.
double eval_closed(const RationalClosedForm& r, double z);

/// Tabulated decompositions for orders 1, 3 and 5 (15-digit constants).
RationalPartialFraction partial_fraction(int order);

/// Re-derives the decomposition from the closed form: denominator roots by
/// bracketing and bisection, residues N(a)/D'(a), offset from the leading
/// coefficients. Runs in extended precision. Odd orders only.
RationalPartialFraction derive_partial_fraction(const RationalClosedForm& r);

double eval_partial(const RationalPartialFraction& pf, double z);

/// (z, log z - r(z)) for each z in the grid.
std::vector<std::pair<double, double>> approximation_error_curve(int order, std::span<const double> z_grid);

}  // namespace rstar
