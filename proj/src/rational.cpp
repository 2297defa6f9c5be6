#include "rstar/rational.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rstar/errors.hpp"

namespace rstar {

namespace {

template <typename T>
T horner(const std::vector<long long>& coeffs, T z) {
  T acc = 0;
  for (long long c : coeffs) acc = acc * z + static_cast<T>(c);
  return acc;
}

template <typename T>
T horner_derivative(const std::vector<long long>& coeffs, T z) {
  const std::size_t degree = coeffs.size() - 1;
  T acc = 0;
  for (std::size_t i = 0; i < degree; ++i)
    acc = acc * z + static_cast<T>(coeffs[i]) * static_cast<T>(degree - i);
  return acc;
}

// All roots of a polynomial whose roots are known to be real, simple and
// negative. Brackets sign changes on a log-spaced grid over [-1e6, -1e-6].
std::vector<long double> negative_real_roots(const std::vector<long long>& coeffs) {
  const std::size_t degree = coeffs.size() - 1;
  std::vector<long double> roots;
  constexpr int kGrid = 6000;
  auto grid_point = [](int i) { return -std::pow(10.0L, 6.0L - 12.0L * i / kGrid); };

  long double a = grid_point(0);
  long double fa = horner(coeffs, a);
  for (int i = 1; i <= kGrid; ++i) {
    long double b = grid_point(i);
    long double fb = horner(coeffs, b);
    if (fb == 0.0L) {
      roots.push_back(b);
      b = grid_point(++i);
      fb = horner(coeffs, b);
    } else if ((fa < 0) != (fb < 0) && fa != 0.0L) {
      long double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && lo != hi; ++it) {
        const long double mid = 0.5L * (lo + hi);
        if (mid == lo || mid == hi) break;
        const long double fm = horner(coeffs, mid);
        if (fm == 0.0L) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      long double root = 0.5L * (lo + hi);
      for (int it = 0; it < 3; ++it) {
        const long double d = horner_derivative(coeffs, root);
        if (d == 0.0L) break;
        root -= horner(coeffs, root) / d;
      }
      roots.push_back(root);
    }
    a = b;
    fa = fb;
  }
  if (roots.size() != degree) {
    throw Error("derive_partial_fraction: found " + std::to_string(roots.size()) +
                " distinct negative roots for a degree-" + std::to_string(degree) +
                " denominator (repeated or non-real roots)");
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

RationalClosedForm closed_form(int order) {
  switch (order) {
    case 1:
      return {1, 2, 1, {1, -1}, {1, 1}};
    case 2:
      return {2, 4, 1, {1, 0, -1}, {1, 6, 1}};
    case 3:
      return {3, 2, 3, {7, 27, -27, -7}, {1, 15, 15, 1}};
    case 4:
      return {4, 16, 3, {1, 10, 0, -10, -1}, {1, 28, 70, 28, 1}};
    case 5:
      return {5, 2, 15, {43, 825, 1150, -1150, -825, -43}, {1, 45, 210, 210, 45, 1}};
    case 6:
      return {6, 4, 15, {23, 708, 2355, 0, -2355, -708, -23}, {1, 66, 495, 924, 495, 66, 1}};
    default:
      throw InvalidArgument("closed_form: order must be in 1..6, got " + std::to_string(order));
  }
}

double eval_closed(const RationalClosedForm& r, double z) {
  const double den = horner(r.denominator, z);
  if (den == 0.0) throw InvalidArgument("eval_closed: z = " + std::to_string(z) + " is a pole");
  return r.scale() * horner(r.numerator, z) / den;
}

RationalPartialFraction partial_fraction(int order) {
  switch (order) {
    case 1:
      return {1, 2.0, {-1.0}, {-4.0}};
    case 3:
      return {3,
              14.0 / 3.0,
              {-13.92820323027551, -1.0, -0.0717967697244908},
              {-49.52250037431294, -20.0 / 9.0, -0.2552774034648563}};
    case 5:
      return {5,
              86.0 / 15.0,
              {-39.863458189061411, -3.8518399963191827, -1.0, -0.25961618368249978,
               -0.025085630936916615},
              {-140.08241129102026, -6.1858406006156228, -92.0 / 75.0, -0.41692913805732562,
               -0.088152303639431204}};
    default:
      throw InvalidArgument("partial_fraction: only orders 1, 3 and 5 are tabulated, got " +
                            std::to_string(order));
  }
}

RationalPartialFraction derive_partial_fraction(const RationalClosedForm& r) {
  if (r.order % 2 == 0) {
    throw InvalidArgument("derive_partial_fraction: even orders are not decomposed");
  }
  const long double s = static_cast<long double>(r.scale_num) / static_cast<long double>(r.scale_den);
  RationalPartialFraction pf;
  pf.order = r.order;
  pf.offset = static_cast<double>(s * static_cast<long double>(r.numerator.front()) /
                                  static_cast<long double>(r.denominator.front()));
  for (long double root : negative_real_roots(r.denominator)) {
    const long double residue =
        s * horner(r.numerator, root) / horner_derivative(r.denominator, root);
    pf.poles.push_back(static_cast<double>(root));
    pf.residues.push_back(static_cast<double>(residue));
  }
  return pf;
}

double eval_partial(const RationalPartialFraction& pf, double z) {
  double acc = pf.offset;
  for (std::size_t j = 0; j < pf.poles.size(); ++j) {
    const double gap = z - pf.poles[j];
    if (gap == 0.0) throw InvalidArgument("eval_partial: z = " + std::to_string(z) + " is a pole");
    acc += pf.residues[j] / gap;
  }
  return acc;
}

std::vector<std::pair<double, double>> approximation_error_curve(int order, std::span<const double> z_grid) {
  const RationalClosedForm r = closed_form(order);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(z_grid.size());
  for (double z : z_grid) {
    if (!(z > 0.0)) throw InvalidArgument("approximation_error_curve: grid must be positive");
    curve.emplace_back(z, std::log(z) - eval_closed(r, z));
  }
  return curve;
}

}  // namespace rstar
