#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <type_traits>

#include <boost/rational.hpp>

#include "sme/errors.hpp"
#include "sme/model.hpp"

namespace sme {

/// Exact arithmetic scalar for small count tables.
using Rational = boost::rational<long long>;

/// The 2x2x2 joint probability table of treatment assignment (Rx or C),
/// marker subgroup (g+ or g-) and response (R or NR). Cells are joint
/// probabilities summing to 1; T is double for general use or Rational for
/// exact count tables.
template <class T>
struct ResponseTable {
  T rx_gplus_r{}, rx_gplus_nr{};
  T rx_gminus_r{}, rx_gminus_nr{};
  T c_gplus_r{}, c_gplus_nr{};
  T c_gminus_r{}, c_gminus_nr{};

  static ResponseTable from_counts(long long rx_gplus_r, long long rx_gplus_nr,
                                   long long rx_gminus_r, long long rx_gminus_nr,
                                   long long c_gplus_r, long long c_gplus_nr,
                                   long long c_gminus_r, long long c_gminus_nr) {
    const long long counts[8] = {rx_gplus_r, rx_gplus_nr, rx_gminus_r,
                                 rx_gminus_nr, c_gplus_r, c_gplus_nr,
                                 c_gminus_r, c_gminus_nr};
    long long total = 0;
    for (long long c : counts) {
      if (c < 0) throw domain_error("ResponseTable: counts must be non-negative");
      total += c;
    }
    if (total <= 0) throw domain_error("ResponseTable: total count must be positive");
    auto cell = [&](long long c) {
      if constexpr (std::is_same_v<T, Rational>)
        return Rational(c, total);
      else
        return static_cast<T>(c) / static_cast<T>(total);
    };
    return ResponseTable{cell(rx_gplus_r), cell(rx_gplus_nr), cell(rx_gminus_r),
                         cell(rx_gminus_nr), cell(c_gplus_r), cell(c_gplus_nr),
                         cell(c_gminus_r), cell(c_gminus_nr)};
  }

  std::array<T, 8> cells() const {
    return {rx_gplus_r, rx_gplus_nr, rx_gminus_r, rx_gminus_nr,
            c_gplus_r,  c_gplus_nr,  c_gminus_r,  c_gminus_nr};
  }

  // Marginal sums of Table 1.
  T p_rx_gplus() const { return rx_gplus_r + rx_gplus_nr; }
  T p_rx_gminus() const { return rx_gminus_r + rx_gminus_nr; }
  T p_c_gplus() const { return c_gplus_r + c_gplus_nr; }
  T p_c_gminus() const { return c_gminus_r + c_gminus_nr; }
  T p_rx_r() const { return rx_gplus_r + rx_gminus_r; }
  T p_c_r() const { return c_gplus_r + c_gminus_r; }
  T p_rx() const { return p_rx_gplus() + p_rx_gminus(); }
  T p_c() const { return p_c_gplus() + p_c_gminus(); }
  T gamma_plus() const { return p_rx_gplus() + p_c_gplus(); }
  T total() const { return p_rx() + p_c(); }

  void validate() const {
    for (const T& c : cells())
      if (c < T(0)) throw domain_error("ResponseTable: cells must be non-negative");
    if constexpr (std::is_same_v<T, Rational>) {
      if (total() != T(1))
        throw domain_error("ResponseTable: cells must sum to 1 exactly");
    } else {
      if (std::abs(static_cast<double>(total()) - 1.0) > 1e-12)
        throw domain_error("ResponseTable: cells must sum to 1 within 1e-12");
    }
  }
};

namespace detail {
template <class T>
void check_positive(const T& v, const char* what) {
  if (!(v > T(0))) throw zero_denominator_error(std::string(what) + " must be positive");
}
}  // namespace detail

/// Relative risk (relative response) in one marker subgroup, Eq-style
/// p(Rx,g,R) p(C,g) / (p(C,g,R) p(Rx,g)).
template <class T>
T rr_subgroup(const ResponseTable<T>& table, Marker group) {
  table.validate();
  T num_r = group == Marker::g_plus ? table.rx_gplus_r : table.rx_gminus_r;
  T den_r = group == Marker::g_plus ? table.c_gplus_r : table.c_gminus_r;
  T num_m = group == Marker::g_plus ? table.p_c_gplus() : table.p_c_gminus();
  T den_m = group == Marker::g_plus ? table.p_rx_gplus() : table.p_rx_gminus();
  detail::check_positive(den_r, "control responder probability");
  detail::check_positive(den_m, "treatment group probability");
  return (num_r * num_m) / (den_r * den_m);
}

/// Relative risk on the mixture margins.
template <class T>
T rr_overall(const ResponseTable<T>& table) {
  table.validate();
  detail::check_positive(table.p_c_r(), "control responder probability");
  detail::check_positive(table.p_rx(), "treatment probability");
  return (table.p_rx_r() * table.p_c()) / (table.p_c_r() * table.p_rx());
}

/// The correct mixing of subgroup relative risks: weights are the population
/// proportions of control responders in each subgroup, not the prevalences.
/// For tables where treatment assignment is independent of the subgroup this
/// reproduces the overall relative risk exactly.
template <class T>
T mix_rr_correct(const T& rr_gplus, const T& rr_gminus,
                 const T& control_responders_gplus,
                 const T& control_responders_gminus) {
  detail::check_positive(rr_gplus, "rr_gplus");
  detail::check_positive(rr_gminus, "rr_gminus");
  detail::check_positive(control_responders_gplus, "control responders (g+)");
  detail::check_positive(control_responders_gminus, "control responders (g-)");
  T denom = control_responders_gplus + control_responders_gminus;
  T w_minus = control_responders_gminus / denom;
  T w_plus = T(1) - w_minus;
  return w_minus * rr_gminus + w_plus * rr_gplus;
}

/// Prevalence-weighted arithmetic mixing of subgroup relative risks.
/// This is an incorrect mixture estimator, kept as a counterexample.
template <class T>
T mix_rr_naive_prevalence(const T& rr_gplus, const T& rr_gminus,
                          const T& gamma_plus) {
  detail::check_positive(rr_gplus, "rr_gplus");
  detail::check_positive(rr_gminus, "rr_gminus");
  if (!(gamma_plus > T(0)) || !(gamma_plus < T(1)))
    throw domain_error("mix_rr_naive_prevalence: prevalence must lie in (0,1)");
  return gamma_plus * rr_gplus + (T(1) - gamma_plus) * rr_gminus;
}

/// Prevalence-weighted mixing of log relative risks; also incorrect.
double mix_rr_naive_log(double rr_gplus, double rr_gminus, double gamma_plus);

/// double(p/q), for reporting rational results.
inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

}  // namespace sme
