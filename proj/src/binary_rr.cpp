#include "sme/binary_rr.hpp"

#include <cmath>

namespace sme {

double mix_rr_naive_log(double rr_gplus, double rr_gminus, double gamma_plus) {
  detail::check_positive(rr_gplus, "rr_gplus");
  detail::check_positive(rr_gminus, "rr_gminus");
  if (!(gamma_plus > 0.0 && gamma_plus < 1.0))
    throw domain_error("mix_rr_naive_log: prevalence must lie in (0,1)");
  return std::exp(gamma_plus * std::log(rr_gplus) +
                  (1.0 - gamma_plus) * std::log(rr_gminus));
}

}  // namespace sme
