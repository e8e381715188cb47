#pragma once

#include <vector>

namespace mzlab {

/// Fills out[m] = J_m(x) for m = 0..M (x >= 0).  Forward recurrence where it
/// is stable (m < x), Miller's backward recurrence otherwise.
void bessel_j_sequence(int M, double x, std::vector<double>& out);

/// 1/Γ(z), zero at the poles z = 0, -1, -2, ...
double reciprocal_gamma(double z);

/// Γ(a)/Γ(b) for a, b > 0 via log-gamma.
double gamma_ratio(double a, double b);

}  // namespace mzlab
