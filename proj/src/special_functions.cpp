#include "mzlab/special_functions.hpp"

#include <cmath>
#include <numbers>

#include "mzlab/errors.hpp"

namespace mzlab {

void bessel_j_sequence(int M, double x, std::vector<double>& out) {
    if (M < 0 || !(x >= 0.0)) throw InvalidArgument("bessel_j_sequence: need M >= 0, x >= 0");
    out.assign(static_cast<std::size_t>(M) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return;
    }
    out[0] = ::j0(x);
    if (M == 0) return;
    out[1] = ::j1(x);
    if (M == 1) return;
    if (x >= M) {
        for (int m = 1; m < M; ++m) out[m + 1] = (2.0 * m / x) * out[m] - out[m - 1];
        return;
    }
    // Miller: start far enough beyond max(M, x) that J_start is negligible.
    int start = static_cast<int>(std::ceil(std::max<double>(M, x + 10.0 * std::cbrt(x)))) + 40;
    if (start % 2) ++start;
    double jp = 0.0, jc = 1e-300, sum = 0.0;
    for (int m = start; m > 0; --m) {
        const double jm = (2.0 * m / x) * jc - jp;
        jp = jc;
        jc = jm;  // jc now holds J_{m-1}
        if (m - 1 <= M) out[m - 1] = jc;
        if ((m - 1) % 2 == 0 && m - 1 > 0) sum += 2.0 * jc;
        if (std::abs(jc) > 1e250) {
            jc *= 1e-250;
            jp *= 1e-250;
            sum *= 1e-250;
            for (int k = m - 1; k <= M; ++k) out[k] *= 1e-250;
        }
    }
    sum += jc;  // J_0 term
    const double scale = 1.0 / sum;
    for (int m = 0; m <= M; ++m) out[m] *= scale;
}

double reciprocal_gamma(double z) {
    if (z <= 0.0 && z == std::floor(z)) return 0.0;
    if (z > 0.5) return std::exp(-std::lgamma(z));
    // Reflection: 1/Γ(z) = sin(πz) Γ(1-z) / π.
    return std::sin(std::numbers::pi * z) * std::tgamma(1.0 - z) / std::numbers::pi;
}

double gamma_ratio(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("gamma_ratio: arguments must be positive");
    return std::exp(std::lgamma(a) - std::lgamma(b));
}

}  // namespace mzlab
