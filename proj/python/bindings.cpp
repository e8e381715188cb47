#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mzlab/cli.hpp"
#include "mzlab/config.hpp"
#include "mzlab/errors.hpp"

namespace py = pybind11;
using namespace mzlab;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

GridField to_field(const CArray& a, double L) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw InvalidArgument("expected a square 2-D array");
    GridField f(make_grid(static_cast<int>(a.shape(0)), L), Domain::Spatial);
    std::copy(a.data(), a.data() + a.size(), f.values.begin());
    return f;
}

CArray to_array(const GridField& f) {
    const auto n = static_cast<py::ssize_t>(f.grid.N());
    CArray out({n, n});
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

RoughKernel kernel_by_name(const std::string& name) {
    KernelConfig k;
    k.kind = name;
    return build_kernel(k);
}

SurfaceProfile profile_by_name(const std::string& name, double p) {
    if (name == "identity") return profile_constants(profile_identity());
    if (name == "power") return profile_constants(profile_power(p));
    if (name == "log1p") return profile_constants(profile_log1p());
    throw InvalidArgument("unknown profile '" + name + "'");
}

LPFrame frame_by_name(const std::string& name) {
    if (name == "dyadic") return build_partition(LacunarySequence::dyadic(), build_eta(2.0), FrameFlavor::Standard);
    if (name == "power2_square") {
        const auto s = LacunarySequence::power2_square();
        return build_partition(s, build_eta(s.a()), FrameFlavor::Standard);
    }
    throw InvalidArgument("unknown frame '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fractional Marcinkiewicz integrals on surfaces: numerical workbench";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<BandError>(m, "BandError", PyExc_ValueError);
    py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("synthesize", [](std::uint64_t seed, double lo, double hi, int N, double L) {
        return to_array(synthesize_bandlimited(seed, make_annulus(lo, hi), make_grid(N, L)));
    }, py::arg("seed"), py::arg("lo"), py::arg("hi"), py::arg("N") = 256, py::arg("L") = M_PI,
       "Zero-mean field with unit L2 norm and spectrum in the annulus lo <= |xi| <= hi.");

    m.def("lp_norm", [](const CArray& f, double p, double L) { return lp_norm(to_field(f, L), p); },
          py::arg("field"), py::arg("p") = 2.0, py::arg("L") = M_PI);

    m.def("tl_norm", [](const CArray& f, double alpha, double p, double q, const std::string& frame, double L) {
        TLParams tl{alpha, p, q};
        return tl_norm(to_field(f, L), tl, frame_by_name(frame));
    }, py::arg("field"), py::arg("alpha") = 0.0, py::arg("p") = 2.0, py::arg("q") = 2.0,
       py::arg("frame") = "dyadic", py::arg("L") = M_PI);

    m.def("sigma_hat", [](double t, double xi1, double xi2, const std::string& kernel, const std::string& profile,
                          double profile_p, double rho) {
        OperatorSpec s;
        s.omega = kernel_by_name(kernel);
        s.profile = profile_by_name(profile, profile_p);
        s.rho = rho;
        return sigma_hat(t, xi1, xi2, s);
    }, py::arg("t"), py::arg("xi1"), py::arg("xi2"), py::arg("kernel") = "cosine",
       py::arg("profile") = "identity", py::arg("profile_p") = 1.0, py::arg("rho") = 1.0);

    m.def("mu_apply", [](const CArray& f, const std::string& kernel, const std::string& profile, double alpha,
                         double t_min, double t_max, double L) {
        OperatorSpec s;
        s.omega = kernel_by_name(kernel);
        s.profile = profile_by_name(profile, 1.0);
        s.alpha = alpha;
        return to_array(mu_apply(to_field(f, L), s, make_tgrid(t_min, t_max)));
    }, py::arg("field"), py::arg("kernel") = "cosine", py::arg("profile") = "identity", py::arg("alpha") = 0.0,
       py::arg("t_min") = 0x1p-15, py::arg("t_max") = 64.0, py::arg("L") = M_PI);

    m.def("z_omega", [](const std::string& kernel, double beta) {
        const auto v = z_omega(kernel_by_name(kernel), beta);
        return py::make_tuple(v.value, v.divergent);
    }, py::arg("kernel"), py::arg("beta"), "Returns (value, divergent).");

    m.def("alpha_range", [](const std::string& regime, const std::string& clause, double p, double q,
                            double gamma, double beta, double rho, double c0, double c1) {
        RegimeParams tp;
        tp.regime = parse_regime(regime);
        tp.clause = parse_clause(clause);
        tp.p = p;
        tp.q = q;
        tp.gamma = gamma;
        tp.beta = beta;
        tp.rho = rho;
        tp.c0 = c0;
        tp.c1 = c1;
        const auto iv = alpha_range(tp);
        return py::make_tuple(iv.lo, iv.hi, iv.degenerate);
    }, py::arg("regime"), py::arg("clause"), py::arg("p") = 2.0, py::arg("q") = 2.0, py::arg("gamma") = 2.0,
       py::arg("beta") = 1.0, py::arg("rho") = 1.0, py::arg("c0") = 2.0, py::arg("c1") = 1.0,
       "Returns (lo, hi, degenerate).");

    m.def("interpolation_exponents", [](double p, double q, double gamma, double alpha, double c0, double c1,
                                        double r1, double r2) {
        const auto e = interpolation_exponents(p, q, gamma, alpha, c0, c1, r1, r2);
        return py::dict(py::arg("theta1") = e.theta1, py::arg("theta2") = e.theta2,
                        py::arg("delta") = e.delta, py::arg("second_term") = e.second_term);
    });

    m.def("run", [](const std::string& command, const std::string& config, const std::vector<std::string>& set,
                    std::optional<std::string> out) {
        std::ostringstream o, e;
        const int code = run_command(command, config, set, out, o, e);
        return py::make_tuple(code, o.str(), e.str());
    }, py::arg("command"), py::arg("config"), py::arg("set") = std::vector<std::string>{},
       py::arg("out") = std::nullopt, "Runs a CLI command; returns (exit_code, stdout, stderr).");
}
