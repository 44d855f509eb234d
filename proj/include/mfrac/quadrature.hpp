#pragma once

// Thin RAII layer over GSL's QUADPACK routines, used by the harmonizable
// covariance and variance-constant oracles.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>

#include "mfrac/error.hpp"

namespace mfrac::quad {

namespace detail {

inline void disable_gsl_abort() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const noexcept { gsl_integration_workspace_free(w); }
};
struct QawoDeleter {
    void operator()(gsl_integration_qawo_table* t) const noexcept { gsl_integration_qawo_table_free(t); }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;
using QawoTable = std::unique_ptr<gsl_integration_qawo_table, QawoDeleter>;

inline constexpr std::size_t kLimit = 2000;

template <class F>
double trampoline(double x, void* params) {
    return (*static_cast<const F*>(params))(x);
}

inline void check(int status, const char* what, double abserr) {
    if (status != GSL_SUCCESS)
        throw NumericalFailure(std::string(what) + ": " + gsl_strerror(status), abserr);
}

} // namespace detail

struct Result {
    double value = 0.0;
    double abserr = 0.0;
};

/// Adaptive Gauss-Kronrod with epsilon extrapolation on [a, b]; tolerates
/// integrable endpoint singularities.
template <class F>
Result integrate(const F& f, double a, double b, double epsabs, double epsrel = 0.0) {
    detail::disable_gsl_abort();
    detail::Workspace ws(gsl_integration_workspace_alloc(detail::kLimit));
    gsl_function fn{&detail::trampoline<F>, const_cast<F*>(&f)};
    Result r;
    const int status = gsl_integration_qags(&fn, a, b, epsabs, epsrel, detail::kLimit, ws.get(),
                                            &r.value, &r.abserr);
    detail::check(status, "qags", r.abserr);
    return r;
}

/// \int_a^\infty f(x) cos(omega x) dx for omega > 0, summed cycle by cycle
/// with epsilon extrapolation.
template <class F>
Result integrate_cos_tail(const F& f, double a, double omega, double epsabs) {
    detail::disable_gsl_abort();
    detail::Workspace ws(gsl_integration_workspace_alloc(detail::kLimit));
    detail::Workspace cycle(gsl_integration_workspace_alloc(detail::kLimit));
    detail::QawoTable table(gsl_integration_qawo_table_alloc(omega, 1.0, GSL_INTEG_COSINE, 50));
    gsl_function fn{&detail::trampoline<F>, const_cast<F*>(&f)};
    Result r;
    const int status = gsl_integration_qawf(&fn, a, epsabs, detail::kLimit, ws.get(), cycle.get(),
                                            table.get(), &r.value, &r.abserr);
    detail::check(status, "qawf", r.abserr);
    return r;
}

/// A cosine term w * cos(omega * xi) of an even integrand's numerator.
struct CosTerm {
    double weight;
    double omega;
};

/// \int_0^\infty g(xi) xi^{-beta} d xi where g(xi) = sum_m w_m cos(omega_m xi).
///
/// The integral is split at xi = 1. On [0, 1] the caller supplies a
/// numerically stable evaluation of g(xi) xi^{-beta} (the naive cosine sum
/// cancels catastrophically near 0). On [1, inf) each cosine term is handled
/// separately: omega = 0 in closed form, the rest by oscillatory quadrature.
/// Requires beta > 1.
template <class Inner>
Result power_law_cosine_integral(const Inner& inner, std::span<const CosTerm> terms, double beta,
                                 double epsabs) {
    if (!(beta > 1.0))
        throw InvalidArgument("power_law_cosine_integral: beta must exceed 1");
    const double share = epsabs / static_cast<double>(terms.size() + 1);
    Result total = integrate(inner, 0.0, 1.0, share);
    auto decay = [beta](double x) { return std::pow(x, -beta); };
    for (const auto& term : terms) {
        if (term.weight == 0.0) continue;
        if (term.omega == 0.0) {
            total.value += term.weight / (beta - 1.0);
            continue;
        }
        const Result tail = integrate_cos_tail(decay, 1.0, std::abs(term.omega), share / std::abs(term.weight));
        total.value += term.weight * tail.value;
        total.abserr += std::abs(term.weight) * tail.abserr;
    }
    return total;
}

} // namespace mfrac::quad
