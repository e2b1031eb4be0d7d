#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "robust_scatter/error.hpp"

namespace robust_scatter {

/// Weight function u of a Maronna-type estimator together with
/// phi(x) = x u(x), its supremum phi_inf and the crossing phi^{-1}(1).
class UFunction {
public:
    using Fn = std::function<double(double)>;

    /// phi_inf is supplied by the caller (it is a limit, not computable pointwise).
    UFunction(std::string name, Fn u, double phi_inf)
        : name_(std::move(name)), u_(std::move(u)), phi_inf_(phi_inf), d0_(solve_phi_inverse_one()) {}

    /// u(x) = 2 / (1 + x); phi(x) = 2x / (1 + x), phi_inf = 2, phi^{-1}(1) = 1.
    static UFunction rational() {
        return UFunction("rational", [](double x) { return 2.0 / (1.0 + x); }, 2.0);
    }

    /// u(x) = min(1, t / x), left unnormalized; phi(x) = min(x, t), phi_inf = t.
    static UFunction huber(double t) {
        require(t > 0.0, ErrorCode::invalid_argument, "huber threshold must be positive");
        return UFunction("huber:" + format_param(t),
                         [t](double x) { return x <= t ? 1.0 : t / x; }, t);
    }

    /// u == c. phi is unbounded for c > 0; used where weights must not depend on Sigma.
    static UFunction constant(double c) {
        return UFunction("constant:" + format_param(c), [c](double) { return c; },
                         c > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    }

    const std::string& name() const { return name_; }
    double operator()(double x) const { return u_(x); }
    double u(double x) const { return u_(x); }
    double phi(double x) const { return x * u_(x); }
    double phi_inf() const { return phi_inf_; }

    /// phi^{-1}(1), absent when phi never reaches 1.
    const std::optional<double>& d0() const { return d0_; }

    /// Condition (i) for existence of Maronna's estimator.
    bool admits_maronna() const { return phi_inf_ > 1.0 && d0_.has_value(); }

private:
    static std::string format_param(double v) {
        std::string s = std::to_string(v);
        while (!s.empty() && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    // Bisection on [1e-12, hi] with bracket expansion, tolerance 1e-12.
    std::optional<double> solve_phi_inverse_one() const {
        if (!(phi_inf_ > 1.0)) return std::nullopt;
        double lo = 1e-12;
        if (phi(lo) >= 1.0) return lo;
        double hi = 1.0;
        int doublings = 0;
        while (phi(hi) < 1.0) {
            lo = hi;
            hi *= 2.0;
            if (++doublings > 200) return std::nullopt;
        }
        while (hi - lo > 1e-12 * std::max(1.0, hi)) {
            const double mid = 0.5 * (lo + hi);
            if (phi(mid) < 1.0) lo = mid;
            else hi = mid;
        }
        const double root = 0.5 * (lo + hi);
        // Snap to an exact crossing when the grid endpoint hits it.
        if (phi(hi) == 1.0 && phi(lo) < 1.0 && std::abs(hi - root) < 1e-12) return hi;
        return root;
    }

    std::string name_;
    Fn u_;
    double phi_inf_;
    std::optional<double> d0_;
};

/// Registry by name: "rational", "huber:t", "constant:c".
inline UFunction parse_u_function(std::string_view spec) {
    const std::string s(spec);
    if (s == "rational") return UFunction::rational();
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
        const std::string name = s.substr(0, colon);
        double value = 0.0;
        try {
            value = std::stod(s.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_argument, "bad u-function parameter in '" + s + "'");
        }
        if (name == "huber") return UFunction::huber(value);
        if (name == "constant") return UFunction::constant(value);
    }
    throw Error(ErrorCode::invalid_argument, "unknown u-function '" + s + "' (expected rational or huber:t)");
}

}  // namespace robust_scatter
