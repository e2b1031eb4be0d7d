#pragma once

// Seeded generators for the supported distribution families, shape-matrix
// application x = Sigma^{1/2} y, and pairwise symmetrization for non-centered data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "robust_scatter/error.hpp"
#include "robust_scatter/random.hpp"
#include "robust_scatter/scatter_model.hpp"

namespace robust_scatter {

enum class Family { gaussian, laplace_iid, permuted_smoothed, elliptical };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::laplace_iid: return "laplace-iid";
        case Family::permuted_smoothed: return "permuted-smoothed";
        case Family::elliptical: return "elliptical";
    }
    return "unknown";
}

inline Family parse_family(std::string_view name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "laplace-iid" || name == "laplace") return Family::laplace_iid;
    if (name == "permuted-smoothed" || name == "permuted") return Family::permuted_smoothed;
    if (name == "elliptical") return Family::elliptical;
    throw Error(ErrorCode::invalid_argument, "unknown distribution family '" + std::string(name) + "'");
}

/// Law of the positive radial factor z of the elliptical family.
struct RadialLaw {
    enum class Kind { constant, chi, pareto };
    Kind kind = Kind::constant;
    double parameter = 1.0;  // c, k, or a

    static RadialLaw constant(double c) { return {Kind::constant, c}; }
    static RadialLaw chi(double k) { return {Kind::chi, k}; }
    static RadialLaw pareto(double a) { return {Kind::pareto, a}; }

    void validate() const {
        switch (kind) {
            case Kind::constant:
                require(parameter > 0.0, ErrorCode::invalid_argument, "constant radial law needs c > 0");
                break;
            case Kind::chi:
                require(parameter > 0.0, ErrorCode::invalid_argument, "chi radial law needs k > 0");
                break;
            case Kind::pareto:
                require(parameter > 2.0, ErrorCode::invalid_argument,
                        "pareto radial law needs a > 2 (finite second moment)");
                break;
        }
    }

    /// z = c; z = sqrt(chi^2_k); z = U^{-1/a} (Pareto with unit scale).
    double draw(Rng& rng) const {
        switch (kind) {
            case Kind::constant: return parameter;
            case Kind::chi: {
                std::chi_squared_distribution<double> chi2(parameter);
                return std::sqrt(chi2(rng));
            }
            case Kind::pareto: {
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                double u = unif(rng);
                while (u <= 0.0) u = unif(rng);
                return std::pow(u, -1.0 / parameter);
            }
        }
        return 1.0;
    }

    std::string describe() const {
        std::ostringstream out;
        out.precision(17);
        switch (kind) {
            case Kind::constant: out << "constant(" << parameter << ")"; break;
            case Kind::chi: out << "chi(" << parameter << ")"; break;
            case Kind::pareto: out << "pareto(" << parameter << ")"; break;
        }
        return out.str();
    }
};

/// Parses "constant:1", "chi:5", "pareto:2.5" (also "name(x)").
inline RadialLaw parse_radial(std::string_view text) {
    std::string s(text);
    for (char& c : s)
        if (c == '(' || c == ')') c = (c == '(') ? ':' : ' ';
    const auto colon = s.find(':');
    require(colon != std::string::npos, ErrorCode::invalid_argument,
            "radial law must look like name:value, got '" + std::string(text) + "'");
    const std::string name = s.substr(0, colon);
    double value = 0.0;
    try {
        value = std::stod(s.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument, "bad radial law parameter in '" + std::string(text) + "'");
    }
    RadialLaw law;
    if (name == "constant") law = RadialLaw::constant(value);
    else if (name == "chi") law = RadialLaw::chi(value);
    else if (name == "pareto") law = RadialLaw::pareto(value);
    else throw Error(ErrorCode::invalid_argument, "unknown radial law '" + name + "'");
    law.validate();
    return law;
}

struct DistributionSpec {
    Family family = Family::gaussian;
    double sigma_smooth = 0.01;
    RadialLaw radial = RadialLaw::constant(1.0);
    Vector mean;                         // empty means zero
    std::optional<ScatterMatrix> shape;  // empty means identity

    static DistributionSpec gaussian() { return {}; }
    static DistributionSpec laplace() {
        DistributionSpec s;
        s.family = Family::laplace_iid;
        return s;
    }
    static DistributionSpec permuted_smoothed(double sigma = 0.01) {
        DistributionSpec s;
        s.family = Family::permuted_smoothed;
        s.sigma_smooth = sigma;
        return s;
    }
    static DistributionSpec elliptical(RadialLaw law) {
        DistributionSpec s;
        s.family = Family::elliptical;
        s.radial = law;
        return s;
    }

    /// tau_p = p^{-1} Tr Sigma_p of the configured shape.
    double tau(std::size_t p) const { return shape ? shape->tau() : (p > 0 ? 1.0 : 0.0); }
};

/// Symmetric PSD square root via eigendecomposition, eigenvalues floored at 1e-12.
inline Matrix spd_sqrt(const Matrix& m) {
    if (m.isDiagonal(0.0)) return m.diagonal().cwiseMax(1e-12).cwiseSqrt().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m));
    Vector roots = eig.eigenvalues().cwiseMax(1e-12).cwiseSqrt();
    return symmetrized(eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose());
}

/// Uniform draw from {a in {+-1}^p : sum a = 0}: Fisher-Yates shuffle of p/2 ones
/// and p/2 minus ones.
inline Vector balanced_signs(std::size_t p, Rng& rng) {
    require(p % 2 == 0, ErrorCode::invalid_argument, "balanced sign vector needs even p");
    std::vector<double> a(p);
    for (std::size_t i = 0; i < p; ++i) a[i] = i < p / 2 ? 1.0 : -1.0;
    for (std::size_t i = p; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(a[i - 1], a[pick(rng)]);
    }
    return Eigen::Map<Vector>(a.data(), static_cast<Eigen::Index>(p));
}

namespace detail {

inline Vector unit_sphere(std::size_t p, Rng& rng) {
    std::normal_distribution<double> normal;
    Vector g(static_cast<Eigen::Index>(p));
    double norm = 0.0;
    while (norm == 0.0) {
        for (auto& v : g) v = normal(rng);
        norm = g.norm();
    }
    return g / norm;
}

inline std::string describe_shape(const std::optional<ScatterMatrix>& shape) {
    if (!shape) return "identity";
    std::ostringstream out;
    out << "custom(p=" << shape->p() << ", trace=" << shape->trace() << ")";
    return out.str();
}

}  // namespace detail

inline Dataset apply_shape(const Dataset& data, const ScatterMatrix& shape);

/// Draws n i.i.d. rows. Row i comes from its own generator derived from
/// (seed, i), so outputs are reproducible and independent of evaluation order.
inline Dataset sample(const DistributionSpec& spec, std::size_t n, std::size_t p, std::uint64_t seed) {
    require(n >= 1 && p >= 1, ErrorCode::invalid_argument, "sample: n and p must be positive");
    if (spec.family == Family::permuted_smoothed) {
        require(p % 2 == 0, ErrorCode::invalid_argument, "permuted-smoothed family requires even p");
        require(spec.sigma_smooth > 0.0, ErrorCode::invalid_argument, "smoothing level must be positive");
    }
    if (spec.family == Family::elliptical) spec.radial.validate();
    if (spec.mean.size() != 0)
        require(static_cast<std::size_t>(spec.mean.size()) == p, ErrorCode::dimension_mismatch,
                "mean vector length does not match p");

    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(p);
    Matrix y(rows, cols);
    const double laplace_scale = 1.0 / std::sqrt(2.0);
    const double smooth_norm = 1.0 / std::sqrt(1.0 + spec.sigma_smooth * spec.sigma_smooth);
    for (Eigen::Index i = 0; i < rows; ++i) {
        Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        switch (spec.family) {
            case Family::gaussian: {
                std::normal_distribution<double> normal;
                for (Eigen::Index j = 0; j < cols; ++j) y(i, j) = normal(rng);
                break;
            }
            case Family::laplace_iid: {
                // Laplace with unit variance: scale b = 1/sqrt(2), density (1/sqrt2) exp(-sqrt2 |y|).
                std::exponential_distribution<double> expo(1.0);
                std::bernoulli_distribution sign(0.5);
                for (Eigen::Index j = 0; j < cols; ++j)
                    y(i, j) = (sign(rng) ? 1.0 : -1.0) * laplace_scale * expo(rng);
                break;
            }
            case Family::permuted_smoothed: {
                const Vector a = balanced_signs(p, rng);
                std::normal_distribution<double> normal;
                for (Eigen::Index j = 0; j < cols; ++j)
                    y(i, j) = smooth_norm * (a(j) + spec.sigma_smooth * normal(rng));
                break;
            }
            case Family::elliptical: {
                const double z = spec.radial.draw(rng);
                y.row(i) = z * detail::unit_sphere(p, rng).transpose();
                break;
            }
        }
    }

    Provenance prov;
    prov.family = std::string(to_string(spec.family));
    if (spec.family == Family::permuted_smoothed) prov.family += "(sigma=" + std::to_string(spec.sigma_smooth) + ")";
    if (spec.family == Family::elliptical) prov.family += "(" + spec.radial.describe() + ")";
    prov.seed = seed;
    prov.shape = detail::describe_shape(spec.shape);
    prov.mean = spec.mean.size() ? "custom" : "zero";

    Dataset out(std::move(y), prov);
    if (spec.shape) out = apply_shape(out, *spec.shape);
    if (spec.mean.size()) {
        Matrix shifted = out.samples().rowwise() + spec.mean.transpose();
        out = Dataset(std::move(shifted), prov);
    }
    return out.with_provenance(prov);
}

/// Rows become Sigma^{1/2} y_i with the symmetric square root of the shape.
inline Dataset apply_shape(const Dataset& data, const ScatterMatrix& shape) {
    require(shape.p() == data.p(), ErrorCode::dimension_mismatch, "apply_shape: shape dimension differs from p");
    require(shape.is_spd(), ErrorCode::not_spd, "apply_shape: shape is not positive definite");
    const Matrix root = spd_sqrt(shape.entries());
    Provenance prov = data.provenance().value_or(Provenance{});
    prov.shape = detail::describe_shape(shape);
    return Dataset(data.samples() * root, prov);
}

/// x_sym_i = (x_i - x_{i+n}) / sqrt(2) for a dataset of 2n rows.
inline Dataset symmetrize(const Dataset& data) {
    require(data.n() % 2 == 0, ErrorCode::invalid_argument, "symmetrize needs an even number of rows");
    const auto half = static_cast<Eigen::Index>(data.n() / 2);
    const Matrix& x = data.samples();
    Matrix out = (x.topRows(half) - x.bottomRows(half)) / std::sqrt(2.0);
    Provenance prov = data.provenance().value_or(Provenance{});
    prov.family = "symmetrized(" + prov.family + ")";
    prov.mean = "cancelled";
    return Dataset(std::move(out), prov);
}

}  // namespace robust_scatter
