#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "robust_scatter/estimators.hpp"
#include "robust_scatter/random.hpp"
#include "robust_scatter/samplers.hpp"

using namespace robust_scatter;

namespace {

Matrix empirical_covariance(const Dataset& d) { return d.samples().transpose() * d.samples() / double(d.n()); }

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::io_error;
}

}  // namespace

TEST(Sample, LaplaceHasUnitVariance) {
    const Dataset d = sample(DistributionSpec::laplace(), 100000, 1, 17);
    const double mean = d.samples().mean();
    const double var = (d.samples().array() - mean).square().mean();
    EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(Sample, LaplaceMatchesDensityShape) {
    // E|Y| = b = 1/sqrt(2) for Laplace with unit variance.
    const Dataset d = sample(DistributionSpec::laplace(), 100000, 1, 5);
    EXPECT_NEAR(d.samples().cwiseAbs().mean(), 1.0 / std::sqrt(2.0), 0.01);
}

TEST(Sample, BalancedSignsSumToZero) {
    Rng rng = make_rng(3);
    for (int k = 0; k < 200; ++k) {
        const Vector a = balanced_signs(4, rng);
        EXPECT_EQ(a.sum(), 0.0);
        EXPECT_TRUE((a.array().abs() == 1.0).all());
    }
}

TEST(Sample, PermutedSmoothedRowsAreNearlyBalanced) {
    const double sigma = 0.01;
    const Dataset d = sample(DistributionSpec::permuted_smoothed(sigma), 500, 4, 9);
    const double scale = std::sqrt(1.0 + sigma * sigma);
    for (std::size_t i = 0; i < d.n(); ++i) {
        const Vector a = (d.row(i) * scale).array().round();
        EXPECT_EQ(a.sum(), 0.0);
        EXPECT_LT((d.row(i) * scale - a).cwiseAbs().maxCoeff(), 8 * sigma);
    }
}

TEST(Sample, EllipticalConstantRadiusGivesUnitNorm) {
    const Dataset d = sample(DistributionSpec::elliptical(RadialLaw::constant(1.0)), 200, 7, 1);
    for (std::size_t i = 0; i < d.n(); ++i) EXPECT_NEAR(d.row(i).norm(), 1.0, 1e-14);
}

TEST(Sample, EllipticalSphereHasCovarianceIdentityOverP) {
    const std::size_t p = 4;
    const Dataset d = sample(DistributionSpec::elliptical(RadialLaw::constant(1.0)), 100000, p, 21);
    EXPECT_LT((empirical_covariance(d) - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Sample, RadialLawsArePositiveWithExpectedSecondMoment) {
    Rng rng = make_rng(12);
    const RadialLaw chi = RadialLaw::chi(5);
    const RadialLaw pareto = parse_radial("pareto:2.5");
    double chi2 = 0.0, par2 = 0.0;
    const int m = 200000;
    for (int k = 0; k < m; ++k) {
        const double a = chi.draw(rng), b = pareto.draw(rng);
        ASSERT_GT(a, 0.0);
        ASSERT_GE(b, 1.0);
        chi2 += a * a;
        par2 += b * b;
    }
    EXPECT_NEAR(chi2 / m, 5.0, 0.05);
    // E z^2 = a / (a - 2) = 5 for a = 2.5; heavy tail, so only a loose check.
    EXPECT_NEAR(par2 / m, 5.0, 1.0);
    EXPECT_THROW(RadialLaw::pareto(2.0).validate(), Error);
    EXPECT_THROW(parse_radial("weibull:1"), Error);
    EXPECT_EQ(parse_radial("pareto(2.5)").parameter, 2.5);
}

TEST(Sample, IsotropyForGaussianAndLaplace) {
    for (const auto& spec : {DistributionSpec::gaussian(), DistributionSpec::laplace()}) {
        const Dataset d = sample(spec, 100000, 5, 77);
        EXPECT_LT((empirical_covariance(d) - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 0.05);
    }
}

TEST(Sample, ReproducibleForSameSeed) {
    for (const auto& spec : {DistributionSpec::gaussian(), DistributionSpec::laplace(),
                             DistributionSpec::permuted_smoothed(), DistributionSpec::elliptical(RadialLaw::chi(3))}) {
        const Dataset a = sample(spec, 30, 6, 99);
        const Dataset b = sample(spec, 30, 6, 99);
        const Dataset c = sample(spec, 30, 6, 100);
        EXPECT_EQ(a.samples(), b.samples());
        EXPECT_NE(a.samples(), c.samples());
        ASSERT_TRUE(a.provenance().has_value());
        EXPECT_EQ(a.provenance()->seed, 99u);
    }
}

TEST(Sample, PrefixRowsDoNotDependOnN) {
    const Dataset a = sample(DistributionSpec::gaussian(), 10, 3, 4);
    const Dataset b = sample(DistributionSpec::gaussian(), 20, 3, 4);
    EXPECT_EQ(a.samples(), b.samples().topRows(10));
}

TEST(Sample, MeanAndShapeAreApplied) {
    DistributionSpec spec = DistributionSpec::gaussian();
    Matrix shape(2, 2);
    shape << 4, 0, 0, 9;
    spec.shape = ScatterMatrix(shape);
    spec.mean = Vector::Constant(2, 5.0);
    const Dataset d = sample(spec, 100000, 2, 2);
    const Vector mean = d.samples().colwise().mean();
    EXPECT_NEAR(mean(0), 5.0, 0.05);
    EXPECT_NEAR(mean(1), 5.0, 0.05);
    const Matrix centered = d.samples().rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / 100000.0;
    EXPECT_NEAR(cov(0, 0), 4.0, 0.1);
    EXPECT_NEAR(cov(1, 1), 9.0, 0.2);
}

TEST(Sample, ErrorCases) {
    EXPECT_EQ(code_of([] { (void)sample(DistributionSpec::permuted_smoothed(), 5, 3, 1); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { (void)sample(DistributionSpec::permuted_smoothed(0.0), 5, 4, 1); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { (void)sample(DistributionSpec::permuted_smoothed(-1.0), 5, 4, 1); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { (void)sample(DistributionSpec::gaussian(), 0, 4, 1); }), ErrorCode::invalid_argument);
    DistributionSpec bad_mean;
    bad_mean.mean = Vector::Zero(3);
    EXPECT_EQ(code_of([&] { (void)sample(bad_mean, 5, 4, 1); }), ErrorCode::dimension_mismatch);
    EXPECT_EQ(parse_family("laplace"), Family::laplace_iid);
    EXPECT_EQ(parse_family("permuted-smoothed"), Family::permuted_smoothed);
    EXPECT_THROW(parse_family("cauchy"), Error);
}

TEST(ApplyShape, IdentityLeavesDataUnchanged) {
    const Dataset d(oracles::random_gaussian(10, 4, 1));
    EXPECT_LE((apply_shape(d, ScatterMatrix::identity(4)).samples() - d.samples()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ApplyShape, ScalarAndDiagonalRoots) {
    EXPECT_DOUBLE_EQ(apply_shape(Dataset(Matrix::Constant(1, 1, 3.0)), ScatterMatrix(Matrix::Constant(1, 1, 4.0)))
                         .samples()(0, 0),
                     6.0);
    Matrix shape(2, 2);
    shape << 4, 0, 0, 9;
    const Dataset out = apply_shape(Dataset(Matrix::Ones(1, 2)), ScatterMatrix(shape));
    EXPECT_DOUBLE_EQ(out.samples()(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(out.samples()(0, 1), 3.0);
    EXPECT_EQ(out.provenance()->shape, "custom(p=2, trace=13)");
}

TEST(ApplyShape, UsesSymmetricSquareRoot) {
    const Matrix sigma = oracles::random_spd(5, 0.5, 3.0, 6);
    const Matrix root = spd_sqrt(sigma);
    EXPECT_LE((root - root.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((root * root - sigma).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(root).eigenvalues().minCoeff(), 0.0);
}

TEST(ApplyShape, ErrorCases) {
    const Dataset d(Matrix::Ones(3, 2));
    Matrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    EXPECT_EQ(code_of([&] { (void)apply_shape(d, ScatterMatrix(indefinite)); }), ErrorCode::not_spd);
    EXPECT_EQ(code_of([&] { (void)apply_shape(d, ScatterMatrix::identity(3)); }), ErrorCode::dimension_mismatch);
}

TEST(Symmetrize, Examples) {
    Matrix a(2, 1);
    a << 2, 0;
    EXPECT_DOUBLE_EQ(symmetrize(Dataset(a)).samples()(0, 0), std::sqrt(2.0));
    const Dataset same(Matrix::Ones(2, 2));
    EXPECT_EQ(symmetrize(same).samples(), Matrix::Zero(1, 2));
    EXPECT_EQ(code_of([] { (void)symmetrize(Dataset(Matrix::Ones(3, 2))); }), ErrorCode::invalid_argument);
}

TEST(Symmetrize, MeanShiftCancels) {
    const Dataset d(oracles::random_gaussian(20, 3, 5));
    Vector mu(3);
    mu << 1.5, -2.0, 7.0;
    const Dataset shifted(Matrix(d.samples().rowwise() + mu.transpose()));
    EXPECT_LE((symmetrize(shifted).samples() - symmetrize(d).samples()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Symmetrize, SymmetrizedLaplaceFeedsEveryEstimator) {
    DistributionSpec spec = DistributionSpec::laplace();
    spec.mean = Vector::Constant(8, 3.0);
    const Dataset sym = symmetrize(sample(spec, 80, 8, 31));
    EXPECT_EQ(sym.n(), 40u);
    EXPECT_TRUE(tyler(sym).converged);
    EXPECT_TRUE(maronna(sym, UFunction::rational()).converged);
    EXPECT_TRUE(tyler_regularized(sym, 1.0).converged);
    EXPECT_TRUE(maronna_regularized(sym, UFunction::rational(), 1.0).converged);
}

TEST(SeedDerivation, DistinctStreams) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(5, 3, 2), derive_seed(derive_seed(5, 3), 2));
}
