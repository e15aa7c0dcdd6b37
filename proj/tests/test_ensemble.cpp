#include <gtest/gtest.h>

#include "support.hpp"
#include "udisc/ensemble.hpp"

using namespace udisc;
using namespace udisc::testing;

TEST(Ensemble, OrthonormalBasisGivesIdentityGram) {
    const StateEnsemble e(CMatrix(CMatrix::Identity(3, 3)), vec({1.0 / 3, 1.0 / 3, 1.0 / 3}));
    const GramMatrix X = gram(e);
    EXPECT_LT((X.entries() - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(X.sigma_min(), 1.0, 1e-15);
}

TEST(Ensemble, TableStatesValidate) {
    const StateEnsemble e = table_ensemble({0.05, 0.35, 0.60});
    EXPECT_EQ(e.size(), 3);
    EXPECT_EQ(e.dim(), 3);
    EXPECT_NEAR(e.priors().sum(), 1.0, 1e-15);
}

TEST(Ensemble, TableGramOverlapsMatchHandValues) {
    const GramMatrix X = table_gram();
    EXPECT_NEAR(std::abs(X(0, 1)), 1.0 / std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(std::abs(X(0, 2)), 2.0 / std::sqrt(17.0), 1e-15);
    EXPECT_NEAR(std::abs(X(1, 2)), 6.0 / std::sqrt(85.0), 1e-15);
}

TEST(Ensemble, DuplicateStatesAreDependent) {
    CVector v(2);
    v << 0.6, 0.8;
    EXPECT_THROW(validate({v, v}, vec({0.5, 0.5})), LinearlyDependent);
}

TEST(Ensemble, RealPairGram) {
    const double s = 0.37;
    const GramMatrix X = gram(StateEnsemble(pair_states(s), vec({0.5, 0.5})));
    EXPECT_NEAR(X(0, 1).real(), s, 1e-15);
    EXPECT_NEAR(X(0, 1).imag(), 0.0, 1e-15);
    EXPECT_NEAR(X.eigenvalues()(0), 1.0 + s, 1e-14);
    EXPECT_NEAR(X.eigenvalues()(1), 1.0 - s, 1e-14);
}

TEST(Ensemble, RejectsMalformedInput) {
    CVector a(3), b(2), big(3);
    a << 1, 0, 0;
    b << 0, 1;
    big << 2, 0, 0;
    CVector c(3);
    c << 0, 1, 0;
    EXPECT_THROW(validate({a, b}, vec({0.5, 0.5})), DimensionMismatch);
    EXPECT_THROW(validate({a}, vec({1.0})), DimensionMismatch);
    EXPECT_THROW(validate({big, c}, vec({0.5, 0.5})), NotNormalized);
    EXPECT_THROW(validate({a, c}, vec({0.6, 0.3})), PriorsInvalid);
    EXPECT_THROW(validate({a, c}, vec({1.2, -0.2})), PriorsInvalid);
    EXPECT_THROW(validate({a, c}, vec({0.5, 0.25, 0.25})), DimensionMismatch);

    CVector e1(1), e2(1);
    e1 << 1;
    e2 << 1;
    EXPECT_THROW(validate({e1, e2}, vec({0.5, 0.5})), DimensionMismatch);
}

TEST(Ensemble, NearlyNormalizedStatesAreRenormalized) {
    CVector a(2), b(2);
    a << 1.0 + 5e-7, 0.0;
    b << 0.0, 1.0 - 5e-7;
    const StateEnsemble e = validate({a, b}, vec({0.5, 0.5}));
    EXPECT_NEAR(e.state(0).norm(), 1.0, 1e-15);
    EXPECT_NEAR(e.state(1).norm(), 1.0, 1e-15);
}

TEST(Ensemble, PriorsErrorNamesField) {
    try {
        table_ensemble({0.3, 0.35, 0.25});
        FAIL() << "expected PriorsInvalid";
    } catch (const PriorsInvalid& err) {
        EXPECT_NE(std::string(err.what()).find("priors"), std::string::npos);
    }
}

TEST(Ensemble, DualOfOrthonormalIsItself) {
    const CMatrix phi = CMatrix::Identity(3, 3);
    const StateEnsemble e(phi, vec({0.2, 0.3, 0.5}));
    EXPECT_LT((dual_states(e).columns - phi).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ensemble, DualOfTableStatesIsBiorthogonal) {
    const StateEnsemble e = table_ensemble({0.05, 0.35, 0.60});
    EXPECT_LT(dual_states(e).biorthogonality_residual(e), 1e-12);
}

TEST(Ensemble, DualOfRealPairByHand) {
    const double s = 0.42;
    const CMatrix phi = pair_states(s);
    const StateEnsemble e(phi, vec({0.5, 0.5}));
    const CVector expected = (phi.col(0) - s * phi.col(1)) / (1.0 - s * s);
    EXPECT_LT((dual_states(e).columns.col(0) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ensemble, RandomGramInvariants) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 2 + trial % 5;
        const Index d = n + trial % 3;
        const StateEnsemble e = random_ensemble(rng, n, d);
        const GramMatrix X = gram(e);
        EXPECT_LT((X.entries() - X.entries().adjoint()).cwiseAbs().maxCoeff(), 1e-15);
        for (Index i = 0; i < n; ++i) EXPECT_EQ(X(i, i), cplx(1.0, 0.0));
        EXPECT_GT(X.sigma_min(), 0.0);
        if (X.sigma_min() > 1e-3) EXPECT_LT(dual_states(e).biorthogonality_residual(e), 1e-10);
        EXPECT_LT((X.entries() * X.inverse() - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Ensemble, PhaseCovarianceOfGram) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        StateEnsemble e = random_ensemble(rng, 4, 5);
        CMatrix phi = e.states();
        const double chi = 0.3 + trial * 0.1;
        const Index i = trial % 4;
        phi.col(i) *= std::polar(1.0, chi);
        const GramMatrix X = gram(e);
        const GramMatrix Y = gram(StateEnsemble(phi, e.priors()));
        EXPECT_LT((X.entries().cwiseAbs() - Y.entries().cwiseAbs()).cwiseAbs().maxCoeff(), 1e-14);
        for (Index j = 0; j < 4; ++j) {
            if (j == i) continue;
            EXPECT_LT(std::abs(Y(i, j) - std::polar(1.0, -chi) * X(i, j)), 1e-14);
        }
    }
}

TEST(Ensemble, GramFromMatrixValidation) {
    CMatrix X = CMatrix::Identity(2, 2);
    X(0, 1) = 0.5;
    EXPECT_THROW(GramMatrix::from_matrix(X), DimensionMismatch);
    X(1, 0) = 0.5;
    X(1, 1) = 2.0;
    EXPECT_THROW(GramMatrix::from_matrix(X), NotNormalized);
    X(1, 1) = 1.0;
    X(0, 1) = X(1, 0) = 1.0;
    EXPECT_THROW(GramMatrix::from_matrix(X), LinearlyDependent);
}
