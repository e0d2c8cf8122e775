#include <doctest.h>

#include <cmath>

#include "support/test_util.hpp"
#include "topomap/init.hpp"

using namespace topomap;

TEST_CASE("pca of points on the x-axis") {
    Matrix x(5, 2);
    x << -2, 0, -1, 0, 0.5, 0, 1, 0, 3, 0;
    const PcaBasis b = pca(x, 1);
    CHECK(b.directions(0, 0) == doctest::Approx(1.0));
    CHECK(b.directions(0, 1) == doctest::Approx(0.0));
    const double mean = (-2 - 1 + 0.5 + 1 + 3) / 5.0;
    double var = 0;
    for (Index i = 0; i < 5; ++i) var += (x(i, 0) - mean) * (x(i, 0) - mean);
    CHECK(b.stds(0) == doctest::Approx(std::sqrt(var / 5.0)).epsilon(1e-12));
    CHECK(b.mean(0) == doctest::Approx(mean));
}

TEST_CASE("pca of the symmetric cross has equal stds a / sqrt(2)") {
    // Covariance diag(a^2/2, a^2/2) by hand: each coordinate takes a, -a, 0, 0.
    const double a = 3.0;
    Matrix x(4, 2);
    x << a, 0, -a, 0, 0, a, 0, -a;
    const PcaBasis b = pca(x, 1 + 1);
    CHECK(b.stds(0) == doctest::Approx(a / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(b.stds(1) == doctest::Approx(a / std::sqrt(2.0)).epsilon(1e-12));
    // Degenerate eigenvalues: lexicographic order of sign-fixed directions.
    CHECK(b.directions.row(0).isApprox(RowVector::Unit(2, 1)));
    CHECK(b.directions.row(1).isApprox(RowVector::Unit(2, 0)));
}

TEST_CASE("pca of identical points has zero stds") {
    const Matrix x = Matrix::Constant(6, 3, 1.5);
    const PcaBasis b = pca(x, 2);
    CHECK(b.stds.cwiseAbs().maxCoeff() < 1e-12);
    CHECK((b.directions * b.directions.transpose() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pca rejects K out of range") {
    const Matrix x = testing::random_matrix(4, 3, 1);
    CHECK_THROWS_AS(pca(x, 0), std::invalid_argument);
    CHECK_THROWS_AS(pca(x, 4), std::invalid_argument);
    CHECK_THROWS_AS(pca(testing::random_matrix(3, 5, 1), 3), std::invalid_argument);
    CHECK_THROWS_AS(pca(testing::random_matrix(1, 5, 1), 1), std::invalid_argument);
}

TEST_CASE("pca matches an independent Jacobi eigen-decomposition") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Matrix x = testing::random_matrix(12, 4, 100 + seed);
        x.col(1) *= 3.0;
        x.col(3) *= 0.3;
        const PcaBasis b = pca(x, 3);

        const RowVector mu = x.colwise().mean();
        const Matrix c = x.rowwise() - mu;
        const Eigen::MatrixXd cov = (c.transpose() * c) / 12.0;
        auto [vals, vecs] = testing::jacobi_eigen(cov);
        std::vector<Index> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(), [&](Index p, Index q) { return vals(p) > vals(q); });

        CHECK((b.directions * b.directions.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
        for (Index l = 0; l < 3; ++l) {
            Eigen::VectorXd u = vecs.col(order[static_cast<std::size_t>(l)]);
            Index big = 0;
            u.cwiseAbs().maxCoeff(&big);
            if (u(big) < 0) u = -u;
            CHECK(b.stds(l) == doctest::Approx(std::sqrt(vals(order[static_cast<std::size_t>(l)]))).epsilon(1e-10));
            CHECK((b.directions.row(l).transpose() - u).cwiseAbs().maxCoeff() < 1e-8);
            if (l > 0) CHECK(b.stds(l) <= b.stds(l - 1));
        }
    }
}

TEST_CASE("init_refs places the center node at the mean and corners at mean + 2 s u") {
    const Matrix x = testing::random_matrix(30, 3, 9);
    const PcaBasis b = pca(x, 2);
    const LatentGrid g = make_square_grid(3);
    const Matrix w = init_refs(b, g);
    CHECK((w.row(4) - b.mean).cwiseAbs().maxCoeff() < 1e-14);
    // Node 7 is (1, 0).
    const RowVector expected = b.mean + 2.0 * b.stds(0) * b.directions.row(0);
    CHECK((w.row(7) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("init_refs of collinear data stay on the line") {
    Matrix x(10, 3);
    for (Index i = 0; i < 10; ++i) x.row(i) = RowVector::LinSpaced(3, 1.0, 2.0) + (i * 0.37 - 1.1) * RowVector::LinSpaced(3, 0.5, -0.4);
    const Matrix w = pca_init_refs(x, make_square_grid(5));
    const Matrix centered = w.rowwise() - w.row(0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto sv = svd.singularValues();
    CHECK(sv(1) <= 1e-10 * sv(0));
}

TEST_CASE("init_refs is bit-reproducible") {
    const Matrix x = testing::random_matrix(40, 5, 11);
    const LatentGrid g = make_square_grid(6);
    CHECK(pca_init_refs(x, g) == pca_init_refs(x, g));
}

TEST_CASE("per-axis normalization spans [-1, 1] and maps flat axes to 0") {
    Matrix c(4, 3);
    c << 0, 5, 2, 1, 5, 4, 2, 5, 6, 3, 5, 3;
    const Matrix n = normalize_grid_axes(make_grid(c));
    CHECK(n.col(0).minCoeff() == -1.0);
    CHECK(n.col(0).maxCoeff() == 1.0);
    CHECK(n.col(2).minCoeff() == -1.0);
    CHECK(n.col(2).maxCoeff() == 1.0);
    CHECK(n.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("init_assignments") {
    SUBCASE("identical refs give uniform rows") {
        const Matrix x = testing::random_matrix(5, 2, 1);
        const Assignments a = init_assignments(x, Matrix::Constant(4, 2, 0.3), 0.7);
        CHECK((a.weights.array() - 0.25).abs().maxCoeff() < 1e-15);
    }
    SUBCASE("small lambda gives the nearest reference") {
        Matrix x(2, 1), w(3, 1);
        x << 0.1, 0.9;
        w << 0.0, 0.5, 1.0;
        const Assignments a = init_assignments(x, w, 1e-4);
        CHECK(std::abs(a.weights(0, 0) - 1.0) < 1e-9);
        CHECK(std::abs(a.weights(1, 2) - 1.0) < 1e-9);
    }
    SUBCASE("two references, squared distances 0 and 1, lambda 1") {
        Matrix x(1, 1), w(2, 1);
        x << 0.0;
        w << 0.0, 1.0;
        const Assignments a = init_assignments(x, w, 1.0);
        const double e = std::exp(-1.0);
        CHECK(a.weights(0, 0) == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-14));
        CHECK(a.weights(0, 1) == doctest::Approx(e / (1.0 + e)).epsilon(1e-14));
        CHECK(a.weights(0, 0) == doctest::Approx(0.73106).epsilon(1e-5));
    }
    SUBCASE("rows are stochastic even for tiny lambda") {
        const Matrix x = testing::random_matrix(50, 3, 2);
        CHECK(row_stochastic_check(init_assignments(x, pca_init_refs(x, make_square_grid(4)), 1e-3)));
    }
}
