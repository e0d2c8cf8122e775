#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/test_util.hpp"
#include "topomap/metrics.hpp"

using namespace topomap;
using namespace topomap::metrics;

namespace {

Matrix rotate2(const Matrix& x, double angle) {
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return x * r.transpose();
}

}  // namespace

TEST_CASE("rank table tie rule") {
    Matrix x(3, 1);
    x << 0, 1, 2;
    const RankTable t = rank_table(x);
    CHECK(t.at(1, 0) == 1);
    CHECK(t.at(1, 2) == 2);
    CHECK(t.at(0, 1) == 1);
    CHECK(t.at(0, 2) == 2);
    CHECK(t.at(1, 1) == 0);

    Matrix dup(4, 2);
    dup << 0, 0, 5, 5, 5, 5, 5, 5;
    const RankTable d = rank_table(dup);
    CHECK(d.at(0, 1) == 1);
    CHECK(d.at(0, 2) == 2);
    CHECK(d.at(0, 3) == 3);
    CHECK(d.at(3, 1) == 1);
    CHECK(d.at(3, 2) == 2);
    CHECK(d.at(3, 0) == 3);
}

TEST_CASE("rank table rows match a full sort") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix x = testing::random_matrix(6, 3, seed);
        const RankTable t = rank_table(x);
        for (Index i = 0; i < 6; ++i) {
            std::vector<std::pair<double, Index>> v;
            for (Index j = 0; j < 6; ++j) {
                if (j != i) v.emplace_back((x.row(i) - x.row(j)).squaredNorm(), j);
            }
            std::sort(v.begin(), v.end());
            for (std::size_t r = 0; r < v.size(); ++r) CHECK(t.at(i, v[r].second) == static_cast<int>(r + 1));
        }
    }
}

TEST_CASE("identity and axis-permuted embeddings score 1") {
    const Matrix x = testing::random_matrix(40, 3, 1);
    CHECK(trustworthiness(x, x, 5) == 1.0);
    CHECK(continuity(x, x, 5) == 1.0);
    Matrix p(40, 3);
    p << x.col(2), x.col(0), x.col(1);
    CHECK(trustworthiness(x, p, 5) == 1.0);
    CHECK(continuity(x, p, 5) == 1.0);
}

TEST_CASE("five points with one swapped neighbor pair") {
    Matrix data(5, 1), latent(5, 1);
    data << 0, 1, 2, 3, 4;
    latent << 0, 3, 2, 1, 4;
    for (int k : {1, 2}) {
        const double tw = trustworthiness(data, latent, k);
        CHECK(tw == testing::brute_trustworthiness(data, latent, k));
        CHECK(continuity(data, latent, k) == testing::brute_trustworthiness(latent, data, k));
        CHECK(tw < 1.0);
    }
    // k = 1 by hand, ties to the smaller index: the latent nearest neighbors
    // of points 0..4 are 3, 2, 1, 0, 1 with data ranks 3, 2, 1, 4, 3.
    CHECK(trustworthiness(data, latent, 1) == doctest::Approx(1.0 - 2.0 / 30.0 * 8.0));
}

TEST_CASE("random six-point instances match the brute-force oracle exactly") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Matrix data = testing::random_matrix(6, 3, 10000 + seed);
        const Matrix latent = testing::random_matrix(6, 2, 20000 + seed);
        for (int k : {1, 2}) {
            CHECK(trustworthiness(data, latent, k) == testing::brute_trustworthiness(data, latent, k));
            CHECK(continuity(data, latent, k) == testing::brute_trustworthiness(latent, data, k));
            CHECK(continuity(data, latent, k) == trustworthiness(latent, data, k));
        }
    }
}

TEST_CASE("TW and CN are invariant to rigid motion and uniform scaling") {
    const Matrix data = testing::random_matrix(60, 2, 5);
    const Matrix latent = testing::random_matrix(60, 2, 6);
    const double tw = trustworthiness(data, latent, 5);
    const double cn = continuity(data, latent, 5);
    const Matrix moved = (rotate2(latent, 0.7).rowwise() + RowVector::Constant(2, 3.0)) * 4.0;
    CHECK(trustworthiness(data, moved, 5) == tw);
    CHECK(continuity(data, moved, 5) == cn);
    const Matrix data_moved = rotate2(data, -1.3) * 0.25;
    CHECK(trustworthiness(data_moved, latent, 5) == tw);
    CHECK(continuity(data_moved, latent, 5) == cn);
}

TEST_CASE("neighbor count must satisfy 1 <= k < N/2") {
    const Matrix x = testing::random_matrix(10, 2, 1);
    CHECK_THROWS_AS(trustworthiness(x, x, 0), std::invalid_argument);
    CHECK_THROWS_AS(trustworthiness(x, x, 5), std::invalid_argument);
    CHECK_NOTHROW(trustworthiness(x, x, 4));
    CHECK_THROWS_AS(continuity(x, testing::random_matrix(9, 2, 1), 2), std::invalid_argument);
}

TEST_CASE("quantization error is the mean squared BMU distance") {
    Matrix x(2, 1), w(1, 1);
    x << 0, 4;
    w << 2;
    CHECK(quantization_error(x, w) == 4.0);
    const Matrix pts = testing::random_matrix(10, 3, 2);
    Matrix refs(12, 3);
    refs << pts, testing::random_matrix(2, 3, 3);
    CHECK(quantization_error(pts, refs) == 0.0);
}

TEST_CASE("quantization error is invariant under rigid motion") {
    const Matrix x = testing::random_matrix(30, 2, 8);
    const Matrix w = testing::random_matrix(7, 2, 9);
    const double qe = quantization_error(x, w);
    const RowVector shift = RowVector::Constant(2, -2.5);
    CHECK(quantization_error(rotate2(x, 0.4).rowwise() + shift, rotate2(w, 0.4).rowwise() + shift) ==
          doctest::Approx(qe).epsilon(1e-12));
}

TEST_CASE("tuning score is the mean of TW and CN") {
    CHECK(tuning_score(1.0, 1.0) == 1.0);
    CHECK(tuning_score(0.98, 0.96) == doctest::Approx(0.97).epsilon(1e-15));
    CHECK(tuning_score(0.9864, 0.9761) == doctest::Approx(0.98125).epsilon(1e-15));
    CHECK(kDefaultNeighbors == 5);
}
