#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gainml/error.hpp"
#include "gainml/kernel.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace gainml;
using testutil::as_matrix;

namespace {
DesignMatrix line(std::vector<double> v) { return DesignMatrix::from_standardized(std::move(v), 1); }
}  // namespace

TEST_CASE("bandwidth is a third of the k-th neighbour distance") {
    const auto x = line({0, 1, 2});
    std::vector<double> q{0.0};
    CHECK(adaptive_bandwidth(q, x, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(adaptive_bandwidth(q, x, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("bandwidth floor when the k-th neighbour coincides with x") {
    const auto x = line({4.0});
    std::vector<double> q{4.0};
    CHECK(adaptive_bandwidth(q, x, 1) == kBandwidthFloor);
    const auto w = weights_at(q, x, 1);
    REQUIRE(w.weights.size() == 1);
    CHECK(w.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("bandwidth scales with the coordinates") {
    std::mt19937_64 rng(3);
    auto pts = testutil::random_points(rng, 30, 3);
    std::vector<double> q{0.1, -0.2, 0.3};
    const double r = adaptive_bandwidth(q, as_matrix(pts), 7);
    for (double c : {0.5, 2.0, 13.0}) {
        auto scaled = pts;
        for (auto& p : scaled)
            for (auto& v : p) v *= c;
        std::vector<double> qs{0.1 * c, -0.2 * c, 0.3 * c};
        CHECK(adaptive_bandwidth(qs, as_matrix(scaled), 7) == doctest::Approx(c * r).epsilon(1e-12));
    }
}

TEST_CASE("weights at x = 0 on {0,1,2}, k = 2") {
    std::vector<double> q{0.0};
    const auto w = weights_at(q, line({0, 1, 2}), 2);
    const double e1 = std::exp(-4.5), e2 = std::exp(-18.0);
    const double z = 1 + e1 + e2;
    CHECK(w.weights[0] == doctest::Approx(0.98901).epsilon(1e-4));
    CHECK(w.weights[1] == doctest::Approx(0.01098).epsilon(1e-3));
    CHECK(w.weights[0] == doctest::Approx(1 / z).epsilon(1e-12));
    CHECK(w.weights[1] == doctest::Approx(e1 / z).epsilon(1e-12));
    CHECK(w.weights[2] == doctest::Approx(e2 / z).epsilon(1e-9));
    CHECK(w.weights[2] < 2e-8);
}

TEST_CASE("two equidistant training points share the weight") {
    std::vector<double> q{0.0};
    const auto w = weights_at(q, line({-1, 1}), 1);
    CHECK(w.weights[0] == doctest::Approx(0.5));
    CHECK(w.weights[1] == doctest::Approx(0.5));
}

TEST_CASE("weight invariants on random data") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 40, d = 1 + rng() % 4;
        auto pts = testutil::random_points(rng, n, d);
        const auto x = as_matrix(pts);
        const std::size_t k = 1 + rng() % n;
        auto q = testutil::random_points(rng, 1, d)[0];
        const auto w = weights_at(q, x, k);
        CHECK(std::accumulate(w.weights.begin(), w.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::all_of(w.weights.begin(), w.weights.end(), [](double v) { return v >= 0.0; }));
    }
}

TEST_CASE("dimension mismatch is rejected") {
    const auto x = line({0, 1, 2});
    std::vector<double> q{0.0, 1.0};
    CHECK_THROWS_AS(weights_at(q, x, 1), Error);
    try {
        weights_at(q, x, 1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("k outside [1, n] is rejected") {
    std::vector<double> q{0.0};
    CHECK_THROWS_AS(adaptive_bandwidth(q, line({0, 1, 2}), 0), Error);
    CHECK_THROWS_AS(adaptive_bandwidth(q, line({0, 1, 2}), 4), Error);
}

TEST_CASE("smoother matrix rows sum to one and match brute force") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng() % 25, d = 1 + rng() % 3, k = 1 + rng() % (n - 1);
        auto pts = testutil::random_points(rng, n, d);
        std::vector<double> y(n);
        for (auto& v : y) v = std::normal_distribution<double>(0, 5)(rng);
        const auto m = smoother_matrix(as_matrix(pts), k);
        for (std::size_t a = 0; a < n; ++a) {
            double row = 0.0, fitted = 0.0;
            for (std::size_t b = 0; b < n; ++b) {
                row += m[a * n + b];
                fitted += m[a * n + b] * y[b];
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(std::abs(fitted - oracle::predict(pts[a], pts, y, k)) < 1e-10);
        }
    }
}

TEST_CASE("two symmetric points give a symmetric smoother") {
    const auto m = smoother_matrix(line({-1, 1}), 1);
    CHECK(m[1] == doctest::Approx(m[2]));
    CHECK(m[0] == doctest::Approx(m[3]));
}

TEST_CASE("GCV on a hand-checked 3-point set") {
    const auto x = line({0, 1, 2});
    std::vector<double> y{1.0, 4.0, 2.0};
    const std::vector<oracle::Point> pts{{0}, {1}, {2}};
    CHECK(gcv(x, y, 2) == doctest::Approx(oracle::gcv(pts, y, 2)).epsilon(1e-12));
    CHECK(gcv(x, y, 3) == doctest::Approx(oracle::gcv(pts, y, 3)).epsilon(1e-12));
    // k = 1 picks x itself: R hits the floor and M = I
    CHECK_THROWS_AS(gcv(x, y, 1), Error);
}

TEST_CASE("GCV of a constant response is zero") {
    std::mt19937_64 rng(8);
    auto pts = testutil::random_points(rng, 20, 2);
    std::vector<double> y(20, 3.5);
    for (std::size_t k : {2, 5, 19}) CHECK(std::abs(gcv(as_matrix(pts), y, k)) < 1e-20);
}

TEST_CASE("GCV accumulation route equals the matrix route") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 10 + rng() % 40, d = 1 + rng() % 4;
        auto pts = testutil::random_points(rng, n, d);
        std::vector<double> y(n);
        for (auto& v : y) v = std::normal_distribution<double>(10, 3)(rng);
        const auto x = as_matrix(pts);
        std::vector<std::size_t> grid;
        for (std::size_t k = 2; k < n; ++k) grid.push_back(k);
        std::vector<std::vector<double>> ys{y};
        const auto scan = gcv_scan(x, ys, grid);
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            const double ref = gcv(x, y, grid[gi]);
            CHECK(std::abs(scan[0][gi].value - ref) <= 1e-10 * std::max(1.0, ref));
        }
    }
}

TEST_CASE("GCV is invariant to rescaling the covariates") {
    std::mt19937_64 rng(2);
    auto pts = testutil::random_points(rng, 25, 2);
    std::vector<double> y(25);
    for (auto& v : y) v = std::normal_distribution<double>()(rng);
    auto scaled = pts;
    for (auto& p : scaled)
        for (auto& v : p) v *= 7.0;
    for (std::size_t k : {3, 8}) {
        CHECK(gcv(as_matrix(pts), y, k) == doctest::Approx(gcv(as_matrix(scaled), y, k)).epsilon(1e-9));
    }
}

TEST_CASE("saturated smoother is flagged") {
    // Points far apart relative to R: each row of M is nearly the identity.
    const auto x = line({0, 1000, 2000, 3000});
    std::vector<double> y{1, 2, 3, 4};
    CHECK_THROWS_AS(gcv(x, y, 1), Error);
    std::vector<std::size_t> grid{1};
    std::vector<std::vector<double>> ys{y};
    CHECK_FALSE(gcv_scan(x, ys, grid)[0][0].admissible);
    CHECK_THROWS_AS(fit(x, y, grid), Error);
}

TEST_CASE("k grid bounds") {
    KGrid g;
    const auto grid = g.for_size(50);
    CHECK(grid.front() == 3);
    CHECK(grid.back() == 49);
    CHECK(g.for_size(500).back() == 100);
    CHECK(g.for_size(3) == std::vector<std::size_t>{2});
}

TEST_CASE("singleton grid forces k") {
    std::mt19937_64 rng(4);
    auto pts = testutil::random_points(rng, 30, 2);
    std::vector<double> y(30);
    for (auto& v : y) v = std::normal_distribution<double>()(rng);
    std::vector<std::size_t> grid{6};
    CHECK(fit(as_matrix(pts), y, grid).k() == 6);
}

TEST_CASE("fit is deterministic and picks the GCV minimiser") {
    std::mt19937_64 rng(9);
    auto pts = testutil::random_points(rng, 60, 2);
    std::vector<double> y(60);
    for (std::size_t i = 0; i < 60; ++i) y[i] = std::sin(pts[i][0]) + 0.1 * std::normal_distribution<double>()(rng);
    const auto x = as_matrix(pts);
    const auto grid = KGrid{}.for_size(60);
    const auto a = fit(x, y, grid), b = fit(x, y, grid);
    CHECK(a.k() == b.k());
    std::size_t best = 0;
    double best_v = INFINITY;
    for (auto k : grid) {
        const double v = oracle::gcv(pts, y, k);
        if (v < best_v) best_v = v, best = k;
    }
    CHECK(a.k() == best);
}

TEST_CASE("GCV choice is close to the best held-out k on a smooth 1-D function") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 6);
    std::normal_distribution<double> noise(0, 0.2);
    auto f = [](double t) { return std::sin(t) + 0.3 * t; };
    std::vector<double> xs(200), ys(200), xt(2000), yt(2000);
    for (std::size_t i = 0; i < 200; ++i) xs[i] = u(rng), ys[i] = f(xs[i]) + noise(rng);
    for (std::size_t i = 0; i < 2000; ++i) xt[i] = u(rng), yt[i] = f(xt[i]) + noise(rng);
    const auto x = line(xs);
    std::vector<std::size_t> grid;
    for (std::size_t k = 2; k <= 20; ++k) grid.push_back(k);
    auto heldout = [&](std::size_t k) {
        std::vector<std::size_t> g{k};
        const auto m = fit(x, ys, g);
        const auto p = m.predict_rows(xt);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - yt[i]) * (p[i] - yt[i]);
        return std::sqrt(s / p.size());
    };
    double best = INFINITY;
    for (auto k : grid) best = std::min(best, heldout(k));
    const auto chosen = fit(x, ys, grid);
    CHECK(heldout(chosen.k()) <= 1.05 * best);
}

TEST_CASE("predictions: constant response, convex hull, concentration") {
    std::mt19937_64 rng(12);
    auto pts = testutil::random_points(rng, 40, 3);
    const auto x = as_matrix(pts);
    std::vector<double> c(40, 7.0);
    std::vector<std::size_t> grid{5};
    const KernelModel constant = fit(x, c, grid);
    for (int t = 0; t < 10; ++t) {
        CHECK(constant.predict(testutil::random_points(rng, 1, 3)[0]) == doctest::Approx(7.0).epsilon(1e-12));
    }
    std::vector<double> y(40);
    for (auto& v : y) v = std::normal_distribution<double>(0, 10)(rng);
    const auto m = fit(x, y, grid);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    for (int t = 0; t < 50; ++t) {
        const double p = m.predict(testutil::random_points(rng, 1, 3)[0]);
        CHECK(p <= *hi + 1e-12);
        CHECK(p >= *lo - 1e-12);
    }

    const auto spread = line({0, 100, 200, 300});
    std::vector<double> sy{5, -3, 8, 1};
    std::vector<std::size_t> g1{1};
    const KernelModel near(std::make_shared<const DesignMatrix>(spread), sy, 1, g1, {});
    std::vector<double> q{100.0};
    CHECK(std::abs(near.predict(q) - (-3.0)) < 1e-6);
    CHECK(std::abs(oracle::predict({100.0}, {{0}, {100}, {200}, {300}}, sy, 1) - (-3.0)) < 1e-6);
}

TEST_CASE("predictions match brute force on random sets") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng() % 45, d = 1 + rng() % 4, k = 2 + rng() % (n - 2);
        auto pts = testutil::random_points(rng, n, d);
        std::vector<double> y(n);
        for (auto& v : y) v = std::normal_distribution<double>(50, 20)(rng);
        std::vector<std::size_t> grid{k};
        const auto m = fit(as_matrix(pts), y, grid);
        for (int q = 0; q < 5; ++q) {
            const auto p = testutil::random_points(rng, 1, d)[0];
            CHECK(std::abs(m.predict(p) - oracle::predict(p, pts, y, k)) < 1e-10);
        }
    }
}

TEST_CASE("standardization uses sample statistics and rejects constant columns") {
    std::vector<double> raw{1, 10, 2, 10, 3, 10};
    CHECK_THROWS_AS(DesignMatrix::standardize(raw, 2), Error);
    std::vector<double> ok{1, 5, 2, 7, 3, 12};
    const auto m = DesignMatrix::standardize(ok, 2);
    CHECK(m.standardization().mean[0] == doctest::Approx(2.0));
    CHECK(m.standardization().stdev[0] == doctest::Approx(1.0));
    const auto z = oracle::standardize({{1, 5}, {2, 7}, {3, 12}});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(m.row(i)[0] == doctest::Approx(z[i][0]));
        CHECK(m.row(i)[1] == doctest::Approx(z[i][1]));
    }
    std::vector<double> one{4.0, 5.0};
    CHECK_THROWS_AS(DesignMatrix::standardize(one, 2), Error);
}

TEST_CASE("gcv trace csv marks the chosen k") {
    std::mt19937_64 rng(1);
    auto pts = testutil::random_points(rng, 12, 1);
    std::vector<double> y(12);
    for (auto& v : y) v = std::normal_distribution<double>()(rng);
    std::vector<std::size_t> grid{2, 3, 4};
    const auto m = fit(as_matrix(pts), y, grid);
    std::ostringstream out;
    write_gcv_trace_csv(m, out);
    const auto text = out.str();
    CHECK(text.rfind("k,gcv,admissible,selected\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.find("," + std::to_string(1) + "\n") != std::string::npos);
}
