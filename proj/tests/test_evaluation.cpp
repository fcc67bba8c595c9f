#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "gainml/error.hpp"
#include "gainml/evaluation.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace gainml;

namespace {

PredictionSet preds(std::vector<double> y, std::vector<double> yhat, std::vector<double> power = {}) {
    PredictionSet out;
    for (std::size_t i = 0; i < y.size(); ++i) {
        out.push_back({i, y[i], yhat[i], power.empty() ? 50.0 : power[i]});
    }
    return out;
}

BiasCurve curve(std::map<std::int64_t, double> v, double width = 100.0) {
    BiasCurve c{width, {}};
    for (auto [id, val] : v) c.bins.push_back({id, bin_midpoint(id, width), val, 10});
    return c;
}

AlignedDataset windy(std::size_t n_p1, std::uint64_t seed, double ctrb_shift = 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(3, 14);
    std::normal_distribution<double> noise(0, 10);
    return testutil::make_dataset(n_p1, 50, [&](std::size_t i, AlignedRecord& r) {
        r.wind_speed = u(rng);
        r.wind_speed_delta = noise(rng) / 10;
        r.neutral_power = 2000.0 / (1 + std::exp(-0.9 * (r.wind_speed - 8.5))) + noise(rng);
        r.density = 1.2 + 0.01 * noise(rng);
        r.direction_sin = std::sin(0.1 * i);
        r.direction_cos = std::cos(0.1 * i);
        r.y_ref = 2000.0 / (1 + std::exp(-0.9 * (r.wind_speed - 8.5))) + noise(rng);
        r.y_ctrb = r.y_ref + ctrb_shift + noise(rng);
    });
}

}  // namespace

TEST_CASE("fold sizes") {
    const auto plan = make_folds(100, 1);
    for (int f = 1; f <= 5; ++f) CHECK(plan.test_positions(f).size() == 20);
    const auto seven = make_folds(7, 3);
    std::multiset<std::size_t> sizes;
    for (int f = 1; f <= 5; ++f) sizes.insert(seven.test_positions(f).size());
    CHECK(sizes == std::multiset<std::size_t>{1, 1, 1, 2, 2});
    CHECK_THROWS_AS(make_folds(4, 1), Error);
}

TEST_CASE("folds partition the positions and are seeded") {
    for (std::size_t n : {5, 13, 250}) {
        const auto plan = make_folds(n, 77);
        std::vector<int> seen(n, 0);
        for (int f = 1; f <= 5; ++f) {
            const auto test = plan.test_positions(f);
            const auto train = plan.train_positions(f);
            CHECK(test.size() + train.size() == n);
            for (auto p : test) ++seen[p];
            std::vector<std::size_t> both = test;
            both.insert(both.end(), train.begin(), train.end());
            std::sort(both.begin(), both.end());
            CHECK(std::adjacent_find(both.begin(), both.end()) == both.end());
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        CHECK(make_folds(n, 77).fold_of == plan.fold_of);
    }
    CHECK(make_folds(250, 1).fold_of != make_folds(250, 2).fold_of);
}

TEST_CASE("rmse") {
    CHECK(rmse(preds({1, 2}, {1, 2})) == 0.0);
    CHECK(rmse(preds({0, 0}, {3, -4})) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-9));
    CHECK(rmse(preds({10, 20, 5}, {12, 17, 6})) == doctest::Approx(rmse(preds({110, 120, 105}, {112, 117, 106}))));
    CHECK_THROWS_AS(rmse({}), Error);
}

TEST_CASE("relative bias") {
    CHECK(relative_bias(preds({4, 5}, {4, 5})) == 0.0);
    CHECK(relative_bias(preds({9, 9}, {10, 10})) == doctest::Approx(0.10));
    try {
        relative_bias(preds({1, 2}, {0, 0}));
        FAIL("expected DegenerateDenominator");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateDenominator);
    }
}

TEST_CASE("bin arithmetic") {
    CHECK(bin_index(250.0, 100.0) == 2);
    CHECK(bin_midpoint(2, 100.0) == 250.0);
    CHECK(bin_index(0.0, 100.0) == 0);
    CHECK(bin_index(-30.0, 100.0) == -1);
    CHECK(bin_index(99.999, 100.0) == 0);
}

TEST_CASE("bias curve medians") {
    auto odd = bias_curve(preds({1, 2, 3}, {0, 0, 0}), 100.0, 1);
    REQUIRE(odd.bins.size() == 1);
    CHECK(odd.bins[0].value == 2.0);
    CHECK(odd.bins[0].count == 3);
    auto even = bias_curve(preds({1, 2, 3, 10}, {0, 0, 0, 0}), 100.0, 1);
    CHECK(even.bins[0].value == 2.5);
    // min_bin_count drops sparse bins
    CHECK(bias_curve(preds({1, 2, 3, 10}, {0, 0, 0, 0}), 100.0, 5).bins.empty());
}

TEST_CASE("bias curve agrees with a per-bin oracle and resists outliers") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> power(0, 2000);
    std::normal_distribution<double> g(0, 5);
    PredictionSet ps;
    std::map<std::int64_t, std::vector<double>> bins;
    for (std::size_t i = 0; i < 3000; ++i) {
        const double p = power(rng), y = g(rng), yhat = g(rng);
        ps.push_back({i, y, yhat, p});
        bins[static_cast<std::int64_t>(std::floor(p / 100.0))].push_back(y - yhat);
    }
    const auto c = bias_curve(ps);
    REQUIRE(c.bins.size() == bins.size());
    for (const auto& b : c.bins) CHECK(b.value == doctest::Approx(oracle::median(bins[b.bin_id])));

    ps[0].y_true += 1e9;
    const auto robust = bias_curve(ps);
    const auto id = bin_index(ps[0].bin_power, 100.0);
    CHECK(std::abs(robust.find(id)->value - c.find(id)->value) < 5.0);
}

TEST_CASE("average curves honours fold presence") {
    std::vector<BiasCurve> folds{curve({{1, 1.0}, {2, 5.0}}), curve({{1, 3.0}}), curve({{1, 2.0}, {2, 7.0}}),
                                 curve({{1, 2.0}, {3, 1.0}}), curve({{1, 2.0}})};
    const auto avg = average_curves(folds, 3);
    REQUIRE(avg.bins.size() == 1);
    CHECK(avg.bins[0].bin_id == 1);
    CHECK(avg.bins[0].value == doctest::Approx(2.0));
    CHECK(avg.bins[0].count == 50);
    CHECK(average_curves(folds, 2).bins.size() == 2);
}

TEST_CASE("curve diff") {
    const auto a = curve({{1, 5.0}, {2, 3.0}});
    CHECK(curve_diff(a, a).bins.size() == 2);
    for (const auto& b : curve_diff(a, a).bins) CHECK(b.value == 0.0);
    const auto d = curve_diff(curve({{1, 5.0}}), curve({{1, 2.0}}));
    REQUIRE(d.bins.size() == 1);
    CHECK(d.bins[0].value == 3.0);
    CHECK(curve_diff(curve({{1, 5.0}}), curve({{4, 2.0}})).bins.empty());
    CHECK_THROWS_AS(curve_diff(curve({{1, 5.0}}), curve({{1, 2.0}}, 50.0)), Error);

    const auto x = curve({{0, 1.5}, {3, -2.0}, {4, 8.0}}), y = curve({{3, 1.0}, {4, 2.0}, {6, 0.0}});
    const auto xy = curve_diff(x, y), yx = curve_diff(y, x);
    REQUIRE(xy.bins.size() == yx.bins.size());
    for (std::size_t i = 0; i < xy.bins.size(); ++i) CHECK(xy.bins[i].value == -yx.bins[i].value);
}

TEST_CASE("constant response gives zero CV metrics") {
    auto data = windy(200, 5);
    for (auto& r : data.records) r.y_ref = 800.0;
    const auto folds = make_folds(data.count(Period::P1), 1);
    std::vector<Covariate> vars{Covariate::WindSpeed, Covariate::NeutralPower};
    const auto m = cv_evaluate(data, Target::Ref, vars, folds);
    CHECK(std::abs(m.cv_rmse) < 1e-9);
    CHECK(std::abs(m.cv_bias) < 1e-12);
    for (const auto& b : m.cv_bias_curve.bins) CHECK(std::abs(b.value) < 1e-9);
}

TEST_CASE("cv metrics aggregate the folds and are reproducible") {
    const auto data = windy(300, 6);
    const auto folds = make_folds(data.count(Period::P1), 9);
    std::vector<Covariate> vars{Covariate::WindSpeed, Covariate::Density};
    const auto m = cv_evaluate(data, Target::Ref, vars, folds);
    REQUIRE(m.per_fold.size() == 5);
    double mean = 0.0, bias = 0.0;
    std::size_t n = 0;
    for (const auto& f : m.per_fold) mean += f.rmse / 5, bias += f.bias / 5, n += f.predictions.size();
    CHECK(std::abs(m.cv_rmse - mean) < 1e-12);
    CHECK(std::abs(m.cv_bias - bias) < 1e-12);
    CHECK(n == 300);
    const auto again = cv_evaluate(data, Target::Ref, vars, folds);
    CHECK(again.cv_rmse == m.cv_rmse);
    CHECK(again.cv_bias == m.cv_bias);
    REQUIRE(again.cv_bias_curve.bins.size() == m.cv_bias_curve.bins.size());
    for (std::size_t i = 0; i < m.cv_bias_curve.bins.size(); ++i) {
        CHECK(again.cv_bias_curve.bins[i].value == m.cv_bias_curve.bins[i].value);
    }
}

TEST_CASE("fold predictions match a brute-force fit on the training positions") {
    const auto data = windy(60, 8);
    const auto folds = make_folds(60, 2);
    std::vector<Covariate> vars{Covariate::WindSpeed, Covariate::NeutralPower};
    EvaluationOptions opt;
    opt.min_bin_count = 1;
    const auto m = cv_evaluate(data, Target::Ref, vars, folds, opt);
    const auto p1 = data.indices(Period::P1);
    const auto& fm = m.per_fold[0];
    std::vector<oracle::Point> raw;
    std::vector<double> y;
    for (auto pos : folds.train_positions(fm.fold)) {
        const auto& r = data.records[p1[pos]];
        raw.push_back({r.wind_speed, r.neutral_power});
        y.push_back(r.y_ref);
    }
    // standardize with training statistics, including the queries
    std::vector<double> mean(2, 0.0), sd(2, 0.0);
    for (const auto& p : raw)
        for (int c = 0; c < 2; ++c) mean[c] += p[c] / raw.size();
    for (const auto& p : raw)
        for (int c = 0; c < 2; ++c) sd[c] += (p[c] - mean[c]) * (p[c] - mean[c]) / (raw.size() - 1);
    for (auto& s : sd) s = std::sqrt(s);
    auto z = [&](oracle::Point p) {
        for (int c = 0; c < 2; ++c) p[c] = (p[c] - mean[c]) / sd[c];
        return p;
    };
    std::vector<oracle::Point> train;
    for (const auto& p : raw) train.push_back(z(p));
    for (const auto& pr : fm.predictions) {
        const auto& r = data.records[pr.index];
        CHECK(std::abs(pr.y_hat - oracle::predict(z({r.wind_speed, r.neutral_power}), train, y, fm.k)) < 1e-9);
        CHECK(pr.bin_power == r.y_ctrb);
    }
}

TEST_CASE("paired evaluation equals two single evaluations") {
    const auto data = windy(250, 10, 40.0);
    const auto folds = make_folds(250, 4);
    std::vector<Covariate> vars{Covariate::WindSpeed, Covariate::NeutralPower};
    const auto paired = cv_evaluate_paired(data, vars, folds);
    const auto ref = cv_evaluate(data, Target::Ref, vars, folds);
    const auto ctrb = cv_evaluate(data, Target::CtrB, vars, folds);
    CHECK(paired.ref.cv_rmse == ref.cv_rmse);
    CHECK(paired.ctrb.cv_rmse == ctrb.cv_rmse);
    const auto diff = curve_diff(ref.cv_bias_curve, ctrb.cv_bias_curve);
    REQUIRE(diff.bins.size() == paired.cv_diff.bins.size());
    for (std::size_t i = 0; i < diff.bins.size(); ++i) CHECK(diff.bins[i].value == paired.cv_diff.bins[i].value);
}

TEST_CASE("curve csv") {
    std::ostringstream out;
    write_curve_csv(curve({{2, 1.5}}), "cv", out);
    CHECK(out.str() == "bin_mid,value,count,fold\n250,1.5,10,cv\n");
}
