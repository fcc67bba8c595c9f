#include "gainml/kernel.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>

#include "gainml/error.hpp"

namespace gainml {

namespace {

const double kInvSqrtTwoPi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double bandwidth_from_squared(double kth_squared_distance) {
    return std::max(std::sqrt(kth_squared_distance) / kBandwidthDivisor, kBandwidthFloor);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return s;
}

void check_point(std::span<const double> x, const DesignMatrix& training_x) {
    if (x.size() != training_x.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "point has " + std::to_string(x.size()) +
                                                      " coordinates, model expects " +
                                                      std::to_string(training_x.cols()));
    }
}

void check_k(std::size_t k, std::size_t n) {
    if (k < 1 || k > n) {
        throw Error(ErrorCode::InvalidArgument,
                    "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
}

/// Training rows near one evaluation point, sorted by squared distance. Only
/// rows that can carry weight for some k <= k_max are kept.
struct Neighborhood {
    std::vector<double> all_d2;
    std::vector<double> scratch;
    std::vector<std::pair<double, std::uint32_t>> order;
    Eigen::ArrayXd d2;
    Eigen::ArrayXd weights;

    void collect(const DesignMatrix& training_x, std::span<const double> x, std::size_t k_max) {
        const std::size_t n = training_x.rows();
        all_d2.resize(n);
        for (std::size_t i = 0; i < n; ++i) all_d2[i] = squared_distance(x, training_x.row(i));
        scratch.assign(all_d2.begin(), all_d2.end());
        std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k_max - 1), scratch.end());
        const double r = bandwidth_from_squared(scratch[k_max - 1]);
        const double cutoff2 = (kKernelCutoff * r) * (kKernelCutoff * r);
        order.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (all_d2[i] <= cutoff2) order.emplace_back(all_d2[i], static_cast<std::uint32_t>(i));
        }
        std::sort(order.begin(), order.end());
        d2.resize(static_cast<Eigen::Index>(order.size()));
        for (std::size_t j = 0; j < order.size(); ++j) d2[static_cast<Eigen::Index>(j)] = order[j].first;
        weights.resize(d2.size());
    }

    /// Fills weights.head(m) with unnormalized kernel values for neighbour
    /// count k and returns m (the number of rows within the cutoff).
    Eigen::Index evaluate(std::size_t k) {
        const double r = bandwidth_from_squared(d2[static_cast<Eigen::Index>(k - 1)]);
        const double cutoff2 = (kKernelCutoff * r) * (kKernelCutoff * r);
        const auto m = static_cast<Eigen::Index>(
            std::upper_bound(d2.data(), d2.data() + d2.size(), cutoff2) - d2.data());
        const double scale = -0.5 / (r * r);
        weights.head(m) = (d2.head(m) * scale).exp();
        return m;
    }
};

}  // namespace

double gaussian_kernel(double a) { return std::exp(-0.5 * a * a) * kInvSqrtTwoPi; }

DesignMatrix DesignMatrix::standardize(std::vector<double> raw, std::size_t cols, std::vector<std::string> names) {
    if (cols == 0 || raw.size() % cols != 0) throw Error(ErrorCode::InvalidArgument, "ragged design matrix");
    const std::size_t n = raw.size() / cols;
    if (n < 2) throw Error(ErrorCode::TooFewRecords, "design matrix needs at least 2 rows");

    DesignMatrix m;
    m.cols_ = cols;
    m.names_ = std::move(names);
    m.stats_.mean.assign(cols, 0.0);
    m.stats_.stdev.assign(cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += raw[i * cols + c];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = raw[i * cols + c] - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            const std::string label = c < m.names_.size() ? m.names_[c] : std::to_string(c);
            throw Error(ErrorCode::ConstantColumn, "covariate column '" + label + "' is constant");
        }
        m.stats_.mean[c] = mean;
        m.stats_.stdev[c] = sd;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < cols; ++c) {
            raw[i * cols + c] = (raw[i * cols + c] - m.stats_.mean[c]) / m.stats_.stdev[c];
        }
    }
    m.values_ = std::move(raw);
    return m;
}

DesignMatrix DesignMatrix::from_standardized(std::vector<double> values, std::size_t cols,
                                             std::vector<std::string> names) {
    if (cols == 0 || values.size() % cols != 0 || values.empty()) {
        throw Error(ErrorCode::InvalidArgument, "ragged or empty design matrix");
    }
    DesignMatrix m;
    m.cols_ = cols;
    m.names_ = std::move(names);
    m.stats_.mean.assign(cols, 0.0);
    m.stats_.stdev.assign(cols, 1.0);
    m.values_ = std::move(values);
    return m;
}

std::vector<double> DesignMatrix::transform(std::span<const double> raw_rows) const {
    if (raw_rows.size() % cols_ != 0) throw Error(ErrorCode::DimensionMismatch, "ragged input rows");
    std::vector<double> out(raw_rows.begin(), raw_rows.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t c = i % cols_;
        out[i] = (out[i] - stats_.mean[c]) / stats_.stdev[c];
    }
    return out;
}

double adaptive_bandwidth(std::span<const double> x, const DesignMatrix& training_x, std::size_t k) {
    check_point(x, training_x);
    const std::size_t n = training_x.rows();
    check_k(k, n);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x, training_x.row(i));
    std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(k - 1), d2.end());
    return bandwidth_from_squared(d2[k - 1]);
}

WeightVector weights_at(std::span<const double> x, const DesignMatrix& training_x, std::size_t k) {
    const double r = adaptive_bandwidth(x, training_x, k);
    const std::size_t n = training_x.rows();
    WeightVector out{std::vector<double>(n), std::vector<double>(x.begin(), x.end())};
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::sqrt(squared_distance(x, training_x.row(i))) / r;
        out.weights[i] = gaussian_kernel(a);
        total += out.weights[i];
    }
    for (auto& w : out.weights) w /= total;
    return out;
}

std::vector<double> smoother_matrix(const DesignMatrix& training_x, std::size_t k) {
    const std::size_t n = training_x.rows();
    if (n < 2) throw Error(ErrorCode::TooFewRecords, "smoother matrix needs at least 2 rows");
    std::vector<double> m(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        auto w = weights_at(training_x.row(a), training_x, k);
        std::copy(w.weights.begin(), w.weights.end(), m.begin() + static_cast<std::ptrdiff_t>(a * n));
    }
    return m;
}

double gcv(const DesignMatrix& training_x, std::span<const double> y, std::size_t k) {
    const std::size_t n = training_x.rows();
    if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "response length differs from design rows");
    const auto m = smoother_matrix(training_x, k);
    double rss = 0.0;
    double trace = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        double fitted = 0.0;
        for (std::size_t b = 0; b < n; ++b) fitted += m[a * n + b] * y[b];
        const double r = y[a] - fitted;
        rss += r * r;
        trace += 1.0 - m[a * n + a];
    }
    const double nn = static_cast<double>(n);
    if (trace <= kTraceEpsilon * nn) {
        throw Error(ErrorCode::SaturatedSmoother, "tr(I - M) vanishes at k = " + std::to_string(k));
    }
    const double denom = trace / nn;
    return (rss / nn) / (denom * denom);
}

std::vector<std::vector<GcvEntry>> gcv_scan(const DesignMatrix& training_x,
                                            std::span<const std::vector<double>> responses,
                                            std::span<const std::size_t> k_grid) {
    const std::size_t n = training_x.rows();
    const std::size_t g = k_grid.size();
    const std::size_t nr = responses.size();
    if (g == 0) throw Error(ErrorCode::InvalidArgument, "empty k grid");
    for (const auto& y : responses) {
        if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "response length differs from design rows");
    }
    for (auto k : k_grid) check_k(k, n);
    const std::size_t k_max = *std::max_element(k_grid.begin(), k_grid.end());

    // Per-point contributions, reduced in point order afterwards so the result
    // does not depend on the thread schedule.
    std::vector<double> trace_part(n * g);
    std::vector<double> rss_part(n * g * nr);

#pragma omp parallel
    {
        Neighborhood nb;
        std::vector<Eigen::ArrayXd> ys(nr);
#pragma omp for schedule(dynamic, 16)
        for (std::size_t a = 0; a < n; ++a) {
            nb.collect(training_x, training_x.row(a), k_max);
            for (std::size_t r = 0; r < nr; ++r) {
                ys[r].resize(nb.d2.size());
                for (std::size_t j = 0; j < nb.order.size(); ++j) {
                    ys[r][static_cast<Eigen::Index>(j)] = responses[r][nb.order[j].second];
                }
            }
            for (std::size_t gi = 0; gi < g; ++gi) {
                const auto m = nb.evaluate(k_grid[gi]);
                const double total = nb.weights.head(m).sum();
                // x_a itself sits at distance 0 with unnormalized weight exp(0) = 1.
                trace_part[a * g + gi] = 1.0 - 1.0 / total;
                for (std::size_t r = 0; r < nr; ++r) {
                    const double fitted = (nb.weights.head(m) * ys[r].head(m)).sum() / total;
                    const double resid = responses[r][a] - fitted;
                    rss_part[(r * n + a) * g + gi] = resid * resid;
                }
            }
        }
    }

    const double nn = static_cast<double>(n);
    std::vector<std::vector<GcvEntry>> out(nr, std::vector<GcvEntry>(g));
    for (std::size_t gi = 0; gi < g; ++gi) {
        double trace = 0.0;
        for (std::size_t a = 0; a < n; ++a) trace += trace_part[a * g + gi];
        const bool admissible = trace > kTraceEpsilon * nn;
        for (std::size_t r = 0; r < nr; ++r) {
            double rss = 0.0;
            for (std::size_t a = 0; a < n; ++a) rss += rss_part[(r * n + a) * g + gi];
            const double denom = trace / nn;
            out[r][gi] = {k_grid[gi],
                          admissible ? (rss / nn) / (denom * denom) : std::numeric_limits<double>::quiet_NaN(),
                          admissible};
        }
    }
    return out;
}

std::vector<std::size_t> KGrid::for_size(std::size_t n) const {
    if (n < 2) throw Error(ErrorCode::TooFewRecords, "at least 2 training rows are needed to select k");
    const std::size_t hi = std::min(max, n - 1);
    const std::size_t lo = std::max<std::size_t>(min, 1);
    if (lo > hi) return {hi};
    std::vector<std::size_t> grid;
    for (std::size_t k = lo; k <= hi; ++k) grid.push_back(k);
    return grid;
}

KernelModel::KernelModel(std::shared_ptr<const DesignMatrix> training_x, std::vector<double> training_y,
                         std::size_t k, std::vector<std::size_t> k_grid, std::vector<GcvEntry> gcv_trace)
    : training_x_(std::move(training_x)),
      training_y_(std::move(training_y)),
      k_(k),
      k_grid_(std::move(k_grid)),
      gcv_trace_(std::move(gcv_trace)) {
    if (!training_x_ || training_y_.size() != training_x_->rows()) {
        throw Error(ErrorCode::DimensionMismatch, "response length differs from design rows");
    }
    check_k(k_, training_y_.size());
}

double KernelModel::predict(std::span<const double> x) const {
    check_point(x, *training_x_);
    Neighborhood nb;
    nb.collect(*training_x_, x, k_);
    const auto m = nb.evaluate(k_);
    double total = 0.0;
    double weighted = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        total += nb.weights[j];
        weighted += nb.weights[j] * training_y_[nb.order[static_cast<std::size_t>(j)].second];
    }
    return weighted / total;
}

std::vector<double> KernelModel::predict_rows(std::span<const double> rows) const {
    const std::size_t d = training_x_->cols();
    if (rows.size() % d != 0) throw Error(ErrorCode::DimensionMismatch, "ragged prediction rows");
    const std::size_t count = rows.size() / d;
    std::vector<double> out(count);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < count; ++i) out[i] = predict(rows.subspan(i * d, d));
    return out;
}

std::vector<double> KernelModel::predict_raw(std::span<const double> raw_rows) const {
    return predict_rows(training_x_->transform(raw_rows));
}

std::vector<KernelModel> fit_responses(std::shared_ptr<const DesignMatrix> training_x,
                                       std::vector<std::vector<double>> responses,
                                       std::span<const std::size_t> k_grid) {
    const std::size_t n = training_x->rows();
    if (n < 2) throw Error(ErrorCode::TooFewRecords, "fit needs at least 2 training rows");
    if (k_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty k grid");
    std::vector<std::size_t> grid(k_grid.begin(), k_grid.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (auto k : grid) {
        if (k < 1 || k > n - 1) {
            throw Error(ErrorCode::InvalidArgument,
                        "grid entry k = " + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
        }
    }

    auto traces = gcv_scan(*training_x, responses, grid);
    std::vector<KernelModel> models;
    models.reserve(responses.size());
    for (std::size_t r = 0; r < responses.size(); ++r) {
        std::size_t best = grid.size();
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            const auto& e = traces[r][gi];
            if (e.admissible && (best == grid.size() || e.value < traces[r][best].value)) best = gi;
        }
        if (best == grid.size()) {
            throw Error(ErrorCode::NoAdmissibleK, "every k in the grid saturates the smoother");
        }
        models.emplace_back(training_x, std::move(responses[r]), grid[best], grid, std::move(traces[r]));
    }
    return models;
}

KernelModel fit(const DesignMatrix& training_x, std::vector<double> training_y, std::span<const std::size_t> k_grid) {
    std::vector<std::vector<double>> responses;
    responses.push_back(std::move(training_y));
    auto models = fit_responses(std::make_shared<const DesignMatrix>(training_x), std::move(responses), k_grid);
    return std::move(models.front());
}

void write_gcv_trace_csv(const KernelModel& model, std::ostream& out) {
    out << "k,gcv,admissible,selected\n";
    out.precision(17);
    for (const auto& e : model.gcv_trace()) {
        out << e.k << ',';
        if (e.admissible) out << e.value;
        out << ',' << (e.admissible ? 1 : 0) << ',' << (e.k == model.k() ? 1 : 0) << '\n';
    }
}

}  // namespace gainml
