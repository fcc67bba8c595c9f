#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gainml {

/// R_x = d_x(k) / kBandwidthDivisor.
inline constexpr double kBandwidthDivisor = 3.0;
/// Lower bound on R_x (standardized units) when the k-th neighbour coincides with x.
inline constexpr double kBandwidthFloor = 1e-8;
/// Kernel terms with ||x - x_i|| / R_x above this ratio are dropped. Their
/// total relative contribution is below 1e-18 for n up to 1e4.
inline constexpr double kKernelCutoff = 10.0;

double gaussian_kernel(double a);

struct Standardization {
    std::vector<double> mean;
    std::vector<double> stdev;
};

/// Row-major covariate matrix in standardized coordinates, together with the
/// per-column statistics that map raw values into those coordinates.
class DesignMatrix {
public:
    DesignMatrix() = default;

    /// Z-scores `raw` (row-major, `cols` wide) column by column. Requires at
    /// least two rows and no constant column.
    static DesignMatrix standardize(std::vector<double> raw, std::size_t cols,
                                    std::vector<std::string> names = {});

    /// Wraps values that are already in the coordinates distances should be
    /// measured in (identity statistics).
    static DesignMatrix from_standardized(std::vector<double> values, std::size_t cols,
                                          std::vector<std::string> names = {});

    std::size_t rows() const { return cols_ == 0 ? 0 : values_.size() / cols_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> values() const { return values_; }
    const std::vector<std::string>& column_names() const { return names_; }
    const Standardization& standardization() const { return stats_; }

    /// Applies the training statistics to raw row-major values.
    std::vector<double> transform(std::span<const double> raw_rows) const;

private:
    std::vector<double> values_;
    std::size_t cols_ = 0;
    std::vector<std::string> names_;
    Standardization stats_;
};

struct WeightVector {
    std::vector<double> weights;
    std::vector<double> evaluation_point;
};

double adaptive_bandwidth(std::span<const double> x, const DesignMatrix& training_x, std::size_t k);
WeightVector weights_at(std::span<const double> x, const DesignMatrix& training_x, std::size_t k);

/// Row-major n x n matrix whose row a holds the weights at training point a.
std::vector<double> smoother_matrix(const DesignMatrix& training_x, std::size_t k);

/// GCV(k) = n^-1 ||(I - M) y||^2 / (n^-1 tr(I - M))^2, evaluated from the
/// explicit smoother matrix. Throws SaturatedSmoother when tr(I - M) vanishes.
double gcv(const DesignMatrix& training_x, std::span<const double> y, std::size_t k);

/// Saturation threshold for tr(I - M), relative to n.
inline constexpr double kTraceEpsilon = 1e-9;

struct GcvEntry {
    std::size_t k = 0;
    double value = 0.0;  // NaN when not admissible
    bool admissible = false;
};

/// Evaluates GCV over `k_grid` for several responses that share one design
/// matrix. Residuals and the trace are accumulated point by point, so the
/// n x n matrix is never formed. Result is indexed [response][grid entry].
std::vector<std::vector<GcvEntry>> gcv_scan(const DesignMatrix& training_x,
                                            std::span<const std::vector<double>> responses,
                                            std::span<const std::size_t> k_grid);

struct KGrid {
    std::size_t min = 3;
    std::size_t max = 100;

    /// {min, ..., min(max, n - 1)}; falls back to {n - 1} when that is empty.
    std::vector<std::size_t> for_size(std::size_t n) const;
};

/// A fitted adaptive Nadaraya-Watson regressor. Immutable once built; the
/// training matrix may be shared between models fitted to different responses.
class KernelModel {
public:
    KernelModel(std::shared_ptr<const DesignMatrix> training_x, std::vector<double> training_y, std::size_t k,
                std::vector<std::size_t> k_grid, std::vector<GcvEntry> gcv_trace);

    const DesignMatrix& training_x() const { return *training_x_; }
    const std::vector<double>& training_y() const { return training_y_; }
    std::size_t k() const { return k_; }
    const std::vector<std::size_t>& k_grid() const { return k_grid_; }
    const std::vector<GcvEntry>& gcv_trace() const { return gcv_trace_; }

    /// Prediction at a point given in standardized coordinates.
    double predict(std::span<const double> x) const;
    /// Predictions at row-major standardized points.
    std::vector<double> predict_rows(std::span<const double> rows) const;
    /// Predictions at row-major raw points (standardized with training statistics).
    std::vector<double> predict_raw(std::span<const double> raw_rows) const;

private:
    std::shared_ptr<const DesignMatrix> training_x_;
    std::vector<double> training_y_;
    std::size_t k_;
    std::vector<std::size_t> k_grid_;
    std::vector<GcvEntry> gcv_trace_;
};

KernelModel fit(const DesignMatrix& training_x, std::vector<double> training_y, std::span<const std::size_t> k_grid);

/// Fits one model per response on a shared design matrix; each model selects
/// its own k.
std::vector<KernelModel> fit_responses(std::shared_ptr<const DesignMatrix> training_x,
                                       std::vector<std::vector<double>> responses,
                                       std::span<const std::size_t> k_grid);

void write_gcv_trace_csv(const KernelModel& model, std::ostream& out);

}  // namespace gainml
