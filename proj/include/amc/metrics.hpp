#ifndef AMC_METRICS_HPP
#define AMC_METRICS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "amc/channel.hpp"
#include "amc/network.hpp"

namespace amc {

// Count matrix: entry (i, j) = samples of true class i predicted as j.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int classes = kFamilyCount);

    static ConfusionMatrix from_predictions(std::span<const std::uint8_t> predictions,
                                            std::span<const std::uint8_t> truths,
                                            int classes = kFamilyCount);

    int classes() const { return classes_; }
    std::uint64_t total() const { return total_; }
    std::uint64_t count(int truth, int predicted) const;
    void add(int truth, int predicted);

    std::uint64_t row_total(int truth) const;
    std::uint64_t column_total(int predicted) const;

    // Unweighted mean of per-class correct fractions (macro average).
    // Throws undefined_class_error if any class has no true samples.
    double pcc() const;
    // Global accuracy, trace / total.
    double accuracy() const;
    // Column-k diagonal fraction; empty when nothing was predicted as k.
    std::optional<double> precision(int k) const;
    // Row-k diagonal fraction (recall); throws when row k is empty.
    double sensitivity(int k) const;

    // Rows divided by their totals (empty rows stay zero).
    Eigen::MatrixXd normalized() const;

private:
    int classes_;
    std::uint64_t total_ = 0;
    std::vector<std::uint64_t> counts_; // row-major
};

struct SweepPoint {
    double snr_db = 0.0;
    double pcc = 0.0;
    double accuracy = 0.0;
    std::vector<std::optional<double>> precision; // per class
    std::vector<double> sensitivity;              // per class
    ConfusionMatrix confusion{kFamilyCount};
};

struct SweepResult {
    std::vector<SweepPoint> points; // in requested SNR order
};

// Evaluate the network on one dataset with no added noise.
SweepPoint evaluate_clean(const StackedNetwork& net, const Dataset& test);

// Per point: fresh AWGN draw on the clean test set, whiten, forward,
// metrics. The grid must be strictly ordered (ascending or descending);
// output preserves the requested order.
SweepResult snr_sweep(const StackedNetwork& net, const Dataset& clean_test,
                      std::span<const double> snrs_db, Rng rng);

// CSV emission. Column order is fixed: snr_db, pcc, accuracy, then
// precision and sensitivity per family in class order. Undefined
// precision cells are left empty.
void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);
void write_confusion_csv(const ConfusionMatrix& m, const std::filesystem::path& counts_path,
                         const std::filesystem::path& normalized_path);

} // namespace amc

#endif // AMC_METRICS_HPP
