#include "amc/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "amc/errors.hpp"
#include "amc/whiten.hpp"

namespace amc {
namespace {

// Predictions for a whole dataset through the network's own whitening.
std::vector<std::uint8_t> predict_dataset(const StackedNetwork& net, const Dataset& ds) {
    if (ds.vector_length != net.input_dim())
        throw std::invalid_argument("evaluate: dataset/model dimension mismatch");
    const Eigen::MatrixXd x = net.whitening.apply_all(to_matrix(ds));
    std::vector<std::uint8_t> predictions(ds.size());
    // Batched forward keeps this at matrix-matrix speed.
    constexpr Eigen::Index kChunk = 1024;
    for (Eigen::Index start = 0; start < x.cols(); start += kChunk) {
        const Eigen::Index b = std::min<Eigen::Index>(kChunk, x.cols() - start);
        const Eigen::MatrixXd probs = net.forward_whitened_batch(x.middleCols(start, b));
        for (Eigen::Index c = 0; c < b; ++c) {
            int best = 0;
            for (int k = 1; k < probs.rows(); ++k)
                if (probs(k, c) > probs(best, c)) best = k;
            predictions[static_cast<std::size_t>(start + c)] = static_cast<std::uint8_t>(best);
        }
    }
    return predictions;
}

SweepPoint point_from_confusion(ConfusionMatrix m, double snr_db) {
    SweepPoint pt;
    pt.snr_db = snr_db;
    pt.pcc = m.pcc();
    pt.accuracy = m.accuracy();
    for (int k = 0; k < m.classes(); ++k) {
        pt.precision.push_back(m.precision(k));
        pt.sensitivity.push_back(m.sensitivity(k));
    }
    pt.confusion = std::move(m);
    return pt;
}

class File {
public:
    File(const std::filesystem::path& path, const char* mode) : f_(std::fopen(path.c_str(), mode)) {
        if (!f_) throw io_error(io_errc::io_failed, "cannot open " + path.string());
    }
    ~File() {
        if (f_) std::fclose(f_);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;
    std::FILE* get() const { return f_; }

private:
    std::FILE* f_;
};

} // namespace

ConfusionMatrix::ConfusionMatrix(int classes) : classes_(classes) {
    if (classes < 1) throw std::invalid_argument("confusion: classes must be >= 1");
    counts_.assign(static_cast<std::size_t>(classes) * classes, 0);
}

ConfusionMatrix ConfusionMatrix::from_predictions(std::span<const std::uint8_t> predictions,
                                                  std::span<const std::uint8_t> truths,
                                                  int classes) {
    if (predictions.size() != truths.size())
        throw std::invalid_argument("confusion: predictions/truths length mismatch");
    ConfusionMatrix m(classes);
    for (std::size_t i = 0; i < truths.size(); ++i) m.add(truths[i], predictions[i]);
    return m;
}

void ConfusionMatrix::add(int truth, int predicted) {
    if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_)
        throw std::invalid_argument("confusion: label out of range");
    ++counts_[static_cast<std::size_t>(truth) * classes_ + predicted];
    ++total_;
}

std::uint64_t ConfusionMatrix::count(int truth, int predicted) const {
    if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_)
        throw std::invalid_argument("confusion: label out of range");
    return counts_[static_cast<std::size_t>(truth) * classes_ + predicted];
}

std::uint64_t ConfusionMatrix::row_total(int truth) const {
    std::uint64_t sum = 0;
    for (int j = 0; j < classes_; ++j) sum += count(truth, j);
    return sum;
}

std::uint64_t ConfusionMatrix::column_total(int predicted) const {
    std::uint64_t sum = 0;
    for (int i = 0; i < classes_; ++i) sum += count(i, predicted);
    return sum;
}

double ConfusionMatrix::pcc() const {
    double sum = 0.0;
    for (int i = 0; i < classes_; ++i) sum += sensitivity(i);
    return sum / classes_;
}

double ConfusionMatrix::accuracy() const {
    if (total_ == 0) throw undefined_class_error("accuracy: empty confusion matrix");
    std::uint64_t diag = 0;
    for (int i = 0; i < classes_; ++i) diag += count(i, i);
    return static_cast<double>(diag) / static_cast<double>(total_);
}

std::optional<double> ConfusionMatrix::precision(int k) const {
    const std::uint64_t col = column_total(k);
    if (col == 0) return std::nullopt;
    return static_cast<double>(count(k, k)) / static_cast<double>(col);
}

double ConfusionMatrix::sensitivity(int k) const {
    const std::uint64_t row = row_total(k);
    if (row == 0)
        throw undefined_class_error("sensitivity: no samples of class " + std::to_string(k));
    return static_cast<double>(count(k, k)) / static_cast<double>(row);
}

Eigen::MatrixXd ConfusionMatrix::normalized() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(classes_, classes_);
    for (int i = 0; i < classes_; ++i) {
        const std::uint64_t row = row_total(i);
        if (row == 0) continue;
        for (int j = 0; j < classes_; ++j)
            m(i, j) = static_cast<double>(count(i, j)) / static_cast<double>(row);
    }
    return m;
}

SweepPoint evaluate_clean(const StackedNetwork& net, const Dataset& test) {
    const auto predictions = predict_dataset(net, test);
    return point_from_confusion(
        ConfusionMatrix::from_predictions(predictions, test.labels, net.classes()),
        std::numeric_limits<double>::infinity());
}

SweepResult snr_sweep(const StackedNetwork& net, const Dataset& clean_test,
                      std::span<const double> snrs_db, Rng rng) {
    if (snrs_db.empty()) throw std::invalid_argument("snr_sweep: empty grid");
    if (snrs_db.size() > 1) {
        const bool ascending = snrs_db[1] > snrs_db[0];
        for (std::size_t i = 1; i < snrs_db.size(); ++i)
            if ((ascending && snrs_db[i] <= snrs_db[i - 1]) ||
                (!ascending && snrs_db[i] >= snrs_db[i - 1]))
                throw std::invalid_argument("snr_sweep: grid must be strictly ordered");
    }

    SweepResult result;
    for (std::size_t i = 0; i < snrs_db.size(); ++i) {
        const Dataset noised =
            add_awgn(clean_test, SnrTarget{snrs_db[i]}, rng.child("sweep", i));
        const auto predictions = predict_dataset(net, noised);
        result.points.push_back(point_from_confusion(
            ConfusionMatrix::from_predictions(predictions, noised.labels, net.classes()),
            snrs_db[i]));
    }
    return result;
}

void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path) {
    File f(path, "w");
    std::fprintf(f.get(), "snr_db,pcc,accuracy");
    for (int k = 0; k < kFamilyCount; ++k)
        std::fprintf(f.get(), ",precision_%s",
                     std::string(family_name(static_cast<ModulationFamily>(k))).c_str());
    for (int k = 0; k < kFamilyCount; ++k)
        std::fprintf(f.get(), ",sensitivity_%s",
                     std::string(family_name(static_cast<ModulationFamily>(k))).c_str());
    std::fprintf(f.get(), "\n");
    for (const auto& pt : sweep.points) {
        std::fprintf(f.get(), "%.6f,%.9f,%.9f", pt.snr_db, pt.pcc, pt.accuracy);
        for (const auto& p : pt.precision) {
            if (p)
                std::fprintf(f.get(), ",%.9f", *p);
            else
                std::fprintf(f.get(), ","); // undefined stays blank
        }
        for (double s : pt.sensitivity) std::fprintf(f.get(), ",%.9f", s);
        std::fprintf(f.get(), "\n");
    }
}

void write_confusion_csv(const ConfusionMatrix& m, const std::filesystem::path& counts_path,
                         const std::filesystem::path& normalized_path) {
    {
        File f(counts_path, "w");
        for (int i = 0; i < m.classes(); ++i) {
            for (int j = 0; j < m.classes(); ++j)
                std::fprintf(f.get(), j ? ",%" PRIu64 : "%" PRIu64, m.count(i, j));
            std::fprintf(f.get(), "\n");
        }
    }
    {
        File f(normalized_path, "w");
        const Eigen::MatrixXd norm = m.normalized();
        for (int i = 0; i < m.classes(); ++i) {
            for (int j = 0; j < m.classes(); ++j)
                std::fprintf(f.get(), j ? ",%.9f" : "%.9f", norm(i, j));
            std::fprintf(f.get(), "\n");
        }
    }
}

} // namespace amc
