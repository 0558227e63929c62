#ifndef AMC_DATASET_HPP
#define AMC_DATASET_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "amc/modulation.hpp"

namespace amc {

// One labeled example: 2*N_SpV interleaved I/Q amplitudes.
struct IQVector {
    std::vector<float> samples; // I0,Q0,I1,Q1,...
    std::uint8_t label = 0;     // ModulationFamily class index
};

enum class Split : std::uint8_t { kTrain = 0, kTest = 1 };

std::string_view split_name(Split split);

// Vectors stored contiguously, vector-major, matching the IQD1 layout.
struct Dataset {
    Split split = Split::kTrain;
    int vector_length = 0; // 2*N_SpV
    std::vector<std::uint8_t> labels;
    std::vector<float> samples;
    std::array<std::uint32_t, kFamilyCount> family_counts{};

    std::size_t size() const { return labels.size(); }

    std::span<const float> vector(std::size_t i) const {
        return {samples.data() + i * static_cast<std::size_t>(vector_length),
                static_cast<std::size_t>(vector_length)};
    }
    std::span<float> vector(std::size_t i) {
        return {samples.data() + i * static_cast<std::size_t>(vector_length),
                static_cast<std::size_t>(vector_length)};
    }
    IQVector at(std::size_t i) const {
        auto v = vector(i);
        return {{v.begin(), v.end()}, labels[i]};
    }

    void recount_families();
};

// Consecutive non-overlapping windows of N_SpV complex samples,
// interleaved to 2*N_SpV reals; the trailing remainder is discarded.
// Labels are left 0 until the caller tags them. Throws if the stream is
// shorter than one window.
std::vector<IQVector> segment(std::span<const std::complex<double>> stream,
                              const GenConfig& cfg);

struct DatasetPair {
    Dataset train;
    Dataset test;
};

// Full synthetic pipeline: payload -> modulate -> normalize -> segment ->
// per-vector phase rotation -> tagged, seeded shuffle. Train and test use
// disjoint payload streams; both are deterministic in cfg (seed included).
DatasetPair build_dataset(const GenConfig& cfg);

// Column-per-vector double view of the samples, for the math modules.
Eigen::MatrixXd to_matrix(const Dataset& ds);

} // namespace amc

#endif // AMC_DATASET_HPP
