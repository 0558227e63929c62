#ifndef AMC_CHANNEL_HPP
#define AMC_CHANNEL_HPP

#include <array>
#include <span>

#include "amc/dataset.hpp"
#include "amc/rng.hpp"

namespace amc {

struct SnrTarget {
    double db = 0.0;
};

// Mean over vectors of mean squared interleaved component (tau = 2*N_SpV).
double mean_power(std::span<const IQVector> vectors);
double mean_power(const Dataset& ds, ModulationFamily family);

// beta such that 10*log10(P_signal / (beta * P_signal)) equals the target.
double calibrate_beta(SnrTarget target);

// Per-family bookkeeping from one add_awgn call, for calibration checks.
struct AwgnReport {
    std::array<double, kFamilyCount> signal_power{};         // measured P_S per family
    std::array<double, kFamilyCount> noise_variance{};       // requested P_noise
    std::array<double, kFamilyCount> injected_noise_power{}; // realized mean square
};

// Independent zero-mean Gaussian noise of variance beta * (that family's
// mean power) on every interleaved component. Labels are untouched; the
// classifier is never retrained on noised data. Deterministic per rng.
Dataset add_awgn(const Dataset& test, SnrTarget target, Rng rng, AwgnReport* report = nullptr);

} // namespace amc

#endif // AMC_CHANNEL_HPP
