#include "amc/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace amc {

double mean_power(std::span<const IQVector> vectors) {
    if (vectors.empty()) throw std::invalid_argument("mean_power: empty vector set");
    double acc = 0.0;
    for (const auto& v : vectors) {
        if (v.samples.empty()) throw std::invalid_argument("mean_power: empty vector");
        double p = 0.0;
        for (float x : v.samples) p += static_cast<double>(x) * x;
        acc += p / static_cast<double>(v.samples.size());
    }
    return acc / static_cast<double>(vectors.size());
}

double mean_power(const Dataset& ds, ModulationFamily family) {
    const auto target = static_cast<std::uint8_t>(family);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] != target) continue;
        double p = 0.0;
        for (float x : ds.vector(i)) p += static_cast<double>(x) * x;
        acc += p / static_cast<double>(ds.vector_length);
        ++count;
    }
    if (count == 0) throw std::invalid_argument("mean_power: no vectors for family");
    return acc / static_cast<double>(count);
}

double calibrate_beta(SnrTarget target) { return std::pow(10.0, -target.db / 10.0); }

Dataset add_awgn(const Dataset& test, SnrTarget target, Rng rng, AwgnReport* report) {
    const double beta = calibrate_beta(target);
    Dataset out = test;

    for (int f = 0; f < kFamilyCount; ++f) {
        if (test.family_counts[static_cast<std::size_t>(f)] == 0) continue;
        const double p_signal = mean_power(test, static_cast<ModulationFamily>(f));
        const double p_noise = beta * p_signal;
        const double sigma = std::sqrt(p_noise);

        Rng noise_rng = rng.child("noise", static_cast<std::uint64_t>(f));
        double injected = 0.0;
        std::size_t n_components = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out.labels[i] != f) continue;
            for (float& x : out.vector(i)) {
                const double noise = sigma * noise_rng.next_normal();
                injected += noise * noise;
                x = static_cast<float>(x + noise);
                ++n_components;
            }
        }
        if (report) {
            report->signal_power[static_cast<std::size_t>(f)] = p_signal;
            report->noise_variance[static_cast<std::size_t>(f)] = p_noise;
            report->injected_noise_power[static_cast<std::size_t>(f)] =
                n_components ? injected / static_cast<double>(n_components) : 0.0;
        }
    }
    return out;
}

} // namespace amc
