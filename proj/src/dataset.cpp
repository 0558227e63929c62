#include "amc/dataset.hpp"

#include <cmath>
#include <string>

#include "amc/errors.hpp"

namespace amc {
namespace {

struct FamilyVectors {
    std::vector<std::vector<float>> vectors;
};

// Mean over vectors of mean squared interleaved component.
double mean_power_of(const std::vector<std::vector<float>>& vectors) {
    if (vectors.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : vectors) {
        double p = 0.0;
        for (float x : v) p += static_cast<double>(x) * x;
        acc += p / static_cast<double>(v.size());
    }
    return acc / static_cast<double>(vectors.size());
}

void scale_vectors(std::vector<std::vector<float>>& vectors, double factor) {
    for (auto& v : vectors)
        for (float& x : v) x = static_cast<float>(x * factor);
}

// Rotate by the receiver-side carrier phase: per vector (unlocked
// receiver, segments phase-unaligned) or one draw for the whole stream.
void rotate_vectors(std::vector<std::vector<float>>& vectors, bool per_vector, Rng rng) {
    double theta = rng.next_double() * 2.0 * 3.14159265358979323846;
    for (auto& v : vectors) {
        if (per_vector) theta = rng.next_double() * 2.0 * 3.14159265358979323846;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        for (std::size_t i = 0; i + 1 < v.size(); i += 2) {
            const double re = v[i];
            const double im = v[i + 1];
            v[i] = static_cast<float>(re * c - im * s);
            v[i + 1] = static_cast<float>(re * s + im * c);
        }
    }
}

std::vector<std::vector<float>> segment_raw(std::span<const std::complex<double>> stream,
                                            int samples_per_vector) {
    const auto window = static_cast<std::size_t>(samples_per_vector);
    if (stream.size() < window)
        throw std::invalid_argument("segment: stream shorter than one vector (" +
                                    std::to_string(stream.size()) + " < " +
                                    std::to_string(window) + " samples)");
    const std::size_t count = stream.size() / window;
    std::vector<std::vector<float>> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto& v = out[k];
        v.resize(2 * window);
        for (std::size_t i = 0; i < window; ++i) {
            const auto& z = stream[k * window + i];
            v[2 * i] = static_cast<float>(z.real());
            v[2 * i + 1] = static_cast<float>(z.imag());
        }
    }
    return out;
}

// Capture-time receiver noise relative to the stream's own power. The
// modulators emit ideal baseband; a received stream never is.
void add_noise_floor(std::vector<std::complex<double>>& stream, double floor_db, Rng rng) {
    double power = 0.0;
    for (const auto& z : stream) power += std::norm(z);
    power /= static_cast<double>(stream.size());
    const double sigma = std::sqrt(std::pow(10.0, floor_db / 10.0) * power / 2.0);
    for (auto& z : stream)
        z += std::complex<double>(sigma * rng.next_normal(), sigma * rng.next_normal());
}

std::vector<std::vector<float>> make_family_vectors(ModulationFamily family, Split split,
                                                    std::size_t n_vectors, const GenConfig& cfg,
                                                    const Rng& root, double* train_scale) {
    const std::size_t need = n_vectors * static_cast<std::size_t>(cfg.samples_per_vector);
    const std::string tag = std::string("payload/") + std::string(split_name(split)) + "/" +
                            std::string(family_name(family));
    const std::uint64_t payload_seed = root.child(tag).seed();
    const auto payload = generate_bytes(payload_seed, payload_bytes_for(family, cfg, need));
    auto stream = modulate(family, payload, cfg);
    const std::string floor_tag = std::string("floor/") + std::string(split_name(split));
    add_noise_floor(stream, cfg.noise_floor_db,
                    root.child(floor_tag, static_cast<std::uint64_t>(family)));
    auto vectors = segment_raw(stream, cfg.samples_per_vector);
    if (vectors.size() < n_vectors)
        throw std::runtime_error("dataset: modulator produced too few samples for " +
                                 std::string(family_name(family)));
    vectors.resize(n_vectors);

    // Per-family amplitude normalization: mean train-split power 1.0.
    // OOK keeps its natural duty-cycle level.
    if (split == Split::kTrain)
        *train_scale = family == ModulationFamily::kOok
                           ? 1.0
                           : 1.0 / std::sqrt(mean_power_of(vectors));
    if (family != ModulationFamily::kOok) scale_vectors(vectors, *train_scale);

    const std::string phase_tag = std::string("phase/") + std::string(split_name(split));
    rotate_vectors(vectors, cfg.random_phase_per_vector,
                   root.child(phase_tag, static_cast<std::uint64_t>(family)));
    return vectors;
}

Dataset assemble(Split split, int vector_length,
                 std::array<FamilyVectors, kFamilyCount>&& per_family, Rng shuffle_rng) {
    Dataset ds;
    ds.split = split;
    ds.vector_length = vector_length;

    std::size_t total = 0;
    for (const auto& fam : per_family) total += fam.vectors.size();

    // Seeded Fisher-Yates over (family, position) pairs.
    std::vector<std::pair<std::uint8_t, std::uint32_t>> order;
    order.reserve(total);
    for (int f = 0; f < kFamilyCount; ++f)
        for (std::uint32_t i = 0; i < per_family[f].vectors.size(); ++i)
            order.emplace_back(static_cast<std::uint8_t>(f), i);
    for (std::size_t i = total; i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

    ds.labels.resize(total);
    ds.samples.resize(total * static_cast<std::size_t>(vector_length));
    for (std::size_t k = 0; k < total; ++k) {
        const auto [family, index] = order[k];
        ds.labels[k] = family;
        const auto& src = per_family[family].vectors[index];
        std::copy(src.begin(), src.end(), ds.vector(k).begin());
    }
    ds.recount_families();
    return ds;
}

} // namespace

std::string_view split_name(Split split) {
    return split == Split::kTrain ? "train" : "test";
}

void Dataset::recount_families() {
    family_counts.fill(0);
    for (std::uint8_t label : labels) {
        if (label >= kFamilyCount)
            throw std::invalid_argument("dataset: label out of range");
        ++family_counts[label];
    }
}

std::vector<IQVector> segment(std::span<const std::complex<double>> stream,
                              const GenConfig& cfg) {
    auto raw = segment_raw(stream, cfg.samples_per_vector);
    std::vector<IQVector> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i].samples = std::move(raw[i]);
    return out;
}

DatasetPair build_dataset(const GenConfig& cfg) {
    cfg.validate();
    const Rng root(cfg.rng_seed);

    std::array<FamilyVectors, kFamilyCount> train_fams;
    std::array<FamilyVectors, kFamilyCount> test_fams;
    for (int f = 0; f < kFamilyCount; ++f) {
        const auto family = static_cast<ModulationFamily>(f);
        double train_scale = 1.0;
        train_fams[f].vectors = make_family_vectors(
            family, Split::kTrain, static_cast<std::size_t>(cfg.train_vectors_per_mod), cfg,
            root, &train_scale);
        test_fams[f].vectors = make_family_vectors(
            family, Split::kTest, static_cast<std::size_t>(cfg.test_vectors_per_mod()), cfg,
            root, &train_scale);
    }

    DatasetPair pair;
    pair.train = assemble(Split::kTrain, cfg.vector_dim(), std::move(train_fams),
                          root.child("shuffle/train"));
    pair.test = assemble(Split::kTest, cfg.vector_dim(), std::move(test_fams),
                         root.child("shuffle/test"));
    return pair;
}

Eigen::MatrixXd to_matrix(const Dataset& ds) {
    Eigen::MatrixXd m(ds.vector_length, static_cast<Eigen::Index>(ds.size()));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto v = ds.vector(i);
        for (int d = 0; d < ds.vector_length; ++d)
            m(d, static_cast<Eigen::Index>(i)) = v[static_cast<std::size_t>(d)];
    }
    return m;
}

} // namespace amc
