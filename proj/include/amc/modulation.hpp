#ifndef AMC_MODULATION_HPP
#define AMC_MODULATION_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "amc/rng.hpp"

namespace amc {

// Class indices are fixed in this order everywhere: datasets, models, metrics.
enum class ModulationFamily : std::uint8_t {
    kOok = 0,
    kGfsk = 1,
    kGmsk = 2,
    kDbpsk = 3,
    kDqpsk = 4,
    kOfdm = 5,
};

inline constexpr int kFamilyCount = 6;

std::string_view family_name(ModulationFamily family);
std::optional<ModulationFamily> family_from_name(std::string_view name);

struct OokParams {
    double amplitude = 1.0; // rectangular NRZ, on-symbol level
};

// Differential PSK with root-raised-cosine pulse shaping.
struct DpskParams {
    double rrc_rolloff = 0.35;
    int rrc_span_symbols = 10; // filter length in symbols (taps = span*sps+1)
};

// Continuous-phase FSK with a Gaussian premodulation filter.
// GFSK: h = 1.0, BT = 0.35. GMSK: h = 0.5, BT = 0.3.
struct GaussianFskParams {
    double modulation_index = 0.5;
    double bt = 0.3;
    int gauss_span_symbols = 4;
};

struct OfdmParams {
    int fft_size = 16;        // total subcarriers
    int data_subcarriers = 12;
    int cyclic_prefix = 4;    // samples, = fft_size / 4
};

struct GenConfig {
    int samples_per_symbol = 10;       // N_SpS
    int samples_per_vector = 100;      // N_SpV
    int train_vectors_per_mod = 10000; // N_Vmod
    int test_vectors_total = 10000;    // N_Vtest, split evenly across families
    std::uint64_t rng_seed = 1;

    // Receiver noise floor applied at capture time (build_dataset), in dB
    // relative to each stream's own power. A loopback receive path is
    // never noise-free, and the whitening filter needs the resulting
    // eigenvalue floor; -20 dB keeps the set effectively clean while
    // bounding the ZCA gain in otherwise-null directions.
    double noise_floor_db = -20.0;

    // Carrier phase seen by the receiver: a fresh uniform draw per vector
    // when true, otherwise one fixed uniform draw per captured stream.
    bool random_phase_per_vector = true;

    OokParams ook;
    DpskParams dbpsk;
    DpskParams dqpsk;
    GaussianFskParams gfsk{1.0, 0.35, 4};
    GaussianFskParams gmsk{0.5, 0.30, 4};
    OfdmParams ofdm;

    int vector_dim() const { return 2 * samples_per_vector; }
    int train_vectors_total() const { return kFamilyCount * train_vectors_per_mod; }
    int test_vectors_per_mod() const { return test_vectors_total / kFamilyCount; }

    // Throws config_error on inconsistent values.
    void validate() const;
};

// n uniform bytes from the named generator. n must be >= 1.
std::vector<std::uint8_t> generate_bytes(std::uint64_t seed, std::size_t n);

// Complex baseband stream for one family at cfg.samples_per_symbol
// samples per symbol (OFDM has its own symbol structure at the same
// sample rate). Deterministic in (family, payload, cfg). Filtered
// families trim the filter transient, so the stream is steady state
// throughout; the usable length is payload-size dependent.
std::vector<std::complex<double>> modulate(ModulationFamily family,
                                           std::span<const std::uint8_t> payload,
                                           const GenConfig& cfg);

// Payload size that guarantees modulate() emits at least target_samples.
std::size_t payload_bytes_for(ModulationFamily family, const GenConfig& cfg,
                              std::size_t target_samples);

} // namespace amc

#endif // AMC_MODULATION_HPP
