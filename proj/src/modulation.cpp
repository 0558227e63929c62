#include "amc/modulation.hpp"

#include <cmath>
#include <numbers>

#include "amc/errors.hpp"

namespace amc {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::uint8_t> bits_msb_first(std::span<const std::uint8_t> payload) {
    std::vector<std::uint8_t> bits;
    bits.reserve(payload.size() * 8);
    for (std::uint8_t byte : payload)
        for (int b = 7; b >= 0; --b) bits.push_back((byte >> b) & 1u);
    return bits;
}

// Root-raised-cosine taps, unit energy, symbol period = sps samples.
std::vector<double> rrc_taps(double rolloff, int sps, int span_symbols) {
    const int half = span_symbols * sps / 2;
    std::vector<double> taps(2 * half + 1);
    for (int k = -half; k <= half; ++k) {
        const double t = static_cast<double>(k) / sps;
        double v;
        if (k == 0) {
            v = 1.0 + rolloff * (4.0 / kPi - 1.0);
        } else if (rolloff > 0.0 &&
                   std::abs(std::abs(t) - 1.0 / (4.0 * rolloff)) < 1e-9) {
            const double a = kPi / (4.0 * rolloff);
            v = (rolloff / std::sqrt(2.0)) *
                ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
        } else {
            const double num = std::sin(kPi * t * (1.0 - rolloff)) +
                               4.0 * rolloff * t * std::cos(kPi * t * (1.0 + rolloff));
            const double den = kPi * t * (1.0 - 16.0 * rolloff * rolloff * t * t);
            v = num / den;
        }
        taps[k + half] = v;
    }
    double energy = 0.0;
    for (double v : taps) energy += v * v;
    const double norm = 1.0 / std::sqrt(energy);
    for (double& v : taps) v *= norm;
    return taps;
}

// Gaussian premodulation filter, unit DC gain.
std::vector<double> gaussian_taps(double bt, int sps, int span_symbols) {
    const int half = span_symbols * sps / 2;
    const double sigma = std::sqrt(std::log(2.0)) / (2.0 * kPi * bt);
    std::vector<double> taps(2 * half + 1);
    double sum = 0.0;
    for (int k = -half; k <= half; ++k) {
        const double t = static_cast<double>(k) / sps;
        taps[k + half] = std::exp(-t * t / (2.0 * sigma * sigma));
        sum += taps[k + half];
    }
    for (double& v : taps) v /= sum;
    return taps;
}

// Convolution restricted to full-overlap (steady state) samples.
template <typename T>
std::vector<T> convolve_valid(const std::vector<T>& x, const std::vector<double>& taps) {
    if (x.size() < taps.size()) return {};
    std::vector<T> out(x.size() - taps.size() + 1);
    for (std::size_t m = 0; m < out.size(); ++m) {
        T acc{};
        for (std::size_t i = 0; i < taps.size(); ++i) acc += taps[i] * x[m + taps.size() - 1 - i];
        out[m] = acc;
    }
    return out;
}

std::vector<std::complex<double>> modulate_ook(std::span<const std::uint8_t> payload,
                                               const GenConfig& cfg) {
    const auto bits = bits_msb_first(payload);
    std::vector<std::complex<double>> out;
    out.reserve(bits.size() * cfg.samples_per_symbol);
    for (std::uint8_t bit : bits) {
        const double level = bit ? cfg.ook.amplitude : 0.0;
        for (int s = 0; s < cfg.samples_per_symbol; ++s) out.emplace_back(level, 0.0);
    }
    return out;
}

std::vector<std::complex<double>> shape_symbols(const std::vector<std::complex<double>>& symbols,
                                                const DpskParams& p, int sps) {
    std::vector<std::complex<double>> impulses(symbols.size() * sps);
    for (std::size_t k = 0; k < symbols.size(); ++k) impulses[k * sps] = symbols[k];
    return convolve_valid(impulses, rrc_taps(p.rrc_rolloff, sps, p.rrc_span_symbols));
}

// Differential BPSK, "0 -> no transition".
std::vector<std::complex<double>> modulate_dbpsk(std::span<const std::uint8_t> payload,
                                                 const GenConfig& cfg) {
    const auto bits = bits_msb_first(payload);
    std::vector<std::complex<double>> symbols(bits.size());
    double phase = 0.0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k]) phase += kPi;
        symbols[k] = std::polar(1.0, phase);
    }
    return shape_symbols(symbols, cfg.dbpsk, cfg.samples_per_symbol);
}

// Differential QPSK, Gray-coded pi/2-spaced phase increments.
std::vector<std::complex<double>> modulate_dqpsk(std::span<const std::uint8_t> payload,
                                                 const GenConfig& cfg) {
    static constexpr double kIncrement[4] = {0.0, kPi / 2.0, 3.0 * kPi / 2.0, kPi};
    const auto bits = bits_msb_first(payload);
    const std::size_t n_sym = bits.size() / 2;
    std::vector<std::complex<double>> symbols(n_sym);
    double phase = 0.0;
    for (std::size_t k = 0; k < n_sym; ++k) {
        const int dibit = (bits[2 * k] << 1) | bits[2 * k + 1]; // 00,01,10,11
        phase += kIncrement[dibit];
        symbols[k] = std::polar(1.0, phase);
    }
    return shape_symbols(symbols, cfg.dqpsk, cfg.samples_per_symbol);
}

// Gaussian-filtered CPFSK; per-symbol phase advance is +-pi*h in steady state.
std::vector<std::complex<double>> modulate_gaussian_fsk(std::span<const std::uint8_t> payload,
                                                        const GaussianFskParams& p,
                                                        const GenConfig& cfg) {
    const auto bits = bits_msb_first(payload);
    const int sps = cfg.samples_per_symbol;
    std::vector<double> nrz(bits.size() * sps);
    for (std::size_t k = 0; k < bits.size(); ++k) {
        const double level = bits[k] ? 1.0 : -1.0;
        for (int s = 0; s < sps; ++s) nrz[k * sps + s] = level;
    }
    const auto filtered = convolve_valid(nrz, gaussian_taps(p.bt, sps, p.gauss_span_symbols));
    std::vector<std::complex<double>> out(filtered.size());
    double phase = 0.0;
    for (std::size_t n = 0; n < filtered.size(); ++n) {
        phase += kPi * p.modulation_index * filtered[n] / sps;
        out[n] = std::polar(1.0, phase);
    }
    return out;
}

// 16-bin OFDM, QPSK data subcarriers, constant pilots at +-N/4, nulls at
// DC and N/2, cyclic prefix prepended. Sample rate equals the other
// families; the symbol structure is its own.
std::vector<std::complex<double>> modulate_ofdm(std::span<const std::uint8_t> payload,
                                                const GenConfig& cfg) {
    const int n = cfg.ofdm.fft_size;
    const int cp = cfg.ofdm.cyclic_prefix;
    std::vector<int> data_bins;
    for (int k = 0; k < n; ++k) {
        if (k == 0 || k == n / 2) continue;         // guards
        if (k == n / 4 || k == 3 * n / 4) continue; // pilots
        data_bins.push_back(k);
    }
    const auto bits = bits_msb_first(payload);
    const std::size_t bits_per_symbol = data_bins.size() * 2;
    const std::size_t n_symbols = bits.size() / bits_per_symbol;

    constexpr double inv_sqrt2 = 0.70710678118654752440;
    std::vector<std::complex<double>> out;
    out.reserve(n_symbols * (n + cp));
    std::vector<std::complex<double>> freq(n), time(n);
    std::size_t bit_pos = 0;
    for (std::size_t sym = 0; sym < n_symbols; ++sym) {
        std::fill(freq.begin(), freq.end(), std::complex<double>{});
        freq[n / 4] = {1.0, 0.0};
        freq[3 * n / 4] = {1.0, 0.0};
        for (int bin : data_bins) {
            const int b0 = bits[bit_pos++];
            const int b1 = bits[bit_pos++];
            freq[bin] = {(1 - 2 * b0) * inv_sqrt2, (1 - 2 * b1) * inv_sqrt2};
        }
        for (int t = 0; t < n; ++t) {
            std::complex<double> acc{};
            for (int k = 0; k < n; ++k)
                acc += freq[k] * std::polar(1.0, 2.0 * kPi * k * t / n);
            time[t] = acc / static_cast<double>(n);
        }
        for (int t = n - cp; t < n; ++t) out.push_back(time[t]);
        out.insert(out.end(), time.begin(), time.end());
    }
    return out;
}

} // namespace

std::string_view family_name(ModulationFamily family) {
    switch (family) {
        case ModulationFamily::kOok: return "OOK";
        case ModulationFamily::kGfsk: return "GFSK";
        case ModulationFamily::kGmsk: return "GMSK";
        case ModulationFamily::kDbpsk: return "DBPSK";
        case ModulationFamily::kDqpsk: return "DQPSK";
        case ModulationFamily::kOfdm: return "OFDM";
    }
    return "?";
}

std::optional<ModulationFamily> family_from_name(std::string_view name) {
    for (int i = 0; i < kFamilyCount; ++i) {
        const auto f = static_cast<ModulationFamily>(i);
        if (name == family_name(f)) return f;
    }
    return std::nullopt;
}

void GenConfig::validate() const {
    if (samples_per_symbol < 1) throw config_error("samples_per_symbol must be >= 1");
    if (samples_per_vector < 1) throw config_error("samples_per_vector must be >= 1");
    if (samples_per_vector % samples_per_symbol != 0)
        throw config_error("samples_per_vector must be a multiple of samples_per_symbol");
    if (train_vectors_per_mod < 1) throw config_error("train_vectors_per_mod must be >= 1");
    if (test_vectors_total < kFamilyCount)
        throw config_error("test_vectors_total must be >= 6");
    if (ofdm.fft_size < 8 || ofdm.fft_size % 4 != 0)
        throw config_error("ofdm fft_size must be a multiple of 4 and >= 8");
    if (ofdm.data_subcarriers != ofdm.fft_size - 4)
        throw config_error("ofdm data_subcarriers must equal fft_size - 4 (2 pilots + 2 guards)");
    if (ofdm.cyclic_prefix < 0 || ofdm.cyclic_prefix >= ofdm.fft_size)
        throw config_error("ofdm cyclic_prefix must lie in [0, fft_size)");
    if (dbpsk.rrc_rolloff <= 0.0 || dbpsk.rrc_rolloff > 1.0 ||
        dqpsk.rrc_rolloff <= 0.0 || dqpsk.rrc_rolloff > 1.0)
        throw config_error("rrc_rolloff must lie in (0, 1]");
    if (gfsk.bt <= 0.0 || gmsk.bt <= 0.0) throw config_error("gaussian BT must be > 0");
    if (!(noise_floor_db < 0.0)) throw config_error("noise_floor_db must be negative");
}

std::vector<std::uint8_t> generate_bytes(std::uint64_t seed, std::size_t n) {
    if (n < 1) throw std::invalid_argument("generate_bytes: n must be >= 1");
    Rng rng(seed);
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes) b = rng.next_byte();
    return bytes;
}

std::vector<std::complex<double>> modulate(ModulationFamily family,
                                           std::span<const std::uint8_t> payload,
                                           const GenConfig& cfg) {
    if (payload.empty()) throw std::invalid_argument("modulate: payload must be non-empty");
    cfg.validate();
    switch (family) {
        case ModulationFamily::kOok: return modulate_ook(payload, cfg);
        case ModulationFamily::kGfsk: return modulate_gaussian_fsk(payload, cfg.gfsk, cfg);
        case ModulationFamily::kGmsk: return modulate_gaussian_fsk(payload, cfg.gmsk, cfg);
        case ModulationFamily::kDbpsk: return modulate_dbpsk(payload, cfg);
        case ModulationFamily::kDqpsk: return modulate_dqpsk(payload, cfg);
        case ModulationFamily::kOfdm: return modulate_ofdm(payload, cfg);
    }
    throw config_error("modulate: unsupported modulation family");
}

std::size_t payload_bytes_for(ModulationFamily family, const GenConfig& cfg,
                              std::size_t target_samples) {
    const auto sps = static_cast<std::size_t>(cfg.samples_per_symbol);
    const std::size_t target_symbols = (target_samples + sps - 1) / sps;
    auto bytes_for = [](std::size_t symbols, std::size_t trim, std::size_t sym_per_byte) {
        return (symbols + trim + sym_per_byte - 1) / sym_per_byte + 1;
    };
    switch (family) {
        case ModulationFamily::kOok:
            return bytes_for(target_symbols, 0, 8);
        case ModulationFamily::kGfsk:
            return bytes_for(target_symbols, cfg.gfsk.gauss_span_symbols, 8);
        case ModulationFamily::kGmsk:
            return bytes_for(target_symbols, cfg.gmsk.gauss_span_symbols, 8);
        case ModulationFamily::kDbpsk:
            return bytes_for(target_symbols, cfg.dbpsk.rrc_span_symbols, 8);
        case ModulationFamily::kDqpsk:
            return bytes_for(target_symbols, cfg.dqpsk.rrc_span_symbols, 4);
        case ModulationFamily::kOfdm: {
            const auto block = static_cast<std::size_t>(cfg.ofdm.fft_size + cfg.ofdm.cyclic_prefix);
            const std::size_t n_symbols = (target_samples + block - 1) / block;
            const std::size_t bits = n_symbols * static_cast<std::size_t>(cfg.ofdm.data_subcarriers) * 2;
            return bits / 8 + 3;
        }
    }
    throw config_error("payload_bytes_for: unsupported modulation family");
}

} // namespace amc
