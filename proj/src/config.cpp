#include "amc/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "amc/errors.hpp"

namespace amc {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: invalid integer for " + key + ": '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: invalid number for " + key + ": '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: invalid seed for " + key + ": '" + value + "'");
    }
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

ExperimentConfig::ExperimentConfig() {
    for (double s = 20.0; s >= -20.0 - 1e-9; s -= 2.5) snr_grid.push_back(s);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "seed") gen.rng_seed = parse_u64(key, value);
    else if (key == "samples_per_symbol") gen.samples_per_symbol = static_cast<int>(parse_int(key, value));
    else if (key == "samples_per_vector") gen.samples_per_vector = static_cast<int>(parse_int(key, value));
    else if (key == "train_vectors_per_mod") gen.train_vectors_per_mod = static_cast<int>(parse_int(key, value));
    else if (key == "test_vectors_total") gen.test_vectors_total = static_cast<int>(parse_int(key, value));
    else if (key == "ook_amplitude") gen.ook.amplitude = parse_real(key, value);
    else if (key == "rrc_rolloff") {
        gen.dbpsk.rrc_rolloff = parse_real(key, value);
        gen.dqpsk.rrc_rolloff = gen.dbpsk.rrc_rolloff;
    } else if (key == "rrc_span_symbols") {
        gen.dbpsk.rrc_span_symbols = static_cast<int>(parse_int(key, value));
        gen.dqpsk.rrc_span_symbols = gen.dbpsk.rrc_span_symbols;
    } else if (key == "gfsk_modulation_index") gen.gfsk.modulation_index = parse_real(key, value);
    else if (key == "gfsk_bt") gen.gfsk.bt = parse_real(key, value);
    else if (key == "gmsk_modulation_index") gen.gmsk.modulation_index = parse_real(key, value);
    else if (key == "gmsk_bt") gen.gmsk.bt = parse_real(key, value);
    else if (key == "ofdm_fft_size") {
        gen.ofdm.fft_size = static_cast<int>(parse_int(key, value));
        gen.ofdm.data_subcarriers = gen.ofdm.fft_size - 4;
    } else if (key == "ofdm_cyclic_prefix") gen.ofdm.cyclic_prefix = static_cast<int>(parse_int(key, value));
    else if (key == "noise_floor_db") gen.noise_floor_db = parse_real(key, value);
    else if (key == "random_phase_per_vector") {
        if (value == "true" || value == "1") gen.random_phase_per_vector = true;
        else if (value == "false" || value == "0") gen.random_phase_per_vector = false;
        else throw config_error("config: random_phase_per_vector must be true or false");
    }
    else if (key == "arch") arch = value;
    else if (key == "scale") scale = parse_real(key, value);
    else if (key == "zca_epsilon") zca_epsilon = parse_real(key, value);
    else if (key == "corruption_kind") {
        if (value == "mask") corruption_kind = CorruptionSpec::Kind::kMask;
        else if (value == "signflip") corruption_kind = CorruptionSpec::Kind::kSignFlip;
        else throw config_error("config: corruption_kind must be mask or signflip");
    } else if (key == "sparsity_beta") sparsity_beta = parse_real(key, value);
    else if (key == "pretrain_epochs") pretrain_epochs = static_cast<int>(parse_int(key, value));
    else if (key == "pretrain_eta") pretrain_eta = parse_real(key, value);
    else if (key == "adagrad_eps") adagrad_eps = parse_real(key, value);
    else if (key == "batch_size") batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "finetune_epochs") finetune_epochs = static_cast<int>(parse_int(key, value));
    else if (key == "finetune_eta") finetune_eta = parse_real(key, value);
    else if (key == "dropout_p") dropout_p = parse_real(key, value);
    else if (key == "snr_grid") snr_grid = parse_snr_grid(value);
    else throw config_error("config: unknown key '" + key + "'");
}

std::string ExperimentConfig::dump() const {
    std::ostringstream out;
    out << "seed=" << gen.rng_seed << "\n";
    out << "samples_per_symbol=" << gen.samples_per_symbol << "\n";
    out << "samples_per_vector=" << gen.samples_per_vector << "\n";
    out << "train_vectors_per_mod=" << gen.train_vectors_per_mod << "\n";
    out << "test_vectors_total=" << gen.test_vectors_total << "\n";
    out << "ook_amplitude=" << format_real(gen.ook.amplitude) << "\n";
    out << "rrc_rolloff=" << format_real(gen.dbpsk.rrc_rolloff) << "\n";
    out << "rrc_span_symbols=" << gen.dbpsk.rrc_span_symbols << "\n";
    out << "gfsk_modulation_index=" << format_real(gen.gfsk.modulation_index) << "\n";
    out << "gfsk_bt=" << format_real(gen.gfsk.bt) << "\n";
    out << "gmsk_modulation_index=" << format_real(gen.gmsk.modulation_index) << "\n";
    out << "gmsk_bt=" << format_real(gen.gmsk.bt) << "\n";
    out << "ofdm_fft_size=" << gen.ofdm.fft_size << "\n";
    out << "ofdm_cyclic_prefix=" << gen.ofdm.cyclic_prefix << "\n";
    out << "noise_floor_db=" << format_real(gen.noise_floor_db) << "\n";
    out << "random_phase_per_vector=" << (gen.random_phase_per_vector ? "true" : "false") << "\n";
    out << "arch=" << arch << "\n";
    out << "scale=" << format_real(scale) << "\n";
    out << "zca_epsilon=" << format_real(zca_epsilon) << "\n";
    out << "corruption_kind="
        << (corruption_kind == CorruptionSpec::Kind::kMask ? "mask" : "signflip") << "\n";
    out << "sparsity_beta=" << format_real(sparsity_beta) << "\n";
    out << "pretrain_epochs=" << pretrain_epochs << "\n";
    out << "pretrain_eta=" << format_real(pretrain_eta) << "\n";
    out << "adagrad_eps=" << format_real(adagrad_eps) << "\n";
    out << "batch_size=" << batch_size << "\n";
    out << "finetune_epochs=" << finetune_epochs << "\n";
    out << "finetune_eta=" << format_real(finetune_eta) << "\n";
    out << "dropout_p=" << format_real(dropout_p) << "\n";
    out << "snr_grid=";
    for (std::size_t i = 0; i < snr_grid.size(); ++i)
        out << (i ? "," : "") << format_real(snr_grid[i]);
    out << "\n";
    return out.str();
}

GenConfig ExperimentConfig::scaled_gen() const {
    GenConfig g = gen;
    if (scale < 1.0) {
        g.train_vectors_per_mod = std::max<int>(
            1, static_cast<int>(std::lround(gen.train_vectors_per_mod * scale)));
        g.test_vectors_total = std::max<int>(
            kFamilyCount, static_cast<int>(std::lround(gen.test_vectors_total * scale)));
    }
    return g;
}

ArchitectureSpec ExperimentConfig::architecture() const {
    return scaled_architecture(architecture_preset(arch), scale);
}

PretrainOptions ExperimentConfig::pretrain_options() const {
    PretrainOptions o;
    o.epochs = pretrain_epochs;
    o.batch_size = batch_size;
    o.eta = pretrain_eta;
    o.ada_eps = adagrad_eps;
    return o;
}

FinetuneOptions ExperimentConfig::finetune_options() const {
    FinetuneOptions o;
    o.epochs = finetune_epochs;
    o.batch_size = batch_size;
    o.eta = finetune_eta;
    return o;
}

void ExperimentConfig::validate() const {
    gen.validate();
    architecture_preset(arch);
    if (scale <= 0.0) throw config_error("config: scale must be > 0");
    if (zca_epsilon <= 0.0) throw config_error("config: zca_epsilon must be > 0");
    if (sparsity_beta < 0.0) throw config_error("config: sparsity_beta must be >= 0");
    if (pretrain_epochs < 1 || finetune_epochs < 0)
        throw config_error("config: epoch counts out of range");
    if (pretrain_eta <= 0.0 || finetune_eta <= 0.0)
        throw config_error("config: learning rates must be > 0");
    if (batch_size < 1) throw config_error("config: batch_size must be >= 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw config_error("config: dropout_p must lie in [0, 1)");
    if (snr_grid.empty()) throw config_error("config: snr_grid must be non-empty");
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path.string());
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: " + path.string() + ":" + std::to_string(line_no) +
                               ": expected key=value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::vector<double> parse_snr_grid(const std::string& text) {
    std::vector<double> grid;
    const auto parse_one = [&](const std::string& tok) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw config_error("snr grid: invalid number '" + tok + "'");
        }
    };

    const auto colons = std::count(text.begin(), text.end(), ':');
    if (colons == 2) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        const double start = parse_one(trim(text.substr(0, c1)));
        const double stop = parse_one(trim(text.substr(c1 + 1, c2 - c1 - 1)));
        const double step = parse_one(trim(text.substr(c2 + 1)));
        if (step <= 0.0) throw config_error("snr grid: step must be > 0");
        const double dir = stop >= start ? 1.0 : -1.0;
        for (double v = start; dir * (v - stop) <= 1e-9; v += dir * step) grid.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) grid.push_back(parse_one(tok));
        }
    }
    if (grid.empty()) throw config_error("snr grid: empty");
    return grid;
}

} // namespace amc
