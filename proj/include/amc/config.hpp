#ifndef AMC_CONFIG_HPP
#define AMC_CONFIG_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "amc/autoencoder.hpp"
#include "amc/modulation.hpp"
#include "amc/network.hpp"

namespace amc {

// Everything an experiment run needs, as flat key=value text. Defaults
// follow the tables where the tables give a value; the rest are the
// documented fill-ins. Unknown keys are rejected.
struct ExperimentConfig {
    GenConfig gen;

    std::string arch = "D";
    double scale = 1.0;

    double zca_epsilon = 1e-5; // relative to the mean eigenvalue

    CorruptionSpec::Kind corruption_kind = CorruptionSpec::Kind::kMask;
    // The tables fix the corruption and sparsity targets but not the
    // penalty weight; 3.0 drives the rho=0 layers of presets D/E into
    // tanh saturation (dead features), 1.0 keeps them alive.
    double sparsity_beta = 1.0;
    int pretrain_epochs = 15;
    double pretrain_eta = 0.01;
    double adagrad_eps = 1e-8;
    int batch_size = 100;

    int finetune_epochs = 300;
    double finetune_eta = 0.03;
    double dropout_p = 0.5; // MLP baseline only

    std::vector<double> snr_grid; // defaults to 20..-20 dB, step 2.5

    ExperimentConfig();

    // Assign one key; throws config_error on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);

    // Full key=value block, one per line, stable order.
    std::string dump() const;

    // Effective values with --scale applied (counts linear, widths via
    // scaled_architecture).
    GenConfig scaled_gen() const;
    ArchitectureSpec architecture() const;

    PretrainOptions pretrain_options() const;
    FinetuneOptions finetune_options() const;

    void validate() const;
};

// '#' starts a comment; blank lines are skipped.
ExperimentConfig load_config_file(const std::filesystem::path& path);

// "start:stop:step" (step > 0, direction from start/stop) or a comma list.
std::vector<double> parse_snr_grid(const std::string& text);

} // namespace amc

#endif // AMC_CONFIG_HPP
