#ifndef AMC_AUTOENCODER_HPP
#define AMC_AUTOENCODER_HPP

#include <vector>

#include <Eigen/Core>

#include "amc/rng.hpp"

namespace amc {

// Tied-weight denoising autoencoder layer.
//   encode: y = tanh(W x + b_hidden)
//   decode: z = tanh(W^T y + b_visible)
// The same W serves both directions; there is no separate decode matrix.
struct AutoencoderLayer {
    Eigen::MatrixXd W;         // hidden x visible
    Eigen::VectorXd b_hidden;  // encode bias
    Eigen::VectorXd b_visible; // decode bias

    int visible() const { return static_cast<int>(W.cols()); }
    int hidden() const { return static_cast<int>(W.rows()); }

    Eigen::VectorXd encode(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& x) const; // columns = vectors
    Eigen::VectorXd decode(const Eigen::VectorXd& y) const;
    Eigen::MatrixXd decode_batch(const Eigen::MatrixXd& y) const;
};

// W uniform on +-sqrt(6/(visible+hidden)), biases zero.
AutoencoderLayer init_layer(int visible, int hidden, Rng& rng);

struct CorruptionSpec {
    enum class Kind { kMask, kSignFlip };
    double p = 0.2;          // per-component corruption probability
    Kind kind = Kind::kMask; // mask-to-zero is the default denoising noise
};

// Multiplicative corruption mask (entries 1, 0 for kMask / -1 for kSignFlip).
Eigen::MatrixXd corruption_mask(Eigen::Index rows, Eigen::Index cols,
                                const CorruptionSpec& spec, Rng& rng);

inline Eigen::MatrixXd corrupt(const Eigen::MatrixXd& x, const CorruptionSpec& spec, Rng& rng) {
    return x.cwiseProduct(corruption_mask(x.rows(), x.cols(), spec, rng));
}

// Sparsity target and weight in the rescaled activation space (1+y)/2.
struct SparsitySpec {
    double rho = 0.05; // target mean rescaled activation, in [0, 1)
    double beta = 3.0; // penalty weight, >= 0; 0 disables the term
};

// KL(rho || rho_k) for Bernoulli means, natural log, 0*log0 = 0.
double kl_divergence(double rho, double rho_k);

// Batch-mean rescaled activations, clamped away from {0,1} so the KL term
// stays finite. One entry per hidden unit; columns of y are examples.
Eigen::VectorXd mean_rescaled_activation(const Eigen::MatrixXd& y);

struct LayerCost {
    double reconstruction = 0.0; // <|z_i - x_i|^2> over the batch
    double sparsity = 0.0;       // beta * sum_k KL(rho, rho_k)
    double total() const { return reconstruction + sparsity; }
};

// Cost of one batch under a fixed corruption mask. Columns of batch are
// uncorrupted inputs; reconstruction error is measured against them.
LayerCost layer_cost(const AutoencoderLayer& layer, const Eigen::MatrixXd& batch,
                     const Eigen::MatrixXd& mask, const SparsitySpec& sparsity);

struct LayerGradients {
    Eigen::MatrixXd dW;
    Eigen::VectorXd db_hidden;
    Eigen::VectorXd db_visible;
};

// Exact gradient of layer_cost for the same fixed mask, including the
// tied-weight contribution from both paths and the KL dependence on
// rho_k(W, b_hidden).
LayerGradients layer_gradients(const AutoencoderLayer& layer, const Eigen::MatrixXd& batch,
                               const Eigen::MatrixXd& mask, const SparsitySpec& sparsity);

// Per-parameter AdaGrad: acc += g^2, param -= eta * g / (sqrt(acc) + eps).
struct AdaGradState {
    Eigen::MatrixXd acc_W;
    Eigen::VectorXd acc_b_hidden;
    Eigen::VectorXd acc_b_visible;
    double eta = 0.01;
    double eps = 1e-8;

    static AdaGradState for_layer(const AutoencoderLayer& layer, double eta, double eps);
};

void adagrad_step(AdaGradState& state, AutoencoderLayer& layer, const LayerGradients& grads);

struct PretrainOptions {
    int epochs = 15;
    int batch_size = 100;
    double eta = 0.01;
    double ada_eps = 1e-8;
    // Held-out slice used only for cost monitoring: min(cap, 5% of inputs).
    int monitor_cap = 500;
};

struct PretrainLog {
    std::vector<double> epoch_cost; // mean batch cost per epoch
    double monitor_initial = 0.0;   // held-out cost before training
    double monitor_final = 0.0;     // and after
};

// Unsupervised training of one layer on the given inputs (columns).
// Deterministic for a fixed rng. Throws training_error on divergence.
AutoencoderLayer pretrain_layer(const Eigen::MatrixXd& inputs, int hidden,
                                const CorruptionSpec& corruption, const SparsitySpec& sparsity,
                                const PretrainOptions& options, Rng rng,
                                PretrainLog* log = nullptr);

} // namespace amc

#endif // AMC_AUTOENCODER_HPP
