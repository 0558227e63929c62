#ifndef AMC_NETWORK_HPP
#define AMC_NETWORK_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amc/autoencoder.hpp"
#include "amc/whiten.hpp"

namespace amc {

// One named experiment architecture. rho entries without a value mean "no
// sparsity penalty on that layer" (beta forced to 0 there).
struct ArchitectureSpec {
    std::string name;
    std::vector<int> hidden_sizes;
    std::vector<std::optional<double>> rho;
    std::vector<double> corruption; // c_l per layer
    int l2_lambda = 0;              // 0 or 1
    double dropout_p = 0.0;         // MLP baseline only
    bool pretrained = true;         // false for Softmax / MLP baselines

    int layer_count() const { return static_cast<int>(hidden_sizes.size()); }
    void validate() const;
};

// Table presets: Softmax, MLP, A, B, C, D, E. Corruption is 0.2 for layer 1
// and 0.3 from layer 2 on (the table stops at layer 2; deeper layers reuse
// 0.3, which is a documented guess). Throws config_error for unknown names.
ArchitectureSpec architecture_preset(const std::string& name);

// Dataset/width shrink for desk-scale runs: counts scale linearly, hidden
// widths become max(128, round(w*scale)) below full scale. Not a paper knob.
ArchitectureSpec scaled_architecture(ArchitectureSpec spec, double scale);

// Pretrained encode stack plus softmax head over whitened inputs.
struct StackedNetwork {
    WhiteningFilter whitening;
    std::vector<AutoencoderLayer> layers; // encode halves only
    Eigen::MatrixXd softmax_W;            // classes x top_dim
    Eigen::VectorXd softmax_b;

    int classes() const { return static_cast<int>(softmax_b.size()); }
    int input_dim() const { return whitening.dim(); }
    int top_dim() const {
        return layers.empty() ? input_dim() : layers.back().hidden();
    }
    void validate() const; // chained dimension check

    // Raw interleaved samples in, class probabilities out (applies the
    // whitening filter first; corruption is identity at inference).
    Eigen::VectorXd forward(std::span<const float> raw) const;
    Eigen::VectorXd forward_whitened(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward_whitened_batch(const Eigen::MatrixXd& x) const;

    // argmax of forward; ties break toward the lowest class index.
    int predict(std::span<const float> raw) const;
    int predict_whitened(const Eigen::VectorXd& x) const;
};

// Column-wise softmax of a logit matrix.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

struct StackPretrainLog {
    std::vector<PretrainLog> per_layer;
};

// Greedy layer-wise pretraining: layer l trains on the clean (uncorrupted)
// activations of the already-trained layer l-1; corruption applies only
// inside each layer's own training. Softmax head starts at zero.
StackedNetwork pretrain_stack(const ArchitectureSpec& spec, const WhiteningFilter& whitening,
                              const Eigen::MatrixXd& whitened_train, double beta_sparsity,
                              const PretrainOptions& options, int classes, Rng rng,
                              StackPretrainLog* log = nullptr,
                              CorruptionSpec::Kind corruption_kind = CorruptionSpec::Kind::kMask);

// Random-init network for the no-pretraining baselines (Softmax, MLP).
StackedNetwork init_network(const ArchitectureSpec& spec, const WhiteningFilter& whitening,
                            int classes, Rng rng);

struct FinetuneOptions {
    int epochs = 300;
    int batch_size = 100;
    double eta = 0.03; // plain constant-rate SGD
};

struct FinetuneLog {
    std::vector<double> epoch_nll; // mean per-batch data loss per epoch
};

// Supervised fine-tuning of all layers plus the head by backpropagation of
// the per-batch loss (sum NLL_i + lambda * sum of squared weights) / B,
// biases excluded from the penalty. lambda is the 0/1 switch from the
// architecture; the regularizer is averaged with the batch like the data
// term, so a one-sample step decays weights by exactly eta*2*lambda*W.
void finetune(StackedNetwork& net, const Eigen::MatrixXd& whitened_train,
              std::span<const std::uint8_t> labels, int l2_lambda,
              const FinetuneOptions& options, Rng rng, FinetuneLog* log = nullptr);

// Dropout MLP baseline: same loss, inverted dropout with keep probability
// 1-p on every hidden activation during training only. p = 0 degenerates
// to plain finetune.
void finetune_mlp(StackedNetwork& net, const Eigen::MatrixXd& whitened_train,
                  std::span<const std::uint8_t> labels, double dropout_p, int l2_lambda,
                  const FinetuneOptions& options, Rng rng, FinetuneLog* log = nullptr);

// The per-batch loss finetune steps on (mean NLL + lambda * sum ||W||^2
// / batch size), exposed for gradient checking.
double finetune_loss(const StackedNetwork& net, const Eigen::MatrixXd& batch,
                     std::span<const std::uint8_t> labels, int l2_lambda);

} // namespace amc

#endif // AMC_NETWORK_HPP
