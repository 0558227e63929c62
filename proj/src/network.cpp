#include "amc/network.hpp"

#include <algorithm>
#include <cmath>

#include "amc/errors.hpp"

namespace amc {
namespace {

Eigen::VectorXd to_eigen(std::span<const float> raw) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(raw.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = raw[static_cast<std::size_t>(i)];
    return v;
}

void check(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

} // namespace

void ArchitectureSpec::validate() const {
    const std::size_t n = hidden_sizes.size();
    if (rho.size() != n || corruption.size() != n)
        throw config_error("architecture: per-layer fields must match hidden layer count");
    for (int h : hidden_sizes)
        if (h < 1) throw config_error("architecture: hidden sizes must be positive");
    for (const auto& r : rho)
        if (r && (*r < 0.0 || *r >= 1.0))
            throw config_error("architecture: sparsity targets must lie in [0, 1)");
    for (double c : corruption)
        if (c < 0.0 || c > 1.0)
            throw config_error("architecture: corruption probabilities must lie in [0, 1]");
    if (l2_lambda != 0 && l2_lambda != 1)
        throw config_error("architecture: l2 switch must be 0 or 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw config_error("architecture: dropout probability must lie in [0, 1)");
}

ArchitectureSpec architecture_preset(const std::string& name) {
    auto corruption_for = [](std::size_t layers) {
        std::vector<double> c(layers, 0.3);
        if (!c.empty()) c[0] = 0.2;
        return c;
    };
    ArchitectureSpec spec;
    spec.name = name;
    if (name == "Softmax") {
        spec.pretrained = false;
    } else if (name == "MLP") {
        spec.hidden_sizes = {500, 500};
        spec.rho = {std::nullopt, std::nullopt};
        spec.l2_lambda = 1;
        spec.dropout_p = 0.5;
        spec.pretrained = false;
    } else if (name == "A") {
        spec.hidden_sizes = {500};
        spec.rho = {0.05};
    } else if (name == "B") {
        spec.hidden_sizes = {500};
        spec.rho = {0.05};
        spec.l2_lambda = 1;
    } else if (name == "C") {
        spec.hidden_sizes = {500, 500};
        spec.rho = {0.05, std::nullopt};
    } else if (name == "D") {
        spec.hidden_sizes = {500, 500};
        spec.rho = {0.05, 0.00};
        spec.l2_lambda = 1;
    } else if (name == "E") {
        spec.hidden_sizes = {500, 500, 250, 250, 100};
        spec.rho = {0.05, 0.00, 0.10, 0.00, 0.25};
        spec.l2_lambda = 1;
    } else {
        throw config_error("unknown architecture preset: " + name);
    }
    spec.corruption = corruption_for(spec.hidden_sizes.size());
    spec.validate();
    return spec;
}

ArchitectureSpec scaled_architecture(ArchitectureSpec spec, double scale) {
    if (scale <= 0.0) throw config_error("scale must be > 0");
    if (scale >= 1.0) return spec;
    for (int& h : spec.hidden_sizes)
        h = std::max(128, static_cast<int>(std::lround(h * scale)));
    return spec;
}

void StackedNetwork::validate() const {
    int dim = input_dim();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].visible() != dim)
            throw std::invalid_argument("network: layer " + std::to_string(i + 1) +
                                        " input dimension mismatch");
        dim = layers[i].hidden();
    }
    if (softmax_W.cols() != dim || softmax_W.rows() != softmax_b.size())
        throw std::invalid_argument("network: softmax dimension mismatch");
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const Eigen::ArrayXd shifted = logits.col(c).array() - logits.col(c).maxCoeff();
        const Eigen::ArrayXd e = shifted.exp();
        p.col(c) = (e / e.sum()).matrix();
    }
    return p;
}

Eigen::VectorXd StackedNetwork::forward(std::span<const float> raw) const {
    return forward_whitened(whitening.apply(to_eigen(raw)));
}

Eigen::VectorXd StackedNetwork::forward_whitened(const Eigen::VectorXd& x) const {
    return forward_whitened_batch(x).col(0);
}

Eigen::MatrixXd StackedNetwork::forward_whitened_batch(const Eigen::MatrixXd& x) const {
    check(x.rows() == input_dim(), "forward: input dimension mismatch");
    Eigen::MatrixXd a = x;
    for (const auto& layer : layers) a = layer.encode_batch(a);
    return softmax_columns((softmax_W * a).colwise() + softmax_b);
}

int StackedNetwork::predict(std::span<const float> raw) const {
    return predict_whitened(whitening.apply(to_eigen(raw)));
}

int StackedNetwork::predict_whitened(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd p = forward_whitened(x);
    int best = 0;
    for (int k = 1; k < p.size(); ++k)
        if (p(k) > p(best)) best = k; // ties keep the lowest index
    return best;
}

StackedNetwork pretrain_stack(const ArchitectureSpec& spec, const WhiteningFilter& whitening,
                              const Eigen::MatrixXd& whitened_train, double beta_sparsity,
                              const PretrainOptions& options, int classes, Rng rng,
                              StackPretrainLog* log, CorruptionSpec::Kind corruption_kind) {
    spec.validate();
    check(whitened_train.rows() == whitening.dim(), "pretrain_stack: input dimension mismatch");

    StackedNetwork net;
    net.whitening = whitening;
    Eigen::MatrixXd activations = whitened_train;
    for (int l = 0; l < spec.layer_count(); ++l) {
        SparsitySpec sparsity;
        sparsity.rho = spec.rho[l].value_or(0.0);
        sparsity.beta = spec.rho[l] ? beta_sparsity : 0.0;
        CorruptionSpec corruption;
        corruption.p = spec.corruption[l];
        corruption.kind = corruption_kind;

        PretrainLog layer_log;
        AutoencoderLayer layer;
        try {
            layer = pretrain_layer(activations, spec.hidden_sizes[l], corruption, sparsity,
                                   options, rng.child("layer", static_cast<std::uint64_t>(l)),
                                   &layer_log);
        } catch (const training_error& e) {
            throw training_error(
                "pretrain_stack: layer " + std::to_string(l + 1) + ": " + e.what(), e.epoch());
        }
        // Next layer trains on clean activations; corruption only ever
        // applies inside the layer being trained.
        activations = layer.encode_batch(activations);
        net.layers.push_back(std::move(layer));
        if (log) log->per_layer.push_back(std::move(layer_log));
    }
    net.softmax_W = Eigen::MatrixXd::Zero(classes, net.top_dim());
    net.softmax_b = Eigen::VectorXd::Zero(classes);
    net.validate();
    return net;
}

StackedNetwork init_network(const ArchitectureSpec& spec, const WhiteningFilter& whitening,
                            int classes, Rng rng) {
    spec.validate();
    StackedNetwork net;
    net.whitening = whitening;
    int dim = whitening.dim();
    for (int l = 0; l < spec.layer_count(); ++l) {
        Rng layer_rng = rng.child("init-layer", static_cast<std::uint64_t>(l));
        net.layers.push_back(init_layer(dim, spec.hidden_sizes[l], layer_rng));
        dim = spec.hidden_sizes[l];
    }
    net.softmax_W = Eigen::MatrixXd::Zero(classes, dim);
    net.softmax_b = Eigen::VectorXd::Zero(classes);
    net.validate();
    return net;
}

namespace {

// Shared supervised loop; dropout_p = 0 is the plain path and draws no masks.
void finetune_impl(StackedNetwork& net, const Eigen::MatrixXd& x,
                   std::span<const std::uint8_t> labels, double dropout_p, int l2_lambda,
                   const FinetuneOptions& options, Rng rng, FinetuneLog* log) {
    net.validate();
    const Eigen::Index n = x.cols();
    check(static_cast<Eigen::Index>(labels.size()) == n, "finetune: labels/input size mismatch");
    for (std::uint8_t t : labels)
        check(t < net.classes(), "finetune: label out of range");
    if (options.epochs < 0) throw std::invalid_argument("finetune: epochs must be >= 0");
    if (options.batch_size < 1) throw std::invalid_argument("finetune: batch size must be >= 1");

    const std::size_t depth = net.layers.size();
    const double keep = 1.0 - dropout_p;
    Rng dropout_rng = rng.child("dropout");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    std::vector<Eigen::MatrixXd> h(depth);     // tanh outputs
    std::vector<Eigen::MatrixXd> act(depth);   // post-dropout activations
    std::vector<Eigen::MatrixXd> masks(depth); // inverted dropout masks

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        Rng order_rng = rng.child("order", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[order_rng.next_below(i)]);

        double epoch_nll = 0.0;
        Eigen::Index batches = 0;
        for (Eigen::Index start = 0; start < n; start += options.batch_size) {
            const Eigen::Index b = std::min<Eigen::Index>(options.batch_size, n - start);
            Eigen::MatrixXd batch(x.rows(), b);
            std::vector<std::uint8_t> batch_labels(static_cast<std::size_t>(b));
            for (Eigen::Index c = 0; c < b; ++c) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + c)];
                batch.col(c) = x.col(src);
                batch_labels[static_cast<std::size_t>(c)] = labels[static_cast<std::size_t>(src)];
            }

            const Eigen::MatrixXd* below = &batch;
            for (std::size_t l = 0; l < depth; ++l) {
                h[l] = net.layers[l].encode_batch(*below);
                if (dropout_p > 0.0) {
                    masks[l].resize(h[l].rows(), h[l].cols());
                    for (Eigen::Index c = 0; c < masks[l].cols(); ++c)
                        for (Eigen::Index r = 0; r < masks[l].rows(); ++r)
                            masks[l](r, c) =
                                dropout_rng.next_double() < dropout_p ? 0.0 : 1.0 / keep;
                    act[l] = h[l].cwiseProduct(masks[l]);
                } else {
                    act[l] = h[l];
                }
                below = &act[l];
            }
            const Eigen::MatrixXd probs =
                softmax_columns((net.softmax_W * *below).colwise() + net.softmax_b);

            double nll = 0.0;
            Eigen::MatrixXd dlogits = probs;
            for (Eigen::Index c = 0; c < b; ++c) {
                const int t = batch_labels[static_cast<std::size_t>(c)];
                nll -= std::log(std::max(probs(t, c), 1e-300));
                dlogits(t, c) -= 1.0;
            }
            nll /= static_cast<double>(b);
            dlogits /= static_cast<double>(b);
            epoch_nll += nll;
            ++batches;

            // Head, then back through the stack. The L2 penalty rides
            // inside the per-batch average like the data term; at full
            // per-step strength the decay equilibrium pins every weight
            // below ~|grad|/2 and no head can lift off a zero init.
            const double l2_grad = l2_lambda ? 2.0 / static_cast<double>(b) : 0.0;
            Eigen::MatrixXd grad_Ws = dlogits * below->transpose();
            if (l2_lambda) grad_Ws += l2_grad * net.softmax_W;
            const Eigen::VectorXd grad_bs = dlogits.rowwise().sum();
            Eigen::MatrixXd da = net.softmax_W.transpose() * dlogits;

            std::vector<Eigen::MatrixXd> grad_W(depth);
            std::vector<Eigen::VectorXd> grad_b(depth);
            for (std::size_t l = depth; l-- > 0;) {
                if (dropout_p > 0.0) da = da.cwiseProduct(masks[l]);
                const Eigen::MatrixXd dpre =
                    da.cwiseProduct((1.0 - h[l].array().square()).matrix());
                const Eigen::MatrixXd& input = l == 0 ? batch : act[l - 1];
                grad_W[l] = dpre * input.transpose();
                if (l2_lambda) grad_W[l] += l2_grad * net.layers[l].W;
                grad_b[l] = dpre.rowwise().sum();
                if (l > 0) da = net.layers[l].W.transpose() * dpre;
            }

            net.softmax_W -= options.eta * grad_Ws;
            net.softmax_b -= options.eta * grad_bs;
            for (std::size_t l = 0; l < depth; ++l) {
                net.layers[l].W -= options.eta * grad_W[l];
                net.layers[l].b_hidden -= options.eta * grad_b[l];
            }
        }

        bool finite = net.softmax_W.allFinite() && net.softmax_b.allFinite();
        for (const auto& layer : net.layers)
            finite = finite && layer.W.allFinite() && layer.b_hidden.allFinite();
        if (!finite) throw training_error("finetune: parameters diverged", epoch);
        if (log) log->epoch_nll.push_back(epoch_nll / std::max<Eigen::Index>(batches, 1));
    }
}

} // namespace

void finetune(StackedNetwork& net, const Eigen::MatrixXd& whitened_train,
              std::span<const std::uint8_t> labels, int l2_lambda,
              const FinetuneOptions& options, Rng rng, FinetuneLog* log) {
    finetune_impl(net, whitened_train, labels, 0.0, l2_lambda, options, rng, log);
}

void finetune_mlp(StackedNetwork& net, const Eigen::MatrixXd& whitened_train,
                  std::span<const std::uint8_t> labels, double dropout_p, int l2_lambda,
                  const FinetuneOptions& options, Rng rng, FinetuneLog* log) {
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw std::invalid_argument("finetune_mlp: dropout probability must lie in [0, 1)");
    finetune_impl(net, whitened_train, labels, dropout_p, l2_lambda, options, rng, log);
}

double finetune_loss(const StackedNetwork& net, const Eigen::MatrixXd& batch,
                     std::span<const std::uint8_t> labels, int l2_lambda) {
    check(static_cast<Eigen::Index>(labels.size()) == batch.cols(),
          "finetune_loss: labels/input size mismatch");
    const Eigen::MatrixXd probs = net.forward_whitened_batch(batch);
    double nll = 0.0;
    for (Eigen::Index c = 0; c < batch.cols(); ++c)
        nll -= std::log(std::max(probs(labels[static_cast<std::size_t>(c)], c), 1e-300));
    nll /= static_cast<double>(batch.cols());
    if (l2_lambda) {
        double l2 = net.softmax_W.squaredNorm();
        for (const auto& layer : net.layers) l2 += layer.W.squaredNorm();
        nll += l2 / static_cast<double>(batch.cols());
    }
    return nll;
}

} // namespace amc
