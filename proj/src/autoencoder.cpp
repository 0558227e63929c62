#include "amc/autoencoder.hpp"

#include <cmath>
#include <stdexcept>

#include "amc/errors.hpp"

namespace amc {
namespace {

constexpr double kRhoClamp = 1e-6;

void check_dim(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

Eigen::MatrixXd tanh_of(const Eigen::MatrixXd& a) { return a.array().tanh().matrix(); }

} // namespace

Eigen::VectorXd AutoencoderLayer::encode(const Eigen::VectorXd& x) const {
    check_dim(x.size() == W.cols(), "encode: input dimension mismatch");
    return ((W * x + b_hidden).array().tanh()).matrix();
}

Eigen::MatrixXd AutoencoderLayer::encode_batch(const Eigen::MatrixXd& x) const {
    check_dim(x.rows() == W.cols(), "encode: input dimension mismatch");
    return tanh_of((W * x).colwise() + b_hidden);
}

Eigen::VectorXd AutoencoderLayer::decode(const Eigen::VectorXd& y) const {
    check_dim(y.size() == W.rows(), "decode: input dimension mismatch");
    return ((W.transpose() * y + b_visible).array().tanh()).matrix();
}

Eigen::MatrixXd AutoencoderLayer::decode_batch(const Eigen::MatrixXd& y) const {
    check_dim(y.rows() == W.rows(), "decode: input dimension mismatch");
    return tanh_of((W.transpose() * y).colwise() + b_visible);
}

AutoencoderLayer init_layer(int visible, int hidden, Rng& rng) {
    check_dim(visible > 0 && hidden > 0, "init_layer: dimensions must be positive");
    const double bound = std::sqrt(6.0 / (visible + hidden));
    AutoencoderLayer layer;
    layer.W.resize(hidden, visible);
    for (int i = 0; i < hidden; ++i)
        for (int j = 0; j < visible; ++j)
            layer.W(i, j) = (2.0 * rng.next_double() - 1.0) * bound;
    layer.b_hidden = Eigen::VectorXd::Zero(hidden);
    layer.b_visible = Eigen::VectorXd::Zero(visible);
    return layer;
}

Eigen::MatrixXd corruption_mask(Eigen::Index rows, Eigen::Index cols,
                                const CorruptionSpec& spec, Rng& rng) {
    if (spec.p < 0.0 || spec.p > 1.0)
        throw std::invalid_argument("corruption: p must lie in [0, 1]");
    const double corrupted = spec.kind == CorruptionSpec::Kind::kMask ? 0.0 : -1.0;
    Eigen::MatrixXd mask(rows, cols);
    // Column-major fill matches the storage order of the batches.
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            mask(r, c) = rng.next_double() < spec.p ? corrupted : 1.0;
    return mask;
}

double kl_divergence(double rho, double rho_k) {
    double kl = 0.0;
    if (rho > 0.0) kl += rho * std::log(rho / rho_k);
    if (rho < 1.0) kl += (1.0 - rho) * std::log((1.0 - rho) / (1.0 - rho_k));
    return kl;
}

Eigen::VectorXd mean_rescaled_activation(const Eigen::MatrixXd& y) {
    Eigen::VectorXd rho_k = ((y.array() + 1.0) / 2.0).rowwise().mean().matrix();
    return rho_k.cwiseMax(kRhoClamp).cwiseMin(1.0 - kRhoClamp);
}

namespace {

LayerCost cost_and_gradients(const AutoencoderLayer& layer, const Eigen::MatrixXd& batch,
                             const Eigen::MatrixXd& mask, const SparsitySpec& sparsity,
                             LayerGradients* grads) {
    check_dim(batch.cols() > 0, "layer_cost: batch must be non-empty");
    check_dim(batch.rows() == mask.rows() && batch.cols() == mask.cols(),
              "layer_cost: mask shape mismatch");
    const double batch_n = static_cast<double>(batch.cols());

    const Eigen::MatrixXd corrupted = batch.cwiseProduct(mask);
    const Eigen::MatrixXd y = layer.encode_batch(corrupted);
    const Eigen::MatrixXd z = layer.decode_batch(y);

    LayerCost cost;
    cost.reconstruction = (z - batch).squaredNorm() / batch_n;
    Eigen::VectorXd raw_mean;
    if (sparsity.beta > 0.0) {
        raw_mean = ((y.array() + 1.0) / 2.0).rowwise().mean().matrix();
        double kl = 0.0;
        for (Eigen::Index k = 0; k < raw_mean.size(); ++k) {
            const double rho_k =
                std::min(1.0 - kRhoClamp, std::max(kRhoClamp, raw_mean(k)));
            kl += kl_divergence(sparsity.rho, rho_k);
        }
        cost.sparsity = sparsity.beta * kl;
    }
    if (!grads) return cost;

    // Reconstruction term through the decode path.
    const Eigen::MatrixXd dz = (2.0 / batch_n) * (z - batch);
    const Eigen::MatrixXd dpre_dec = dz.cwiseProduct((1.0 - z.array().square()).matrix());

    // Back into the hidden layer: decode reuses W, plus the KL term's
    // direct dependence on the batch-mean activation.
    Eigen::MatrixXd dy = layer.W * dpre_dec;
    if (sparsity.beta > 0.0) {
        for (Eigen::Index k = 0; k < raw_mean.size(); ++k) {
            // Clamped rho_k has zero derivative.
            if (raw_mean(k) <= kRhoClamp || raw_mean(k) >= 1.0 - kRhoClamp) continue;
            const double rho_k = raw_mean(k);
            const double dkl = -sparsity.rho / rho_k + (1.0 - sparsity.rho) / (1.0 - rho_k);
            dy.row(k).array() += sparsity.beta * dkl / (2.0 * batch_n);
        }
    }
    const Eigen::MatrixXd dpre_enc = dy.cwiseProduct((1.0 - y.array().square()).matrix());

    grads->dW = dpre_enc * corrupted.transpose() + y * dpre_dec.transpose();
    grads->db_hidden = dpre_enc.rowwise().sum();
    grads->db_visible = dpre_dec.rowwise().sum();
    return cost;
}

} // namespace

LayerCost layer_cost(const AutoencoderLayer& layer, const Eigen::MatrixXd& batch,
                     const Eigen::MatrixXd& mask, const SparsitySpec& sparsity) {
    return cost_and_gradients(layer, batch, mask, sparsity, nullptr);
}

LayerGradients layer_gradients(const AutoencoderLayer& layer, const Eigen::MatrixXd& batch,
                               const Eigen::MatrixXd& mask, const SparsitySpec& sparsity) {
    LayerGradients g;
    cost_and_gradients(layer, batch, mask, sparsity, &g);
    return g;
}

AdaGradState AdaGradState::for_layer(const AutoencoderLayer& layer, double eta, double eps) {
    AdaGradState s;
    s.acc_W = Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols());
    s.acc_b_hidden = Eigen::VectorXd::Zero(layer.b_hidden.size());
    s.acc_b_visible = Eigen::VectorXd::Zero(layer.b_visible.size());
    s.eta = eta;
    s.eps = eps;
    return s;
}

void adagrad_step(AdaGradState& state, AutoencoderLayer& layer, const LayerGradients& grads) {
    check_dim(state.acc_W.rows() == layer.W.rows() && state.acc_W.cols() == layer.W.cols(),
              "adagrad_step: state/layer shape mismatch");
    state.acc_W.array() += grads.dW.array().square();
    state.acc_b_hidden.array() += grads.db_hidden.array().square();
    state.acc_b_visible.array() += grads.db_visible.array().square();
    layer.W.array() -= state.eta * grads.dW.array() / (state.acc_W.array().sqrt() + state.eps);
    layer.b_hidden.array() -=
        state.eta * grads.db_hidden.array() / (state.acc_b_hidden.array().sqrt() + state.eps);
    layer.b_visible.array() -=
        state.eta * grads.db_visible.array() / (state.acc_b_visible.array().sqrt() + state.eps);
}

AutoencoderLayer pretrain_layer(const Eigen::MatrixXd& inputs, int hidden,
                                const CorruptionSpec& corruption, const SparsitySpec& sparsity,
                                const PretrainOptions& options, Rng rng, PretrainLog* log) {
    const Eigen::Index n = inputs.cols();
    check_dim(n > 0, "pretrain_layer: no inputs");
    if (options.epochs < 1) throw std::invalid_argument("pretrain_layer: epochs must be >= 1");
    if (options.batch_size < 1) throw std::invalid_argument("pretrain_layer: batch size must be >= 1");

    Rng init_rng = rng.child("init");
    AutoencoderLayer layer = init_layer(static_cast<int>(inputs.rows()), hidden, init_rng);
    AdaGradState ada = AdaGradState::for_layer(layer, options.eta, options.ada_eps);

    // Leading columns are held out for cost monitoring only.
    const Eigen::Index monitor_n =
        std::min<Eigen::Index>(options.monitor_cap, std::max<Eigen::Index>(1, n / 20));
    const Eigen::Index train_n = n - monitor_n > 0 ? n - monitor_n : n;
    const Eigen::Index train_begin = n - monitor_n > 0 ? monitor_n : 0;
    const Eigen::MatrixXd monitor = inputs.leftCols(monitor_n);
    Rng monitor_rng = rng.child("monitor-mask");
    const Eigen::MatrixXd monitor_mask =
        corruption_mask(monitor.rows(), monitor.cols(), corruption, monitor_rng);

    if (log) log->monitor_initial = layer_cost(layer, monitor, monitor_mask, sparsity).total();

    Rng mask_rng = rng.child("mask");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(train_n));
    for (Eigen::Index i = 0; i < train_n; ++i) order[static_cast<std::size_t>(i)] = train_begin + i;

    Eigen::MatrixXd batch(inputs.rows(), options.batch_size);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        Rng order_rng = rng.child("order", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[order_rng.next_below(i)]);

        double epoch_cost = 0.0;
        Eigen::Index batches = 0;
        for (Eigen::Index start = 0; start < train_n; start += options.batch_size) {
            const Eigen::Index b = std::min<Eigen::Index>(options.batch_size, train_n - start);
            batch.resize(inputs.rows(), b);
            for (Eigen::Index c = 0; c < b; ++c)
                batch.col(c) = inputs.col(order[static_cast<std::size_t>(start + c)]);
            const Eigen::MatrixXd mask = corruption_mask(batch.rows(), b, corruption, mask_rng);
            LayerGradients grads;
            epoch_cost += cost_and_gradients(layer, batch, mask, sparsity, &grads).total();
            adagrad_step(ada, layer, grads);
            ++batches;
        }
        if (!layer.W.allFinite() || !layer.b_hidden.allFinite() || !layer.b_visible.allFinite())
            throw training_error("pretrain_layer: parameters diverged", epoch);
        if (log) log->epoch_cost.push_back(epoch_cost / static_cast<double>(batches));
    }

    if (log) log->monitor_final = layer_cost(layer, monitor, monitor_mask, sparsity).total();
    return layer;
}

} // namespace amc
