#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "amc/autoencoder.hpp"
#include "amc/dataset.hpp"
#include "amc/errors.hpp"

using namespace amc;

namespace {

AutoencoderLayer random_layer(int visible, int hidden, std::uint64_t seed, double scale = 0.5) {
    Rng rng(seed);
    AutoencoderLayer layer = init_layer(visible, hidden, rng);
    layer.W *= scale;
    for (int i = 0; i < hidden; ++i) layer.b_hidden(i) = 0.1 * rng.next_normal();
    for (int j = 0; j < visible; ++j) layer.b_visible(j) = 0.1 * rng.next_normal();
    return layer;
}

Eigen::MatrixXd random_batch(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) x(r, c) = 0.8 * rng.next_normal();
    return x;
}

// Clean-room evaluation of the layer cost with plain loops.
double naive_layer_cost(const AutoencoderLayer& layer, const Eigen::MatrixXd& batch,
                        const Eigen::MatrixXd& mask, const SparsitySpec& sp) {
    const int v = layer.visible(), h = layer.hidden();
    const int n = static_cast<int>(batch.cols());
    std::vector<std::vector<double>> y(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(h)));
    double recon = 0.0;
    for (int c = 0; c < n; ++c) {
        for (int i = 0; i < h; ++i) {
            double a = layer.b_hidden(i);
            for (int j = 0; j < v; ++j) a += layer.W(i, j) * batch(j, c) * mask(j, c);
            y[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = std::tanh(a);
        }
        for (int j = 0; j < v; ++j) {
            double a = layer.b_visible(j);
            for (int i = 0; i < h; ++i)
                a += layer.W(i, j) * y[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
            const double diff = std::tanh(a) - batch(j, c);
            recon += diff * diff;
        }
    }
    recon /= n;

    double kl_sum = 0.0;
    if (sp.beta > 0.0) {
        for (int i = 0; i < h; ++i) {
            double rho_k = 0.0;
            for (int c = 0; c < n; ++c)
                rho_k += (1.0 + y[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]) / 2.0;
            rho_k /= n;
            rho_k = std::min(1.0 - 1e-6, std::max(1e-6, rho_k));
            double kl = 0.0;
            if (sp.rho > 0.0) kl += sp.rho * std::log(sp.rho / rho_k);
            if (sp.rho < 1.0) kl += (1.0 - sp.rho) * std::log((1.0 - sp.rho) / (1.0 - rho_k));
            kl_sum += kl;
        }
    }
    return recon + sp.beta * kl_sum;
}

} // namespace

TEST_CASE("KL divergence matches hand-computed values") {
    CHECK(kl_divergence(0.05, 0.05) == 0.0);
    CHECK(kl_divergence(0.05, 0.5) == doctest::Approx(0.4946319372140727).epsilon(1e-12));
    CHECK(kl_divergence(0.0, 0.3) == doctest::Approx(0.3566749439387324).epsilon(1e-12));
}

TEST_CASE("KL divergence is non-negative, zero only at equality") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const double rho = rng.next_double() * 0.98;
        const double rho_k = 1e-6 + rng.next_double() * (1.0 - 2e-6);
        const double kl = kl_divergence(rho, rho_k);
        CHECK(kl >= 0.0);
        if (std::abs(rho - rho_k) > 1e-3) CHECK(kl > 0.0);
    }
}

TEST_CASE("KL derivative vanishes at rho_k = rho") {
    const double rho = 0.05, h = 1e-6;
    const double fd = (kl_divergence(rho, rho + h) - kl_divergence(rho, rho - h)) / (2 * h);
    CHECK(std::abs(fd) < 1e-6);
}

TEST_CASE("encode/decode basics") {
    AutoencoderLayer zero;
    zero.W = Eigen::MatrixXd::Zero(3, 4);
    zero.b_hidden = Eigen::VectorXd::Zero(3);
    zero.b_visible = Eigen::VectorXd::Zero(4);
    CHECK(zero.encode(Eigen::VectorXd::Ones(4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.decode(Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() == 0.0);

    AutoencoderLayer scalar;
    scalar.W = Eigen::MatrixXd::Constant(1, 1, 1.0);
    scalar.b_hidden = Eigen::VectorXd::Constant(1, 0.5);
    scalar.b_visible = Eigen::VectorXd::Zero(1);
    CHECK(scalar.encode(Eigen::VectorXd::Constant(1, 0.5))(0) ==
          doctest::Approx(0.7615941559557649).epsilon(1e-12)); // tanh(1)

    AutoencoderLayer scalar2;
    scalar2.W = Eigen::MatrixXd::Constant(1, 1, 2.0);
    scalar2.b_hidden = Eigen::VectorXd::Zero(1);
    scalar2.b_visible = Eigen::VectorXd::Zero(1);
    CHECK(scalar2.decode(Eigen::VectorXd::Constant(1, 0.5))(0) ==
          doctest::Approx(0.7615941559557649).epsilon(1e-12));

    CHECK_THROWS_AS(zero.encode(Eigen::VectorXd::Zero(5)), std::invalid_argument);
    CHECK_THROWS_AS(zero.decode(Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("activations stay inside (-1, 1) and round-trip dimensions") {
    const AutoencoderLayer layer = random_layer(6, 9, 2, 2.0);
    const Eigen::MatrixXd x = random_batch(6, 40, 3) * 2.0;
    const Eigen::MatrixXd y = layer.encode_batch(x);
    CHECK(y.cwiseAbs().maxCoeff() < 1.0);
    const Eigen::MatrixXd z = layer.decode_batch(y);
    CHECK(z.rows() == x.rows());
    CHECK(z.cols() == x.cols());
}

TEST_CASE("corruption edge cases and rate") {
    Rng rng(6);
    const Eigen::MatrixXd x = random_batch(10, 10, 7);

    CorruptionSpec none{0.0};
    CHECK((corrupt(x, none, rng) - x).cwiseAbs().maxCoeff() == 0.0);

    CorruptionSpec all{1.0};
    CHECK(corrupt(x, all, rng).cwiseAbs().maxCoeff() == 0.0);

    CorruptionSpec p02{0.2};
    const Eigen::MatrixXd mask = corruption_mask(1000, 100, p02, rng);
    const double zero_frac = 1.0 - mask.sum() / (1000.0 * 100.0);
    CHECK(zero_frac > 0.195);
    CHECK(zero_frac < 0.205);

    CorruptionSpec bad{1.5};
    CHECK_THROWS_AS(corruption_mask(2, 2, bad, rng), std::invalid_argument);
}

TEST_CASE("sign-flip corruption flips instead of masking") {
    Rng rng(16);
    CorruptionSpec flip{0.5, CorruptionSpec::Kind::kSignFlip};
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(50, 50);
    const Eigen::MatrixXd c = corrupt(x, flip, rng);
    int flipped = 0, kept = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (c(i) == -1.0) ++flipped;
        if (c(i) == 1.0) ++kept;
    }
    CHECK(flipped + kept == 2500);
    CHECK(flipped > 1000);
    CHECK(kept > 1000);
}

TEST_CASE("repeated corruption of the same input differs") {
    Rng rng(19);
    CorruptionSpec spec{0.3};
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(20, 20);
    CHECK((corrupt(x, spec, rng) - corrupt(x, spec, rng)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("layer cost: trivial zero case and non-negativity") {
    AutoencoderLayer zero;
    zero.W = Eigen::MatrixXd::Zero(3, 4);
    zero.b_hidden = Eigen::VectorXd::Zero(3);
    zero.b_visible = Eigen::VectorXd::Zero(4);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 5);
    const Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(4, 5);
    SparsitySpec off{0.05, 0.0};
    CHECK(layer_cost(zero, x, mask, off).total() == 0.0);

    const AutoencoderLayer layer = random_layer(5, 4, 11);
    const Eigen::MatrixXd batch = random_batch(5, 8, 12);
    const Eigen::MatrixXd m = Eigen::MatrixXd::Ones(5, 8);
    SparsitySpec on{0.05, 3.0};
    const LayerCost c = layer_cost(layer, batch, m, on);
    CHECK(c.reconstruction >= 0.0);
    CHECK(c.sparsity >= 0.0);
}

TEST_CASE("layer cost matches an independent re-implementation") {
    const AutoencoderLayer layer = random_layer(4, 3, 21);
    const Eigen::MatrixXd batch = random_batch(4, 5, 22);
    Rng rng(23);
    const Eigen::MatrixXd mask = corruption_mask(4, 5, CorruptionSpec{0.2}, rng);
    for (SparsitySpec sp : {SparsitySpec{0.05, 3.0}, SparsitySpec{0.0, 1.0}, SparsitySpec{0.1, 0.0}}) {
        const double mine = layer_cost(layer, batch, mask, sp).total();
        const double oracle = naive_layer_cost(layer, batch, mask, sp);
        CHECK(mine == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("gradients vanish at the symmetric fixed point") {
    AutoencoderLayer zero;
    zero.W = Eigen::MatrixXd::Zero(4, 6);
    zero.b_hidden = Eigen::VectorXd::Zero(4);
    zero.b_visible = Eigen::VectorXd::Zero(6);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(6, 7);
    const Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(6, 7);
    const LayerGradients g = layer_gradients(zero, x, mask, SparsitySpec{0.05, 0.0});
    CHECK(g.dW.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.db_hidden.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.db_visible.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    for (std::uint64_t seed : {31u, 32u, 33u}) {
        AutoencoderLayer layer = random_layer(7, 5, seed);
        const Eigen::MatrixXd batch = random_batch(7, 6, seed + 100);
        Rng rng(seed + 200);
        const Eigen::MatrixXd mask = corruption_mask(7, 6, CorruptionSpec{0.2}, rng);
        const SparsitySpec sp{0.05, 2.0};

        const LayerGradients g = layer_gradients(layer, batch, mask, sp);
        const double h = 1e-5;
        auto fd_check = [&](double* param, double analytic) {
            const double saved = *param;
            *param = saved + h;
            const double up = layer_cost(layer, batch, mask, sp).total();
            *param = saved - h;
            const double down = layer_cost(layer, batch, mask, sp).total();
            *param = saved;
            const double fd = (up - down) / (2 * h);
            const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
            CHECK(std::abs(fd - analytic) / denom < 1e-4);
        };
        for (int i = 0; i < layer.W.rows(); ++i)
            for (int j = 0; j < layer.W.cols(); ++j) fd_check(&layer.W(i, j), g.dW(i, j));
        for (int i = 0; i < layer.b_hidden.size(); ++i)
            fd_check(&layer.b_hidden(i), g.db_hidden(i));
        for (int j = 0; j < layer.b_visible.size(); ++j)
            fd_check(&layer.b_visible(j), g.db_visible(j));
    }
}

TEST_CASE("adagrad first step, zero-gradient stability, and damping") {
    AutoencoderLayer layer;
    layer.W = Eigen::MatrixXd::Zero(2, 2);
    layer.b_hidden = Eigen::VectorXd::Zero(2);
    layer.b_visible = Eigen::VectorXd::Zero(2);
    AdaGradState state = AdaGradState::for_layer(layer, 0.1, 1e-8);

    LayerGradients g;
    g.dW = Eigen::MatrixXd::Constant(2, 2, 0.5);
    g.db_hidden = Eigen::VectorXd::Constant(2, -0.25);
    g.db_visible = Eigen::VectorXd::Zero(2);

    adagrad_step(state, layer, g);
    // First step is close to -eta * sign(g).
    CHECK(layer.W(0, 0) == doctest::Approx(-0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    CHECK(layer.b_hidden(0) == doctest::Approx(0.1 * 0.25 / (0.25 + 1e-8)).epsilon(1e-12));
    CHECK(layer.b_visible(0) == 0.0); // zero gradient, no change
    const double first_delta = std::abs(layer.W(0, 0));

    const Eigen::MatrixXd w_before = layer.W;
    adagrad_step(state, layer, g);
    const double second_delta = std::abs(layer.W(0, 0) - w_before(0, 0));
    CHECK(second_delta < first_delta);

    // Accumulators are non-negative and grew.
    CHECK(state.acc_W.minCoeff() >= 0.0);
    CHECK(state.acc_W(0, 0) == doctest::Approx(2 * 0.25).epsilon(1e-12));
}

TEST_CASE("pretrain with zero learning rate leaves initialization untouched") {
    const Eigen::MatrixXd inputs = random_batch(6, 50, 41);
    PretrainOptions opt;
    opt.epochs = 3;
    opt.batch_size = 10;
    opt.eta = 0.0;
    const Rng rng(55);
    const AutoencoderLayer trained =
        pretrain_layer(inputs, 4, CorruptionSpec{0.2}, SparsitySpec{0.05, 1.0}, opt, rng);

    Rng init_rng = rng.child("init");
    const AutoencoderLayer fresh = init_layer(6, 4, init_rng);
    CHECK((trained.W - fresh.W).cwiseAbs().maxCoeff() == 0.0);
    CHECK(trained.b_hidden.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pretraining learns 4 orthogonal patterns in 8 dimensions") {
    // Scaled Hadamard rows: orthogonal, inside tanh's range.
    Eigen::MatrixXd patterns(8, 4);
    const int hadamard[4][8] = {
        {1, 1, 1, 1, 1, 1, 1, 1},
        {1, -1, 1, -1, 1, -1, 1, -1},
        {1, 1, -1, -1, 1, 1, -1, -1},
        {1, -1, -1, 1, 1, -1, -1, 1},
    };
    for (int p = 0; p < 4; ++p)
        for (int i = 0; i < 8; ++i) patterns(i, p) = 0.6 * hadamard[p][i];

    Eigen::MatrixXd inputs(8, 100);
    for (int c = 0; c < 100; ++c) inputs.col(c) = patterns.col(c % 4);

    PretrainOptions opt;
    opt.epochs = 500;
    opt.batch_size = 10;
    opt.eta = 0.05;
    PretrainLog log;
    const AutoencoderLayer layer = pretrain_layer(inputs, 8, CorruptionSpec{0.1},
                                                  SparsitySpec{0.0, 0.0}, opt, Rng(7), &log);

    double mse = 0.0;
    for (int p = 0; p < 4; ++p) {
        const Eigen::VectorXd z = layer.decode(layer.encode(patterns.col(p)));
        mse += (z - patterns.col(p)).squaredNorm() / 8.0;
    }
    mse /= 4.0;
    CHECK(mse < 0.05);
    CHECK(log.epoch_cost.size() == 500);
    for (double c : log.epoch_cost) CHECK(std::isfinite(c));
}

TEST_CASE("pretraining is deterministic for a fixed seed") {
    const Eigen::MatrixXd inputs = random_batch(10, 80, 61);
    PretrainOptions opt;
    opt.epochs = 4;
    opt.batch_size = 16;
    const auto a =
        pretrain_layer(inputs, 6, CorruptionSpec{0.2}, SparsitySpec{0.05, 3.0}, opt, Rng(99));
    const auto b =
        pretrain_layer(inputs, 6, CorruptionSpec{0.2}, SparsitySpec{0.05, 3.0}, opt, Rng(99));
    CHECK((a.W - b.W).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.b_hidden - b.b_hidden).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.b_visible - b.b_visible).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("monitor slice cost is logged") {
    const Eigen::MatrixXd inputs = random_batch(6, 120, 71);
    PretrainOptions opt;
    opt.epochs = 8;
    opt.batch_size = 20;
    PretrainLog log;
    pretrain_layer(inputs, 5, CorruptionSpec{0.2}, SparsitySpec{0.05, 1.0}, opt, Rng(3), &log);
    CHECK(std::isfinite(log.monitor_initial));
    CHECK(std::isfinite(log.monitor_final));
    CHECK(log.monitor_final <= log.monitor_initial); // learned something here
}

TEST_CASE("sparsity penalty lowers mean rescaled activation on radio data") {
    GenConfig cfg;
    cfg.train_vectors_per_mod = 60;
    cfg.test_vectors_total = 6;
    cfg.rng_seed = 5;
    const DatasetPair pair = build_dataset(cfg);
    const Eigen::MatrixXd x = to_matrix(pair.train); // 200 x 360

    PretrainOptions opt;
    opt.epochs = 6;
    opt.batch_size = 30;
    const auto sparse =
        pretrain_layer(x, 32, CorruptionSpec{0.2}, SparsitySpec{0.05, 3.0}, opt, Rng(1));
    const auto plain =
        pretrain_layer(x, 32, CorruptionSpec{0.2}, SparsitySpec{0.05, 0.0}, opt, Rng(1));

    const double mean_sparse = mean_rescaled_activation(sparse.encode_batch(x)).mean();
    const double mean_plain = mean_rescaled_activation(plain.encode_batch(x)).mean();
    CHECK(mean_sparse < mean_plain);
}

TEST_CASE("divergence raises a training error with the epoch index") {
    const Eigen::MatrixXd inputs = random_batch(4, 40, 81);
    PretrainOptions opt;
    opt.epochs = 5;
    opt.batch_size = 10;
    opt.eta = std::numeric_limits<double>::infinity(); // first step goes non-finite
    try {
        pretrain_layer(inputs, 3, CorruptionSpec{0.0}, SparsitySpec{0.0, 0.0}, opt, Rng(2));
        FAIL("expected training_error");
    } catch (const training_error& e) {
        CHECK(e.epoch() == 0);
    }
}
