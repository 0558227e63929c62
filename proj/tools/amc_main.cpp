// amc: reproducible automatic modulation classification experiments.
//
// Subcommands: gen, train, eval, sweep, export-rf, inspect.
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "amc/channel.hpp"
#include "amc/config.hpp"
#include "amc/dataset.hpp"
#include "amc/errors.hpp"
#include "amc/metrics.hpp"
#include "amc/modelio.hpp"
#include "amc/network.hpp"
#include "amc/whiten.hpp"

namespace fs = std::filesystem;
using namespace amc;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> arch;
    std::optional<double> scale;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key=value config file");
    cmd->add_option("--seed", args.seed, "override the RNG seed");
    cmd->add_option("--arch", args.arch, "architecture preset (Softmax|MLP|A|B|C|D|E)");
    cmd->add_option("--scale", args.scale, "shrink dataset sizes and layer widths (<= 1)");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = load_config_file(args.config_path);
    if (args.seed) cfg.gen.rng_seed = *args.seed;
    if (args.arch) cfg.arch = *args.arch;
    if (args.scale) cfg.scale = *args.scale;
    cfg.validate();
    return cfg;
}

void write_provenance(const fs::path& dir, const std::string& command,
                      const ExperimentConfig& cfg) {
    std::ofstream out(dir / ("provenance_" + command + ".txt"));
    out << "command=" << command << "\n";
    out << "dataset_format=IQD1 v" << kDatasetFormatVersion << "\n";
    out << "model_format=SSDA v" << kModelFormatVersion << "\n";
    out << "rng=AMC-RNG v" << kRngVersion << " (xoshiro256** / splitmix64 / fnv1a tags)\n";
    out << cfg.dump();
}

std::string metadata_block(const ExperimentConfig& cfg, const StackPretrainLog& pre_log,
                           const FinetuneLog& tune_log, double clean_pcc) {
    std::string meta = cfg.dump();
    for (std::size_t l = 0; l < pre_log.per_layer.size(); ++l) {
        meta += "pretrain_cost_layer" + std::to_string(l + 1) + "=";
        const auto& costs = pre_log.per_layer[l].epoch_cost;
        for (std::size_t e = 0; e < costs.size(); ++e)
            meta += (e ? "," : "") + std::to_string(costs[e]);
        meta += "\nmonitor_layer" + std::to_string(l + 1) + "=" +
                std::to_string(pre_log.per_layer[l].monitor_initial) + "->" +
                std::to_string(pre_log.per_layer[l].monitor_final) + "\n";
    }
    meta += "finetune_nll=";
    for (std::size_t e = 0; e < tune_log.epoch_nll.size(); ++e)
        meta += (e ? "," : "") + std::to_string(tune_log.epoch_nll[e]);
    meta += "\nclean_test_pcc=" + std::to_string(clean_pcc) + "\n";
    return meta;
}

int cmd_gen(const CommonArgs& common, const std::string& out_dir) {
    const ExperimentConfig cfg = resolve_config(common);
    const GenConfig gen = cfg.scaled_gen();
    fs::create_directories(out_dir);

    std::printf("generating datasets (seed %" PRIu64 ", %d train/family, %d test total)...\n",
                gen.rng_seed, gen.train_vectors_per_mod, gen.test_vectors_total);
    const DatasetPair pair = build_dataset(gen);
    save_dataset(pair.train, fs::path(out_dir) / "train.iqd");
    save_dataset(pair.test, fs::path(out_dir) / "test.iqd");

    std::string meta = "format=IQD1 v" + std::to_string(kDatasetFormatVersion) + "\n";
    meta += "train_vectors=" + std::to_string(pair.train.size()) + "\n";
    meta += "test_vectors=" + std::to_string(pair.test.size()) + "\n";
    for (int f = 0; f < kFamilyCount; ++f)
        meta += "train_count_" + std::string(family_name(static_cast<ModulationFamily>(f))) +
                "=" + std::to_string(pair.train.family_counts[static_cast<std::size_t>(f)]) + "\n";
    write_sidecar(fs::path(out_dir) / "dataset_meta.txt", meta);
    write_provenance(out_dir, "gen", cfg);

    std::printf("wrote %s/train.iqd (%zu vectors) and %s/test.iqd (%zu vectors)\n",
                out_dir.c_str(), pair.train.size(), out_dir.c_str(), pair.test.size());
    return 0;
}

int cmd_train(const CommonArgs& common, const std::string& data_dir,
              const std::string& out_dir) {
    const ExperimentConfig cfg = resolve_config(common);
    const ArchitectureSpec arch = cfg.architecture();
    fs::create_directories(out_dir);

    const Dataset train = load_dataset(fs::path(data_dir) / "train.iqd", Split::kTrain);
    const Dataset test = load_dataset(fs::path(data_dir) / "test.iqd", Split::kTest);

    std::printf("fitting ZCA whitening on %zu vectors of dimension %d...\n", train.size(),
                train.vector_length);
    const WhiteningFilter whitening = fit_zca(train, cfg.zca_epsilon);
    const Eigen::MatrixXd whitened = whitening.apply_all(to_matrix(train));

    const Rng root(cfg.gen.rng_seed);
    StackedNetwork net;
    StackPretrainLog pre_log;
    if (arch.pretrained) {
        std::printf("pretraining %d layer(s) for arch %s...\n", arch.layer_count(),
                    arch.name.c_str());
        net = pretrain_stack(arch, whitening, whitened, cfg.sparsity_beta,
                             cfg.pretrain_options(), kFamilyCount, root.child("pretrain"),
                             &pre_log, cfg.corruption_kind);
        for (std::size_t l = 0; l < pre_log.per_layer.size(); ++l) {
            std::printf("  layer %zu costs:", l + 1);
            for (double c : pre_log.per_layer[l].epoch_cost) std::printf(" %.4f", c);
            std::printf("  (monitor %.4f -> %.4f)\n", pre_log.per_layer[l].monitor_initial,
                        pre_log.per_layer[l].monitor_final);
        }
    } else {
        net = init_network(arch, whitening, kFamilyCount, root.child("init"));
    }

    std::printf("fine-tuning (%d epochs, eta %g, lambda %d%s)...\n", cfg.finetune_epochs,
                cfg.finetune_eta, arch.l2_lambda,
                arch.dropout_p > 0.0 ? ", dropout" : "");
    FinetuneLog tune_log;
    if (!arch.pretrained && arch.dropout_p > 0.0)
        finetune_mlp(net, whitened, train.labels, arch.dropout_p, arch.l2_lambda,
                     cfg.finetune_options(), root.child("finetune"), &tune_log);
    else
        finetune(net, whitened, train.labels, arch.l2_lambda, cfg.finetune_options(),
                 root.child("finetune"), &tune_log);
    for (std::size_t e = 0; e < tune_log.epoch_nll.size(); ++e)
        std::printf("  epoch %2zu nll %.6f\n", e + 1, tune_log.epoch_nll[e]);

    const SweepPoint clean = evaluate_clean(net, test);
    std::printf("clean test P_cc = %.4f (accuracy %.4f)\n", clean.pcc, clean.accuracy);

    const fs::path model_path = fs::path(out_dir) / "model.ssda";
    save_model(net, arch, metadata_block(cfg, pre_log, tune_log, clean.pcc), model_path);
    write_provenance(out_dir, "train", cfg);
    std::printf("wrote %s\n", model_path.c_str());
    return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& model_path,
             const std::string& data_path, std::optional<double> snr, bool dump_noised,
             const std::string& out_dir) {
    const ExperimentConfig cfg = resolve_config(common);
    fs::create_directories(out_dir);
    const ModelFile model = load_model(model_path);
    const fs::path data = fs::is_directory(data_path) ? fs::path(data_path) / "test.iqd"
                                                      : fs::path(data_path);
    Dataset test = load_dataset(data, Split::kTest);

    SweepPoint point;
    if (snr) {
        const Rng root(cfg.gen.rng_seed);
        AwgnReport report;
        Dataset noised = add_awgn(test, SnrTarget{*snr}, root.child("eval-noise"), &report);
        if (dump_noised) {
            char name[64];
            std::snprintf(name, sizeof(name), "noised_%+.1fdB.iqd", *snr);
            save_dataset(noised, fs::path(out_dir) / name);
            std::string meta = "source=" + data.string() + "\n";
            meta += "snr_db=" + std::to_string(*snr) + "\n";
            meta += "seed=" + std::to_string(cfg.gen.rng_seed) + "\n";
            write_sidecar(fs::path(out_dir) / (std::string(name) + ".meta.txt"), meta);
        }
        point = evaluate_clean(model.network, noised);
        point.snr_db = *snr;
    } else {
        point = evaluate_clean(model.network, test);
    }

    SweepResult one;
    one.points.push_back(point);
    write_sweep_csv(one, fs::path(out_dir) / "metrics.csv");
    write_confusion_csv(point.confusion, fs::path(out_dir) / "confusion_counts.csv",
                        fs::path(out_dir) / "confusion_norm.csv");
    write_provenance(out_dir, "eval", cfg);
    std::printf("P_cc = %.4f (accuracy %.4f)\n", point.pcc, point.accuracy);
    return 0;
}

int cmd_sweep(const CommonArgs& common, const std::string& model_path,
              const std::string& data_path, const std::string& grid_text,
              const std::string& out_dir) {
    ExperimentConfig cfg = resolve_config(common);
    if (!grid_text.empty()) cfg.snr_grid = parse_snr_grid(grid_text);
    fs::create_directories(out_dir);
    const ModelFile model = load_model(model_path);
    const fs::path data = fs::is_directory(data_path) ? fs::path(data_path) / "test.iqd"
                                                      : fs::path(data_path);
    const Dataset test = load_dataset(data, Split::kTest);

    const Rng root(cfg.gen.rng_seed);
    const SweepResult sweep = snr_sweep(model.network, test, cfg.snr_grid, root.child("sweep"));
    write_sweep_csv(sweep, fs::path(out_dir) / "sweep.csv");
    for (const auto& pt : sweep.points) {
        char stem[64];
        std::snprintf(stem, sizeof(stem), "confusion_%+.1fdB", pt.snr_db);
        write_confusion_csv(pt.confusion, fs::path(out_dir) / (std::string(stem) + "_counts.csv"),
                            fs::path(out_dir) / (std::string(stem) + "_norm.csv"));
        std::printf("%+7.2f dB  P_cc %.4f\n", pt.snr_db, pt.pcc);
    }
    write_provenance(out_dir, "sweep", cfg);
    std::printf("wrote %s/sweep.csv (%zu points)\n", out_dir.c_str(), sweep.points.size());
    return 0;
}

int cmd_export_rf(const std::string& model_path, int layer, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const ModelFile model = load_model(model_path);
    const std::string stem = "rf_layer" + std::to_string(layer);
    export_receptive_fields(model.network, layer, fs::path(out_dir) / (stem + ".csv"),
                            fs::path(out_dir) / (stem + ".pgm"));
    std::printf("wrote %s/%s.{csv,pgm}\n", out_dir.c_str(), stem.c_str());
    return 0;
}

int cmd_inspect(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_errc::io_failed, "cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    in.close();
    if (std::string_view(magic, 4) == "IQDS") {
        const Dataset ds = load_dataset(path);
        std::printf("IQD1 dataset: %zu vectors, length %d, %d families\n", ds.size(),
                    ds.vector_length, kFamilyCount);
        for (int f = 0; f < kFamilyCount; ++f)
            std::printf("  %-6s %u\n",
                        std::string(family_name(static_cast<ModulationFamily>(f))).c_str(),
                        ds.family_counts[static_cast<std::size_t>(f)]);
    } else if (std::string_view(magic, 4) == "SSDA") {
        const ModelFile model = load_model(path);
        std::printf("SSDA model: arch %s, input dim %d, %zu layer(s), lambda %d\n",
                    model.architecture.name.c_str(), model.network.input_dim(),
                    model.network.layers.size(), model.architecture.l2_lambda);
        for (std::size_t l = 0; l < model.network.layers.size(); ++l)
            std::printf("  layer %zu: %d -> %d (corruption %.2f, rho %s)\n", l + 1,
                        model.network.layers[l].visible(), model.network.layers[l].hidden(),
                        model.architecture.corruption[l],
                        model.architecture.rho[l]
                            ? std::to_string(*model.architecture.rho[l]).c_str()
                            : "none");
        std::printf("metadata:\n%s", model.metadata.c_str());
    } else {
        throw io_error(io_errc::bad_magic, path + ": unknown file type");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Automatic modulation classification workbench"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, eval_args, sweep_args;
    std::string gen_out, train_data, train_out, eval_model, eval_data, eval_out;
    std::string sweep_model, sweep_data, sweep_grid, sweep_out;
    std::string rf_model, rf_out, inspect_file;
    std::optional<double> eval_snr;
    bool eval_dump_noised = false;
    int rf_layer = 1;

    auto* gen = app.add_subcommand("gen", "generate train/test datasets");
    add_common(gen, gen_args);
    gen->add_option("--out", gen_out, "output directory")->required();

    auto* train = app.add_subcommand("train", "fit whitening, pretrain, fine-tune, save model");
    add_common(train, train_args);
    train->add_option("--data", train_data, "directory with train.iqd/test.iqd")->required();
    train->add_option("--out", train_out, "output directory")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a model on a dataset");
    add_common(eval, eval_args);
    eval->add_option("--model", eval_model, "model file")->required();
    eval->add_option("--data", eval_data, "dataset file or gen output directory")->required();
    eval->add_option("--snr", eval_snr, "add AWGN at this SNR (dB) before evaluating");
    eval->add_flag("--dump-noised", eval_dump_noised, "persist the noised dataset + sidecar");
    eval->add_option("--out", eval_out, "output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "evaluate across an SNR grid");
    add_common(sweep, sweep_args);
    sweep->add_option("--model", sweep_model, "model file")->required();
    sweep->add_option("--data", sweep_data, "dataset file or gen output directory")->required();
    sweep->add_option("--snr-grid", sweep_grid, "start:stop:step or comma list (dB)");
    sweep->add_option("--out", sweep_out, "output directory")->required();

    auto* rf = app.add_subcommand("export-rf", "export receptive fields as CSV + PGM");
    rf->add_option("--model", rf_model, "model file")->required();
    rf->add_option("--layer", rf_layer, "1-based layer index")->default_val(1);
    rf->add_option("--out", rf_out, "output directory")->required();

    auto* inspect = app.add_subcommand("inspect", "print dataset/model headers");
    inspect->add_option("--file", inspect_file, "IQD1 or SSDA file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_args, gen_out);
        if (train->parsed()) return cmd_train(train_args, train_data, train_out);
        if (eval->parsed())
            return cmd_eval(eval_args, eval_model, eval_data, eval_snr, eval_dump_noised,
                            eval_out);
        if (sweep->parsed())
            return cmd_sweep(sweep_args, sweep_model, sweep_data, sweep_grid, sweep_out);
        if (rf->parsed()) return cmd_export_rf(rf_model, rf_layer, rf_out);
        if (inspect->parsed()) return cmd_inspect(inspect_file);
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
