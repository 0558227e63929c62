// Drives the amc binary end-to-end. Path to the binary comes in argv[1].
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "amc/modelio.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_amc;
fs::path g_work;

int run(const std::string& args) {
    const std::string cmd = g_amc + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_config(const fs::path& p, const std::string& extra = "") {
    std::ofstream out(p);
    out << "seed=11\n"
           "scale=0.02\n" // 200 vectors/family: seconds, not minutes
           "pretrain_epochs=2\n"
           "finetune_epochs=10\n"
           "finetune_eta=0.03\n"
        << extra;
}

} // namespace

TEST_CASE("gen: deterministic files, sidecar, provenance") {
    const fs::path dir = g_work / "gen1";
    const fs::path dir2 = g_work / "gen2";
    const fs::path dir3 = g_work / "gen3";
    const fs::path cfg = g_work / "gen.cfg";
    write_config(cfg);

    CHECK(run("gen --config " + cfg.string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "train.iqd"));
    CHECK(fs::exists(dir / "test.iqd"));
    CHECK(fs::exists(dir / "dataset_meta.txt"));
    CHECK(fs::exists(dir / "provenance_gen.txt"));

    const amc::Dataset train = amc::load_dataset(dir / "train.iqd", amc::Split::kTrain);
    CHECK(train.size() == 6 * 200);
    for (auto count : train.family_counts) CHECK(count == 200);

    // Same config, new directory: bit-identical artifacts.
    CHECK(run("gen --config " + cfg.string() + " --out " + dir2.string()) == 0);
    CHECK(slurp(dir / "train.iqd") == slurp(dir2 / "train.iqd"));
    CHECK(slurp(dir / "test.iqd") == slurp(dir2 / "test.iqd"));

    // Different seed: same shape, different bytes.
    CHECK(run("gen --config " + cfg.string() + " --seed 12 --out " + dir3.string()) == 0);
    CHECK(slurp(dir / "train.iqd") != slurp(dir3 / "train.iqd"));
    CHECK(amc::load_dataset(dir3 / "train.iqd", amc::Split::kTrain).size() == 6 * 200);
}

TEST_CASE("train/eval/sweep/export-rf round trip") {
    const fs::path data = g_work / "gen1";
    const fs::path cfg = g_work / "train.cfg";
    write_config(cfg, "arch=A\n");

    const fs::path model_dir = g_work / "model_A";
    CHECK(run("train --config " + cfg.string() + " --data " + data.string() + " --out " +
              model_dir.string()) == 0);
    CHECK(fs::exists(model_dir / "model.ssda"));
    CHECK(fs::exists(model_dir / "provenance_train.txt"));

    const amc::ModelFile model = amc::load_model(model_dir / "model.ssda");
    CHECK(model.architecture.name == "A");
    CHECK(model.network.layers.size() == 1);
    CHECK(model.network.layers[0].hidden() == 128); // scaled width floor
    CHECK(model.metadata.find("clean_test_pcc=") != std::string::npos);

    const fs::path eval_dir = g_work / "eval_clean";
    CHECK(run("eval --model " + (model_dir / "model.ssda").string() + " --data " +
              data.string() + " --out " + eval_dir.string()) == 0);
    CHECK(fs::exists(eval_dir / "metrics.csv"));
    CHECK(fs::exists(eval_dir / "confusion_counts.csv"));
    CHECK(fs::exists(eval_dir / "confusion_norm.csv"));

    // Noised eval twice with one seed: identical CSVs.
    const fs::path n1 = g_work / "eval_n1";
    const fs::path n2 = g_work / "eval_n2";
    const std::string noised = "eval --model " + (model_dir / "model.ssda").string() +
                               " --data " + data.string() + " --seed 5 --snr 0 --out ";
    CHECK(run(noised + n1.string() + " --dump-noised") == 0);
    CHECK(run(noised + n2.string()) == 0);
    CHECK(slurp(n1 / "metrics.csv") == slurp(n2 / "metrics.csv"));
    CHECK(fs::exists(n1 / "noised_+0.0dB.iqd"));
    CHECK(fs::exists(n1 / "noised_+0.0dB.iqd.meta.txt"));

    const fs::path sweep_dir = g_work / "sweep";
    CHECK(run("sweep --model " + (model_dir / "model.ssda").string() + " --data " +
              data.string() + " --snr-grid 10:-10:10 --out " + sweep_dir.string()) == 0);
    std::ifstream sweep_csv(sweep_dir / "sweep.csv");
    int lines = 0;
    std::string line;
    while (std::getline(sweep_csv, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 4); // header + 3 points
    CHECK(fs::exists(sweep_dir / "confusion_+0.0dB_counts.csv"));

    const fs::path rf_dir = g_work / "rf";
    CHECK(run("export-rf --model " + (model_dir / "model.ssda").string() + " --layer 1 --out " +
              rf_dir.string()) == 0);
    CHECK(fs::exists(rf_dir / "rf_layer1.csv"));
    CHECK(fs::exists(rf_dir / "rf_layer1.pgm"));

    CHECK(run("inspect --file " + (model_dir / "model.ssda").string()) == 0);
    CHECK(run("inspect --file " + (data / "train.iqd").string()) == 0);
}

TEST_CASE("exit codes: 2 for usage/config, 1 for runtime failures") {
    CHECK(run("") == 2);                       // no subcommand
    CHECK(run("frobnicate") == 2);             // unknown subcommand
    CHECK(run("gen") == 2);                    // missing --out
    CHECK(run("gen --out " + (g_work / "x").string() + " --arch Z") == 2); // unknown arch

    const fs::path bad_cfg = g_work / "bad.cfg";
    {
        std::ofstream out(bad_cfg);
        out << "unknown_key=1\n";
    }
    CHECK(run("gen --config " + bad_cfg.string() + " --out " + (g_work / "x").string()) == 2);

    CHECK(run("train --data " + (g_work / "missing").string() + " --out " +
              (g_work / "x").string()) == 1); // missing dataset files
    CHECK(run("eval --model " + (g_work / "missing.ssda").string() + " --data " +
              (g_work / "gen1").string() + " --out " + (g_work / "x").string()) == 1);
    CHECK(run("export-rf --model " + (g_work / "model_A" / "model.ssda").string() +
              " --layer 7 --out " + (g_work / "x").string()) == 1); // no such layer
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-amc-binary>\n");
        return 1;
    }
    g_amc = argv[1];
    g_work = fs::temp_directory_path() / "amc_cli_test";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    doctest::Context context;
    const int res = context.run();
    fs::remove_all(g_work);
    return res;
}
