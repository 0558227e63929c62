#include "amc/modelio.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "amc/errors.hpp"

namespace amc {
namespace {

static_assert(sizeof(float) == 4 && sizeof(double) == 8, "IEEE-754 layout assumed");

class Writer {
public:
    explicit Writer(const std::filesystem::path& path)
        : path_(path), f_(std::fopen(path.c_str(), "wb")) {
        if (!f_) throw io_error(io_errc::io_failed, "cannot open " + path.string() + " for write");
    }
    ~Writer() {
        if (f_) std::fclose(f_);
    }
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void bytes(const void* data, std::size_t n) {
        if (std::fwrite(data, 1, n, f_) != n)
            throw io_error(io_errc::io_failed, "short write to " + path_.string());
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) {
        const std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
        bytes(b, 2);
    }
    void u32(std::uint32_t v) {
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        bytes(b, 4);
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(bits >> (8 * i));
        bytes(b, 8);
    }
    void f32_array(const float* data, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            bytes(data, n * 4);
        } else {
            for (std::size_t i = 0; i < n; ++i) f32(data[i]);
        }
    }
    void f64_array(const double* data, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            bytes(data, n * 8);
        } else {
            for (std::size_t i = 0; i < n; ++i) f64(data[i]);
        }
    }

private:
    std::filesystem::path path_;
    std::FILE* f_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path)
        : path_(path), f_(std::fopen(path.c_str(), "rb")) {
        if (!f_) throw io_error(io_errc::io_failed, "cannot open " + path.string() + " for read");
    }
    ~Reader() {
        if (f_) std::fclose(f_);
    }
    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    void bytes(void* data, std::size_t n, const char* what) {
        if (std::fread(data, 1, n, f_) != n)
            throw io_error(io_errc::truncated,
                           path_.string() + ": truncated while reading " + what);
    }
    std::uint8_t u8(const char* what) {
        std::uint8_t v;
        bytes(&v, 1, what);
        return v;
    }
    std::uint16_t u16(const char* what) {
        std::uint8_t b[2];
        bytes(b, 2, what);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32(const char* what) {
        std::uint8_t b[4];
        bytes(b, 4, what);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    float f32(const char* what) {
        const std::uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64(const char* what) {
        std::uint8_t b[8];
        bytes(b, 8, what);
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void f32_array(float* data, std::size_t n, const char* what) {
        if constexpr (std::endian::native == std::endian::little) {
            bytes(data, n * 4, what);
        } else {
            for (std::size_t i = 0; i < n; ++i) data[i] = f32(what);
        }
    }
    void f64_array(double* data, std::size_t n, const char* what) {
        if constexpr (std::endian::native == std::endian::little) {
            bytes(data, n * 8, what);
        } else {
            for (std::size_t i = 0; i < n; ++i) data[i] = f64(what);
        }
    }
    bool at_eof() {
        const int c = std::fgetc(f_);
        if (c == EOF) return true;
        std::ungetc(c, f_);
        return false;
    }

private:
    std::filesystem::path path_;
    std::FILE* f_;
};

// Matrices are serialized row-major regardless of Eigen's storage order.
void write_matrix(Writer& w, const Eigen::MatrixXd& m) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor tmp = m;
    w.f64_array(tmp.data(), static_cast<std::size_t>(tmp.size()));
}

Eigen::MatrixXd read_matrix(Reader& r, Eigen::Index rows, Eigen::Index cols, const char* what) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor tmp(rows, cols);
    r.f64_array(tmp.data(), static_cast<std::size_t>(tmp.size()), what);
    return tmp;
}

void write_vector(Writer& w, const Eigen::VectorXd& v) {
    w.f64_array(v.data(), static_cast<std::size_t>(v.size()));
}

Eigen::VectorXd read_vector(Reader& r, Eigen::Index n, const char* what) {
    Eigen::VectorXd v(n);
    r.f64_array(v.data(), static_cast<std::size_t>(n), what);
    return v;
}

} // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    Writer w(path);
    w.bytes("IQDS", 4);
    w.u16(kDatasetFormatVersion);
    w.u32(static_cast<std::uint32_t>(ds.size()));
    w.u32(static_cast<std::uint32_t>(ds.vector_length));
    w.u8(static_cast<std::uint8_t>(kFamilyCount));
    if (!ds.labels.empty()) w.bytes(ds.labels.data(), ds.labels.size());
    w.f32_array(ds.samples.data(), ds.samples.size());
}

Dataset load_dataset(const std::filesystem::path& path, Split split) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4, "magic");
    if (std::memcmp(magic, "IQDS", 4) != 0)
        throw io_error(io_errc::bad_magic, path.string() + ": not an IQD1 dataset");
    const std::uint16_t version = r.u16("version");
    if (version != kDatasetFormatVersion)
        throw io_error(io_errc::bad_version,
                       path.string() + ": unsupported dataset version " + std::to_string(version));
    Dataset ds;
    ds.split = split;
    const std::uint32_t count = r.u32("vector count");
    ds.vector_length = static_cast<int>(r.u32("vector length"));
    const std::uint8_t families = r.u8("family count");
    if (families != kFamilyCount)
        throw io_error(io_errc::bad_dimension,
                       path.string() + ": unexpected family count " + std::to_string(families));
    if (ds.vector_length <= 0 || ds.vector_length % 2 != 0)
        throw io_error(io_errc::bad_dimension, path.string() + ": invalid vector length");
    ds.labels.resize(count);
    if (count) r.bytes(ds.labels.data(), count, "labels");
    for (std::uint8_t label : ds.labels)
        if (label >= families)
            throw io_error(io_errc::bad_dimension, path.string() + ": label out of range");
    ds.samples.resize(static_cast<std::size_t>(count) * ds.vector_length);
    r.f32_array(ds.samples.data(), ds.samples.size(), "samples");
    ds.recount_families();
    return ds;
}

void write_sidecar(const std::filesystem::path& path, const std::string& text) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw io_error(io_errc::io_failed, "cannot open " + path.string() + " for write");
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    std::fclose(f);
    if (!ok) throw io_error(io_errc::io_failed, "short write to " + path.string());
}

void save_model(const StackedNetwork& net, const ArchitectureSpec& arch,
                const std::string& metadata, const std::filesystem::path& path) {
    net.validate();
    if (arch.hidden_sizes.size() != net.layers.size())
        throw std::invalid_argument("save_model: architecture/network layer count mismatch");
    Writer w(path);
    w.bytes("SSDA", 4);
    w.u16(kModelFormatVersion);
    if (arch.name.size() > 255) throw std::invalid_argument("save_model: name too long");
    w.u8(static_cast<std::uint8_t>(arch.name.size()));
    w.bytes(arch.name.data(), arch.name.size());
    w.u8(static_cast<std::uint8_t>(arch.l2_lambda));
    w.f64(arch.dropout_p);
    w.u8(static_cast<std::uint8_t>(net.classes()));
    w.u32(static_cast<std::uint32_t>(net.input_dim()));
    w.u32(static_cast<std::uint32_t>(net.layers.size()));

    w.f64(net.whitening.epsilon);
    write_vector(w, net.whitening.mean);
    write_matrix(w, net.whitening.Z);

    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        w.u32(static_cast<std::uint32_t>(layer.visible()));
        w.u32(static_cast<std::uint32_t>(layer.hidden()));
        w.f64(arch.corruption[l]);
        w.u8(arch.rho[l] ? 1 : 0);
        w.f64(arch.rho[l].value_or(0.0));
        write_matrix(w, layer.W);
        write_vector(w, layer.b_hidden);
        write_vector(w, layer.b_visible);
    }

    w.u32(static_cast<std::uint32_t>(net.softmax_W.rows()));
    w.u32(static_cast<std::uint32_t>(net.softmax_W.cols()));
    write_matrix(w, net.softmax_W);
    write_vector(w, net.softmax_b);

    w.u32(static_cast<std::uint32_t>(metadata.size()));
    w.bytes(metadata.data(), metadata.size());
}

ModelFile load_model(const std::filesystem::path& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4, "magic");
    if (std::memcmp(magic, "SSDA", 4) != 0)
        throw io_error(io_errc::bad_magic, path.string() + ": not an SSDA model");
    const std::uint16_t version = r.u16("version");
    if (version != kModelFormatVersion)
        throw io_error(io_errc::bad_version,
                       path.string() + ": unsupported model version " + std::to_string(version));

    ModelFile out;
    const std::uint8_t name_len = r.u8("name length");
    out.architecture.name.resize(name_len);
    if (name_len) r.bytes(out.architecture.name.data(), name_len, "name");
    out.architecture.l2_lambda = r.u8("l2 switch");
    out.architecture.dropout_p = r.f64("dropout");
    const std::uint8_t classes = r.u8("class count");
    const std::uint32_t input_dim = r.u32("input dim");
    const std::uint32_t n_layers = r.u32("layer count");
    if (classes == 0 || input_dim == 0)
        throw io_error(io_errc::bad_dimension, path.string() + ": empty model header");

    out.network.whitening.epsilon = r.f64("whitening epsilon");
    out.network.whitening.mean = read_vector(r, input_dim, "whitening mean");
    out.network.whitening.Z = read_matrix(r, input_dim, input_dim, "whitening matrix");

    std::uint32_t expected_visible = input_dim;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const std::string what = "layer " + std::to_string(l + 1);
        const std::uint32_t visible = r.u32((what + " visible").c_str());
        const std::uint32_t hidden = r.u32((what + " hidden").c_str());
        if (visible != expected_visible || hidden == 0)
            throw io_error(io_errc::bad_dimension,
                           path.string() + ": inconsistent dimensions in " + what);
        out.architecture.hidden_sizes.push_back(static_cast<int>(hidden));
        out.architecture.corruption.push_back(r.f64((what + " corruption").c_str()));
        const bool has_sparsity = r.u8((what + " sparsity flag").c_str()) != 0;
        const double rho = r.f64((what + " rho").c_str());
        out.architecture.rho.push_back(has_sparsity ? std::optional<double>(rho) : std::nullopt);

        AutoencoderLayer layer;
        layer.W = read_matrix(r, hidden, visible, (what + " weights").c_str());
        layer.b_hidden = read_vector(r, hidden, (what + " hidden bias").c_str());
        layer.b_visible = read_vector(r, visible, (what + " visible bias").c_str());
        out.network.layers.push_back(std::move(layer));
        expected_visible = hidden;
    }

    const std::uint32_t rows = r.u32("softmax rows");
    const std::uint32_t cols = r.u32("softmax cols");
    if (rows != classes || cols != expected_visible)
        throw io_error(io_errc::bad_dimension, path.string() + ": softmax dimension mismatch");
    out.network.softmax_W = read_matrix(r, rows, cols, "softmax weights");
    out.network.softmax_b = read_vector(r, rows, "softmax bias");

    const std::uint32_t meta_len = r.u32("metadata length");
    out.metadata.resize(meta_len);
    if (meta_len) r.bytes(out.metadata.data(), meta_len, "metadata");
    if (!r.at_eof())
        throw io_error(io_errc::bad_dimension, path.string() + ": trailing bytes after metadata");

    out.network.validate();
    return out;
}

void export_receptive_fields(const StackedNetwork& net, int layer_index,
                             const std::filesystem::path& csv_path,
                             const std::filesystem::path& pgm_path) {
    if (layer_index < 1 || layer_index > static_cast<int>(net.layers.size()))
        throw std::invalid_argument("export_receptive_fields: no such layer");
    const Eigen::MatrixXd& w = net.layers[static_cast<std::size_t>(layer_index - 1)].W;
    const Eigen::Index hidden = w.rows();
    const Eigen::Index visible = w.cols();

    {
        std::FILE* f = std::fopen(csv_path.c_str(), "w");
        if (!f) throw io_error(io_errc::io_failed, "cannot open " + csv_path.string());
        std::fprintf(f, "neuron");
        for (Eigen::Index j = 0; j < visible; ++j)
            std::fprintf(f, ",w%lld", static_cast<long long>(j));
        std::fprintf(f, "\n");
        for (Eigen::Index i = 0; i < hidden; ++i) {
            std::fprintf(f, "%lld", static_cast<long long>(i));
            for (Eigen::Index j = 0; j < visible; ++j) std::fprintf(f, ",%.17g", w(i, j));
            std::fprintf(f, "\n");
        }
        std::fclose(f);
    }

    // Tile grid: one tile per neuron, I weights over Q weights, per-tile
    // min-max contrast. 1px separators between tiles.
    const Eigen::Index tile_w = visible / 2;
    const Eigen::Index tile_h = 2;
    const Eigen::Index grid = static_cast<Eigen::Index>(
        std::ceil(std::sqrt(static_cast<double>(hidden))));
    const Eigen::Index img_w = grid * (tile_w + 1) - 1;
    const Eigen::Index img_h = grid * (tile_h + 1) - 1;
    std::vector<std::uint8_t> image(static_cast<std::size_t>(img_w * img_h), 0);

    for (Eigen::Index neuron = 0; neuron < hidden; ++neuron) {
        const Eigen::Index gx = (neuron % grid) * (tile_w + 1);
        const Eigen::Index gy = (neuron / grid) * (tile_h + 1);
        const double lo = w.row(neuron).minCoeff();
        const double hi = w.row(neuron).maxCoeff();
        const double range = hi - lo;
        for (Eigen::Index j = 0; j < visible; ++j) {
            // Interleaved layout: even weights are I, odd are Q.
            const Eigen::Index x = gx + j / 2;
            const Eigen::Index y = gy + j % 2;
            const double v = range > 0.0 ? (w(neuron, j) - lo) / range : 0.5;
            image[static_cast<std::size_t>(y * img_w + x)] =
                static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    }

    std::FILE* f = std::fopen(pgm_path.c_str(), "wb");
    if (!f) throw io_error(io_errc::io_failed, "cannot open " + pgm_path.string());
    std::fprintf(f, "P5\n%lld %lld\n255\n", static_cast<long long>(img_w),
                 static_cast<long long>(img_h));
    std::fwrite(image.data(), 1, image.size(), f);
    std::fclose(f);
}

} // namespace amc
