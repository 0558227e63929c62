#ifndef AMC_MODELIO_HPP
#define AMC_MODELIO_HPP

#include <filesystem>
#include <string>

#include "amc/dataset.hpp"
#include "amc/network.hpp"

namespace amc {

// IQD1 dataset format (little-endian):
//   magic "IQDS" | u16 version=1 | u32 vector count | u32 vector length |
//   u8 family count | labels u8[count] | samples f32[count*length],
//   vector-major. Round trips are byte-exact.
inline constexpr std::uint16_t kDatasetFormatVersion = 1;

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path, Split split = Split::kTest);

// Plain-text sidecar (key=value lines) next to a dataset, e.g. the target
// SNR of a persisted noised set.
void write_sidecar(const std::filesystem::path& path, const std::string& text);

// SSDA model format (little-endian), see README for byte offsets:
//   magic "SSDA" | u16 version=1 | u8 name_len | name | u8 l2_lambda |
//   f64 dropout_p | u8 classes | u32 input_dim | u32 n_layers |
//   whitening (f64 epsilon, f64 mean[dim], f64 Z[dim*dim] row-major) |
//   per layer: u32 visible, u32 hidden, f64 corruption_p, u8 has_sparsity,
//     f64 rho, f64 W[h*v] row-major, f64 b_hidden[h], f64 b_visible[v] |
//   softmax: u32 rows, u32 cols, f64 W[rows*cols], f64 b[rows] |
//   u32 metadata_len | metadata (key=value text block).
// All parameters are stored as f64 so round trips are bit-exact.
inline constexpr std::uint16_t kModelFormatVersion = 1;

struct ModelFile {
    StackedNetwork network;
    ArchitectureSpec architecture;
    std::string metadata; // key=value text block
};

void save_model(const StackedNetwork& net, const ArchitectureSpec& arch,
                const std::string& metadata, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

// Receptive fields of one layer (1-based index): a CSV with one row per
// hidden neuron (index + raw input weights) and a grayscale PGM tile grid
// (per-tile min-max normalized, I row over Q row; constant tiles map to
// mid-gray).
void export_receptive_fields(const StackedNetwork& net, int layer_index,
                             const std::filesystem::path& csv_path,
                             const std::filesystem::path& pgm_path);

} // namespace amc

#endif // AMC_MODELIO_HPP
