#pragma once

#include <fstream>
#include <sstream>

#include "pcdef/model.hpp"

namespace pcdef {

// Thrown for malformed input files; message carries a byte offset or
// row/column position.
class data_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Tensor features;  // rows = examples
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return features.rows(); }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.num_classes = num_classes;
    std::size_t d = features.cols();
    out.features = Tensor::zeros({idx.size(), d});
    out.labels.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t c = 0; c < d; ++c) out.features.at(r, c) = features.at(idx[r], c);
      out.labels.push_back(labels[idx[r]]);
    }
    return out;
  }

  Batch as_batch() const {
    Batch b;
    b.inputs = features;
    b.labels = labels;
    return b;
  }

  std::vector<Batch> batches(std::size_t batch_size) const {
    if (batch_size < 1) throw invalid_input("batches: batch_size must be >= 1");
    std::vector<Batch> out;
    std::size_t d = features.cols();
    for (std::size_t begin = 0; begin < size(); begin += batch_size) {
      std::size_t end = std::min(size(), begin + batch_size);
      Batch b;
      b.inputs = Tensor::zeros({end - begin, d});
      for (std::size_t r = begin; r < end; ++r) {
        for (std::size_t c = 0; c < d; ++c) b.inputs.at(r - begin, c) = features.at(r, c);
        b.labels.push_back(labels[r]);
      }
      out.push_back(std::move(b));
    }
    return out;
  }
};

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// 80/20 split by seeded shuffle.
inline TrainTestSplit split_80_20(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::size_t cut = data.size() * 4 / 5;
  TrainTestSplit s;
  s.train = data.subset({idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut)});
  s.test = data.subset({idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end()});
  return s;
}

enum class SynthKind { Gaussians, Moons, Xor };

// Balanced 2-class synthetic sets, deterministic for a fixed seed.
inline Dataset synth_dataset(SynthKind kind, std::size_t count, double noise,
                             std::uint64_t seed) {
  if (count < 2) throw invalid_input("synth_dataset: count must be >= 2");
  Dataset d;
  d.num_classes = 2;
  d.features = Tensor::zeros({count, 2});
  d.labels.resize(count);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    int label = static_cast<int>(i % 2);
    double x = 0.0, y = 0.0;
    switch (kind) {
      case SynthKind::Gaussians:
        x = (label == 0 ? -2.0 : 2.0) + noise * gauss(rng);
        y = noise * gauss(rng);
        break;
      case SynthKind::Moons: {
        double t = unit(rng) * M_PI;
        if (label == 0) {
          x = std::cos(t);
          y = std::sin(t);
        } else {
          x = 1.0 - std::cos(t);
          y = 0.5 - std::sin(t);
        }
        x += noise * gauss(rng);
        y += noise * gauss(rng);
        break;
      }
      case SynthKind::Xor: {
        double sx = unit(rng) < 0.5 ? -1.0 : 1.0;
        double sy = unit(rng) < 0.5 ? -1.0 : 1.0;
        label = (sx > 0) != (sy > 0) ? 1 : 0;
        x = sx * (0.5 + 0.5 * unit(rng)) + noise * gauss(rng);
        y = sy * (0.5 + 0.5 * unit(rng)) + noise * gauss(rng);
        break;
      }
    }
    d.features.at(i, 0) = x;
    d.features.at(i, 1) = y;
    d.labels[i] = label;
  }
  return d;
}

inline SynthKind synth_kind_from_name(const std::string& name) {
  if (name == "synth_gaussians") return SynthKind::Gaussians;
  if (name == "synth_moons") return SynthKind::Moons;
  if (name == "synth_xor") return SynthKind::Xor;
  throw invalid_input("unknown synthetic dataset kind: " + name);
}

// ---------------------------------------------------------------------------
// IDX (big-endian) readers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error(path + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off,
                               const std::string& path) {
  if (off + 4 > b.size())
    throw data_error(path + ": truncated header at byte offset " + std::to_string(off));
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace detail

// Images file, magic 0x00000803: dims (count, rows, cols), u8 pixels scaled
// to [0, 1].
inline Tensor load_idx_images(const std::string& path) {
  auto bytes = detail::read_file_bytes(path);
  std::uint32_t magic = detail::read_be32(bytes, 0, path);
  if (magic != 0x00000803u)
    throw data_error(path + ": bad magic 0x" + [&] {
      std::ostringstream os;
      os << std::hex << magic;
      return os.str();
    }() + " at byte offset 0 (expected 0x803)");
  std::uint32_t count = detail::read_be32(bytes, 4, path);
  std::uint32_t rows = detail::read_be32(bytes, 8, path);
  std::uint32_t cols = detail::read_be32(bytes, 12, path);
  std::size_t expected = 16 + std::size_t(count) * rows * cols;
  if (bytes.size() < expected)
    throw data_error(path + ": truncated payload, expected " + std::to_string(expected) +
                     " bytes, got " + std::to_string(bytes.size()) +
                     " (missing from byte offset " + std::to_string(bytes.size()) + ")");
  if (bytes.size() > expected)
    throw data_error(path + ": trailing bytes after payload at byte offset " +
                     std::to_string(expected));
  Tensor t = Tensor::zeros({count, std::size_t(rows) * cols});
  for (std::size_t i = 0; i < std::size_t(count) * rows * cols; ++i)
    t.values[i] = bytes[16 + i] / 255.0;
  return t;
}

// Labels file, magic 0x00000801.
inline std::vector<int> load_idx_labels(const std::string& path) {
  auto bytes = detail::read_file_bytes(path);
  std::uint32_t magic = detail::read_be32(bytes, 0, path);
  if (magic != 0x00000801u)
    throw data_error(path + ": bad magic at byte offset 0 (expected 0x801)");
  std::uint32_t count = detail::read_be32(bytes, 4, path);
  std::size_t expected = 8 + count;
  if (bytes.size() < expected)
    throw data_error(path + ": truncated payload, expected " + std::to_string(expected) +
                     " bytes, got " + std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw data_error(path + ": trailing bytes after payload at byte offset " +
                     std::to_string(expected));
  return {bytes.begin() + 8, bytes.end()};
}

inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  Dataset d;
  d.features = load_idx_images(images_path);
  d.labels = load_idx_labels(labels_path);
  if (d.features.rows() != d.labels.size())
    throw data_error(images_path + ": image count " + std::to_string(d.features.rows()) +
                     " does not match label count " + std::to_string(d.labels.size()));
  int mx = 0;
  for (int y : d.labels) mx = std::max(mx, y);
  d.num_classes = static_cast<std::size_t>(mx) + 1;
  return d;
}

// ---------------------------------------------------------------------------
// CSV reader: header row, numeric cells, last column is the class label.
// ---------------------------------------------------------------------------

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw data_error(path + ": empty file (no header row)");
  std::size_t n_cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (n_cols < 2) throw data_error(path + ": need at least one feature column and a label");

  std::vector<Vec> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec row;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing junk");
        row.push_back(v);
      } catch (const std::exception&) {
        throw data_error(path + ": non-numeric cell '" + cell + "' at row " +
                         std::to_string(line_no) + ", column " + std::to_string(col));
      }
    }
    if (col != n_cols)
      throw data_error(path + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(col) + " cells, expected " + std::to_string(n_cols));
    labels.push_back(static_cast<int>(row.back()));
    row.pop_back();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw data_error(path + ": no data rows");

  Dataset d;
  d.features = Tensor::zeros({rows.size(), n_cols - 1});
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c + 1 < n_cols; ++c) d.features.at(r, c) = rows[r][c];
  d.labels = std::move(labels);
  int mx = 0;
  for (int y : d.labels) {
    if (y < 0) throw data_error(path + ": negative class label");
    mx = std::max(mx, y);
  }
  d.num_classes = static_cast<std::size_t>(mx) + 1;
  return d;
}

}  // namespace pcdef
