#include "polycert/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>

#include "polycert/numerics.hpp"

namespace polycert::data {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& compressed) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw Error("inflateInit2 failed");
  zs.next_in = const_cast<Bytef*>(compressed.data());
  zs.avail_in = static_cast<uInt>(compressed.size());
  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 16> chunk{};
  int status = Z_OK;
  while (status != Z_STREAM_END) {
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    status = inflate(&zs, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      const auto offset = static_cast<std::uint64_t>(zs.total_in);
      inflateEnd(&zs);
      throw ParseError("corrupt or truncated gzip stream", offset);
    }
    out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
    if (status != Z_STREAM_END && zs.avail_in == 0 && zs.avail_out != 0) {
      const auto offset = static_cast<std::uint64_t>(zs.total_in);
      inflateEnd(&zs);
      throw ParseError("truncated gzip stream", offset);
    }
  }
  inflateEnd(&zs);
  return out;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw ParseError("truncated IDX header", bytes.size());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

Mat orthonormal_basis(const Mat& m) {
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

}  // namespace

void LabeledDataset::validate() const {
  if (points.size() != labels.size()) throw ArgumentError("dataset: points/labels length mismatch");
  if (num_classes < 1 && !points.empty()) throw ArgumentError("dataset: num_classes must be >= 1");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) throw ArgumentError("dataset: point dimension mismatch at " + std::to_string(i));
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ArgumentError("dataset: label out of range at " + std::to_string(i));
    }
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  LabeledDataset out;
  out.dim = dim;
  out.num_classes = num_classes;
  out.points.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.points.push_back(points.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

void SubspaceModel::validate() const {
  if (bases.empty()) throw ArgumentError("subspace model: no subspaces");
  if (!(gamma >= 0.0)) throw ArgumentError("subspace model: gamma must be >= 0");
  const Eigen::Index n = bases.front().rows();
  for (const Mat& u : bases) {
    if (u.rows() != n) throw ArgumentError("subspace model: bases disagree on ambient dimension");
    if (u.cols() >= n) throw ArgumentError("subspace model: subspace dimension must be < ambient dimension");
    if (u.cols() < 1) throw ArgumentError("subspace model: empty basis");
    const Mat gram = u.transpose() * u;
    if ((gram - Mat::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff() > 1e-10) {
      throw ArgumentError("subspace model: basis is not orthonormal");
    }
  }
}

SubspaceModel random_subspace_model(int num_classes, Eigen::Index n, Eigen::Index d, double gamma,
                                    std::uint64_t seed) {
  if (num_classes < 1) throw ArgumentError("random_subspace_model: need at least one class");
  if (d < 1 || d >= n) throw ArgumentError("random_subspace_model: need 1 <= d < n");
  numerics::Rng rng(seed);
  SubspaceModel model;
  model.gamma = gamma;
  for (int k = 0; k < num_classes; ++k) {
    Mat g(n, d);
    for (Eigen::Index j = 0; j < d; ++j) g.col(j) = rng.gaussian(n, 1.0);
    model.bases.push_back(orthonormal_basis(g));
  }
  model.validate();
  return model;
}

SubspaceModel fit_subspace_model(const LabeledDataset& data, Eigen::Index d) {
  data.validate();
  if (d < 1 || d >= data.dim) throw ArgumentError("fit_subspace_model: need 1 <= d < n");
  SubspaceModel model;
  for (int k = 0; k < data.num_classes; ++k) {
    std::vector<const Vec*> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == k) members.push_back(&data.points[i]);
    }
    if (static_cast<Eigen::Index>(members.size()) < d) {
      throw ArgumentError("fit_subspace_model: class " + std::to_string(k) + " has fewer than d points");
    }
    Mat x(data.dim, static_cast<Eigen::Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = *members[j];
    Eigen::BDCSVD<Mat> svd(x, Eigen::ComputeThinU);
    model.bases.push_back(svd.matrixU().leftCols(d));
  }
  model.validate();
  return model;
}

double distance_to_subspace(const Mat& basis, const Vec& x) {
  return (x - basis * (basis.transpose() * x)).norm();
}

LabeledDataset generate_uos(const SubspaceModel& model, int per_class, std::uint64_t seed) {
  model.validate();
  if (per_class < 1) throw ArgumentError("generate_uos: per_class must be >= 1");
  numerics::Rng rng(seed);
  LabeledDataset out;
  out.dim = model.dim();
  out.num_classes = model.num_classes();
  for (int k = 0; k < model.num_classes(); ++k) {
    const Mat& u = model.bases[static_cast<std::size_t>(k)];
    for (int i = 0; i < per_class; ++i) {
      Vec on = u * rng.unit_vector(u.cols());
      Vec x = (1.0 - model.gamma) * on;
      if (model.gamma > 0.0) x += (model.gamma * rng.uniform()) * rng.unit_vector(out.dim);
      out.points.push_back(std::move(x));
      out.labels.push_back(k);
    }
  }
  return out;
}

IdxArray read_idx(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) bytes = gunzip(bytes);

  IdxArray out;
  out.magic = read_be32(bytes, 0);
  if ((out.magic >> 16) != 0) throw ParseError("bad IDX magic number", 0);
  if (((out.magic >> 8) & 0xff) != 0x08) throw ParseError("unsupported IDX element type (only ubyte)", 2);
  const std::size_t ndims = out.magic & 0xff;
  if (ndims == 0) throw ParseError("IDX file declares zero dimensions", 3);
  std::size_t count = 1;
  for (std::size_t k = 0; k < ndims; ++k) {
    out.dims.push_back(read_be32(bytes, 4 + 4 * k));
    count *= out.dims.back();
  }
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header + count) {
    throw ParseError("truncated IDX payload: expected " + std::to_string(count) + " bytes, found " +
                         std::to_string(bytes.size() - header),
                     bytes.size());
  }
  if (bytes.size() > header + count) throw ParseError("trailing bytes after IDX payload", header + count);
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return out;
}

void write_idx(const std::filesystem::path& path, const IdxArray& array, bool gzip) {
  std::size_t count = 1;
  for (auto d : array.dims) count *= d;
  if (count != array.data.size()) throw ArgumentError("write_idx: dims do not match payload size");
  if ((array.magic & 0xff) != array.dims.size()) throw ArgumentError("write_idx: magic/dims rank mismatch");
  std::vector<std::uint8_t> bytes;
  put_be32(bytes, array.magic);
  for (auto d : array.dims) put_be32(bytes, d);
  bytes.insert(bytes.end(), array.data.begin(), array.data.end());
  if (gzip) {
    gzFile f = gzopen(path.string().c_str(), "wb");
    if (f == nullptr) throw Error("cannot open " + path.string());
    const int written = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(f);
    if (written != static_cast<int>(bytes.size())) throw Error("short gzip write to " + path.string());
    return;
  }
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw Error("cannot open " + path.string());
  outf.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Vec resize_bilinear(const std::uint8_t* pixels, int rows, int cols, int out_rows, int out_cols) {
  Vec out(static_cast<Eigen::Index>(out_rows) * out_cols);
  const double sy = static_cast<double>(rows) / out_rows;
  const double sx = static_cast<double>(cols) / out_cols;
  for (int r = 0; r < out_rows; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, static_cast<double>(rows - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, rows - 1);
    const double wy = fy - y0;
    for (int c = 0; c < out_cols; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, static_cast<double>(cols - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, cols - 1);
      const double wx = fx - x0;
      const double top = (1 - wx) * pixels[y0 * cols + x0] + wx * pixels[y0 * cols + x1];
      const double bottom = (1 - wx) * pixels[y1 * cols + x0] + wx * pixels[y1 * cols + x1];
      out[static_cast<Eigen::Index>(r) * out_cols + c] = (1 - wy) * top + wy * bottom;
    }
  }
  return out;
}

LabeledDataset load_idx_images(const std::filesystem::path& images, const std::filesystem::path& labels,
                               std::size_t limit) {
  const IdxArray img = read_idx(images);
  const IdxArray lab = read_idx(labels);
  if (img.magic != kIdxImagesMagic) throw ParseError("images file: expected magic 0x00000803", 0);
  if (lab.magic != kIdxLabelsMagic) throw ParseError("labels file: expected magic 0x00000801", 0);
  if (img.dims[0] != lab.dims[0]) {
    throw ParseError("image/label count mismatch: " + std::to_string(img.dims[0]) + " vs " +
                         std::to_string(lab.dims[0]),
                     4);
  }
  const int rows = static_cast<int>(img.dims[1]);
  const int cols = static_cast<int>(img.dims[2]);
  const std::size_t stride = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  std::size_t count = img.dims[0];
  if (limit > 0) count = std::min(count, limit);

  LabeledDataset out;
  out.dim = kImageSide * kImageSide;
  int max_label = -1;
  for (std::size_t i = 0; i < count; ++i) {
    Vec x = resize_bilinear(img.data.data() + i * stride, rows, cols, kImageSide, kImageSide);
    const double nrm = x.norm();
    if (nrm == 0.0) throw ParseError("blank image " + std::to_string(i) + " cannot be normalized", 16 + i * stride);
    out.points.push_back(x / nrm);
    out.labels.push_back(lab.data[i]);
    max_label = std::max(max_label, static_cast<int>(lab.data[i]));
  }
  out.num_classes = max_label + 1;
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& data) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  out << "label";
  for (Eigen::Index j = 0; j < data.dim; ++j) out << ",x" << j;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i];
    for (Eigen::Index j = 0; j < data.dim; ++j) out << ',' << data.points[i][j];
    out << '\n';
  }
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line)) throw ParseError("empty dataset CSV", 0);
  const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  offset += line.size() + 1;
  LabeledDataset out;
  out.dim = columns;
  int max_label = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("non-numeric CSV cell '" + cell + "'", offset);
      }
    }
    if (static_cast<Eigen::Index>(values.size()) != columns + 1) throw ParseError("ragged CSV row", offset);
    const auto label = static_cast<Label>(values[0]);
    out.labels.push_back(label);
    out.points.push_back(Eigen::Map<Vec>(values.data() + 1, columns));
    max_label = std::max(max_label, label);
    offset += line.size() + 1;
  }
  out.num_classes = max_label + 1;
  out.validate();
  return out;
}

Dictionary::Dictionary(Mat atoms, std::vector<Label> labels, int num_classes)
    : atoms_(std::move(atoms)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (atoms_.cols() == 0) throw ArgumentError("dictionary: no columns");
  if (static_cast<Eigen::Index>(labels_.size()) != atoms_.cols()) {
    throw ArgumentError("dictionary: one label per column required");
  }
  for (Eigen::Index j = 0; j < atoms_.cols(); ++j) {
    const double nrm = atoms_.col(j).norm();
    if (nrm == 0.0) throw ArgumentError("dictionary: zero column " + std::to_string(j));
    atoms_.col(j) /= nrm;
    const Label y = labels_[static_cast<std::size_t>(j)];
    if (y < 0 || y >= num_classes_) throw ArgumentError("dictionary: label out of range");
  }
}

Vec Dictionary::signed_column(Eigen::Index j) const {
  const Eigen::Index m = size();
  if (j < 0 || j >= 2 * m) throw ArgumentError("signed_column: index out of range");
  return j < m ? Vec(atoms_.col(j)) : Vec(-atoms_.col(j - m));
}

Dictionary build_dictionary(const LabeledDataset& data, Eigen::Index m, std::uint64_t seed, bool balanced) {
  data.validate();
  if (m < 1) throw ArgumentError("build_dictionary: m must be >= 1");
  if (static_cast<std::size_t>(m) > data.size()) {
    throw ArgumentError("build_dictionary: m = " + std::to_string(m) + " exceeds dataset size " +
                        std::to_string(data.size()));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 engine(seed);
  std::shuffle(order.begin(), order.end(), engine);

  std::vector<std::size_t> chosen;
  if (!balanced) {
    chosen.assign(order.begin(), order.begin() + m);
  } else {
    const int k = data.num_classes;
    std::vector<Eigen::Index> quota(static_cast<std::size_t>(k), m / k);
    for (Eigen::Index r = 0; r < m % k; ++r) ++quota[static_cast<std::size_t>(r)];
    for (std::size_t i : order) {
      auto& q = quota[static_cast<std::size_t>(data.labels[i])];
      if (q > 0) {
        chosen.push_back(i);
        --q;
      }
    }
    if (static_cast<Eigen::Index>(chosen.size()) != m) {
      throw ArgumentError("build_dictionary: a class has too few points for a balanced sample");
    }
  }

  Mat atoms(data.dim, m);
  std::vector<Label> labels;
  labels.reserve(chosen.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    atoms.col(j) = data.points[chosen[static_cast<std::size_t>(j)]];
    labels.push_back(data.labels[chosen[static_cast<std::size_t>(j)]]);
  }
  return Dictionary(std::move(atoms), std::move(labels), data.num_classes);
}

}  // namespace polycert::data
