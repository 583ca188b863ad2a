#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "polycert/common.hpp"

namespace polycert::data {

/// Points with class labels in [0, num_classes). All points share one dimension.
struct LabeledDataset {
  std::vector<Vec> points;
  std::vector<Label> labels;
  Eigen::Index dim = 0;
  int num_classes = 0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  /// Throws ArgumentError when the invariants above do not hold.
  void validate() const;
  /// Dataset restricted to the given indices, in that order.
  LabeledDataset subset(const std::vector<std::size_t>& indices) const;
};

/// K subspaces S_k = span(U_k), each with an orthonormal n x d_k basis, and
/// the width gamma of the neighbourhood the class mass concentrates on.
struct SubspaceModel {
  std::vector<Mat> bases;
  double gamma = 0.0;

  int num_classes() const noexcept { return static_cast<int>(bases.size()); }
  Eigen::Index dim() const { return bases.empty() ? 0 : bases.front().rows(); }
  void validate() const;
};

/// K random d-dimensional subspaces of R^n (QR of Gaussian matrices).
SubspaceModel random_subspace_model(int num_classes, Eigen::Index n, Eigen::Index d, double gamma,
                                    std::uint64_t seed);

/// Per-class principal subspaces: the top-d left singular vectors of each
/// class's data matrix. No centering; the model is linear, not affine.
SubspaceModel fit_subspace_model(const LabeledDataset& data, Eigen::Index d);

/// ||x - U U^T x||_2 for an orthonormal basis U.
double distance_to_subspace(const Mat& basis, const Vec& x);

/// Samples per_class points from each subspace. A point of class k is
/// (1 - gamma) * U_k z / ||U_k z|| + w with ||w||_2 <= gamma, so it lies in
/// the unit ball and within gamma of S_k. With gamma = 0 every point is a unit
/// vector exactly on its subspace.
LabeledDataset generate_uos(const SubspaceModel& model, int per_class, std::uint64_t seed);

/// Raw IDX array of unsigned bytes.
struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Reads an IDX file. Gzip-compressed files (.gz, detected by magic bytes)
/// are inflated transparently. Errors are ParseErrors carrying the byte offset.
IdxArray read_idx(const std::filesystem::path& path);
/// Writes an uncompressed IDX file, or a gzip stream when `gzip` is true.
void write_idx(const std::filesystem::path& path, const IdxArray& array, bool gzip = false);

/// Side length images are resized to before flattening.
inline constexpr int kImageSide = 32;

/// Bilinear resize (half-pixel centres, edge clamping) of a row-major
/// grayscale image. Output is row-major, values in the input's units.
Vec resize_bilinear(const std::uint8_t* pixels, int rows, int cols, int out_rows, int out_cols);

/// Loads an (images, labels) IDX pair: each image is resized to 32x32,
/// flattened row-major and scaled to unit l2 norm. `limit` > 0 keeps only the
/// first `limit` records.
LabeledDataset load_idx_images(const std::filesystem::path& images, const std::filesystem::path& labels,
                               std::size_t limit = 0);

/// Dataset as CSV: header `label,x0,...,x{n-1}`, one row per point.
void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset read_dataset_csv(const std::filesystem::path& path);

/// Training dictionary S (n x M, unit-norm columns) with one label per column.
///
/// The signed view T = [S, -S] is not stored: signed column j < M is +s_j and
/// signed column j >= M is -s_{j-M}.
class Dictionary {
 public:
  /// Normalizes every column to unit l2 norm; throws on zero columns.
  Dictionary(Mat atoms, std::vector<Label> labels, int num_classes);

  const Mat& atoms() const noexcept { return atoms_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  Label label(Eigen::Index i) const { return labels_.at(static_cast<std::size_t>(i)); }
  Eigen::Index size() const noexcept { return atoms_.cols(); }
  Eigen::Index dim() const noexcept { return atoms_.rows(); }
  int num_classes() const noexcept { return num_classes_; }

  /// Column j of T = [S, -S], j in [0, 2M).
  Vec signed_column(Eigen::Index j) const;

 private:
  Mat atoms_;
  std::vector<Label> labels_;
  int num_classes_;
};

/// Samples m columns uniformly without replacement (or m / K per class when
/// `balanced`), in a seed-determined order.
Dictionary build_dictionary(const LabeledDataset& data, Eigen::Index m, std::uint64_t seed,
                            bool balanced = false);

}  // namespace polycert::data
