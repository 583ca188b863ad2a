#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace polycert::io {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Comma-separated table with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::uint32_t crc32(const std::string& bytes);

/// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static SVG line chart of one or more series.
std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

/// Records every artifact of a run and writes manifest.json at the end.
class RunManifest {
 public:
  RunManifest(std::filesystem::path out_dir, std::string command);

  /// Writes `content` to out_dir / relative and records its checksum.
  void write_artifact(const std::string& relative, const std::string& content);
  void set_config(std::vector<std::pair<std::string, std::string>> config);
  void add_seed(const std::string& name, std::uint64_t seed);
  void add_timing(const std::string& name, double seconds);
  void set_status(const std::string& status);
  /// Writes manifest.json atomically.
  void finish();

  const std::filesystem::path& out_dir() const noexcept { return out_dir_; }

 private:
  struct Artifact {
    std::string path;
    std::size_t bytes;
    std::uint32_t crc;
  };
  std::filesystem::path out_dir_;
  std::string command_;
  std::string status_ = "ok";
  std::vector<Artifact> artifacts_;
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<std::pair<std::string, std::uint64_t>> seeds_;
  std::vector<std::pair<std::string, double>> timings_;
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Seconds since `start`.
double elapsed_seconds(std::chrono::steady_clock::time_point start);

}  // namespace polycert::io
