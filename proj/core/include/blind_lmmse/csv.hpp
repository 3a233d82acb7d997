#pragma once

#include "blind_lmmse/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace blmmse {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// In-memory CSV table with a fixed header; cells are preformatted strings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  std::string to_string() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(std::int64_t v);
std::string cell(std::uint64_t v);
std::string cell(int v);
std::string cell(const std::string& v);
std::string cell(const char* v);

/// One sample per row with header `i,v0,...,v{d-1}`; samples are the
/// columns of `samples`.
void write_samples_csv(const std::filesystem::path& path, const Matrix& samples);

/// Inverse of write_samples_csv; returns a d×N matrix.
Matrix read_samples_csv(const std::filesystem::path& path);

/// Writes `text` to `path`, throwing std::runtime_error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace blmmse
