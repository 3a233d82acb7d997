#include "blind_lmmse/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blmmse {

std::string format_double(double v) { return fmt::format("{}", v); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::invalid_argument(fmt::format("CSV row has {} cells, header has {}", cells.size(), header_.size()));
  }
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::to_string() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text_file(path, to_string()); }

std::string cell(double v) { return format_double(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(const std::string& v) { return v; }
std::string cell(const char* v) { return v; }

void write_samples_csv(const std::filesystem::path& path, const Matrix& samples) {
  std::string out = "i";
  for (Eigen::Index k = 0; k < samples.rows(); ++k) out += fmt::format(",v{}", k);
  out += '\n';
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    out += std::to_string(j);
    for (Eigen::Index k = 0; k < samples.rows(); ++k) {
      out += ',';
      out += format_double(samples(k, j));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

Matrix read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path.string());
  const auto dims = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::getline(ss, item, ',');  // sample index
    std::vector<double> row;
    while (std::getline(ss, item, ',')) row.push_back(std::stod(item));
    if (static_cast<Eigen::Index>(row.size()) != dims) throw std::runtime_error("ragged CSV row in " + path.string());
    rows.push_back(std::move(row));
  }
  Matrix out(dims, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (Eigen::Index k = 0; k < dims; ++k) out(k, static_cast<Eigen::Index>(j)) = rows[j][static_cast<std::size_t>(k)];
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace blmmse
