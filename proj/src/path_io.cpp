#include "bss/path_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "bss/errors.hpp"

namespace bss {

namespace {

constexpr double kJitter = 1e-9;

double parse_number(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + text + "'");
  }
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

}  // namespace

void write_path_csv(std::ostream& out, const SamplePath& path) {
  out << "t,x\n" << std::setprecision(17);
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    out << static_cast<double>(i) * path.step << ',' << path.values[i] << '\n';
  }
}

void write_path_csv(const std::filesystem::path& file, const SamplePath& path) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  write_path_csv(out, path);
}

SamplePath read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t,x") {
    throw DataError("expected header 't,x'");
  }
  std::vector<double> times;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw DataError("line " + std::to_string(line_no) + ": expected two fields");
    }
    times.push_back(parse_number(trim(line.substr(0, comma)), line_no));
    values.push_back(parse_number(trim(line.substr(comma + 1)), line_no));
    if (!std::isfinite(times.back()) || !std::isfinite(values.back())) {
      throw DataError("line " + std::to_string(line_no) + ": non-finite value");
    }
  }
  if (times.size() < 2) throw DataError("path needs at least two observations");
  if (std::abs(times.front()) > kJitter * std::abs(times.back())) {
    throw DataError("path must start at t = 0");
  }
  const std::size_t n = times.size() - 1;
  const double step = (times.back() - times.front()) / static_cast<double>(n);
  if (!(step > 0.0)) throw DataError("times must be increasing");
  for (std::size_t i = 0; i <= n; ++i) {
    const double expected = times.front() + static_cast<double>(i) * step;
    if (std::abs(times[i] - expected) > kJitter * std::max(step, std::abs(expected))) {
      throw DataError("non-equidistant grid at row " + std::to_string(i + 1));
    }
  }
  return SamplePath{step, std::move(values)};
}

SamplePath read_path_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  return read_path_csv(in);
}

}  // namespace bss
