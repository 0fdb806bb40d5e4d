#include "histoband/csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace histoband {
namespace {

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + message);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& field, std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    fail(line, "invalid number \"" + field + "\"");
  }
  return value;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, bool allow_empty) {
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw std::runtime_error("no data rows (missing header)");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line);
  if (header.size() < 2 || header.back() != "y") {
    fail(line_no, "header must be x1,...,xp,y");
  }
  const int dim = static_cast<int>(header.size()) - 1;
  for (int d = 0; d < dim; ++d) {
    const std::string expected = "x" + std::to_string(d + 1);
    if (header[static_cast<std::size_t>(d)] != expected) {
      fail(line_no, "header column " + std::to_string(d + 1) + " must be \"" +
                        expected + "\"");
    }
  }

  Dataset data;
  data.dim = dim;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(line_no, "expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    }
    for (int d = 0; d < dim; ++d) {
      const double x = parse_double(fields[static_cast<std::size_t>(d)], line_no);
      if (!(x >= 0.0) || !(x <= 1.0)) {
        fail(line_no, "x" + std::to_string(d + 1) + " outside [0,1]");
      }
      data.xs.push_back(x);
    }
    data.ys.push_back(parse_double(fields[static_cast<std::size_t>(dim)], line_no));
  }
  if (data.ys.empty() && !allow_empty) throw std::runtime_error("no data rows");
  return data;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (int d = 0; d < data.dim; ++d) out << 'x' << (d + 1) << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* x = data.x(i);
    for (int d = 0; d < data.dim; ++d) {
      out << format_double(x[d]) << ',';
    }
    out << format_double(data.ys[i]) << '\n';
  }
}

}  // namespace histoband
