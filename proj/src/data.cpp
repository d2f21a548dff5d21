#include "infocp/data.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "infocp/rng.hpp"

namespace infocp {

double TieBreaker::jitter(std::uint64_t index, std::uint64_t label_key) const {
  std::uint64_t sm = seed;
  std::uint64_t h = splitmix64(sm) ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  h = splitmix64(h) ^ (0xC2B2AE3D27D4EB4FULL * (label_key + 1));
  const std::uint64_t u = splitmix64(h);
  return magnitude * (static_cast<double>((u >> 11) + 1) * 0x1.0p-53);
}

std::uint64_t label_key(const Label& y) {
  if (std::holds_alternative<int>(y)) {
    return static_cast<std::uint64_t>(std::get<int>(y));
  }
  return std::bit_cast<std::uint64_t>(std::get<double>(y));
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad numeric field '" + s + "'");
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

}  // namespace

std::vector<LabeledExample> load_labeled_csv(const std::string& path, bool classification) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ":1: missing header");
  const auto header = split_row(chomp(line));
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error(path + ":1: expected header f1..fd,label");
  }
  const std::size_t d = header.size() - 1;

  std::vector<LabeledExample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != d + 1) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(d + 1) + " fields, got " + std::to_string(fields.size()));
    }
    LabeledExample ex;
    ex.features.reserve(d);
    for (std::size_t j = 0; j < d; ++j) ex.features.push_back(parse_double(fields[j], path, line_no));
    if (classification) {
      const double raw = parse_double(fields[d], path, line_no);
      const int k = static_cast<int>(raw);
      if (k < 1 || static_cast<double>(k) != raw) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": classification label must be a 1-based integer, got '" + fields[d] + "'");
      }
      ex.label = k;
    } else {
      ex.label = parse_double(fields[d], path, line_no);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::vector<double>> load_features_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ":1: missing header");
  const auto header = split_row(chomp(line));
  if (header.empty()) throw std::runtime_error(path + ":1: empty header");
  const std::size_t d = header.size();

  std::vector<std::vector<double>> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != d) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(d) + " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> x;
    x.reserve(d);
    for (std::size_t j = 0; j < d; ++j) x.push_back(parse_double(fields[j], path, line_no));
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace infocp
