#include "guideboot/logged_pool.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace guideboot {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, const char* what) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw PoolFormatError(line, std::string("malformed ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

PoolFormatError::PoolFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("logged pool line " + std::to_string(line) + ": " + what), line_(line) {}

FieldLayout LoggedPool::inferred_layout() const {
  FieldLayout layout;
  for (const auto& step : steps) {
    for (const auto& x : step.candidates.candidates) {
      if (layout.cardinalities.size() < x.codes.size()) {
        layout.cardinalities.resize(x.codes.size(), 0);
      }
      for (std::size_t j = 0; j < x.codes.size(); ++j) {
        layout.cardinalities[j] = std::max(layout.cardinalities[j], x.codes[j] + 1);
      }
    }
  }
  layout.action_field = 0;
  return layout;
}

LoggedPool parse_logged_pool(std::istream& in) {
  LoggedPool pool;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t fields = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    auto sections = split(line, ';');
    if (sections.size() != 3) {
      throw PoolFormatError(line_no, "expected 'm;candidates;probabilities'");
    }
    const auto m = parse_number<std::size_t>(sections[0], line_no, "candidate count");
    if (m == 0) throw PoolFormatError(line_no, "candidate count must be positive");
    auto cands = split(sections[1], '|');
    auto probs = split(sections[2], '|');
    if (cands.size() != m || probs.size() != m) {
      throw PoolFormatError(line_no, "expected " + std::to_string(m) + " candidates and " +
                                         std::to_string(m) + " probabilities");
    }

    LoggedStep step;
    for (std::size_t i = 0; i < m; ++i) {
      FeatureVector x;
      for (auto code : split(cands[i], ',')) {
        Code c = parse_number<Code>(code, line_no, "field code");
        if (c < 0) throw PoolFormatError(line_no, "negative field code");
        x.codes.push_back(c);
      }
      if (fields == 0) fields = x.codes.size();
      if (x.codes.size() != fields) {
        throw PoolFormatError(line_no, "candidate has " + std::to_string(x.codes.size()) +
                                           " fields, expected " + std::to_string(fields));
      }
      step.candidates.candidates.push_back(std::move(x));

      double p = parse_number<double>(probs[i], line_no, "probability");
      if (!(p >= 0.0 && p <= 1.0)) throw PoolFormatError(line_no, "probability outside [0, 1]");
      step.probabilities.push_back(p);
    }
    pool.steps.push_back(std::move(step));
  }
  return pool;
}

LoggedPool load_logged_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open logged pool " + path.string());
  return parse_logged_pool(in);
}

void write_logged_pool(std::ostream& out, const LoggedPool& pool) {
  char buf[32];
  for (const auto& step : pool.steps) {
    out << step.candidates.size() << ';';
    for (std::size_t i = 0; i < step.candidates.size(); ++i) {
      if (i) out << '|';
      const auto& codes = step.candidates[i].codes;
      for (std::size_t j = 0; j < codes.size(); ++j) {
        if (j) out << ',';
        out << codes[j];
      }
    }
    out << ';';
    for (std::size_t i = 0; i < step.probabilities.size(); ++i) {
      if (i) out << '|';
      std::snprintf(buf, sizeof buf, "%.6g", step.probabilities[i]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace guideboot
