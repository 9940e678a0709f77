#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "guideboot/types.h"

namespace guideboot {

// One logged request: its candidate pool and the groundtruth success rate of
// every candidate.
struct LoggedStep {
  CandidateSet candidates;
  std::vector<double> probabilities;
};

struct LoggedPool {
  std::vector<LoggedStep> steps;

  // Smallest layout that fits every code, action id in field 0.
  FieldLayout inferred_layout() const;
};

class PoolFormatError : public std::runtime_error {
 public:
  PoolFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Line grammar (blank lines and lines starting with '#' are skipped):
//
//   line   := m ';' cands ';' probs
//   cands  := codes ('|' codes)*        exactly m entries
//   codes  := int (',' int)*            same length on every candidate
//   probs  := real ('|' real)*          exactly m entries, each in [0, 1]
LoggedPool parse_logged_pool(std::istream& in);
LoggedPool load_logged_pool(const std::filesystem::path& path);
void write_logged_pool(std::ostream& out, const LoggedPool& pool);

}  // namespace guideboot
