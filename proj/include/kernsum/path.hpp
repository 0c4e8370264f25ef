#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kernsum {

enum class ProcessKind {
  random_walk,
  linear_process,
  tar,
  arch,
  mixing_ar,
  split_chain,
  constructed,  // built directly from values (test hooks, file input)
};

inline const char* process_name(ProcessKind k) {
  switch (k) {
    case ProcessKind::random_walk: return "random-walk";
    case ProcessKind::linear_process: return "linear";
    case ProcessKind::tar: return "tar";
    case ProcessKind::arch: return "arch";
    case ProcessKind::mixing_ar: return "mixing-ar";
    case ProcessKind::split_chain: return "split-chain";
    case ProcessKind::constructed: return "constructed";
  }
  return "?";
}

inline ProcessKind parse_process(const std::string& s) {
  if (s == "random-walk" || s == "rw") return ProcessKind::random_walk;
  if (s == "linear") return ProcessKind::linear_process;
  if (s == "tar") return ProcessKind::tar;
  if (s == "arch") return ProcessKind::arch;
  if (s == "mixing-ar" || s == "ar") return ProcessKind::mixing_ar;
  if (s == "split-chain") return ProcessKind::split_chain;
  throw std::invalid_argument("unknown process: " + s);
}

// A simulated trajectory x_1..x_n together with its provenance, enough to
// regenerate it bit-for-bit.
struct Path {
  std::vector<double> values;
  ProcessKind kind = ProcessKind::constructed;
  std::vector<std::pair<std::string, double>> params;
  std::uint64_t seed = 0;

  std::size_t n() const { return values.size(); }
};

}  // namespace kernsum
