#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogtree {

// Error codes carried by every structured error thrown from the library.
enum class Errc {
  DimensionMismatch,
  EmptyInput,
  InvalidArgument,
  DegenerateGeometry,
  RecuperationUndefined,
  NoFeasibleCandidate,
  NonFiniteInput,
  AllMasked,
  ParseError,
  CrossReference,
  VersionMismatch,
  CorruptStream,
  NotTrained,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DimensionMismatch: return "dimension_mismatch";
    case Errc::EmptyInput: return "empty_input";
    case Errc::InvalidArgument: return "invalid_argument";
    case Errc::DegenerateGeometry: return "degenerate_geometry";
    case Errc::RecuperationUndefined: return "recuperation_undefined";
    case Errc::NoFeasibleCandidate: return "no_feasible_candidate";
    case Errc::NonFiniteInput: return "non_finite_input";
    case Errc::AllMasked: return "all_masked";
    case Errc::ParseError: return "parse_error";
    case Errc::CrossReference: return "cross_reference";
    case Errc::VersionMismatch: return "version_mismatch";
    case Errc::CorruptStream: return "corrupt_stream";
    case Errc::NotTrained: return "not_trained";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

// splitmix64: seed derivation for per-component RNG streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sub-seed for a named stream of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

// Seed derived from an identifier string (e.g. a set of user ids). Trees must
// fragment a given subspace identically regardless of where it appears, so
// per-node randomness keys on content, not node id.
inline std::uint64_t derive_seed_str(std::uint64_t master, const std::string& key) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ master;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

}  // namespace cogtree
