#pragma once

// Binary sequence spaces {0,1}^N, count spaces {0,...,N}, and partitions of
// the counts into contiguous cells.

#include "evidence_kit/core.hpp"

#include <string>
#include <vector>

namespace evidence_kit {

/// Largest N for which {0,1}^N is enumerated.
inline constexpr unsigned max_enumerated_length = 20;

/// Binary strings of length N in lexicographic order.
inline FiniteSpace binary_space(unsigned N) {
  if (N < 1) throw Error(ErrorCode::invalid_parameter, "sequence length must be >= 1");
  if (N > max_enumerated_length)
    throw Error(ErrorCode::budget_exceeded, "2^" + std::to_string(N) + " sequences exceed the enumeration budget");
  std::vector<std::string> labels;
  labels.reserve(std::size_t{1} << N);
  for (std::size_t code = 0; code < (std::size_t{1} << N); ++code) {
    std::string s(N, '0');
    for (unsigned b = 0; b < N; ++b)
      if (code & (std::size_t{1} << (N - 1 - b))) s[b] = '1';
    labels.push_back(std::move(s));
  }
  return FiniteSpace(std::move(labels));
}

/// Labels "0", ..., "N".
inline FiniteSpace count_space(unsigned N) {
  std::vector<std::string> labels;
  labels.reserve(N + 1);
  for (unsigned k = 0; k <= N; ++k) labels.push_back(std::to_string(k));
  return FiniteSpace(std::move(labels));
}

/// Number of ones in a binary string.
inline unsigned count_ones(std::string_view omega) {
  unsigned k = 0;
  for (char c : omega) {
    if (c == '1') {
      ++k;
    } else if (c != '0') {
      throw Error(ErrorCode::invalid_alphabet, "'" + std::string(omega) + "' is not a binary string");
    }
  }
  return k;
}

/// Returns N when `space` is exactly {0,1}^N in canonical order.
inline unsigned binary_length(const FiniteSpace& space) {
  const std::string& first = space.label(0);
  const auto N = static_cast<unsigned>(first.size());
  if (N == 0 || N > max_enumerated_length || space.size() != (std::size_t{1} << N) ||
      first != std::string(N, '0') || space.label(space.size() - 1) != std::string(N, '1'))
    throw Error(ErrorCode::space_mismatch, "space is not {0,1}^N");
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& s = space.label(i);
    if (s.size() != N) throw Error(ErrorCode::space_mismatch, "space is not {0,1}^N");
    std::size_t code = 0;
    for (char c : s) {
      if (c != '0' && c != '1') throw Error(ErrorCode::space_mismatch, "space is not {0,1}^N");
      code = (code << 1) | static_cast<std::size_t>(c == '1');
    }
    if (code != i) throw Error(ErrorCode::space_mismatch, "binary space is not in lexicographic order");
  }
  return N;
}

/// Returns N when `space` is {0,...,N} in order.
inline unsigned count_length(const FiniteSpace& space) {
  for (std::size_t k = 0; k < space.size(); ++k)
    if (space.label(k) != std::to_string(k)) throw Error(ErrorCode::space_mismatch, "space is not {0,...,N}");
  return static_cast<unsigned>(space.size() - 1);
}

/// Popcount of each outcome of {0,1}^N, by position.
inline std::vector<unsigned> ones_by_position(unsigned N) {
  std::vector<unsigned> k(std::size_t{1} << N);
  for (std::size_t code = 0; code < k.size(); ++code) k[code] = static_cast<unsigned>(__builtin_popcountll(code));
  return k;
}

/// Partition of {0,...,N} into contiguous runs of counts.
struct CellPartition {
  unsigned N = 0;
  std::vector<std::pair<unsigned, unsigned>> cells;  // inclusive [first, last]
  std::vector<std::size_t> cell_of;                  // count -> cell index
  bool near_tie = false;  // some k/N was within 1e-13 of a net point

  std::size_t size() const { return cells.size(); }
  unsigned cell_size(std::size_t c) const { return cells[c].second - cells[c].first + 1; }

  /// Validates disjointness, contiguity and coverage.
  static CellPartition from_cells(unsigned N, std::vector<std::pair<unsigned, unsigned>> cells) {
    CellPartition p;
    p.N = N;
    p.cell_of.assign(N + 1, 0);
    unsigned next = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto [a, b] = cells[c];
      if (a != next || b < a || b > N) throw Error(ErrorCode::invalid_input, "cells must be contiguous and cover 0..N");
      for (unsigned k = a; k <= b; ++k) p.cell_of[k] = c;
      next = b + 1;
    }
    if (next != N + 1) throw Error(ErrorCode::invalid_input, "cells must cover 0..N");
    p.cells = std::move(cells);
    return p;
  }
};

}  // namespace evidence_kit
