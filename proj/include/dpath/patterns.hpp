#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dpath/errors.hpp"

namespace dpath {

/// Exact counts. 25! needs 84 bits, so 64 is not enough for the shuffle guard.
using Count = boost::multiprecision::uint128_t;

inline std::string to_string(const Count& c) { return c.str(); }

/**
 * A sequence of 1-based field indices with no two equal neighbours.
 *
 * The zero-length pattern is the identity: the t = 0 path that stays put. It
 * still remembers the ambient field count so that composition can check it.
 */
class Pattern {
 public:
  Pattern() = default;

  Pattern(std::vector<int> entries, int field_count)
      : entries_(std::move(entries)), field_count_(field_count) {
    if (field_count_ < 1) throw InvalidArgument("pattern: field count must be >= 1");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i] < 1 || entries_[i] > field_count_)
        throw InvalidArgument("pattern: entry " + std::to_string(entries_[i]) + " outside [1.." +
                              std::to_string(field_count_) + "]");
      if (i > 0 && entries_[i] == entries_[i - 1])
        throw InvalidArgument("pattern: equal adjacent entries at position " + std::to_string(i));
    }
  }

  static Pattern identity(int field_count) { return Pattern({}, field_count); }

  bool is_identity() const noexcept { return entries_.empty(); }
  std::size_t length() const noexcept { return entries_.size(); }
  /// Number of direction switches, the paper-style n with length n + 1.
  std::size_t switches() const noexcept { return entries_.empty() ? 0 : entries_.size() - 1; }
  int field_count() const noexcept { return field_count_; }
  const std::vector<int>& entries() const noexcept { return entries_; }
  int operator[](std::size_t i) const { return entries_[i]; }
  int front() const { return entries_.front(); }
  int back() const { return entries_.back(); }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend auto operator<=>(const Pattern& a, const Pattern& b) {
    return a.entries_ <=> b.entries_;
  }

 private:
  std::vector<int> entries_;
  int field_count_ = 1;
};

inline std::string to_string(const Pattern& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.length(); ++i) {
    if (i) s += ",";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

/** How many times each field occurs in a pattern. counts[j-1] belongs to field j. */
struct ContentVector {
  std::vector<std::size_t> counts;

  std::size_t total() const {
    std::size_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
  /// 1-based indices with nonzero count, ascending.
  std::vector<int> support() const {
    std::vector<int> out;
    for (std::size_t j = 0; j < counts.size(); ++j)
      if (counts[j] > 0) out.push_back(static_cast<int>(j) + 1);
    return out;
  }
  std::size_t operator[](int field) const { return counts.at(static_cast<std::size_t>(field - 1)); }
  friend bool operator==(const ContentVector&, const ContentVector&) = default;
};

inline ContentVector content(const Pattern& p) {
  ContentVector cv;
  cv.counts.assign(static_cast<std::size_t>(p.field_count()), 0);
  for (int e : p.entries()) ++cv.counts[static_cast<std::size_t>(e - 1)];
  return cv;
}

/** A pattern together with its time distribution. */
struct TimedPattern {
  Pattern pattern;
  std::vector<double> times;
  double total = 0.0;

  TimedPattern() = default;
  TimedPattern(Pattern p, std::vector<double> s) : pattern(std::move(p)), times(std::move(s)) {
    for (double v : times) total += v;
    validate();
  }
  TimedPattern(Pattern p, std::vector<double> s, double t)
      : pattern(std::move(p)), times(std::move(s)), total(t) {
    validate();
  }

  void validate() const {
    if (times.size() != pattern.length())
      throw InvalidArgument("timed pattern: " + std::to_string(times.size()) + " times for a pattern of length " +
                            std::to_string(pattern.length()));
    double sum = 0.0;
    for (double v : times) {
      if (!(v >= 0.0)) throw InvalidArgument("timed pattern: negative or non-finite time");
      sum += v;
    }
    if (!(total >= 0.0)) throw InvalidArgument("timed pattern: negative total");
    if (std::abs(sum - total) > 1e-12 * std::max(1.0, total))
      throw InvalidArgument("timed pattern: times do not sum to the total");
  }
};

/**
 * All patterns of length n + 1 over k fields, in lexicographic order.
 * There are k (k-1)^n of them.
 */
inline std::vector<Pattern> enumerate_patterns(std::size_t n, int k) {
  if (k < 1) throw InvalidArgument("enumerate_patterns: k must be >= 1");
  std::vector<Pattern> out;
  if (k == 1 && n >= 1) return out;
  const std::size_t len = n + 1;
  std::vector<int> cur(len);
  std::function<void(std::size_t)> rec = [&](std::size_t pos) {
    if (pos == len) {
      out.emplace_back(cur, k);
      return;
    }
    for (int v = 1; v <= k; ++v) {
      if (pos > 0 && cur[pos - 1] == v) continue;
      cur[pos] = v;
      rec(pos + 1);
    }
  };
  rec(0);
  return out;
}

/// k (k-1)^n, saturating at UINT64_MAX.
inline std::uint64_t pattern_count(std::size_t n, int k) {
  if (k < 1) throw InvalidArgument("pattern_count: k must be >= 1");
  if (k == 1) return n == 0 ? 1 : 0;
  long double v = k;
  for (std::size_t i = 0; i < n; ++i) v *= (k - 1);
  if (v > 1.8e19L) return UINT64_MAX;
  return static_cast<std::uint64_t>(v);
}

/**
 * Concatenation in the category of directed paths. When the left pattern ends
 * with the field the right one starts with, the two boundary slots merge.
 */
inline TimedPattern compose(const TimedPattern& left, const TimedPattern& right) {
  if (left.pattern.field_count() != right.pattern.field_count())
    throw InvalidArgument("compose: field counts differ");
  if (left.pattern.is_identity()) return right;
  if (right.pattern.is_identity()) return left;
  std::vector<int> entries = left.pattern.entries();
  std::vector<double> times = left.times;
  std::size_t start = 0;
  if (left.pattern.back() == right.pattern.front()) {
    times.back() += right.times.front();
    start = 1;
  }
  for (std::size_t i = start; i < right.pattern.length(); ++i) {
    entries.push_back(right.pattern[i]);
    times.push_back(right.times[i]);
  }
  TimedPattern out;
  out.pattern = Pattern(std::move(entries), left.pattern.field_count());
  out.times = std::move(times);
  out.total = left.total + right.total;
  return out;
}

inline TimedPattern reverse(const TimedPattern& tp) {
  std::vector<int> e(tp.pattern.entries().rbegin(), tp.pattern.entries().rend());
  TimedPattern out;
  out.pattern = Pattern(std::move(e), tp.pattern.field_count());
  out.times.assign(tp.times.rbegin(), tp.times.rend());
  out.total = tp.total;
  return out;
}

inline Pattern reverse(const Pattern& p) {
  std::vector<int> e(p.entries().rbegin(), p.entries().rend());
  return Pattern(std::move(e), p.field_count());
}

/**
 * Exact perfect-shuffle counter with a persistent memo.
 *
 * Blocks with the same number of remaining cards are interchangeable, so the
 * state is a histogram of remaining block sizes plus the remaining size of the
 * block that was dealt last. That keeps (1,1,...,1) with 25 blocks tractable.
 */
class ShuffleCounter {
 public:
  static constexpr std::size_t kMaxTotal = 25;

  Count count(const std::vector<std::size_t>& multiplicities) {
    std::size_t total = 0;
    std::size_t largest = 0;
    for (auto n : multiplicities) {
      if (n == 0) throw InvalidArgument("count_perfect_shuffles: block sizes must be >= 1");
      total += n;
      largest = std::max(largest, n);
    }
    if (total > kMaxTotal)
      throw ResourceLimit("count_perfect_shuffles: total " + std::to_string(total) + " exceeds guard " +
                          std::to_string(kMaxTotal));
    std::vector<int> hist(largest + 1, 0);
    for (auto n : multiplicities) ++hist[n];
    return rec(hist, 0);
  }

 private:
  Count rec(std::vector<int>& hist, int last) {
    bool done = true;
    for (std::size_t r = 1; r < hist.size(); ++r)
      if (hist[r] != 0) {
        done = false;
        break;
      }
    if (done) return 1;
    auto key = std::make_pair(hist, last);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Count total = 0;
    for (std::size_t r = 1; r < hist.size(); ++r) {
      int choices = hist[r] - (static_cast<int>(r) == last ? 1 : 0);
      if (choices <= 0) continue;
      --hist[r];
      ++hist[r - 1];
      total += Count(choices) * rec(hist, static_cast<int>(r) - 1);
      ++hist[r];
      --hist[r - 1];
    }
    memo_.emplace(std::move(key), total);
    return total;
  }

  std::map<std::pair<std::vector<int>, int>, Count> memo_;
};

/** |PSh_k(n_1,...,n_k)|, the number of patterns with the given content. */
inline Count count_perfect_shuffles(const std::vector<std::size_t>& multiplicities) {
  ShuffleCounter counter;
  return counter.count(multiplicities);
}

/** p(m,k): partitions of m into exactly k positive parts. */
inline Count partition_count(std::size_t m, std::size_t k) {
  std::vector<std::vector<Count>> p(m + 1, std::vector<Count>(k + 1, 0));
  p[0][0] = 1;
  for (std::size_t mm = 1; mm <= m; ++mm)
    for (std::size_t kk = 1; kk <= std::min(mm, k); ++kk)
      p[mm][kk] = p[mm - 1][kk - 1] + (mm >= kk ? p[mm - kk][kk] : Count(0));
  return p[m][k];
}

/** Compositions of m into exactly k positive ordered parts, C(m-1, k-1); 1 for m = k = 0. */
inline Count composition_count(std::size_t m, std::size_t k) {
  if (k == 0) return m == 0 ? 1 : 0;
  if (m < k) return 0;
  Count c = 1;
  for (std::size_t i = 1; i < k; ++i) c = c * Count(m - i) / Count(i);
  return c;
}

struct SparseSubsetCount {
  Count enumerated = 0;
  /// p(m-k,k-1) + 2p(m-k,k) + p(m-k,k+1); present only for 1 <= k < m.
  std::optional<Count> partition_formula;
  bool identity_holds = true;
  /// The same sum with ordered parts: the gaps of the complement are compositions.
  std::optional<Count> composition_formula;
};

/** Subsets of [m] of size k without consecutive elements, counted by enumeration. */
inline SparseSubsetCount sparse_subset_count(std::size_t m, std::size_t k) {
  if (m > 60) throw ResourceLimit("sparse_subset_count: m above 60");
  SparseSubsetCount out;
  // next = smallest element still allowed
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t next, std::size_t left) {
    if (left == 0) {
      ++out.enumerated;
      return;
    }
    for (std::size_t e = next; e <= m; ++e) rec(e + 2, left - 1);
  };
  rec(1, k);
  if (k >= 1 && k < m) {
    const std::size_t rest = m - k;
    Count f = partition_count(rest, k - 1) + 2 * partition_count(rest, k) + partition_count(rest, k + 1);
    out.partition_formula = f;
    out.identity_holds = (f == out.enumerated);
    out.composition_formula =
        composition_count(rest, k - 1) + 2 * composition_count(rest, k) + composition_count(rest, k + 1);
  }
  return out;
}

struct PshValue {
  double value = 0.0;
  /// Sum of the terms on the outermost shell sum(n_i) = max_total_degree.
  double last_shell = 0.0;
};

/**
 * Truncated exponential generating series of perfect shuffles,
 * sum |PSh(n)| prod x_i^{n_i} / n_i! over n_i >= 1, sum n_i <= max_total_degree.
 */
inline PshValue psh_series(const std::vector<double>& x, std::size_t max_total_degree) {
  for (double v : x)
    if (!(v > 0.0)) throw InvalidArgument("psh_series: arguments must be positive");
  if (max_total_degree < x.size()) throw InvalidArgument("psh_series: degree below the number of blocks");
  const std::size_t k = x.size();
  ShuffleCounter counter;
  PshValue out;
  std::vector<std::size_t> n(k, 1);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == k) {
      double term = counter.count(n).convert_to<double>();
      for (std::size_t j = 0; j < k; ++j) term *= std::pow(x[j], static_cast<double>(n[j])) / std::tgamma(n[j] + 1.0);
      out.value += term;
      if (used == max_total_degree) out.last_shell += term;
      return;
    }
    const std::size_t remaining_min = k - i - 1;
    for (std::size_t v = 1; used + v + remaining_min <= max_total_degree; ++v) {
      n[i] = v;
      rec(i + 1, used + v);
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace dpath
