#pragma once

#include <span>
#include <string>

namespace safe {

/// A nonnegative test statistic whose expectation is at most one under every
/// distribution of the null hypothesis. `source` records which construction
/// produced the value (e.g. "ttest two-point 0.5", "jipr", "compression").
class EvidenceValue {
 public:
  EvidenceValue() = default;
  /// Throws std::domain_error if `value` is negative or NaN.
  explicit EvidenceValue(double value, std::string source = {});

  double value() const { return value_; }
  double log_value() const;
  const std::string& source() const { return source_; }

  friend bool operator==(const EvidenceValue&, const EvidenceValue&) = default;

 private:
  double value_ = 1.0;
  std::string source_;
};

enum class Decision { kAcceptNull, kRejectNull };

struct SafeTestDecision {
  double alpha = 0.05;
  Decision decision = Decision::kAcceptNull;

  bool rejects() const { return decision == Decision::kRejectNull; }
};

const char* to_string(Decision d);

/// Rejects the null iff S >= 1/alpha. Throws std::domain_error unless
/// alpha is in (0, 1].
SafeTestDecision safe_test(const EvidenceValue& s, double alpha);

/// Conservative p-value 1/S clipped at 1. S = 0 maps to p = 1.
double p_from_s(const EvidenceValue& s);

/// Product of per-batch S-values; the empty product is 1.
EvidenceValue combine_product(std::span<const EvidenceValue> trace);

/// Vovk-Sellke calibrator S = 1 / (-e p ln p) for p <= 1/e, and 1 above
/// that. Throws std::domain_error for p <= 0 or p > 1.
EvidenceValue calibrate_vs(double p);

/// The inverse map f(p) = -e p ln p used by calibrate_vs.
double vs_bound(double p);

/// 2^(n - code_len): an S-value against the fair-coin null whenever
/// `code_len` is the length of a prefix-free code for the n bits.
EvidenceValue s_from_codelength(double n_bits, double code_len_bits);

}  // namespace safe
