#include "safe/evalue.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace safe {

EvidenceValue::EvidenceValue(double value, std::string source)
    : value_(value), source_(std::move(source)) {
  if (!(value >= 0.0)) {
    throw std::domain_error("EvidenceValue must be nonnegative, got " +
                            std::to_string(value));
  }
}

double EvidenceValue::log_value() const { return std::log(value_); }

const char* to_string(Decision d) {
  return d == Decision::kRejectNull ? "reject0" : "accept0";
}

SafeTestDecision safe_test(const EvidenceValue& s, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::domain_error("alpha must lie in (0, 1]");
  }
  const bool reject = s.value() >= 1.0 / alpha;
  return {alpha, reject ? Decision::kRejectNull : Decision::kAcceptNull};
}

double p_from_s(const EvidenceValue& s) {
  if (s.value() <= 1.0) return 1.0;
  return 1.0 / s.value();
}

EvidenceValue combine_product(std::span<const EvidenceValue> trace) {
  double log_prod = 0.0;
  for (const auto& s : trace) {
    if (s.value() == 0.0) return EvidenceValue(0.0, "product");
    log_prod += s.log_value();
  }
  return EvidenceValue(std::exp(log_prod), "product");
}

double vs_bound(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("p must lie in (0, 1]");
  return -std::numbers::e * p * std::log(p);
}

EvidenceValue calibrate_vs(double p) {
  if (!(p > 0.0)) throw std::domain_error("calibrate_vs: p must be positive");
  if (p > 1.0) throw std::domain_error("calibrate_vs: p must be at most 1");
  if (p >= 1.0 / std::numbers::e) return EvidenceValue(1.0, "vovk-sellke");
  return EvidenceValue(1.0 / vs_bound(p), "vovk-sellke");
}

EvidenceValue s_from_codelength(double n_bits, double code_len_bits) {
  if (n_bits < 0.0) throw std::domain_error("bit count must be nonnegative");
  return EvidenceValue(std::exp2(n_bits - code_len_bits), "compression");
}

}  // namespace safe
