#include <span>

#include "safe/seqsim.hpp"

int main() {
  safe::ContinuationPolicy peeking("peeking", 3, [](const safe::History&, std::span<const double> batch) {
    return !batch.empty() && batch.front() > 0.0;
  });
  return peeking.k_max() > 0 ? 0 : 1;
}
