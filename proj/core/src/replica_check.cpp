#include "safe/replica_check.hpp"

#include <cmath>
#include <cstdio>

#include "safe/reference_tables.hpp"

namespace safe {

namespace {

const reference::TableRow* published_rows(ReplicaKind kind, std::size_t& count) {
  if (kind == ReplicaKind::kBeam) {
    count = reference::kBeamTable.size();
    return reference::kBeamTable.data();
  }
  count = reference::kLemonTable.size();
  return reference::kLemonTable.data();
}

BoundarySpec boundary(const TableDesign& design, ReplicaKind kind, double param) {
  return kind == ReplicaKind::kBeam ? BoundarySpec::beam(param) : BoundarySpec::lemon_log(design, param);
}

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

std::vector<double> reference_params(ReplicaKind kind) {
  std::size_t count = 0;
  const reference::TableRow* rows = published_rows(kind, count);
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(rows[i].boundary_param);
  return out;
}

std::vector<double> reference_star_grid(ReplicaKind kind) {
  std::vector<double> out;
  if (kind == ReplicaKind::kBeam) {
    for (int i = 40; i <= 90; ++i) out.push_back(i / 100.0);
  } else {
    for (int v = 2; v <= 50; ++v) out.push_back(v);
    for (double v : {100.0, 200.0, 300.0, 400.0}) out.push_back(v);
  }
  return out;
}

double star_power(GrowTestCache& cache, ReplicaKind kind, double star_param, double boundary_param,
                  double alpha) {
  const auto& test = cache.get(boundary(cache.design(), kind, star_param));
  return worst_case_power(cache.design(), rejection_set(test.s_values, alpha),
                          boundary(cache.design(), kind, boundary_param));
}

ReplicaCheck check_replica(GrowTestCache& cache, ReplicaKind kind, const std::vector<ReplicaRow>& rows,
                           double alpha) {
  ReplicaCheck out;
  std::size_t count = 0;
  const reference::TableRow* expected = published_rows(kind, count);
  if (rows.size() != count) {
    out.ok = false;
    out.lines.push_back("expected " + std::to_string(count) + " rows, computed " + std::to_string(rows.size()));
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const ReplicaRow& r = rows[i];
    const reference::TableRow& e = expected[i];
    const bool gr_ok = std::abs(r.gr_value - e.gr_value) <= reference::kGrTolerance;
    const bool pow_ok = std::abs(r.power - e.power) <= reference::kPowerTolerance + 1e-12;
    bool star_ok = std::abs(r.star_param - e.star_param) <= 1e-9;
    std::string star_note;
    if (!star_ok) {
      const double at_published = star_power(cache, kind, e.star_param, e.boundary_param, alpha);
      star_ok = std::abs(at_published - r.power) <= 1e-12;
      star_note = " (reference star reaches power " + number(at_published) + ")";
    }
    const bool ok = gr_ok && star_ok && pow_ok;
    out.ok = out.ok && ok;
    out.lines.push_back(std::string(ok ? "ok   " : "MISS ") + number(e.boundary_param) + ": gr " +
                        number(r.gr_value) + " vs " + number(e.gr_value) + (gr_ok ? "" : " [gr]") +
                        ", star " + number(r.star_param) + " vs " + number(e.star_param) + star_note +
                        (star_ok ? "" : " [star]") + ", power " + number(r.power) + " vs " +
                        number(e.power) + (pow_ok ? "" : " [power]"));
  }
  return out;
}

}  // namespace safe
