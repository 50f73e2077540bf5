#include "safe_cli/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "safe/evalue.hpp"
#include "safe/expfam.hpp"
#include "safe/jipr.hpp"
#include "safe/jipr_io.hpp"
#include "safe/reference_tables.hpp"
#include "safe/replica_check.hpp"
#include "safe/seqsim.hpp"
#include "safe/tables2x2.hpp"
#include "safe/ttest.hpp"
#include "safe_cli/run_config.hpp"

namespace safe::cli {

namespace {

using nlohmann::json;

/// Thrown by subcommand handlers for invalid flag combinations or values.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_cell(const json& cell) {
  if (cell.is_string()) {
    const auto s = cell.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_number_unsigned()) return std::to_string(cell.get<std::uint64_t>());
  if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
  if (cell.is_number_float()) return format_number(cell.get<double>());
  return cell.dump();
}

json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

/// Rows of named cells, written as CSV with a header or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
    rows.push_back(std::move(row));
  }
};

void write_table(std::ostream& os, const Table& table, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < row.size(); ++i) {
        obj[table.columns[i]] = nlohmann::ordered_json::parse(row[i].dump());
      }
      arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
}

/// Writes through `body` to the file at `path`, or to `fallback` when empty.
void with_output(const std::string& path, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  body(file);
  if (!file) throw std::runtime_error("error writing '" + path + "'");
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
    if (used != item.size()) throw UsageError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

SignPrior parse_sign_prior(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("sign prior must be beta:a,b or atoms:t1,t2,...");
  const std::string kind = text.substr(0, colon);
  const std::vector<double> values = parse_double_list(text.substr(colon + 1));
  if (kind == "beta") {
    if (values.size() != 2) throw UsageError("beta prior needs two parameters");
    return SignPrior::beta(values[0], values[1]);
  }
  if (kind == "atoms") {
    if (values.empty()) throw UsageError("atoms prior needs at least one atom");
    AtomicPrior<double> prior;
    prior.atoms = values;
    prior.weights.assign(values.size(), 1.0 / static_cast<double>(values.size()));
    return SignPrior::atoms(prior);
  }
  throw UsageError("unknown sign prior kind '" + kind + "'");
}

struct CommonOutput {
  std::string out;
  std::string format = "csv";
};

void add_output_flags(CLI::App* app, CommonOutput& output) {
  app->add_option("--out,-o", output.out, "Output file (default: stdout)");
  app->add_option("--format", output.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

void check_probability(double alpha, const char* name) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw UsageError(std::string(name) + " must be in (0, 1]");
  }
}

Table svalue_table(const EvidenceValue& s, double alpha) {
  const SafeTestDecision d = safe_test(s, alpha);
  Table t{{"s_value", "log_s", "p_value", "alpha", "decision", "source"}, {}};
  t.add({json_number(s.value()), json_number(s.log_value()), json_number(p_from_s(s)), alpha,
         to_string(d.decision), s.source()});
  return t;
}

// ---------------------------------------------------------------- svalue

struct SvalueArgs {
  double alpha = 0.05;
  CommonOutput output;
  std::vector<double> data;
  std::optional<double> rho;
  std::optional<double> point_delta;
  std::optional<double> t;
  std::optional<std::size_t> n;
  std::string prior;
  unsigned na = 0;
  unsigned nb = 0;
  unsigned a1 = 0;
  unsigned b1 = 0;
  std::string alt;
  std::optional<double> beam;
  std::optional<double> lemon;
  double bits = 0.0;
  double code_length = 0.0;
  std::string sign_prior = "beta:0.5,0.5";
};

EvidenceValue svalue_gaussian(const SvalueArgs& a) {
  if (a.data.empty()) throw UsageError("--data is required");
  if (a.point_delta && a.rho) throw UsageError("--rho and --point are mutually exclusive");
  if (a.point_delta) {
    return one_sided_grow_s(ExpFamily1D::gaussian_location(), *a.point_delta, a.data).s_value;
  }
  const double rho = a.rho.value_or(1.0);
  if (!(rho > 0.0)) throw UsageError("--rho must be positive");
  return EvidenceValue(std::exp(gaussian_conjugate_log_s(rho, a.data)), "gaussian normal-prior");
}

EvidenceValue svalue_ttest(const SvalueArgs& a) {
  if (a.prior.empty()) throw UsageError("--prior is required");
  const SymmetricEffectPrior prior = SymmetricEffectPrior::parse(a.prior);
  TTestInput input;
  if (!a.data.empty()) {
    if (a.t || a.n) throw UsageError("give either --data or --t with --n");
    try {
      input = TTestInput::from_data(a.data);
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
  } else {
    if (!a.t || !a.n) throw UsageError("--t and --n are required without --data");
    try {
      input = TTestInput::from_statistic(*a.t, *a.n);
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
  }
  return safe_t_s(input, prior);
}

EvidenceValue svalue_table(const SvalueArgs& a) {
  if (a.na == 0 || a.nb == 0) throw UsageError("--na and --nb must be positive");
  if (a.a1 > a.na || a.b1 > a.nb) throw UsageError("counts exceed group sizes");
  const TableDesign design(a.na, a.nb);
  const int chosen = (a.beam ? 1 : 0) + (a.lemon ? 1 : 0) + (a.alt.empty() ? 0 : 1);
  if (chosen != 1) throw UsageError("give exactly one of --alt, --beam, --lemon");
  if (!a.alt.empty()) {
    AtomicPrior<TableParams> prior;
    std::stringstream ss(a.alt);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw UsageError("--alt points are mu_a:mu_b");
      const auto pa = parse_double_list(item.substr(0, colon));
      const auto pb = parse_double_list(item.substr(colon + 1));
      if (pa.size() != 1 || pb.size() != 1) throw UsageError("--alt points are mu_a:mu_b");
      if (!(pa[0] >= 0.0 && pa[0] <= 1.0 && pb[0] >= 0.0 && pb[0] <= 1.0)) {
        throw UsageError("--alt probabilities must lie in [0, 1]");
      }
      prior.atoms.push_back(TableParams{pa[0], pb[0]});
    }
    if (prior.atoms.empty()) throw UsageError("--alt needs at least one point");
    prior.weights.assign(prior.atoms.size(), 1.0 / static_cast<double>(prior.atoms.size()));
    return conditional_s(design, a.a1, a.b1, prior);
  }
  const BoundarySpec boundary =
      a.beam ? BoundarySpec::beam(*a.beam) : BoundarySpec::lemon_log(design, *a.lemon);
  const GrowTest test = solve_grow_test(design, boundary);
  return EvidenceValue(test.s_values[design.outcome_index(a.a1, a.b1)], "table grow");
}

EvidenceValue svalue_compression(const SvalueArgs& a) {
  if (!(a.bits >= 0.0) || !(a.code_length >= 0.0)) {
    throw UsageError("--bits and --code-length must be nonnegative");
  }
  return s_from_codelength(a.bits, a.code_length);
}

EvidenceValue svalue_sign(const SvalueArgs& a) {
  if (a.data.empty()) throw UsageError("--data is required");
  const auto trace = allard_sign_martingale(a.data, parse_sign_prior(a.sign_prior));
  return trace.back();
}

// ---------------------------------------------------------------- tables

struct TableArgs {
  unsigned na = reference::kGroupSize;
  unsigned nb = reference::kGroupSize;
  double alpha = reference::kAlpha;
  bool check = false;
  std::string params;
  std::string stars;
  CommonOutput output;
};

Table replica_table(const std::vector<ReplicaRow>& rows) {
  Table t{{"boundary_param", "gr_value", "star_param", "power"}, {}};
  for (const auto& r : rows) t.add({r.boundary_param, r.gr_value, r.star_param, r.power});
  return t;
}

int run_table(const TableArgs& a, bool lemon, std::ostream& out, std::ostream& err) {
  check_probability(a.alpha, "--alpha");
  if (a.na == 0 || a.nb == 0) throw UsageError("--na and --nb must be positive");
  const bool reference_design = a.na == reference::kGroupSize && a.nb == reference::kGroupSize &&
                                a.alpha == reference::kAlpha && a.params.empty() &&
                                a.stars.empty();
  if (a.check && !reference_design) {
    throw UsageError("--check compares the 10 x 10 design at the default grids and alpha only");
  }
  const ReplicaKind kind = lemon ? ReplicaKind::kLemon : ReplicaKind::kBeam;
  const std::vector<double> params =
      a.params.empty() ? reference_params(kind) : parse_double_list(a.params);
  const std::vector<double> stars =
      a.stars.empty() ? reference_star_grid(kind) : parse_double_list(a.stars);
  if (params.empty() || stars.empty()) throw UsageError("empty parameter grid");
  GrowTestCache cache(TableDesign(a.na, a.nb));
  const std::vector<ReplicaRow> rows = lemon ? lemon_table(cache, params, stars, a.alpha)
                                             : beam_table(cache, params, stars, a.alpha);
  with_output(a.output.out, out, [&](std::ostream& os) {
    if (a.output.format == "csv") {
      write_replica_csv(os, rows);
    } else {
      write_table(os, replica_table(rows), "json");
    }
  });
  if (!a.check) return kExitOk;
  const ReplicaCheck check = check_replica(cache, kind, rows, a.alpha);
  for (const auto& line : check.lines) err << line << '\n';
  const bool ok = check.ok;
  err << (ok ? "check passed\n" : "check FAILED\n");
  return ok ? kExitOk : kExitNumeric;
}

// ---------------------------------------------------------------- isopower

struct IsoArgs {
  std::string kind = "all";
  double alpha = 0.05;
  double power = 0.8;
  unsigned na = 10;
  unsigned nb = 10;
  std::size_t grid = 51;
  double delta_star = 0.5;
  double v_star = 16.0;
  CommonOutput output;
};

int run_isopower(const IsoArgs& a, std::ostream& out) {
  check_probability(a.alpha, "--alpha");
  check_probability(a.power, "--power");
  if (a.grid < 2) throw UsageError("--grid must be at least 2");
  std::vector<IsoTestKind> kinds;
  if (a.kind == "all" || a.kind == "fisher") kinds.push_back(IsoTestKind::kFisher);
  if (a.kind == "all" || a.kind == "beam") kinds.push_back(IsoTestKind::kGrowBeam);
  if (a.kind == "all" || a.kind == "lemon") kinds.push_back(IsoTestKind::kGrowLemon);
  GrowTestCache cache(TableDesign(a.na, a.nb));
  IsoPowerOptions opts;
  opts.grid_points = a.grid;
  opts.beam_delta_star = a.delta_star;
  opts.lemon_v_star = a.v_star;
  std::vector<IsoPowerPoint> points;
  for (IsoTestKind k : kinds) {
    auto curve = iso_power_curve(cache, k, a.alpha, a.power, opts);
    points.insert(points.end(), curve.begin(), curve.end());
  }
  with_output(a.output.out, out, [&](std::ostream& os) {
    if (a.output.format == "csv") {
      write_isopower_csv(os, points);
    } else {
      Table t{{"mu1a", "mu1b", "test_kind"}, {}};
      for (const auto& p : points) t.add({p.mu1a, p.mu1b, to_string(p.test_kind)});
      write_table(os, t, "json");
    }
  });
  return kExitOk;
}

// ---------------------------------------------------------------- jipr-solve

struct JiprArgs {
  std::string in = "-";
  std::string out;
  JiprOptions options;
  bool with_s = false;
};

int run_jipr(const JiprArgs& a, std::ostream& out) {
  json doc;
  try {
    if (a.in == "-") {
      doc = json::parse(std::cin);
    } else {
      std::ifstream file(a.in);
      if (!file) throw UsageError("cannot open '" + a.in + "'");
      doc = json::parse(file);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid model JSON: ") + e.what());
  }
  DiscreteModel model;
  try {
    model = doc.get<DiscreteModel>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid model JSON: ") + e.what());
  }
  model.validate();
  const JiprSolution sol = jipr_solve(model, a.options);
  json result = sol;
  if (a.with_s) {
    json s = json::array();
    for (double v : grow_s_table(sol, model)) s.push_back(json_number(v));
    result["s_values"] = std::move(s);
  }
  with_output(a.out, out, [&](std::ostream& os) { os << result.dump(2) << '\n'; });
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

RunConfig preset_config(const std::string& preset) {
  RunConfig c;
  c.scenario = preset;
  if (preset == "figure5") {
    c.parameters = {{"alpha", 0.05},     {"power", 0.8},  {"reps", 20000},
                    {"delta_lo", 0.5},   {"delta_hi", 1.0}, {"delta_step", 0.5},
                    {"cauchy_scale", std::sqrt(0.5)}};
  } else if (preset == "type1-aggressive") {
    c.parameters = {{"alpha", 0.05}, {"reps", 10000},     {"batch_size", 10},
                    {"k_max", 20},   {"delta_min", 0.5},  {"threads", 1}};
  } else if (preset == "type1-ttest") {
    c.parameters = {{"alpha", 0.05}, {"reps", 10000}, {"n_max", 100}};
    c.options = {{"prior", "two-point:0.5"}, {"sigmas", "0.1,1,10"}};
  } else if (preset == "type1-sign") {
    c.parameters = {{"alpha", 0.05}, {"reps", 10000}, {"budget", 1000}};
    c.options = {{"prior", "beta:0.5,0.5"}, {"law", "laplace"}};
  } else if (preset == "hazard") {
    c.parameters = {{"alpha", 0.05}, {"reps", 20000}, {"batch_size", 10}, {"effect", 0.5}};
  } else {
    throw UsageError("unknown preset '" + preset +
                     "' (figure5, type1-aggressive, type1-ttest, type1-sign, hazard)");
  }
  return c;
}

std::size_t count_param(const RunConfig& c, const std::string& key, double fallback) {
  const double v = c.parameter(key, fallback);
  if (!(v >= 1.0) || v != std::floor(v)) throw UsageError(key + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

double mc_bound(double alpha, std::size_t reps) {
  return alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
}

Table simulate_table(const RunConfig& c) {
  const double alpha = c.parameter("alpha", 0.05);
  check_probability(alpha, "alpha");
  const std::size_t reps = count_param(c, "reps", 10000);
  if (c.scenario == "figure5") {
    SampleSizeOptions opts;
    opts.alpha = alpha;
    opts.power = c.parameter("power", 0.8);
    opts.reps = reps;
    opts.cauchy_scale = c.parameter("cauchy_scale", opts.cauchy_scale);
    const double lo = c.parameter("delta_lo", 0.5);
    const double hi = c.parameter("delta_hi", 1.0);
    const double step = c.parameter("delta_step", 0.5);
    if (!(lo > 0.0 && hi >= lo && step > 0.0)) throw UsageError("bad delta range");
    Table t{{"delta", "classical_n", "grow_batch_n", "grow_delta_star", "bayes_batch_n",
             "grow_os_mean", "bayes_os_mean", "ratio_grow_os", "ratio_bayes_os",
             "ratio_grow_batch", "ratio_bayes_batch"},
            {}};
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      const double delta = lo + step * static_cast<double>(i);
      const SampleSizeRow r = sample_size_row(delta, opts, c.seed + 1000 * i);
      t.add({delta, r.classical_n, r.grow_batch_n, r.grow_delta_star, r.bayes_batch_n,
             r.grow_os_mean, r.bayes_os_mean, r.ratio_grow_os(), r.ratio_bayes_os(),
             r.ratio_grow_batch(), r.ratio_bayes_batch()});
    }
    return t;
  }
  if (c.scenario == "type1-aggressive") {
    const std::size_t batch = count_param(c, "batch_size", 10);
    const std::size_t k_max = count_param(c, "k_max", 20);
    const double delta_min = c.parameter("delta_min", 0.5);
    const auto threads = static_cast<unsigned>(count_param(c, "threads", 1));
    ContinuationSetup setup{gaussian_batches(batch, 0.0), gaussian_grow_batch_s(delta_min),
                            ContinuationPolicy::aggressive(alpha, k_max), alpha};
    const ContinuationSummary s = run_continuation(setup, reps, c.seed, threads);
    const double bound = mc_bound(alpha, reps);
    Table t{{"alpha", "reps", "batch_size", "k_max", "delta_min", "rejection_rate", "rejection_se",
             "bound", "within_bound", "mean_product", "mean_product_se", "mean_log_product"},
            {}};
    t.add({alpha, reps, batch, k_max, delta_min, s.rejection_rate, s.rejection_se, bound,
           s.rejection_rate <= bound, s.mean_product, s.mean_product_se, s.mean_log_product});
    return t;
  }
  if (c.scenario == "type1-ttest") {
    const SymmetricEffectPrior prior = SymmetricEffectPrior::parse(c.option("prior", "two-point:0.5"));
    const std::size_t n_max = count_param(c, "n_max", 100);
    if (n_max < 2) throw UsageError("n_max must be at least 2");
    const std::vector<double> sigmas = parse_double_list(c.option("sigmas", "0.1,1,10"));
    const double bound = mc_bound(alpha, reps);
    Table t{{"sigma", "prior", "alpha", "reps", "n_max", "rejection_rate", "rejection_se", "bound",
             "within_bound", "mean_stop_time"},
            {}};
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      if (!(sigmas[i] > 0.0)) throw UsageError("sigmas must be positive");
      const auto r = run_optional_stopping_ttest(prior, alpha, n_max, 0.0, sigmas[i], reps, c.seed + i);
      t.add({sigmas[i], prior.describe(), alpha, reps, n_max, r.rejection_rate, r.rejection_se,
             bound, r.rejection_rate <= bound, r.mean_stop_time});
    }
    return t;
  }
  if (c.scenario == "type1-sign") {
    const SignPrior prior = parse_sign_prior(c.option("prior", "beta:0.5,0.5"));
    const std::size_t budget = count_param(c, "budget", 1000);
    const std::string law_name = c.option("law", "laplace");
    SymmetricNull law;
    try {
      law = parse_symmetric_null(law_name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto r = run_sign_optional_stopping(prior, alpha, budget, law, 0.0, reps, c.seed);
    const double bound = mc_bound(alpha, reps);
    Table t{{"law", "alpha", "reps", "budget", "rejection_rate", "rejection_se", "bound",
             "within_bound", "mean_stop_time"},
            {}};
    t.add({law_name, alpha, reps, budget, r.rejection_rate, r.rejection_se, bound,
           r.rejection_rate <= bound, r.mean_stop_time});
    return t;
  }
  if (c.scenario == "hazard") {
    const auto r = np_svalue_hazard_demo(alpha, reps, c.seed, count_param(c, "batch_size", 10),
                                         c.parameter("effect", 0.5));
    Table t{{"alpha", "reps", "null_reject_rate", "null_mean_s", "alt_loss_probability",
             "beta_closed_form", "two_batch_loss_probability", "two_batch_loss_closed_form"},
            {}};
    t.add({alpha, reps, r.null_reject_rate, r.null_mean_s, r.alt_loss_probability,
           r.beta_closed_form, r.two_batch_loss_probability, r.two_batch_loss_closed_form});
    return t;
  }
  throw UsageError("unknown scenario '" + c.scenario + "'");
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

struct SimulateArgs {
  std::string preset;
  std::string config;
  std::string dump_config;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<std::size_t> reps;
  std::vector<std::string> params;
  std::vector<std::string> options;
  CommonOutput output;
  bool format_given = false;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.preset.empty() == a.config.empty()) throw UsageError("give exactly one of --preset, --config");
  RunConfig c;
  if (!a.config.empty()) {
    std::ifstream file(a.config);
    if (!file) throw UsageError("cannot open '" + a.config + "'");
    try {
      c = json::parse(file).get<RunConfig>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("invalid run config: ") + e.what());
    }
    preset_config(c.scenario);
  } else {
    c = preset_config(a.preset);
    c.seed = default_seed();
  }
  if (a.seed) c.seed = *a.seed;
  if (a.alpha) c.parameters["alpha"] = *a.alpha;
  if (a.reps) c.parameters["reps"] = static_cast<double>(*a.reps);
  for (const auto& p : a.params) {
    const auto [k, v] = split_assignment(p);
    const auto values = parse_double_list(v);
    if (values.size() != 1) throw UsageError("--param takes a single number");
    c.parameters[k] = values[0];
  }
  for (const auto& o : a.options) {
    const auto [k, v] = split_assignment(o);
    c.options[k] = v;
  }
  if (!a.output.out.empty()) c.output = a.output.out;
  if (a.format_given || a.config.empty()) c.format = a.output.format;
  if (!a.dump_config.empty()) {
    with_output(a.dump_config, out, [&](std::ostream& os) { os << json(c).dump(2) << '\n'; });
  }
  const Table t = simulate_table(c);
  with_output(c.output, out, [&](std::ostream& os) { write_table(os, t, c.format); });
  return kExitOk;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::optional<double> p;
  std::optional<double> s;
  double alpha = 0.05;
  CommonOutput output;
};

int run_calibrate(const CalibrateArgs& a, std::ostream& out) {
  check_probability(a.alpha, "--alpha");
  if (a.p.has_value() == a.s.has_value()) throw UsageError("give exactly one of --p, --s");
  Table t{{"p_value", "s_value", "log_s", "vs_bound", "decision"}, {}};
  if (a.p) {
    if (!(*a.p > 0.0 && *a.p <= 1.0)) throw UsageError("--p must be in (0, 1]");
    const EvidenceValue s = calibrate_vs(*a.p);
    t.add({*a.p, json_number(s.value()), json_number(s.log_value()), vs_bound(*a.p),
           to_string(safe_test(s, a.alpha).decision)});
  } else {
    if (!(*a.s >= 0.0)) throw UsageError("--s must be nonnegative");
    const EvidenceValue s(*a.s, "given");
    const double p = p_from_s(s);
    t.add({p, json_number(s.value()), json_number(s.log_value()), vs_bound(p),
           to_string(safe_test(s, a.alpha).decision)});
  }
  with_output(a.output.out, out, [&](std::ostream& os) { write_table(os, t, a.output.format); });
  return kExitOk;
}

const CLI::App* deepest_selected(const CLI::App* app) {
  for (const CLI::App* sub : app->get_subcommands()) return deepest_selected(sub);
  return app;
}

}  // namespace

std::uint64_t default_seed() {
  const char* env = std::getenv("SAFE_SEED");
  if (env == nullptr || *env == '\0') return 1;
  std::uint64_t seed = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto res = std::from_chars(env, end, seed);
  if (res.ec != std::errc{} || res.ptr != end) return 1;
  return seed;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safe tests: S-values, GROW tables and optional-stopping simulations", "safe-test"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  // svalue
  SvalueArgs sv;
  auto* svalue = app.add_subcommand("svalue", "Compute one S-value and the safe-test decision");
  svalue->require_subcommand(1);
  auto add_common_sv = [&](CLI::App* sub) {
    sub->add_option("--alpha", sv.alpha, "Significance level")->capture_default_str();
    add_output_flags(sub, sv.output);
  };
  auto* gaussian = svalue->add_subcommand("gaussian", "Gaussian location, unit variance, null mean 0");
  gaussian->add_option("--data", sv.data, "Comma-separated outcomes")->delimiter(',')->required();
  gaussian->add_option("--rho", sv.rho, "Scale of the N(0, rho^2) prior on the mean (default 1)");
  gaussian->add_option("--point", sv.point_delta, "Use the point alternative mean instead");
  add_common_sv(gaussian);
  auto* ttest = svalue->add_subcommand("ttest", "One-sample t-test with a symmetric effect prior");
  ttest->add_option("--t", sv.t, "t statistic");
  ttest->add_option("--n", sv.n, "Sample size");
  ttest->add_option("--data", sv.data, "Comma-separated outcomes")->delimiter(',');
  ttest->add_option("--prior", sv.prior, "two-point:D | normal:R | cauchy:G")->required();
  add_common_sv(ttest);
  auto* table = svalue->add_subcommand("table", "2 x 2 table with fixed group sizes");
  table->add_option("--na", sv.na, "Group a size")->required();
  table->add_option("--nb", sv.nb, "Group b size")->required();
  table->add_option("--a1", sv.a1, "Ones in group a")->required();
  table->add_option("--b1", sv.b1, "Ones in group b")->required();
  table->add_option("--alt", sv.alt, "Conditional S with uniform prior on mu_a:mu_b,...");
  table->add_option("--beam", sv.beam, "GROW S-value for the beam boundary delta");
  table->add_option("--lemon", sv.lemon, "GROW S-value for the lemon boundary v (n eps = ln v)");
  add_common_sv(table);
  auto* compression = svalue->add_subcommand("compression", "S = 2^(n - L) against fair coin flips");
  compression->add_option("--bits", sv.bits, "Number of bits n")->required();
  compression->add_option("--code-length", sv.code_length, "Code length L in bits")->required();
  add_common_sv(compression);
  auto* sign = svalue->add_subcommand("sign", "Sign martingale against a median-zero null");
  sign->add_option("--data", sv.data, "Comma-separated outcomes")->delimiter(',')->required();
  sign->add_option("--prior", sv.sign_prior, "beta:a,b | atoms:t1,t2,...")->capture_default_str();
  add_common_sv(sign);

  // table1 / table2
  TableArgs t1;
  TableArgs t2;
  auto add_table_flags = [&](CLI::App* sub, TableArgs& ta, const char* params_help) {
    sub->add_option("--na", ta.na, "Group a size")->capture_default_str();
    sub->add_option("--nb", ta.nb, "Group b size")->capture_default_str();
    sub->add_option("--alpha", ta.alpha, "Significance level")->capture_default_str();
    sub->add_option("--params", ta.params, params_help);
    sub->add_option("--stars", ta.stars, "Comma-separated star grid (default: same as --params)");
    sub->add_flag("--check", ta.check, "Compare with the published values; exit 1 on a miss");
    add_output_flags(sub, ta.output);
  };
  auto* table1 = app.add_subcommand("table1", "Beam boundaries: GR, best delta*, worst-case power");
  add_table_flags(table1, t1, "Comma-separated delta_min values");
  auto* table2 = app.add_subcommand("table2", "Lemon boundaries: GR, best v*, worst-case power");
  add_table_flags(table2, t2, "Comma-separated v values (n eps = ln v)");

  // isopower
  IsoArgs iso;
  auto* isopower = app.add_subcommand("isopower", "Iso-power lines of Fisher and GROW tests");
  isopower->add_option("--kind", iso.kind, "Test")
      ->check(CLI::IsMember({"all", "fisher", "beam", "lemon"}))
      ->capture_default_str();
  isopower->add_option("--alpha", iso.alpha, "Significance level")->capture_default_str();
  isopower->add_option("--power", iso.power, "Target power")->capture_default_str();
  isopower->add_option("--na", iso.na, "Group a size")->capture_default_str();
  isopower->add_option("--nb", iso.nb, "Group b size")->capture_default_str();
  isopower->add_option("--grid", iso.grid, "Points on the mu1|a axis")->capture_default_str();
  isopower->add_option("--delta-star", iso.delta_star, "Beam test delta*")->capture_default_str();
  isopower->add_option("--v-star", iso.v_star, "Lemon test v*")->capture_default_str();
  add_output_flags(isopower, iso.output);

  // jipr-solve
  JiprArgs jp;
  auto* jipr = app.add_subcommand("jipr-solve", "Solve a joint information projection from JSON");
  jipr->add_option("--in,-i", jp.in, "Model JSON file, - for stdin")->capture_default_str();
  jipr->add_option("--out,-o", jp.out, "Solution JSON file (default: stdout)");
  jipr->add_option("--tol", jp.options.tol, "Duality-gap tolerance")->capture_default_str();
  jipr->add_option("--max-iterations", jp.options.max_iterations, "Iteration cap")
      ->capture_default_str();
  jipr->add_option("--restarts", jp.options.restarts, "Random restarts")->capture_default_str();
  jipr->add_option("--seed", jp.options.seed, "Restart seed");
  jipr->add_flag("--with-s", jp.with_s, "Include S*(z) for every outcome");

  // simulate
  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo presets and replayable run configs");
  simulate->add_option("--preset", sim.preset,
                       "figure5 | type1-aggressive | type1-ttest | type1-sign | hazard");
  simulate->add_option("--config", sim.config, "Run config JSON");
  simulate->add_option("--dump-config", sim.dump_config, "Write the effective run config JSON");
  simulate->add_option("--seed", sim.seed, "Seed (default: SAFE_SEED or 1)");
  simulate->add_option("--alpha", sim.alpha, "Significance level");
  simulate->add_option("--reps", sim.reps, "Monte-Carlo replicates");
  simulate->add_option("--param", sim.params, "Numeric scenario parameter key=value");
  simulate->add_option("--option", sim.options, "Text scenario option key=value");
  simulate->add_option("--out,-o", sim.output.out, "Output file (default: stdout)");
  auto* sim_format = simulate->add_option("--format", sim.output.format, "Output format")
                         ->check(CLI::IsMember({"csv", "json"}))
                         ->capture_default_str();

  // calibrate
  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Convert between p-values and S-values");
  calibrate->add_option("--p", cal.p, "p-value to calibrate");
  calibrate->add_option("--s", cal.s, "S-value to convert to a conservative p-value");
  calibrate->add_option("--alpha", cal.alpha, "Significance level")->capture_default_str();
  add_output_flags(calibrate, cal.output);

  std::vector<std::string> argv_store{"safe-test"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << deepest_selected(&app)->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << deepest_selected(&app)->help();
    return kExitUsage;
  }

  sim.format_given = sim_format->count() > 0;
  try {
    if (svalue->parsed()) {
      check_probability(sv.alpha, "--alpha");
      EvidenceValue s;
      if (gaussian->parsed()) s = svalue_gaussian(sv);
      if (ttest->parsed()) s = svalue_ttest(sv);
      if (table->parsed()) s = svalue_table(sv);
      if (compression->parsed()) s = svalue_compression(sv);
      if (sign->parsed()) s = svalue_sign(sv);
      const Table result = svalue_table(s, sv.alpha);
      with_output(sv.output.out, out,
                  [&](std::ostream& os) { write_table(os, result, sv.output.format); });
      return kExitOk;
    }
    if (table1->parsed()) return run_table(t1, false, out, err);
    if (table2->parsed()) return run_table(t2, true, out, err);
    if (isopower->parsed()) return run_isopower(iso, out);
    if (jipr->parsed()) return run_jipr(jp, out);
    if (simulate->parsed()) return run_simulate(sim, out);
    if (calibrate->parsed()) return run_calibrate(cal, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n\n" << deepest_selected(&app)->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace safe::cli
