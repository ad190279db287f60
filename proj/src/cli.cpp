#include "ntot/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "ntot/errors.hpp"
#include "ntot/matrix_io.hpp"
#include "ntot/oracle_suite.hpp"
#include "ntot/random.hpp"

namespace fs = std::filesystem;

namespace ntot {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::map<std::string, std::string> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    entries[key] = trim(line.substr(eq + 1));
  }
  return entries;
}

// Command-line options backed by strings so that every value can be traced
// to a flag, the config file or a default.
class Params {
 public:
  struct Entry {
    std::string name;
    std::string value;
    std::string origin;
  };

  explicit Params(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "Config file with 'key = value' lines");
  }

  void option(const std::string& name, const std::string& help) {
    options_[name] = app_->add_option("--" + name, raw_[name], help);
  }

  void flag(const std::string& name, const std::string& help) {
    options_[name] = app_->add_flag("--" + name, help);
  }

  void load_config() {
    if (config_path_.empty()) return;
    config_ = read_config(config_path_);
    for (const auto& [key, value] : config_) {
      if (!options_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

  bool has(const std::string& name) const {
    return options_.at(name)->count() > 0 || config_.count(name) > 0;
  }

  /// Resolved value: flag, then config file, then `fallback`.
  std::string get(const std::string& name, const std::string& fallback,
                  const std::string& default_origin = "default") {
    const CLI::Option* opt = options_.at(name);
    if (opt->count() > 0) {
      const bool is_flag = opt->get_expected_min() == 0;
      return record(name, is_flag ? "true" : raw_[name], "flag");
    }
    if (const auto it = config_.find(name); it != config_.end())
      return record(name, it->second, "config");
    return record(name, fallback, default_origin);
  }

  std::optional<std::string> get_optional(const std::string& name) {
    if (!has(name)) return std::nullopt;
    return get(name, "");
  }

  void set(const std::string& name, const std::string& value, const std::string& origin) {
    record(name, value, origin);
  }

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::string record(const std::string& name, const std::string& value,
                     const std::string& origin) {
    for (Entry& e : entries_) {
      if (e.name == name) {
        e = {name, value, origin};
        return value;
      }
    }
    entries_.push_back({name, value, origin});
    return value;
  }

  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, std::string> raw_;
  std::map<std::string, CLI::Option*> options_;
  std::map<std::string, std::string> config_;
  std::vector<Entry> entries_;
};

template <class T>
T parse_number(const std::string& name, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError("invalid value '" + text + "' for " + name);
  return value;
}

double parse_real(const std::string& name, const std::string& text) {
  // from_chars for double is unavailable in older standard libraries.
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("invalid value '" + text + "' for " + name);
  }
  if (used != text.size() || !std::isfinite(value))
    throw ConfigError("invalid value '" + text + "' for " + name);
  return value;
}

bool parse_bool(const std::string& name, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("invalid value '" + text + "' for " + name);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_real_list(const std::string& name, const std::string& text) {
  std::vector<double> values;
  for (const std::string& item : split_list(text)) values.push_back(parse_real(name, item));
  return values;
}

std::vector<Variant> parse_variants(const std::string& text) {
  std::vector<Variant> out;
  for (const std::string& item : split_list(text)) out.push_back(parse_variant(item));
  if (out.empty()) throw ConfigError("algorithm list is empty");
  return out;
}

std::uint64_t resolve_seed(Params& params) {
  if (auto seed = params.get_optional("seed")) return parse_number<std::uint64_t>("seed", *seed);
  std::random_device device;
  const std::uint64_t seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  params.set("seed", std::to_string(seed), "default (synthesized)");
  return seed;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

fs::path prepare_dir(const std::string& dir) {
  const fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  return path;
}

void write_manifest(const fs::path& path, std::string_view command, const Params& params,
                    const std::vector<std::pair<std::string, std::string>>& extra,
                    const std::vector<fs::path>& outputs) {
  std::ofstream out = open_output(path);
  out << "command = " << command << "\n";
  out << "version = " << kVersion << "\n";
  out << "generator = " << kGeneratorId << "\n";
  for (const auto& e : params.entries()) out << e.name << " = " << e.value << "  # " << e.origin << "\n";
  for (const auto& [key, value] : extra) out << key << " = " << value << "\n";
  for (const fs::path& p : outputs) out << "output = " << p.generic_string() << "\n";
  close_output(out, path);
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// ---------------------------------------------------------------- gen

struct GenCommand {
  explicit GenCommand(CLI::App& app)
      : sub(app.add_subcommand("gen", "Generate a Gaussian recovery problem")), params(sub) {
    params.option("m", "Number of measurements (default 64)");
    params.option("n", "Signal length (default 128)");
    params.option("k", "Sparsity level (default 5)");
    params.option("noise", "Noise scale (default 0)");
    params.option("seed", "Random seed (synthesized when absent)");
    params.option("out-dir", "Output directory (default .)");
  }

  int run(std::ostream& out) {
    params.load_config();
    ProblemSpec spec;
    spec.m = parse_number<Index>("m", params.get("m", "64"));
    spec.n = parse_number<Index>("n", params.get("n", "128"));
    spec.k = parse_number<Index>("k", params.get("k", "5"));
    spec.noise_scale = parse_real("noise", params.get("noise", "0"));
    spec.seed = resolve_seed(params);
    const fs::path dir = prepare_dir(params.get("out-dir", "."));
    const RecoveryProblem problem = gen_problem(spec);

    const fs::path a_path = dir / "A.txt", y_path = dir / "y.txt", x_path = dir / "x_true.txt";
    save_matrix(a_path, problem.a);
    save_vector(y_path, problem.y);
    save_vector(x_path, *problem.x_true);
    write_manifest(dir / "manifest.txt", "gen", params, {}, {a_path, y_path, x_path});
    out << "seed = " << spec.seed << "\n";
    out << "wrote " << a_path.generic_string() << ", " << y_path.generic_string() << ", "
        << x_path.generic_string() << "\n";
    return kExitOk;
  }

  CLI::App* sub;
  Params params;
};

// ---------------------------------------------------------------- solve

TheoremCertificate certificate_for(Variant variant, const DenseMatrix& a, Index k, double eps,
                                   double lambda) {
  switch (variant) {
    case Variant::kNTOT: return theorem1_certificate(a, k, eps, lambda);
    case Variant::kNTROT: return theorem2_certificate(a, k, eps, lambda);
    case Variant::kNTROTP: return theorem3_certificate(a, k, eps, lambda);
    default:
      throw ConfigError("--require-certificate applies to ntot, ntrot and ntrotp only");
  }
}

struct SolveCommand {
  explicit SolveCommand(CLI::App& app)
      : sub(app.add_subcommand("solve", "Run one recovery algorithm on problem files")),
        params(sub) {
    params.option("in-dir", "Directory holding A.txt, y.txt and optionally x_true.txt");
    params.option("matrix", "Matrix file (overrides in-dir/A.txt)");
    params.option("measurements", "Measurement file (overrides in-dir/y.txt)");
    params.option("truth", "Ground-truth file (overrides in-dir/x_true.txt)");
    params.option("k", "Sparsity level (default: nonzeros of the ground truth)");
    params.option("algo", "ntot|ntrot|ntrotp|iht|nsiht|nshtp|omp|sp (default ntrotp)");
    params.option("eps", "Newton regularization (default rule)");
    params.option("lambda", "Stepsize (default 5)");
    params.option("max-iter", "Outer iteration cap (default 50)");
    params.option("stop", "relative-error|residual|iteration-cap-only (default residual)");
    params.option("stop-tol", "Stopping tolerance (default 1e-6)");
    params.option("qp-tol", "Relaxed QP tolerance (default 1e-8)");
    params.option("qp-max-iter", "Relaxed QP iteration cap (default 5000)");
    params.flag("require-certificate",
                "Refuse to run (exit 3) unless the matching theorem certifies (eps, lambda)");
    params.option("out-dir", "Output directory (default .)");
  }

  int run(std::ostream& out, std::ostream& err) {
    params.load_config();
    const fs::path in_dir(params.get("in-dir", "."));
    const fs::path a_path(params.get("matrix", (in_dir / "A.txt").string()));
    const fs::path y_path(params.get("measurements", (in_dir / "y.txt").string()));
    std::optional<fs::path> x_path;
    if (auto t = params.get_optional("truth")) {
      x_path = *t;
    } else if (fs::exists(in_dir / "x_true.txt")) {
      x_path = in_dir / "x_true.txt";
      params.set("truth", x_path->string(), "default");
    }

    RecoveryProblem problem{load_matrix(a_path), load_vector(y_path), 0, std::nullopt,
                            std::nullopt};
    if (x_path) problem.x_true = load_vector(*x_path);
    if (auto k = params.get_optional("k")) {
      problem.k = parse_number<Index>("k", *k);
    } else if (problem.x_true) {
      problem.k = count_nonzeros(*problem.x_true);
      params.set("k", std::to_string(problem.k), "default (nonzeros of truth)");
    } else {
      throw ConfigError("--k is required when no ground truth is given");
    }
    problem.validate();

    SolverConfig config;
    config.variant = parse_variant(params.get("algo", "ntrotp"));
    config.lambda = parse_real("lambda", params.get("lambda", format_double(kDefaultLambda)));
    if (auto eps = params.get_optional("eps")) {
      config.eps = parse_real("eps", *eps);
    } else {
      config.eps = default_parameters(problem.a, config.lambda);
      params.set("eps", format_double(config.eps), "default (max{sigma_1^2 + 1, lambda - sigma_min^2})");
    }
    config.max_outer_iter = parse_number<int>("max-iter", params.get("max-iter", "50"));
    config.stop_rule = parse_stop_rule(params.get("stop", "residual"));
    config.stop_tol = parse_real("stop-tol", params.get("stop-tol", "1e-6"));
    config.qp_tol = parse_real("qp-tol", params.get("qp-tol", "1e-8"));
    config.qp_max_iter = parse_number<int>("qp-max-iter", params.get("qp-max-iter", "5000"));
    const bool require_cert =
        parse_bool("require-certificate", params.get("require-certificate", "false"));
    const fs::path dir = prepare_dir(params.get("out-dir", "."));

    std::vector<std::pair<std::string, std::string>> extra;
    if (require_cert) {
      const TheoremCertificate cert =
          certificate_for(config.variant, problem.a, problem.k, config.eps, config.lambda);
      write_certificate(out, cert);
      extra.emplace_back("certificate", cert.valid ? "valid" : "invalid");
      if (!cert.valid) {
        err << "error: (eps, lambda) are not certified by theorem " << cert.theorem_id << "\n";
        write_manifest(dir / "manifest.txt", "solve", params, extra, {});
        return kExitCertificate;
      }
    }

    const SolveResult result = solve(problem, config);
    const fs::path x_out = dir / "x_hat.txt", trace_out = dir / "trace.csv";
    save_vector(x_out, result.x_hat);
    {
      std::ofstream csv = open_output(trace_out);
      write_trace_csv(csv, config.variant, result.trace);
      close_output(csv, trace_out);
    }
    extra.emplace_back("status", std::string(status_name(result.status)));
    extra.emplace_back("iterations", std::to_string(result.iterations()));
    write_manifest(dir / "manifest.txt", "solve", params, extra, {x_out, trace_out});

    out << "algorithm = " << variant_name(config.variant) << "\n";
    out << "eps = " << format_double(config.eps) << "\n";
    out << "lambda = " << format_double(config.lambda) << "\n";
    out << "status = " << status_name(result.status) << "\n";
    out << "iterations = " << result.iterations() << "\n";
    out << "residual_l2 = " << format_double(result.trace.back().residual) << "\n";
    if (result.trace.back().relative_error)
      out << "relative_error = " << format_double(*result.trace.back().relative_error) << "\n";
    if (result.status == SolveStatus::kNumericalFailure) {
      err << "error: " << result.failure_message << "\n";
      return kExitFailure;
    }
    return kExitOk;
  }

  CLI::App* sub;
  Params params;
};

// ---------------------------------------------------------------- sweep

struct SweepCommand {
  explicit SweepCommand(CLI::App& app)
      : sub(app.add_subcommand("sweep", "Run a Monte-Carlo study and write CSV")), params(sub) {
    params.option("study", "success|iterations|residual (default success)");
    params.option("preset", "desk|paper (default desk)");
    params.option("axis", "k_over_n|m_over_n (default k_over_n)");
    params.option("from", "First grid value");
    params.option("to", "Last grid value");
    params.option("points", "Number of grid values");
    params.option("grid", "Explicit comma-separated grid (overrides from/to/points)");
    params.option("trials", "Trials per grid point");
    params.option("algos", "Comma-separated algorithm list");
    params.option("m", "Measurements (fixed dimension)");
    params.option("n", "Signal length");
    params.option("k", "Sparsity level (fixed dimension)");
    params.option("noise", "Noise scale (default 0)");
    params.option("seed", "Base seed (synthesized when absent)");
    params.option("max-iter", "Outer iteration cap");
    params.option("eps", "Fixed epsilon (default rule per problem)");
    params.option("lambda", "Stepsize (default 5)");
    params.option("lambdas", "Residual study: comma-separated stepsizes");
    params.option("eps-factors",
                  "Residual study: comma-separated multiples of sigma_1^2 + 1 (default rule)");
    params.option("qp-tol", "Relaxed QP tolerance (default 1e-8)");
    params.option("qp-max-iter", "Relaxed QP iteration cap (default 5000)");
    params.option("workers", "Worker threads (default 1)");
    params.option("out-dir", "Output directory (default .)");
  }

  int run(std::ostream& out) {
    params.load_config();
    const std::string study = params.get("study", "success");
    if (study != "success" && study != "iterations" && study != "residual")
      throw ConfigError("unknown study '" + study + "'");
    const std::string preset = params.get("preset", "desk");
    if (preset != "desk" && preset != "paper") throw ConfigError("unknown preset '" + preset + "'");
    const bool paper = preset == "paper";
    const std::string origin = "default (preset " + preset + ")";
    const std::uint64_t seed = resolve_seed(params);
    const fs::path dir = prepare_dir(params.get("out-dir", "."));
    const fs::path csv_path = dir / (study + ".csv");
    std::vector<std::pair<std::string, std::string>> extra;

    const SweepAxis axis =
        study == "residual" ? SweepAxis::kKOverN : parse_axis(params.get("axis", "k_over_n"));
    const bool m_axis = axis == SweepAxis::kMOverN;
    const Index n = parse_number<Index>(
        "n", params.get("n", paper ? (m_axis ? "500" : "512") : "128", origin));
    auto fixed_m = [&] {
      return parse_number<Index>("m", params.get("m", paper ? "256" : "64", origin));
    };
    const double qp_tol = parse_real("qp-tol", params.get("qp-tol", "1e-8"));
    const int qp_max_iter = parse_number<int>("qp-max-iter", params.get("qp-max-iter", "5000"));
    std::ostringstream csv;

    if (study == "residual") {
      ResidualStudy rs;
      rs.problem.m = fixed_m();
      rs.problem.n = n;
      rs.problem.k = parse_number<Index>("k", params.get("k", paper ? "70" : "10", origin));
      rs.problem.noise_scale = parse_real("noise", params.get("noise", "0"));
      rs.problem.seed = seed;
      rs.algorithms = parse_variants(params.get("algos", "ntrot,ntrotp"));
      rs.max_iter = parse_number<int>("max-iter", params.get("max-iter", "30"));
      rs.qp_tol = qp_tol;
      rs.qp_max_iter = qp_max_iter;
      const std::vector<double> lambdas =
          parse_real_list("lambdas", params.get("lambdas", format_double(kDefaultLambda)));
      const std::vector<double> factors = parse_real_list("eps-factors", params.get("eps-factors", ""));
      if (lambdas.empty()) throw ConfigError("lambdas is empty");
      rs.parameters.clear();
      for (double lambda : lambdas) {
        if (factors.empty()) {
          rs.parameters.push_back({lambda, ParameterChoice::Eps::kDefaultRule, 0.0});
        } else {
          for (double f : factors)
            rs.parameters.push_back({lambda, ParameterChoice::Eps::kScaledBase, f});
        }
      }
      write_residual_csv(csv, residual_experiment(rs));
    } else {
      SweepSpec spec;
      spec.axis = axis;
      spec.n = n;
      if (spec.axis == SweepAxis::kKOverN)
        spec.m = fixed_m();
      else
        spec.k = parse_number<Index>("k", params.get("k", paper ? "50" : "5", origin));
      if (auto grid = params.get_optional("grid")) {
        spec.grid = parse_real_list("grid", *grid);
        if (spec.grid.empty()) throw ConfigError("grid is empty");
      } else {
        const bool k_axis = spec.axis == SweepAxis::kKOverN;
        const double from = parse_real("from", params.get("from", k_axis ? "0.01" : "0.1"));
        const double to = parse_real("to", params.get("to", k_axis ? "0.35" : "0.6"));
        const int points = parse_number<int>("points", params.get("points", "12"));
        spec.grid = linspace(from, to, points);
      }
      spec.trials_per_point =
          parse_number<int>("trials", params.get("trials", paper ? "50" : "20", origin));
      const bool success = study == "success";
      spec.algorithms = parse_variants(
          params.get("algos", success ? "ntrot,ntrotp,nsiht,nshtp,omp,sp" : "nsiht,nshtp,ntrot,ntrotp"));
      spec.base_seed = seed;
      spec.max_iter = parse_number<int>("max-iter", params.get("max-iter", success ? "20" : "50"));
      if (auto eps = params.get_optional("eps")) spec.eps = parse_real("eps", *eps);
      spec.lambda = parse_real("lambda", params.get("lambda", format_double(kDefaultLambda)));
      spec.qp_tol = qp_tol;
      spec.qp_max_iter = qp_max_iter;
      spec.workers = parse_number<int>("workers", params.get("workers", "1"));
      if (spec.workers < 1) throw ConfigError("workers must be >= 1");
      if (success) {
        const double noise = parse_real("noise", params.get("noise", "0"));
        write_success_csv(csv, success_experiment(spec, noise).rows);
        extra.emplace_back("success_rule", "relative error <= 1e-3 after max-iter iterations");
      } else {
        write_iterations_csv(csv, iterations_experiment(spec).rows);
        extra.emplace_back("failed_trials", "counted at the iteration cap");
      }
    }

    {
      std::ofstream file = open_output(csv_path);
      file << "# version = " << kVersion << "\n";
      file << "# generator = " << kGeneratorId << "\n";
      // Worker count and output location never change the results.
      for (const auto& e : params.entries()) {
        if (e.name == "workers" || e.name == "out-dir") continue;
        file << "# " << e.name << " = " << e.value << "\n";
      }
      for (const auto& [key, value] : extra) file << "# " << key << " = " << value << "\n";
      file << csv.str();
      close_output(file, csv_path);
    }
    write_manifest(dir / "manifest.txt", "sweep", params, extra, {csv_path});
    out << "seed = " << seed << "\n";
    out << "wrote " << csv_path.generic_string() << "\n";
    return kExitOk;
  }

  CLI::App* sub;
  Params params;
};

// ---------------------------------------------------------------- ric

struct RicCommand {
  explicit RicCommand(CLI::App& app)
      : sub(app.add_subcommand("ric", "Exact restricted isometry constants and certificates")),
        params(sub) {
    params.option("matrix", "Matrix file (default ./A.txt)");
    params.option("q", "Comma-separated RIC orders");
    params.option("k", "Sparsity level for the certificates");
    params.option("eps", "Epsilon for the certificates (default rule)");
    params.option("lambda", "Stepsize for the certificates (default 5)");
  }

  int run(std::ostream& out) {
    params.load_config();
    const DenseMatrix a = load_matrix(params.get("matrix", "A.txt"));
    const std::vector<std::string> orders = split_list(params.get("q", ""));
    for (const std::string& item : orders) {
      const RICResult r = exact_ric(a, parse_number<Index>("q", item));
      out << "delta_" << r.order << "=" << format_double(r.delta) << "\n";
      out << "witness_" << r.order << "=";
      for (std::size_t i = 0; i < r.witness_support.indices().size(); ++i)
        out << (i ? "," : "") << r.witness_support.indices()[i];
      out << "\n";
    }
    if (auto k_text = params.get_optional("k")) {
      const Index k = parse_number<Index>("k", *k_text);
      const double lambda =
          parse_real("lambda", params.get("lambda", format_double(kDefaultLambda)));
      const SpectralBounds sigma = spectral_extremes(a);
      const double eps = params.has("eps") ? parse_real("eps", params.get("eps", ""))
                                           : default_parameters(sigma, lambda);
      const RipConstants deltas = compute_rip_constants(a, k, true);
      const TheoremCertificate certs[] = {theorem1_certificate(deltas, sigma, eps, lambda),
                                          theorem2_certificate(deltas, sigma, eps, lambda),
                                          theorem3_certificate(deltas, sigma, eps, lambda)};
      for (const TheoremCertificate& cert : certs) {
        out << "\n";
        write_certificate(out, cert);
      }
    } else if (orders.empty()) {
      throw ConfigError("nothing to do: give --q and/or --k");
    }
    return kExitOk;
  }

  CLI::App* sub;
  Params params;
};

// ---------------------------------------------------------------- oracle-check

struct OracleCommand {
  explicit OracleCommand(CLI::App& app)
      : sub(app.add_subcommand("oracle-check", "Run the small-instance oracle suites")),
        params(sub) {
    params.option("suite", "Comma-separated suites: all|p1|projection|inequalities|"
                           "contraction|thresholding (default all)");
    params.option("seed", "Seed of the random instances (default 1)");
    params.option("inject-fault", "Negative control: tie-rule");
  }

  int run(std::ostream& out) {
    params.load_config();
    const std::vector<std::string> suites = split_list(params.get("suite", "all"));
    const std::uint64_t seed = parse_number<std::uint64_t>("seed", params.get("seed", "1"));
    bool fault = false;
    if (auto f = params.get_optional("inject-fault")) {
      if (*f != "tie-rule") throw ConfigError("unknown fault '" + *f + "'");
      fault = true;
    }
    out << "seed = " << seed << "\n";
    return run_oracle_suites(suites, seed, fault, out) ? kExitOk : kExitFailure;
  }

  CLI::App* sub;
  Params params;
};

}  // namespace

void write_trace_csv(std::ostream& out, Variant algorithm, const std::vector<TraceRecord>& trace) {
  out << "algorithm,iteration,residual_l2,relative_error,qp_iters,qp_converged\n";
  const bool qp = uses_qp(algorithm);
  for (const TraceRecord& r : trace) {
    out << variant_name(algorithm) << ',' << r.iteration << ',' << format_double(r.residual)
        << ',' << csv_optional(r.relative_error) << ',';
    if (qp) out << r.qp_iterations << ',' << (r.qp_converged ? 1 : 0);
    else out << ',';
    out << '\n';
  }
}

void write_success_csv(std::ostream& out, const std::vector<SuccessRow>& rows) {
  out << "algorithm,axis,axis_value,trials,successes,success_rate\n";
  for (const SuccessRow& r : rows) {
    out << variant_name(r.algorithm) << ',' << axis_name(r.axis) << ','
        << format_double(r.axis_value) << ',' << r.trials << ',' << r.successes << ','
        << format_double(r.success_rate) << '\n';
  }
}

void write_iterations_csv(std::ostream& out, const std::vector<IterationRow>& rows) {
  out << "algorithm,axis,axis_value,avg_iterations\n";
  for (const IterationRow& r : rows) {
    out << variant_name(r.algorithm) << ',' << axis_name(r.axis) << ','
        << format_double(r.axis_value) << ',' << format_double(r.avg_iterations) << '\n';
  }
}

void write_residual_csv(std::ostream& out, const std::vector<ResidualRow>& rows) {
  out << "epsilon,lambda,algorithm,iteration,residual_l2,relative_error,qp_iters,qp_converged\n";
  for (const ResidualRow& row : rows) {
    const TraceRecord& r = row.record;
    out << format_double(row.eps) << ',' << format_double(row.lambda) << ','
        << variant_name(row.algorithm) << ',' << r.iteration << ','
        << format_double(r.residual) << ',' << csv_optional(r.relative_error) << ',';
    if (uses_qp(row.algorithm)) out << r.qp_iterations << ',' << (r.qp_converged ? 1 : 0);
    else out << ',';
    out << '\n';
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Newton-type optimal thresholding toolkit", "ntot"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  GenCommand gen(app);
  SolveCommand solve_cmd(app);
  SweepCommand sweep(app);
  RicCommand ric(app);
  OracleCommand oracle(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen.sub->parsed()) return gen.run(out);
    if (solve_cmd.sub->parsed()) return solve_cmd.run(out, err);
    if (sweep.sub->parsed()) return sweep.run(out);
    if (ric.sub->parsed()) return ric.run(out);
    if (oracle.sub->parsed()) return oracle.run(out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    // ConfigError, GuardViolation and DimensionMismatch.
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("ntot");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ntot
