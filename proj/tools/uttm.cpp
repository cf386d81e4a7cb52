// Command-line front end: every pipeline behind one binary with
// reproducible seeds and CSV/JSON output.
//
// Exit codes: 0 success, 1 a claimed bound failed on a concrete instance,
// 2 invalid input or configuration.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uttm/dyadic.hpp"
#include "uttm/embedding.hpp"
#include "uttm/experiments.hpp"
#include "uttm/measure_json.hpp"
#include "uttm/spectra.hpp"
#include "uttm/toeplitz.hpp"
#include "uttm/types.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
  std::string command;
  std::vector<double> spectrum;
  std::string spectrum_file;
  std::size_t hn_n = 8;
  std::vector<std::size_t> sizes;
  std::size_t trials = 200;
  std::string distribution = "uniform";
  std::size_t embed_m = 2;
  std::size_t embed_n = 2;
  std::size_t samples = 25;
  std::string measure_file;
  std::string increments_file;
  std::size_t stages = 6;
  std::size_t nmax = 100;
  double tau = 0.5;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string output;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt15(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

json constants_json() {
  return json{{"K", uttm::kGreedyNormBound},
              {"K_15", fmt15(uttm::kGreedyNormBound)},
              {"C", uttm::kPairedNormBound},
              {"C_15", fmt15(uttm::kPairedNormBound)}};
}

json config_json(const RunConfig& cfg) {
  json doc;
  doc["command"] = cfg.command;
  doc["seed"] = cfg.seed;
  doc["format"] = cfg.format;
  if (!cfg.spectrum.empty()) doc["spectrum"] = cfg.spectrum;
  if (!cfg.spectrum_file.empty()) doc["spectrum_file"] = cfg.spectrum_file;
  if (cfg.command == "hn") doc["n"] = cfg.hn_n;
  if (!cfg.sizes.empty()) doc["sizes"] = cfg.sizes;
  if (cfg.command == "bound-sweep") {
    doc["trials"] = cfg.trials;
    doc["distribution"] = cfg.distribution;
  }
  if (cfg.command == "embed-check") {
    doc["m"] = cfg.embed_m;
    doc["multiplicity"] = cfg.embed_n;
    doc["samples"] = cfg.samples;
  }
  if (!cfg.measure_file.empty()) doc["spec"] = cfg.measure_file;
  if (!cfg.increments_file.empty()) doc["increments_file"] = cfg.increments_file;
  if (cfg.command == "measure") doc["stages"] = cfg.stages;
  if (cfg.command == "counterexample") doc["nmax"] = cfg.nmax;
  if (cfg.command == "explore-irrational") doc["tau"] = cfg.tau;
  return doc;
}

/// CSV documents: comment lines (config echo, constants, one timestamp),
/// then the header row, then data rows. The timestamp comment is the only
/// nondeterministic byte.
class CsvDoc {
 public:
  CsvDoc(const RunConfig& cfg, std::string header) : header_(std::move(header)) {
    head_ << "# config: " << config_json(cfg).dump() << "\n";
    head_ << "# constants: K=" << fmt15(uttm::kGreedyNormBound)
          << " C=" << fmt15(uttm::kPairedNormBound) << "\n";
    std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    head_ << "# generated: " << stamp << "\n";
  }

  void comment(const std::string& text) { head_ << "# " << text << "\n"; }

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((rows_ << (first ? "" : ",") << field(fields), first = false), ...);
    rows_ << "\n";
  }

  std::string str() const { return head_.str() + header_ + "\n" + rows_.str(); }

 private:
  static std::string field(double v) { return fmt(v); }
  static std::string field(const std::string& s) { return s; }
  static std::string field(const char* s) { return s; }
  template <class T>
  static std::string field(const T& v) {
    return std::to_string(v);
  }

  std::ostringstream head_, rows_;
  std::string header_;
};

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output, std::ios::trunc);
  if (!out) throw uttm::InvalidConfig("cannot open output file: " + cfg.output);
  out << text;
}

void emit_json(const RunConfig& cfg, json doc) {
  doc["command"] = cfg.command;
  doc["seed"] = cfg.seed;
  doc["config"] = config_json(cfg);
  doc["constants"] = constants_json();
  emit(cfg, doc.dump(2) + "\n");
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw uttm::InvalidConfig("cannot parse real number '" + item + "'");
    }
  }
  return out;
}

uttm::SpectrumSequence load_spectrum(const RunConfig& cfg) {
  std::vector<double> values = cfg.spectrum;
  if (!cfg.spectrum_file.empty()) {
    std::ifstream in(cfg.spectrum_file);
    if (!in)
      throw uttm::InvalidConfig("cannot open spectrum file: " + cfg.spectrum_file);
    double v;
    while (in >> v) values.push_back(v);
  }
  if (values.empty())
    throw uttm::InvalidConfig("no spectrum given (use --spectrum or --spectrum-file)");
  return uttm::validate_spectrum(std::move(values));
}

json strip_to_json(const uttm::ToeplitzCoefficients& c) {
  json strip = json::array();
  for (const uttm::Complex& t : c.strip) strip.push_back({t.real(), t.imag()});
  return strip;
}

// ---------------------------------------------------------------------------
// command runners
// ---------------------------------------------------------------------------

void run_realize(const RunConfig& cfg) {
  const uttm::SpectrumSequence lambda = load_spectrum(cfg);
  const uttm::RearrangementPlan plan = uttm::greedy_rearrange(lambda);
  uttm::SpectrumSequence rearranged;
  rearranged.values = uttm::apply_permutation(lambda.values, plan.permutation);
  const uttm::ToeplitzCoefficients strip = uttm::toeplitz_coefficients(rearranged);
  const double norm = uttm::operator_norm(uttm::build_T(strip));
  const double sup = lambda.sup_norm();
  const double ratio = sup == 0.0 ? 0.0 : norm / sup;
  const double skew = uttm::skew_norm_exact(rearranged);
  if (ratio > uttm::kGreedyNormBound + 1e-8)
    throw uttm::BoundViolation("realize: ratio " + std::to_string(ratio) +
                               " exceeds the greedy constant; spectrum " +
                               uttm::serialize_values(lambda.values));

  if (cfg.format == "json") {
    json doc;
    doc["n"] = lambda.size();
    doc["spectrum"] = lambda.values;
    doc["adjustment"] = lambda.adjustment;
    doc["permutation"] = plan.permutation;
    doc["rearranged"] = rearranged.values;
    doc["partial_sum_max"] = plan.partial_sum_max;
    doc["rotation_sum_max"] = plan.rotation_sum_max;
    doc["strip"] = strip_to_json(strip);
    doc["norm"] = norm;
    doc["ratio"] = ratio;
    doc["skew_norm"] = skew;
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "n,norm,ratio,partial_sum_max,rotation_sum_max,skew_norm");
    csv.row(lambda.size(), norm, ratio, plan.partial_sum_max,
            plan.rotation_sum_max, skew);
    emit(cfg, csv.str());
  }
}

void run_coeffs(const RunConfig& cfg) {
  const uttm::SpectrumSequence lambda = load_spectrum(cfg);
  const uttm::ToeplitzCoefficients direct =
      uttm::toeplitz_coefficients_direct(lambda);
  const uttm::ToeplitzCoefficients fast = uttm::toeplitz_coefficients_fft(lambda);
  double routes = 0.0;
  for (std::size_t d = 1; d < direct.n; ++d)
    routes = std::max(routes, std::abs(direct.t(d) - fast.t(d)));

  if (cfg.format == "json") {
    json doc;
    doc["n"] = lambda.size();
    doc["strip"] = strip_to_json(direct);
    doc["symmetry_residual"] = uttm::conjugate_symmetry_residual(direct);
    doc["routes_residual"] = routes;
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "d,re,im");
    csv.comment("routes_residual=" + fmt(routes));
    for (std::size_t d = 1; d < direct.n; ++d)
      csv.row(d, direct.t(d).real(), direct.t(d).imag());
    emit(cfg, csv.str());
  }
}

void run_hn(const RunConfig& cfg) {
  const std::size_t n = cfg.hn_n;
  const uttm::HnSpectrum s = uttm::hn_eigensystem(n);
  const uttm::CMatrix H = uttm::hn_matrix(n);
  std::vector<double> residuals(n);
  double max_residual = 0.0, max_mu = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const uttm::CVector v = s.eigenvector(k);
    residuals[k] = (H * v - s.mu[k] * v).norm();
    max_residual = std::max(max_residual, residuals[k]);
    max_mu = std::max(max_mu, std::abs(s.mu[k]));
  }
  const double reconstruct = uttm::hn_reconstruct(n);

  if (cfg.format == "json") {
    json doc;
    doc["n"] = n;
    doc["parity"] = s.odd ? "odd" : "even";
    doc["mu"] = s.mu;
    doc["max_eigen_residual"] = max_residual;
    doc["reconstruct_residual"] = reconstruct;
    doc["max_abs_mu"] = max_mu;
    doc["mu_bound"] = 2.0 / std::numbers::pi;
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "k,mu,eigen_residual");
    csv.comment("reconstruct_residual=" + fmt(reconstruct));
    for (std::size_t k = 0; k < n; ++k) csv.row(k, s.mu[k], residuals[k]);
    emit(cfg, csv.str());
  }
}

void run_bound_sweep(const RunConfig& cfg) {
  if (cfg.sizes.empty()) throw uttm::InvalidConfig("bound-sweep needs --sizes");
  const uttm::SpectrumDistribution dist =
      cfg.distribution == "uniform" ? uttm::SpectrumDistribution::kUniform
      : cfg.distribution == "two-point"
          ? uttm::SpectrumDistribution::kTwoPoint
          : throw uttm::InvalidConfig("unknown distribution '" + cfg.distribution +
                                      "' (uniform | two-point)");
  const std::vector<uttm::SweepResult> results =
      uttm::bound_sweep(cfg.sizes, cfg.trials, dist, cfg.seed);

  if (cfg.format == "json") {
    json rows = json::array();
    for (const auto& r : results)
      rows.push_back({{"n", r.n},
                      {"trials", r.trials},
                      {"worst_ratio", r.worst_ratio},
                      {"seed", r.seed}});
    json doc;
    doc["distribution"] = cfg.distribution;
    doc["results"] = rows;
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "n,trials,worst_ratio,seed,bound_K");
    for (const auto& r : results)
      csv.row(r.n, r.trials, r.worst_ratio, r.seed, uttm::kGreedyNormBound);
    emit(cfg, csv.str());
  }
}

void run_lower_bound(const RunConfig& cfg) {
  if (cfg.sizes.empty()) throw uttm::InvalidConfig("lower-bound needs --sizes");
  const uttm::GrowthResult growth = uttm::lowerbound_growth(cfg.sizes);

  if (cfg.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < growth.half_sizes.size(); ++i)
      rows.push_back({{"n", growth.half_sizes[i]},
                      {"matrix_size", 2 * growth.half_sizes[i]},
                      {"norm", growth.norms[i]},
                      {"re_quad", growth.quad_re[i]},
                      {"im_quad", growth.quad_im[i]},
                      {"lower_bound", growth.lower_bounds[i]}});
    json doc;
    doc["results"] = rows;
    doc["fitted_slope"] = growth.fitted_slope;
    doc["norms_nondecreasing"] = growth.norms_nondecreasing;
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "n,matrix_size,norm,re_quad,im_quad,lower_bound");
    csv.comment("fitted_slope=" + fmt(growth.fitted_slope));
    csv.comment(std::string("norms_nondecreasing=") +
                (growth.norms_nondecreasing ? "true" : "false"));
    for (std::size_t i = 0; i < growth.half_sizes.size(); ++i)
      csv.row(growth.half_sizes[i], 2 * growth.half_sizes[i], growth.norms[i],
              growth.quad_re[i], growth.quad_im[i], growth.lower_bounds[i]);
    emit(cfg, csv.str());
  }
}

void run_embed_check(const RunConfig& cfg) {
  const uttm::EmbeddingPair pair{cfg.embed_m, cfg.embed_n};
  const double residual = uttm::diagram_check(pair, cfg.samples, cfg.seed);

  if (cfg.format == "json") {
    json doc;
    doc["m"] = pair.m;
    doc["multiplicity"] = pair.n;
    doc["samples"] = cfg.samples;
    doc["max_residual"] = residual;
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "m,multiplicity,samples,max_residual");
    csv.row(pair.m, pair.n, cfg.samples, residual);
    emit(cfg, csv.str());
  }
}

void emit_assembly(const RunConfig& cfg, const uttm::StageAssembly& assembly,
                   json extra) {
  const uttm::CMatrix z = uttm::build_T(assembly.assembled);
  const std::vector<double> profile =
      uttm::power_norm_profile(z, assembly.plan.final_size());
  const double norm = uttm::operator_norm(z);

  if (cfg.format == "json") {
    json doc;
    doc["assembly"] = uttm::assembly_to_json(assembly);
    doc["norm"] = norm;
    doc["power_profile"] = profile;
    for (auto& [key, value] : extra.items()) doc[key] = std::move(value);
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "stage,size,sup_norm,stage_norm,cumulative_bound");
    csv.comment("assembled_norm=" + fmt(norm));
    csv.comment("final_profile=" + fmt(profile.back()));
    double cumulative = 0.0;
    for (std::size_t j = 0; j < assembly.plan.stages; ++j) {
      cumulative += assembly.stage_sup_norms[j];
      csv.row(j + 1, assembly.plan.n1 << j, assembly.stage_sup_norms[j],
              assembly.stage_norms[j], uttm::kPairedNormBound * cumulative);
    }
    emit(cfg, csv.str());
  }
}

void run_indlimit(const RunConfig& cfg) {
  if (cfg.increments_file.empty())
    throw uttm::InvalidConfig("indlimit needs --increments-file");
  std::ifstream in(cfg.increments_file);
  if (!in)
    throw uttm::InvalidConfig("cannot open increments file: " + cfg.increments_file);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw uttm::InvalidConfig(std::string("increments file is not valid JSON: ") +
                              e.what());
  }
  std::vector<std::vector<double>> increments;
  try {
    increments = doc.at("increments").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw uttm::InvalidConfig(std::string("increments document malformed: ") +
                              e.what());
  }
  if (increments.empty()) throw uttm::InvalidConfig("no increments given");
  const uttm::StagePlan plan{increments.front().size(), increments.size()};
  emit_assembly(cfg, uttm::assemble(plan, increments), json::object());
}

void run_measure(const RunConfig& cfg) {
  if (cfg.measure_file.empty()) throw uttm::InvalidConfig("measure needs --spec");
  const uttm::MeasureSpec spec = uttm::load_measure(cfg.measure_file);
  const uttm::MeasureRealization real = uttm::realize_measure(spec, cfg.stages);

  // multiset distance between the realized diagonal and the final stage
  std::vector<double> a = real.final_diagonal;
  std::vector<double> b = real.stage_values.back();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double spectrum_residual = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    spectrum_residual = std::max(spectrum_residual, std::abs(a[i] - b[i]));

  json extra;
  extra["increment_norms"] = real.increment_norms;
  extra["final_diagonal"] = real.final_diagonal;
  extra["spectrum_residual"] = spectrum_residual;
  if (cfg.format == "json") {
    extra["stage_values"] = real.stage_values;
    json cells = json::array();
    for (const auto& c : real.final_cells)
      cells.push_back({{"piece", c.piece},
                       {"interval", {c.lo, c.hi}},
                       {"value", c.value}});
    extra["final_cells"] = std::move(cells);
  }
  emit_assembly(cfg, real.assembly, std::move(extra));
}

void run_counterexample(const RunConfig& cfg) {
  const std::vector<uttm::CounterexampleRow> rows =
      uttm::counterexample_series(cfg.nmax);

  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"N", r.N},
                     {"s_N", r.s_N},
                     {"increment_norm", r.increment_norm},
                     {"partial_sum", r.partial_sum}});
    json doc;
    doc["results"] = arr;
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "N,s_N,increment_norm,partial_sum");
    for (const auto& r : rows)
      csv.row(r.N, r.s_N, r.increment_norm, r.partial_sum);
    emit(cfg, csv.str());
  }
}

void run_explore_irrational(const RunConfig& cfg) {
  if (cfg.sizes.empty())
    throw uttm::InvalidConfig("explore-irrational needs --sizes");
  const std::vector<uttm::IrrationalRow> rows =
      uttm::irrational_explorer(cfg.tau, cfg.sizes);

  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"n", r.n},
                     {"ones", r.ones},
                     {"norm", r.norm},
                     {"ratio", r.ratio},
                     {"profile_1", r.profile_1},
                     {"profile_half", r.profile_half},
                     {"profile_n", r.profile_n}});
    json doc;
    doc["flag"] = "EXPLORATORY";
    doc["tau"] = cfg.tau;
    doc["results"] = arr;
    emit_json(cfg, std::move(doc));
  } else {
    CsvDoc csv(cfg, "n,ones,norm,ratio,profile_1,profile_half,profile_n");
    csv.comment("EXPLORATORY tau=" + fmt(cfg.tau));
    for (const auto& r : rows)
      csv.row(r.n, r.ones, r.norm, r.ratio, r.profile_1, r.profile_half,
              r.profile_n);
    emit(cfg, csv.str());
  }
}

void dispatch(const RunConfig& cfg) {
  if (cfg.format != "json" && cfg.format != "csv")
    throw uttm::InvalidConfig("unknown format '" + cfg.format + "' (csv | json)");
  if (cfg.command == "realize") return run_realize(cfg);
  if (cfg.command == "coeffs") return run_coeffs(cfg);
  if (cfg.command == "hn") return run_hn(cfg);
  if (cfg.command == "bound-sweep") return run_bound_sweep(cfg);
  if (cfg.command == "lower-bound") return run_lower_bound(cfg);
  if (cfg.command == "embed-check") return run_embed_check(cfg);
  if (cfg.command == "indlimit") return run_indlimit(cfg);
  if (cfg.command == "measure") return run_measure(cfg);
  if (cfg.command == "counterexample") return run_counterexample(cfg);
  if (cfg.command == "explore-irrational") return run_explore_irrational(cfg);
  throw uttm::InvalidConfig("unknown command '" + cfg.command + "'");
}

/// Fills a RunConfig from a JSON config document ({"command": ..., ...}).
RunConfig config_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw uttm::InvalidConfig("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw uttm::InvalidConfig(std::string("config file is not valid JSON: ") +
                              e.what());
  }
  RunConfig cfg;
  try {
    cfg.command = doc.at("command").get<std::string>();
    cfg.spectrum = doc.value("spectrum", cfg.spectrum);
    cfg.spectrum_file = doc.value("spectrum_file", cfg.spectrum_file);
    cfg.hn_n = doc.value("n", cfg.hn_n);
    cfg.sizes = doc.value("sizes", cfg.sizes);
    cfg.trials = doc.value("trials", cfg.trials);
    cfg.distribution = doc.value("distribution", cfg.distribution);
    cfg.embed_m = doc.value("m", cfg.embed_m);
    cfg.embed_n = doc.value("multiplicity", cfg.embed_n);
    cfg.samples = doc.value("samples", cfg.samples);
    cfg.measure_file = doc.value("spec", cfg.measure_file);
    cfg.increments_file = doc.value("increments_file", cfg.increments_file);
    cfg.stages = doc.value("stages", cfg.stages);
    cfg.nmax = doc.value("nmax", cfg.nmax);
    cfg.tau = doc.value("tau", cfg.tau);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.format = doc.value("format", cfg.format);
    cfg.output = doc.value("output", cfg.output);
  } catch (const json::exception& e) {
    throw uttm::InvalidConfig(std::string("config document malformed: ") + e.what());
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-zero spectra as real parts of explicit nilpotent "
               "upper triangular Toeplitz matrices"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file (alternative to a subcommand)");

  RunConfig cfg;
  std::string spectrum_arg;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", cfg.seed, "master seed (default 0)");
    cmd->add_option("--format", cfg.format, "output format: csv | json");
    cmd->add_option("--output", cfg.output, "output path (default stdout)");
  };
  auto add_spectrum = [&](CLI::App* cmd) {
    cmd->add_option("--spectrum", spectrum_arg, "comma-separated reals");
    cmd->add_option("--spectrum-file", cfg.spectrum_file, "one real per line");
  };

  CLI::App* realize = app.add_subcommand("realize",
      "greedy-rearrange a spectrum and build its nilpotent realization");
  add_spectrum(realize);
  add_common(realize);

  CLI::App* coeffs = app.add_subcommand("coeffs",
      "coefficient strip of a spectrum, direct and fast routes");
  add_spectrum(coeffs);
  add_common(coeffs);

  CLI::App* hn = app.add_subcommand("hn", "closed-form kernel eigensystem");
  hn->add_option("--n", cfg.hn_n, "matrix size")->required();
  add_common(hn);

  CLI::App* sweep = app.add_subcommand("bound-sweep",
      "random sweep of the greedy norm bound");
  sweep->add_option("--sizes", [&cfg](const std::vector<std::string>& v) {
        for (const auto& s : v)
          for (double x : parse_double_list(s))
            cfg.sizes.push_back(static_cast<std::size_t>(x));
        return true;
      }, "comma-separated sizes")->required();
  sweep->add_option("--trials", cfg.trials, "trials per size");
  sweep->add_option("--distribution", cfg.distribution, "uniform | two-point");
  add_common(sweep);

  CLI::App* lower = app.add_subcommand("lower-bound",
      "log growth of the unrearranged balanced family");
  lower->add_option("--sizes", [&cfg](const std::vector<std::string>& v) {
        for (const auto& s : v)
          for (double x : parse_double_list(s))
            cfg.sizes.push_back(static_cast<std::size_t>(x));
        return true;
      }, "comma-separated half sizes n (matrix size 2n)")->required();
  add_common(lower);

  CLI::App* embed = app.add_subcommand("embed-check",
      "commuting-diagram residuals of the tensor embedding");
  embed->add_option("--m", cfg.embed_m, "inner dimension");
  embed->add_option("--n", cfg.embed_n, "multiplicity");
  embed->add_option("--samples", cfg.samples, "random samples");
  add_common(embed);

  CLI::App* ind = app.add_subcommand("indlimit",
      "assemble a nilpotent sum from explicit stage increments");
  ind->add_option("--increments-file", cfg.increments_file,
                  "JSON {\"increments\": [[...], ...]}")->required();
  add_common(ind);

  CLI::App* measure = app.add_subcommand("measure",
      "dyadic realization of a measure document");
  measure->add_option("--spec", cfg.measure_file, "measure JSON file")->required();
  measure->add_option("--stages", cfg.stages, "number of doubling stages");
  add_common(measure);

  CLI::App* counter = app.add_subcommand("counterexample",
      "diverging stage increments of the 1/(n 2^n) atom family");
  counter->add_option("--nmax", cfg.nmax, "largest stage");
  add_common(counter);

  CLI::App* irr = app.add_subcommand("explore-irrational",
      "two-valued spectra with irrational trace parameter (exploratory)");
  irr->add_option("--tau", cfg.tau, "trace parameter in (0,1)")->required();
  irr->add_option("--sizes", [&cfg](const std::vector<std::string>& v) {
        for (const auto& s : v)
          for (double x : parse_double_list(s))
            cfg.sizes.push_back(static_cast<std::size_t>(x));
        return true;
      }, "comma-separated sizes")->required();
  add_common(irr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (!config_path.empty()) {
      dispatch(config_from_json(config_path));
      return 0;
    }
    if (app.get_subcommands().empty())
      throw uttm::InvalidConfig("no command given (see --help)");
    cfg.command = app.get_subcommands().front()->get_name();
    if (!spectrum_arg.empty()) cfg.spectrum = parse_double_list(spectrum_arg);
    dispatch(cfg);
    return 0;
  } catch (const uttm::BoundViolation& e) {
    std::cerr << "bound violation: " << e.what() << "\n";
    return 1;
  } catch (const uttm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
