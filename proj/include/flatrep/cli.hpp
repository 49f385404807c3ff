#pragma once

// Command-line front end. `run` parses argv, executes one subcommand and
// writes its records to the data stream (JSON, JSON Lines for sweeps, or CSV).
// Exit codes: 0 success, 2 usage error, 3 non-convergence, 4 precondition.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flatrep/hn_strata.hpp"
#include "flatrep/json_io.hpp"
#include "flatrep/k_calc.hpp"
#include "flatrep/lattice_gauge.hpp"
#include "flatrep/rep_variety.hpp"

namespace flatrep::cli {

using Record = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 2, kNonConvergence = 3, kPrecondition = 4 };

struct RunConfig {
  std::string subcommand;
  std::string surface = "torus";
  int n = 2;
  std::uint64_t seed = 0;
  double tol = kDefaultTol;
  int max_iter = kDefaultMaxIter;
  std::string format = "json";
  std::string output;
  bool quiet = false;

  int genus = 1;
  int n_max = 0;
  int g_max = 0;
  int max_codim = 10;
  int degree = 0;
  int max_degree = -1;
  int g1 = 1;
  int g2 = 1;
  int level = 0;
  int count = 1;
  int waypoints = 65;
  std::uint64_t seed1 = 1;
  bool seed1_given = false;
  bool full = false;
  std::string input;
};

/// Output of one subcommand: records plus an optional CSV projection
/// (header name, record key). Without a projection every scalar field is a column.
struct Emission {
  std::vector<Record> records;
  bool lines = false;
  std::vector<std::pair<std::string, std::string>> csv_columns;
  int exit_code = kOk;
};

namespace detail {

inline std::string csv_cell(const Record& v) {
  std::string s;
  if (v.is_null()) return s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline void write_emission(const Emission& e, const std::string& format, std::ostream& out) {
  if (format == "csv") {
    auto cols = e.csv_columns;
    if (cols.empty() && !e.records.empty()) {
      for (const auto& [k, v] : e.records.front().items()) {
        if (!v.is_structured()) cols.emplace_back(k, k);
      }
    }
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].first;
    out << "\n";
    for (const auto& r : e.records) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << (r.contains(cols[i].second) ? csv_cell(r.at(cols[i].second)) : std::string());
      }
      out << "\n";
    }
    return;
  }
  if (e.lines) {
    for (const auto& r : e.records) out << r.dump() << "\n";
  } else {
    for (const auto& r : e.records) out << r.dump(2) << "\n";
  }
}

inline std::function<void(int, double)> progress_sink(const RunConfig& cfg, std::ostream& err) {
  if (cfg.quiet) return {};
  return [&err](int it, double energy) {
    err << Record{{"event", "progress"}, {"iteration", it}, {"energy", energy}}.dump() << "\n";
  };
}

inline SurfacePresentation presentation_of(const RunConfig& cfg) { return make_presentation(parse_surface(cfg.surface)); }

inline Representation load_representation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read representation file '" + path + "'");
  return json_io::representation_from_json(nlohmann::json::parse(in));
}

inline Representation haar_start(const SurfacePresentation& pres, Index n, std::uint64_t seed) {
  std::vector<Unitary> images;
  for (int i = 0; i < pres.generator_count; ++i) {
    images.push_back(haar_random(n, flatrep::detail::mix_seed(seed, static_cast<std::uint64_t>(i))));
  }
  return Representation(pres, std::move(images));
}

inline bool non_increasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[i - 1]) return false;
  return true;
}

inline Record spectra_json(const Fingerprint& fp) {
  Record out = Record::array();
  for (const auto& spec : fp) {
    Record s = Record::array();
    for (const auto& z : spec) s.push_back({z.real(), z.imag()});
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline Record strata_min_record(int n, int g) {
  const auto res = min_nonsemistable_codim(n, g);
  const auto formula = min_codim_formula(n, g);
  Record argmins = Record::array();
  for (const auto& mu : res.argmins) argmins.push_back(Record(json_io::to_json(mu)));
  return {{"n", n},
          {"g", g},
          {"real_codim", res.real_codim},
          {"formula", formula},
          {"match", res.real_codim == formula},
          {"argmin_count", res.argmins.size()},
          {"argmins", std::move(argmins)}};
}

inline Emission cmd_strata_min(const RunConfig& cfg) {
  Emission e;
  e.csv_columns = {{"n", "n"},
                   {"g", "g"},
                   {"real_min_codim", "real_codim"},
                   {"formula_value", "formula"},
                   {"match", "match"},
                   {"argmin_count", "argmin_count"}};
  if (cfg.n_max > 0 || cfg.g_max > 0) {
    e.lines = true;
    const int n_max = cfg.n_max > 0 ? cfg.n_max : cfg.n;
    const int g_max = cfg.g_max > 0 ? cfg.g_max : cfg.genus;
    for (int n = 2; n <= n_max; ++n)
      for (int g = 1; g <= g_max; ++g) e.records.push_back(strata_min_record(n, g));
  } else {
    e.records.push_back(strata_min_record(cfg.n, cfg.genus));
  }
  return e;
}

inline Emission cmd_strata_enum(const RunConfig& cfg) {
  Emission e;
  e.lines = true;
  for (const auto& mu : enumerate_admissible(cfg.n, cfg.genus, cfg.max_codim)) {
    const auto c = codim_complex(mu, cfg.genus);
    e.records.push_back({{"n", cfg.n},
                         {"g", cfg.genus},
                         {"type", to_string(mu)},
                         {"parts", json_io::to_json(mu)},
                         {"codim", c},
                         {"real_codim", 2 * c},
                         {"degree_term", degree_term(mu)},
                         {"rank_term", rank_term(mu)}});
  }
  return e;
}

inline Emission cmd_kgroups(const RunConfig& cfg) {
  Emission e;
  const auto s = parse_surface(cfg.surface);
  auto record = [&](int d) {
    const auto kdef = kdef_groups(s, d);
    const auto ktop = k_topological(s, d);
    Record r{{"surface", s.name()}, {"degree", d}};
    const auto group = json_io::to_json(kdef);
    for (const auto& [k, v] : group.items()) r[k] = v;
    r["topological"] = ktop.to_string();
    r["agrees"] = kdef == ktop;
    return r;
  };
  if (cfg.max_degree >= 0) {
    e.lines = true;
    for (int d = 0; d <= cfg.max_degree; ++d) e.records.push_back(record(d));
  } else {
    e.records.push_back(record(cfg.degree));
  }
  e.csv_columns = {{"surface", "surface"}, {"degree", "degree"}, {"group", "group"}, {"topological", "topological"},
                   {"agrees", "agrees"}};
  return e;
}

inline Emission cmd_moduli(const RunConfig& cfg) {
  Emission e;
  const auto s = parse_surface(cfg.surface);
  auto record = [&](int i) {
    const auto v = moduli_homotopy(s, i);
    Record r{{"surface", s.name()}, {"i", i}, {"value", to_string(v)}};
    const auto value = json_io::to_json(v);
    for (const auto& [k, x] : value.items()) r[k] = x;
    return r;
  };
  if (cfg.max_degree >= 0) {
    e.lines = true;
    for (int i = 0; i <= cfg.max_degree; ++i) e.records.push_back(record(i));
  } else {
    e.records.push_back(record(cfg.degree));
  }
  e.csv_columns = {{"surface", "surface"}, {"i", "i"}, {"status", "status"}, {"value", "value"}};
  return e;
}

inline Emission cmd_bott_les(const RunConfig& cfg) {
  const auto s = parse_surface(cfg.surface);
  const auto rep = bott_les_report(s);
  Record rows = Record::array();
  for (const auto& row : rep.rows) {
    rows.push_back({{"degree", row.degree},
                    {"kdef", row.kdef.to_string()},
                    {"rdef", to_string(row.rdef)},
                    {"moduli", to_string(row.moduli)},
                    {"consistent", row.consistent}});
  }
  Record cases = Record::array();
  for (const auto& c : rep.bott_cases) {
    cases.push_back({{"bott_map", json_io::to_json(c.bott_map)}, {"cokernel", c.cokernel.to_string()}});
  }
  Record r{{"surface", s.name()},
           {"rows", std::move(rows)},
           {"bott_cases", std::move(cases)},
           {"injectivity_open", rep.injectivity_open},
           {"consistent", rep.consistent}};
  r["splitting"] = rep.splitting ? Record(json_io::to_json(*rep.splitting)) : Record(nullptr);
  Emission e;
  e.records.push_back(std::move(r));
  return e;
}

inline Emission cmd_excision(const RunConfig& cfg) {
  const auto rep = excision_counterexample(cfg.g1, cfg.g2);
  Record cases = Record::array();
  for (const auto& c : rep.cases) {
    Record x{{"boundary_multiplier", c.boundary_multiplier}};
    const auto report = json_io::to_json(c.report);
    for (const auto& [k, v] : report.items()) x[k] = v;
    cases.push_back(std::move(x));
  }
  Record groups = Record::array();
  for (const auto& g : rep.chain.groups) groups.push_back(g.to_string());
  Emission e;
  e.records.push_back({{"g1", rep.g1},
                       {"g2", rep.g2},
                       {"exact", rep.any_exact},
                       {"euler_obstruction", rep.euler_obstruction.convert_to<long long>()},
                       {"chain", std::move(groups)},
                       {"control_exact", rep.control_exact},
                       {"cases", std::move(cases)}});
  return e;
}

inline Emission cmd_flow(const RunConfig& cfg, std::ostream& err) {
  const Representation start = cfg.input.empty()
                                   ? detail::haar_start(detail::presentation_of(cfg), cfg.n, cfg.seed)
                                   : detail::load_representation(cfg.input);
  Emission e;
  auto emit = [&](bool converged, const Representation& rho, const FlowReport& rep) {
    e.records.push_back({{"surface", rho.presentation().surface.name()},
                         {"n", rho.rank()},
                         {"seed", cfg.seed},
                         {"converged", converged},
                         {"iterations", rep.iterations},
                         {"final_residual", rep.final_residual},
                         {"energy_monotone", detail::non_increasing(rep.energy_trace)},
                         {"energy_trace", rep.energy_trace},
                         {"representation", json_io::to_json(rho)}});
  };
  try {
    auto [rho, rep] = flow_to_flat(start, cfg.tol, cfg.max_iter, detail::progress_sink(cfg, err));
    emit(true, rho, rep);
  } catch (const RepFlowError& ex) {
    err << ex.what() << "\n";
    emit(false, ex.best().best, ex.best().report);
    e.exit_code = kNonConvergence;
  }
  return e;
}

inline Emission cmd_sample(const RunConfig& cfg, std::ostream& err) {
  const auto pres = detail::presentation_of(cfg);
  Emission e;
  e.lines = cfg.count > 1;
  for (int i = 0; i < cfg.count; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    try {
      const auto rho = sample_flat(pres, cfg.n, seed, cfg.tol, cfg.max_iter);
      Record r{{"surface", pres.surface.name()}, {"n", cfg.n}, {"seed", seed}, {"residual", residual(rho)}};
      r["obstruction"] = pres.is_orientable() ? Record(nullptr) : Record(obstruction(rho));
      if (cfg.full || cfg.count == 1) r["representation"] = json_io::to_json(rho);
      e.records.push_back(std::move(r));
    } catch (const RepFlowError& ex) {
      err << "seed " << seed << ": " << ex.what() << "\n";
      e.exit_code = kNonConvergence;
    }
  }
  return e;
}

inline Emission cmd_connect(const RunConfig& cfg, std::ostream& err) {
  const auto pres = detail::presentation_of(cfg);
  const std::uint64_t s1 = cfg.seed1_given ? cfg.seed1 : cfg.seed + 1;
  const auto rho0 = sample_flat(pres, cfg.n, cfg.seed, cfg.tol, cfg.max_iter);
  const auto rho1 = sample_flat(pres, cfg.n, s1, cfg.tol, cfg.max_iter);
  ConnectOptions opts;
  opts.max_iter = cfg.max_iter;
  Emission e;
  auto emit = [&](const RepPath& path, bool complete) {
    Record r{{"surface", pres.surface.name()},
             {"n", cfg.n},
             {"seeds", {cfg.seed, s1}},
             {"complete", complete},
             {"waypoint_count", path.waypoints.size()},
             {"max_residual", path.max_residual},
             {"max_step", path.max_step},
             {"unconverged", path.unconverged}};
    if (pres.is_orientable()) {
      r["obstructions"] = nullptr;
    } else {
      std::set<int> signs;
      for (const auto& w : path.waypoints)
        if (residual(w) <= kObstructionResidualTol) signs.insert(obstruction(w));
      r["obstructions"] = Record(std::vector<int>(signs.begin(), signs.end()));
    }
    if (cfg.full) r["path"] = json_io::to_json(path);
    e.records.push_back(std::move(r));
  };
  if (!pres.is_orientable() && obstruction(rho0) != obstruction(rho1)) {
    throw PreconditionError("connect: endpoints lie in different obstruction classes (" +
                            std::to_string(obstruction(rho0)) + " vs " + std::to_string(obstruction(rho1)) + ")");
  }
  try {
    emit(connect_flat(rho0, rho1, cfg.waypoints, cfg.tol, opts), true);
  } catch (const RefinementExhausted& ex) {
    err << ex.what() << "\n";
    emit(ex.best(), false);
    e.exit_code = kNonConvergence;
  }
  return e;
}

inline Emission cmd_obstruction(const RunConfig& cfg) {
  const Representation rho = cfg.input.empty()
                                 ? sample_flat(detail::presentation_of(cfg), cfg.n, cfg.seed, cfg.tol, cfg.max_iter)
                                 : detail::load_representation(cfg.input);
  Emission e;
  e.records.push_back({{"surface", rho.presentation().surface.name()},
                       {"n", rho.rank()},
                       {"seed", cfg.seed},
                       {"residual", residual(rho)},
                       {"obstruction", obstruction(rho)}});
  return e;
}

inline Emission cmd_holonomy_roundtrip(const RunConfig& cfg) {
  const auto pres = detail::presentation_of(cfg);
  if (cfg.level < 0) throw PreconditionError("level must be >= 0");
  const auto rho = sample_flat(pres, cfg.n, cfg.seed, cfg.tol, cfg.max_iter);
  const auto cx = build_complex(pres, cfg.level);
  const auto a = flat_from_rep(rho, cx);
  const auto back = holonomy_rep(a);
  double err = 0.0;
  for (std::size_t i = 0; i < rho.images().size(); ++i) {
    err = std::max(err, max_entry_error(back.image(i).matrix(), rho.image(i).matrix()));
  }
  Emission e;
  e.records.push_back({{"surface", pres.surface.name()},
                       {"n", cfg.n},
                       {"seed", cfg.seed},
                       {"level", cfg.level},
                       {"vertices", cx->vertex_count},
                       {"edges", cx->edge_count()},
                       {"faces", cx->face_count()},
                       {"euler_characteristic", cx->euler_characteristic()},
                       {"rep_residual", residual(rho)},
                       {"ym_energy", ym_energy(a)},
                       {"max_entry_error", err}});
  return e;
}

inline Emission cmd_fingerprint(const RunConfig& cfg) {
  const Representation rho = cfg.input.empty()
                                 ? sample_flat(detail::presentation_of(cfg), cfg.n, cfg.seed, cfg.tol, cfg.max_iter)
                                 : detail::load_representation(cfg.input);
  const auto probes = default_probes(rho.presentation());
  Record words = Record::array();
  for (const auto& w : probes) words.push_back(Record(json_io::to_json(w)));
  Emission e;
  e.records.push_back({{"surface", rho.presentation().surface.name()},
                       {"n", rho.rank()},
                       {"seed", cfg.seed},
                       {"probes", std::move(words)},
                       {"spectra", detail::spectra_json(fingerprint(rho, probes))}});
  return e;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Flat unitary representations of surface groups, lattice gauge fields, "
               "Harder-Narasimhan strata and deformation K-group tables."};
  app.name("flatrep");
  app.require_subcommand(1, 1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output,-o", cfg.output, "Write data to this file instead of stdout");
  };
  auto numeric = [&](CLI::App* sub) {
    sub->add_option("--surface", cfg.surface, "torus, genusG, klein, crosscapsK, M<g>#K, M<g>#RP2, ...");
    sub->add_option("--n", cfg.n, "Rank")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--tol", cfg.tol, "Residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", cfg.max_iter, "Iteration cap per flow")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", cfg.quiet, "Suppress progress records on stderr");
  };

  std::map<std::string, CLI::App*> subs;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    common(s);
    subs[name] = s;
    return s;
  };

  auto* s = add("strata-min", "Minimal real codimension of a non-semistable stratum");
  s->add_option("--n", cfg.n, "Rank");
  s->add_option("--genus", cfg.genus, "Genus");
  s->add_option("--n-max", cfg.n_max, "Sweep ranks 2..n-max");
  s->add_option("--g-max", cfg.g_max, "Sweep genera 1..g-max");

  s = add("strata-enum", "Enumerate admissible Harder-Narasimhan types up to a codimension");
  s->add_option("--n", cfg.n, "Rank");
  s->add_option("--genus", cfg.genus, "Genus");
  s->add_option("--max-codim", cfg.max_codim, "Complex codimension budget");

  s = add("kgroups", "Deformation and topological K-groups of a surface");
  s->add_option("--surface", cfg.surface, "Surface name");
  s->add_option("--degree", cfg.degree, "Degree")->check(CLI::NonNegativeNumber);
  s->add_option("--max-degree", cfg.max_degree, "Emit degrees 0..max-degree");

  s = add("moduli", "Homotopy groups of the stable moduli space");
  s->add_option("--surface", cfg.surface, "Surface name");
  s->add_option("--degree,-i", cfg.degree, "Homotopy degree")->check(CLI::NonNegativeNumber);
  s->add_option("--max-degree", cfg.max_degree, "Emit degrees 0..max-degree");

  s = add("bott-les", "Low-degree Bott long exact sequence report");
  s->add_option("--surface", cfg.surface, "Surface name");

  s = add("excision", "Excision failure certificate for a connected sum of two orientable surfaces");
  s->add_option("--g1", cfg.g1, "Genus of the first summand");
  s->add_option("--g2", cfg.g2, "Genus of the second summand");

  s = add("flow", "Gradient flow of a Haar-random (or given) representation to a flat one");
  numeric(s);
  s->add_option("--input", cfg.input, "Representation JSON to start from")->check(CLI::ExistingFile);

  s = add("sample", "Sample flat representations (JSON Lines when --count > 1)");
  numeric(s);
  s->add_option("--count", cfg.count, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  s->add_flag("--full", cfg.full, "Include the representation in every record");

  s = add("connect", "Connect two flat samples by a path of near-flat representations");
  numeric(s);
  s->add_option("--seed1", cfg.seed1, "Seed of the second endpoint (default seed + 1)");
  s->add_option("--waypoints", cfg.waypoints, "Initial number of waypoints")->check(CLI::PositiveNumber);
  s->add_flag("--full", cfg.full, "Include every waypoint");

  s = add("obstruction", "Component obstruction of a flat representation of a nonorientable surface");
  numeric(s);
  s->add_option("--input", cfg.input, "Representation JSON")->check(CLI::ExistingFile);

  s = add("holonomy-roundtrip", "Tree-gauge flat connection from a flat sample and its holonomy error");
  numeric(s);
  s->add_option("--level", cfg.level, "Subdivision level")->check(CLI::NonNegativeNumber);

  s = add("fingerprint", "Conjugation-invariant spectra of probe words");
  numeric(s);
  s->add_option("--input", cfg.input, "Representation JSON")->check(CLI::ExistingFile);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) cfg.subcommand = name;
  }
  if (auto* c = subs["connect"]; c->parsed()) cfg.seed1_given = c->count("--seed1") > 0;

  try {
    Emission e;
    const auto& name = cfg.subcommand;
    if (name == "strata-min") e = cmd_strata_min(cfg);
    else if (name == "strata-enum") e = cmd_strata_enum(cfg);
    else if (name == "kgroups") e = cmd_kgroups(cfg);
    else if (name == "moduli") e = cmd_moduli(cfg);
    else if (name == "bott-les") e = cmd_bott_les(cfg);
    else if (name == "excision") e = cmd_excision(cfg);
    else if (name == "flow") e = cmd_flow(cfg, err);
    else if (name == "sample") e = cmd_sample(cfg, err);
    else if (name == "connect") e = cmd_connect(cfg, err);
    else if (name == "obstruction") e = cmd_obstruction(cfg);
    else if (name == "holonomy-roundtrip") e = cmd_holonomy_roundtrip(cfg);
    else if (name == "fingerprint") e = cmd_fingerprint(cfg);

    if (cfg.output.empty()) {
      detail::write_emission(e, cfg.format, out);
    } else {
      std::ofstream file(cfg.output);
      if (!file) throw PreconditionError("cannot open output file '" + cfg.output + "'");
      detail::write_emission(e, cfg.format, file);
    }
    return e.exit_code;
  } catch (const NonConvergenceError& ex) {
    err << "non-convergence: " << ex.what() << "\n";
    return kNonConvergence;
  } catch (const Error& ex) {
    err << "precondition violated: " << ex.what() << "\n";
    return kPrecondition;
  } catch (const nlohmann::json::exception& ex) {
    err << "malformed input: " << ex.what() << "\n";
    return kPrecondition;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace flatrep::cli
