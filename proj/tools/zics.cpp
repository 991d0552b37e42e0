// zics: stationary distributions of stochastic reaction networks via
// maximum-entropy moment closure, with brute-force CME and SSA oracles.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "zics/moments.hpp"
#include "zics/network.hpp"
#include "zics/oracle.hpp"
#include "zics/solver.hpp"
#include "zics/statespace.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 input/usage error, 2 domain error.
int exit_code_for(zics::Errc code) {
  switch (code) {
    case zics::Errc::malformed_input:
    case zics::Errc::shape_mismatch:
    case zics::Errc::duplicate_species:
    case zics::Errc::non_integer_stoichiometry:
    case zics::Errc::dimension_mismatch:
      return 1;
    default:
      return 2;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good())
    throw zics::Error(zics::Errc::malformed_input, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out.good())
    throw zics::Error(zics::Errc::malformed_input, "cannot write '" + path.string() + "'");
  out << text;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Shortest decimal representation that round-trips; deterministic.
std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

zics::NetworkFormat sniff_format(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{' ? zics::NetworkFormat::json : zics::NetworkFormat::tsv;
  }
  return zics::NetworkFormat::json;
}

struct LoadedNetwork {
  zics::ReactionNetwork net;
  zics::NetworkFormat format;
  std::string path;
  std::uint64_t hash = 0;
};

LoadedNetwork load_network(const std::string& path) {
  std::string text = read_file(path);
  zics::NetworkFormat format = sniff_format(text);
  return {zics::parse_network(text, format), format, path, fnv1a64(text)};
}

/// --space grammar: comma-separated NAME=min:max, or min:max positionally
/// by species order. Every species needs a range.
zics::StateSpace parse_space(const std::string& spec, const std::vector<std::string>& species) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : spec) {
    if (c == ',') {
      tokens.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  tokens.push_back(cur);

  auto parse_range = [&](const std::string& s) -> zics::StateSpace::Bound {
    auto colon = s.find(':');
    if (colon == std::string::npos)
      throw zics::Error(zics::Errc::malformed_input,
                        "space range '" + s + "' is not of the form min:max");
    try {
      return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
    } catch (const std::exception&) {
      throw zics::Error(zics::Errc::malformed_input,
                        "space range '" + s + "' has non-integer endpoints");
    }
  };

  bool named = !tokens.empty() && tokens[0].find('=') != std::string::npos;
  std::vector<zics::StateSpace::Bound> bounds(species.size());
  if (named) {
    std::vector<bool> seen(species.size(), false);
    for (const auto& tok : tokens) {
      auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw zics::Error(zics::Errc::malformed_input,
                          "mixed named and positional entries in --space");
      std::string name = tok.substr(0, eq);
      auto it = std::find(species.begin(), species.end(), name);
      if (it == species.end())
        throw zics::Error(zics::Errc::malformed_input, "unknown species '" + name + "' in --space");
      auto i = static_cast<std::size_t>(it - species.begin());
      if (seen[i])
        throw zics::Error(zics::Errc::malformed_input, "duplicate species '" + name + "' in --space");
      seen[i] = true;
      bounds[i] = parse_range(tok.substr(eq + 1));
    }
    for (std::size_t i = 0; i < species.size(); ++i)
      if (!seen[i])
        throw zics::Error(zics::Errc::malformed_input,
                          "species '" + species[i] + "' missing from --space");
  } else {
    if (tokens.size() != species.size())
      throw zics::Error(zics::Errc::malformed_input,
                        "--space has " + std::to_string(tokens.size()) + " ranges for " +
                            std::to_string(species.size()) + " species");
    for (std::size_t i = 0; i < species.size(); ++i) bounds[i] = parse_range(tokens[i]);
  }
  return zics::StateSpace(bounds);
}

std::string safe_filename(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

std::string marginal_csv(const zics::DistributionTable& dist, int species,
                         const std::string& name) {
  std::string csv = "species,count,probability\n";
  Eigen::VectorXd m = dist.marginal(species);
  int min = dist.space.bounds[static_cast<std::size_t>(species)].min;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    csv += name + "," + std::to_string(min + static_cast<int>(i)) + "," + fmt(m[i]) + "\n";
  return csv;
}

void write_marginals(const fs::path& dir, const zics::DistributionTable& dist,
                     const std::vector<std::string>& species) {
  for (std::size_t s = 0; s < species.size(); ++s)
    write_file(dir / ("marginal_" + safe_filename(species[s]) + ".csv"),
               marginal_csv(dist, static_cast<int>(s), species[s]));
}

/// Overlay points for one species from an oracle marginal CSV
/// (species,count,probability rows).
std::vector<std::pair<int, double>> overlay_points(const std::string& csv,
                                                   const std::string& species) {
  std::vector<std::pair<int, double>> pts;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) continue;
    if (line.substr(0, c1) != species) continue;
    try {
      pts.emplace_back(std::stoi(line.substr(c1 + 1, c2 - c1 - 1)),
                       std::stod(line.substr(c2 + 1)));
    } catch (const std::exception&) {
      throw zics::Error(zics::Errc::malformed_input, "bad overlay CSV row: " + line);
    }
  }
  return pts;
}

std::string marginal_svg(const std::string& species, int min_count, const Eigen::VectorXd& p,
                         const std::vector<std::pair<int, double>>& overlay) {
  const double w = 640, h = 400, ml = 60, mr = 20, mt = 30, mb = 45;
  double ymax = p.size() > 0 ? p.maxCoeff() : 0.0;
  for (const auto& [x, y] : overlay) ymax = std::max(ymax, y);
  if (ymax <= 0.0) ymax = 1.0;
  int xmin = min_count, xmax = min_count + static_cast<int>(p.size()) - 1;
  for (const auto& [x, y] : overlay) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  double xspan = std::max(1, xmax - xmin);
  auto px = [&](double x) { return ml + (x - xmin) / xspan * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - y / ymax * (h - mt - mb); };

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
      "viewBox=\"0 0 640 400\">\n"
      "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(h - mb) + "\" x2=\"" + fmt(w - mr) +
         "\" y2=\"" + fmt(h - mb) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(ml) + "\" y2=\"" +
         fmt(h - mb) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt(w / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">marginal of " + species + "</text>\n";
  svg += "<text x=\"" + fmt(w / 2) + "\" y=\"" + fmt(h - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + species +
         " molecules (" + std::to_string(xmin) + ".." + std::to_string(xmax) + ")</text>\n";
  svg += "<text x=\"15\" y=\"" + fmt(h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 15 " + fmt(h / 2) + ")\">probability (max " + fmt(ymax) +
         ")</text>\n";
  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i) svg += " ";
    svg += fmt(px(min_count + static_cast<double>(i))) + "," + fmt(py(p[i]));
  }
  svg += "\"/>\n";
  for (const auto& [x, y] : overlay)
    svg += "<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) +
           "\" r=\"2.5\" fill=\"#d62728\"/>\n";
  svg += "</svg>\n";
  return svg;
}

void write_plots(const fs::path& dir, const zics::DistributionTable& dist,
                 const std::vector<std::string>& species, const std::string& overlay_path) {
  std::string overlay_csv = overlay_path.empty() ? "" : read_file(overlay_path);
  for (std::size_t s = 0; s < species.size(); ++s) {
    auto pts = overlay_csv.empty() ? std::vector<std::pair<int, double>>{}
                                   : overlay_points(overlay_csv, species[s]);
    write_file(dir / ("marginal_" + safe_filename(species[s]) + ".svg"),
               marginal_svg(species[s], dist.space.bounds[s].min,
                            dist.marginal(static_cast<int>(s)), pts));
  }
}

ordered_json space_json(const zics::StateSpace& space, const std::vector<std::string>& species) {
  ordered_json out = ordered_json::object();
  for (std::size_t i = 0; i < species.size(); ++i)
    out[species[i]] = {space.bounds[i].min, space.bounds[i].max};
  return out;
}

ordered_json manifest_base(const std::string& command, const LoadedNetwork& loaded) {
  char hash[19];
  std::snprintf(hash, sizeof hash, "0x%016llx",
                static_cast<unsigned long long>(loaded.hash));
  ordered_json doc;
  doc["tool"] = "zics";
  doc["version"] = kVersion;
  doc["command"] = command;
  doc["network"] = {{"path", loaded.path}, {"fnv1a64", hash}};
  return doc;
}

void write_manifest(const fs::path& dir, ordered_json doc, double seconds) {
  doc["timing_seconds"] = seconds;
  write_file(dir / "manifest.json", doc.dump(2) + "\n");
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

int cmd_validate(const std::string& network_path, const std::string& space_spec) {
  LoadedNetwork loaded = load_network(network_path);
  const auto& net = loaded.net;
  std::cout << "network: " << net.species_count() << " species, " << net.reaction_count()
            << " reactions\n";
  for (int r = 0; r < net.reaction_count(); ++r)
    std::cout << "  " << net.reaction_string(r) << "\n";

  zics::StateSpace space = parse_space(space_spec, net.species);
  zics::ValidationReport report = zics::validate_over(net, space);
  std::cout << "grouped channels over the state space:\n";
  for (const auto& g : report.groups) {
    std::cout << "  net change (";
    for (int j = 0; j < g.net_change.size(); ++j)
      std::cout << (j ? "," : "") << g.net_change[j];
    std::cout << "): " << g.reactions.size() << " reaction(s), min propensity "
              << fmt(g.min_propensity) << " at state (";
    for (int j = 0; j < g.argmin_state.size(); ++j)
      std::cout << (j ? "," : "") << g.argmin_state[j];
    std::cout << ")\n";
  }
  std::cout << (report.valid ? "valid: all grouped propensities nonnegative\n"
                             : "INVALID: a grouped propensity is negative\n");
  return report.valid ? 0 : 2;
}

int cmd_transform(const std::string& network_path, const std::vector<std::string>& totals,
                  const std::vector<std::string>& dependent, const std::string& out_path) {
  LoadedNetwork loaded = load_network(network_path);
  const auto& net = loaded.net;

  auto laws = zics::conservation_laws(net);
  std::cout << "detected " << laws.size() << " conservation law(s):\n";
  if (totals.size() > laws.size())
    throw zics::Error(zics::Errc::malformed_input,
                      "got " + std::to_string(totals.size()) + " totals for " +
                          std::to_string(laws.size()) + " conservation laws");
  // Totals are NAME=VALUE pairs assigned to the detected laws in order; the
  // name is a label for the printout only.
  for (std::size_t i = 0; i < totals.size(); ++i) {
    auto eq = totals[i].find('=');
    if (eq == std::string::npos)
      throw zics::Error(zics::Errc::malformed_input,
                        "total '" + totals[i] + "' is not of the form NAME=VALUE");
    try {
      laws[i].total = std::stod(totals[i].substr(eq + 1));
    } catch (const std::exception&) {
      throw zics::Error(zics::Errc::malformed_input,
                        "total '" + totals[i] + "' has a non-numeric value");
    }
  }
  for (std::size_t i = 0; i < laws.size(); ++i) {
    std::cout << "  ";
    bool first = true;
    for (int j = 0; j < laws[i].coefficients.size(); ++j) {
      int c = laws[i].coefficients[j];
      if (c == 0) continue;
      if (!first) std::cout << " + ";
      if (c != 1) std::cout << c << " ";
      std::cout << net.species[static_cast<std::size_t>(j)];
      first = false;
    }
    if (laws[i].total)
      std::cout << " = " << fmt(*laws[i].total) << " (" << totals[i].substr(0, totals[i].find('=')) << ")";
    std::cout << "\n";
  }

  zics::ReactionNetwork open = dependent.empty() ? net : zics::to_open_form(net, laws, dependent);
  write_file(out_path, zics::save_network(open, loaded.format));
  std::cout << "wrote " << out_path << " (" << open.species_count() << " species, "
            << open.reaction_count() << " reactions)\n";
  return 0;
}

int cmd_moments(const std::string& network_path, int order, const std::string& format,
                const std::string& out_path) {
  LoadedNetwork loaded = load_network(network_path);
  zics::EquationFormat fmt_enum;
  if (format == "text")
    fmt_enum = zics::EquationFormat::text;
  else if (format == "csv")
    fmt_enum = zics::EquationFormat::csv;
  else if (format == "json")
    fmt_enum = zics::EquationFormat::json;
  else
    throw zics::Error(zics::Errc::malformed_input, "--format must be text, csv, or json");

  zics::MomentBasis basis = zics::build_basis(loaded.net.species_count(), order);
  zics::MomentEquations eqs = zics::generate_equations(loaded.net, basis);
  std::string text = zics::export_equations(eqs, basis, loaded.net.species, fmt_enum);
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  return 0;
}

int cmd_solve(const std::string& network_path, const std::string& space_spec, int max_order,
              bool no_adaptive, double tol, const std::string& warm_path,
              const std::string& out_dir, bool plot, const std::string& overlay_path) {
  Timer timer;
  LoadedNetwork loaded = load_network(network_path);
  const auto& net = loaded.net;
  zics::StateSpace space = parse_space(space_spec, net.species);

  zics::SolverConfig cfg;
  cfg.max_order = max_order;
  cfg.adaptive = !no_adaptive;
  cfg.residual_tol = tol;
  cfg.initial_order = std::min(cfg.initial_order, cfg.max_order);

  zics::ClosureSolution sol;
  if (!warm_path.empty()) {
    // Warm start reproduces a previous run: solve directly at the saved
    // order with the saved multipliers, no escalation.
    auto [order, lam] = zics::load_lambdas(read_file(warm_path));
    sol = zics::solve_at_order(net, space, std::min(order, cfg.max_order), cfg, lam);
  } else {
    sol = zics::solve_adaptive(net, space, cfg);
  }

  std::cout << "converged at order " << sol.order_used << " (" << sol.iterations
            << " Newton iterations, residual " << fmt(sol.residual_norm) << ")\n";
  for (const auto& t : sol.per_order_history)
    std::cout << "  order " << t.order << ": " << t.iterations << " iterations, residual "
              << fmt(t.residual_norm) << ", L1 step " << fmt(t.l1_step) << "\n";
  std::cout << "boundary mass " << fmt(sol.boundary_mass) << "\n";
  if (sol.warning) std::cout << "warning: " << *sol.warning << "\n";

  fs::path dir(out_dir);
  write_marginals(dir, sol.distribution, net.species);

  std::string moments_csv = "moment_label,value,lambda\n";
  for (std::size_t i = 0; i < sol.basis.lower.size(); ++i) {
    std::string label = zics::moment_label(sol.basis.lower[i], net.species);
    moments_csv += label + "," + fmt(sol.moments_lower[static_cast<Eigen::Index>(i)]) + "," +
                   fmt(sol.lambdas.lambdas[static_cast<Eigen::Index>(i)]) + "\n";
    std::cout << "  mu_(" << label << ") = " << fmt(sol.moments_lower[static_cast<Eigen::Index>(i)])
              << "\n";
  }
  write_file(dir / "moments.csv", moments_csv);
  write_file(dir / "lambdas.json", zics::save_lambdas(sol, net.species));
  if (plot || !overlay_path.empty())
    write_plots(dir, sol.distribution, net.species, overlay_path);

  ordered_json doc = manifest_base("solve", loaded);
  doc["space"] = space_json(space, net.species);
  doc["config"] = {{"max_order", cfg.max_order},
                   {"initial_order", cfg.initial_order},
                   {"adaptive", cfg.adaptive},
                   {"residual_tol", cfg.residual_tol},
                   {"order_escalation_tol", cfg.order_escalation_tol},
                   {"warm_start", warm_path}};
  ordered_json history = ordered_json::array();
  for (const auto& t : sol.per_order_history)
    history.push_back({{"order", t.order},
                       {"iterations", t.iterations},
                       {"residual_norm", t.residual_norm},
                       {"l1_step", t.l1_step}});
  doc["outcome"] = {{"status", "converged"},
                    {"order_used", sol.order_used},
                    {"iterations", sol.iterations},
                    {"residual_norm", sol.residual_norm},
                    {"boundary_mass", sol.boundary_mass},
                    {"warning", sol.warning ? ordered_json(*sol.warning) : ordered_json()},
                    {"per_order_history", history}};
  write_manifest(dir, std::move(doc), timer.seconds());
  return 0;
}

int cmd_oracle(const std::string& network_path, const std::string& space_spec, bool cme, bool ssa,
               std::uint64_t seed, double total_time, double burn_in, int trajectories,
               const std::string& out_dir) {
  if (cme == ssa)
    throw zics::Error(zics::Errc::malformed_input, "pick exactly one of --cme and --ssa");
  Timer timer;
  LoadedNetwork loaded = load_network(network_path);
  const auto& net = loaded.net;
  zics::StateSpace space = parse_space(space_spec, net.species);
  fs::path dir(out_dir);

  ordered_json doc = manifest_base("oracle", loaded);
  doc["space"] = space_json(space, net.species);

  if (cme) {
    zics::DistributionTable dist = zics::cme_stationary(net, space);
    write_marginals(dir, dist, net.species);
    doc["config"] = {{"mode", "cme"}};
    doc["outcome"] = {{"status", "solved"}, {"states", space.size()}};
    std::cout << "cme stationary distribution over " << space.size() << " states\n";
  } else {
    zics::SsaConfig cfg;
    cfg.seed = seed;
    cfg.total_time = total_time;
    cfg.burn_in_time = burn_in;
    cfg.n_trajectories = trajectories;
    zics::SsaResult r = zics::ssa_sample(net, space, cfg);
    write_marginals(dir, r.occupancy, net.species);
    std::string moments_csv = "moment_label,value,stderr\n";
    for (std::size_t i = 0; i < r.moment_indices.size(); ++i)
      moments_csv += zics::moment_label(r.moment_indices[i], net.species) + "," +
                     fmt(r.moment_means[static_cast<Eigen::Index>(i)]) + "," +
                     fmt(r.moment_stderr[static_cast<Eigen::Index>(i)]) + "\n";
    write_file(dir / "moments.csv", moments_csv);
    doc["config"] = {{"mode", "ssa"},
                     {"seed", cfg.seed},
                     {"total_time", cfg.total_time},
                     {"burn_in_time", cfg.burn_in_time},
                     {"trajectories", cfg.n_trajectories}};
    doc["outcome"] = {{"status", "sampled"},
                      {"events", r.events},
                      {"outside_mass", r.outside_mass},
                      {"frozen_trajectories", r.frozen_trajectories}};
    std::cout << "ssa: " << r.events << " events, outside mass " << fmt(r.outside_mass)
              << ", frozen trajectories " << r.frozen_trajectories << "\n";
  }
  write_manifest(dir, std::move(doc), timer.seconds());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stationary distributions of reaction networks via maximum-entropy "
               "moment closure"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  int threads = 0;  // accepted for interface compatibility; engine is sequential
  app.add_option("--threads", threads, "worker cap (the engine is sequential)")
      ->envname("ZICS_THREADS");

  std::string network_path, space_spec, out_path, format = "text", warm_path, overlay_path;
  std::vector<std::string> totals, dependent;
  int order = 1, max_order = 8, trajectories = 8;
  bool no_adaptive = false, plot = false, cme = false, ssa = false;
  double tol = 1e-9, total_time = 10000.0, burn_in = 100.0;
  std::uint64_t seed = 1;

  auto* validate = app.add_subcommand("validate", "parse a network and check propensities");
  validate->add_option("--network", network_path, "network file (JSON or TSV)")->required();
  validate->add_option("--space", space_spec, "state space, NAME=min:max,... or min:max,...")
      ->required();

  auto* transform = app.add_subcommand("transform", "eliminate conservation laws");
  transform->add_option("--network", network_path, "network file (JSON or TSV)")->required();
  transform->add_option("--totals", totals, "conserved totals NAME=VALUE, one per detected law");
  transform->add_option("--dependent", dependent, "species to eliminate");
  transform->add_option("--out", out_path, "output network file")->required();

  auto* moments = app.add_subcommand("moments", "export the moment equations");
  moments->add_option("--network", network_path, "network file (JSON or TSV)")->required();
  moments->add_option("--order", order, "closure order (>= 1)")
      ->required()
      ->check(CLI::PositiveNumber);
  moments->add_option("--format", format, "text, csv, or json");
  moments->add_option("--out", out_path, "output file (stdout if omitted)");

  auto* solve = app.add_subcommand("solve", "solve for the stationary distribution");
  solve->add_option("--network", network_path, "network file (JSON or TSV)")->required();
  solve->add_option("--space", space_spec, "state space, NAME=min:max,... or min:max,...")
      ->required();
  solve->add_option("--max-order", max_order, "maximum closure order")->check(CLI::PositiveNumber);
  solve->add_flag("--no-adaptive", no_adaptive, "always escalate to --max-order");
  solve->add_option("--tol", tol, "residual tolerance");
  solve->add_option("--warm-start", warm_path, "lambdas.json from a previous run");
  solve->add_option("--out", out_path, "output directory")->required();
  solve->add_flag("--plot", plot, "write SVG marginal plots");
  solve->add_option("--overlay", overlay_path, "oracle marginal CSV to overlay on the plots");

  auto* oracle = app.add_subcommand("oracle", "brute-force CME or SSA reference");
  oracle->add_option("--network", network_path, "network file (JSON or TSV)")->required();
  oracle->add_option("--space", space_spec, "state space, NAME=min:max,... or min:max,...")
      ->required();
  oracle->add_flag("--cme", cme, "direct stationary solve of the truncated CME");
  oracle->add_flag("--ssa", ssa, "Gillespie direct-method time average");
  oracle->add_option("--seed", seed, "SSA seed");
  oracle->add_option("--time", total_time, "SSA total time per trajectory");
  oracle->add_option("--burn-in", burn_in, "SSA burn-in time");
  oracle->add_option("--trajectories", trajectories, "SSA trajectory count");
  oracle->add_option("--out", out_path, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (validate->parsed()) return cmd_validate(network_path, space_spec);
    if (transform->parsed()) return cmd_transform(network_path, totals, dependent, out_path);
    if (moments->parsed()) return cmd_moments(network_path, order, format, out_path);
    if (solve->parsed())
      return cmd_solve(network_path, space_spec, max_order, no_adaptive, tol, warm_path, out_path,
                       plot, overlay_path);
    if (oracle->parsed())
      return cmd_oracle(network_path, space_spec, cme, ssa, seed, total_time, burn_in,
                        trajectories, out_path);
  } catch (const zics::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
