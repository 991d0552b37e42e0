#include "zics/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "zics/statespace.hpp"

namespace zics {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_input: return "MalformedInput";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::duplicate_species: return "DuplicateSpecies";
    case Errc::non_integer_stoichiometry: return "NonIntegerStoichiometry";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::unresolvable_dependency: return "UnresolvableDependency";
    case Errc::nonlinear_dependence: return "NonlinearDependence";
    case Errc::total_missing: return "TotalMissing";
    case Errc::non_finite_exponent: return "NonFiniteExponent";
    case Errc::singular_jacobian: return "SingularJacobian";
    case Errc::no_descent: return "NoDescent";
    case Errc::iter_limit: return "IterLimit";
    case Errc::invalid_network: return "InvalidNetwork";
    case Errc::reducible_chain: return "ReducibleChain";
    case Errc::cap_exceeded: return "CapExceeded";
    case Errc::negative_propensity: return "NegativePropensity";
  }
  return "Error";
}

namespace {

using json = nlohmann::ordered_json;

/// Exact fraction on long long, enough for the small integer matrices of
/// reaction networks. Conservation laws must be exact, so no floating point
/// enters the elimination.
struct Rat {
  long long num = 0;
  long long den = 1;

  Rat() = default;
  Rat(long long n) : num(n), den(1) {}
  Rat(long long n, long long d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(std::abs(num), den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  bool is_zero() const { return num == 0; }
  bool is_integer() const { return den == 1; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rat operator*(Rat a, Rat b) { return Rat(a.num * b.num, a.den * b.den); }
  friend Rat operator/(Rat a, Rat b) { return Rat(a.num * b.den, a.den * b.num); }
  friend Rat operator-(Rat a, Rat b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
  friend Rat operator-(Rat a) { return Rat(-a.num, a.den); }
};

std::string default_name(int i) {
  std::string s;
  i += 1;
  while (i > 0) {
    int r = (i - 1) % 26;
    s.insert(s.begin(), static_cast<char>('A' + r));
    i = (i - 1) / 26;
  }
  return s;
}

void check_species(const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw Error(Errc::malformed_input, "empty species name");
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j])
        throw Error(Errc::duplicate_species, "species '" + names[i] + "' appears twice");
  }
}

std::string format_rate(double r) {
  // shortest decimal representation that round-trips
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, r);
  return std::string(buf, p);
}

int species_index(const std::vector<std::string>& species, const std::string& name) {
  auto it = std::find(species.begin(), species.end(), name);
  if (it == species.end())
    throw Error(Errc::malformed_input, "unknown species '" + name + "'");
  return static_cast<int>(it - species.begin());
}

int stoich_from_json(const json& v, const std::string& where) {
  if (v.is_number_integer()) {
    auto n = v.get<long long>();
    if (n < 0) throw Error(Errc::malformed_input, "negative stoichiometry in " + where);
    return static_cast<int>(n);
  }
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (d != std::floor(d))
      throw Error(Errc::non_integer_stoichiometry, "non-integer stoichiometry in " + where);
    if (d < 0) throw Error(Errc::malformed_input, "negative stoichiometry in " + where);
    return static_cast<int>(d);
  }
  throw Error(Errc::malformed_input, "stoichiometry must be a number in " + where);
}

ReactionNetwork parse_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_input, e.what());
  }
  if (!doc.is_object() || !doc.contains("species"))
    throw Error(Errc::malformed_input, "expected an object with a 'species' array");

  std::vector<std::string> species;
  for (const auto& s : doc.at("species")) {
    if (!s.is_string()) throw Error(Errc::malformed_input, "species names must be strings");
    species.push_back(s.get<std::string>());
  }
  check_species(species);
  const int n = static_cast<int>(species.size());

  if (doc.contains("reactions")) {
    const auto& rx = doc.at("reactions");
    if (!rx.is_array() || rx.empty())
      throw Error(Errc::malformed_input, "'reactions' must be a nonempty array");
    const int r = static_cast<int>(rx.size());
    Eigen::MatrixXi reac = Eigen::MatrixXi::Zero(r, n);
    Eigen::MatrixXi prod = Eigen::MatrixXi::Zero(r, n);
    Eigen::VectorXd rates(r);
    for (int i = 0; i < r; ++i) {
      const auto& obj = rx[i];
      if (!obj.is_object() || !obj.contains("rate"))
        throw Error(Errc::malformed_input, "reaction " + std::to_string(i) + " needs a 'rate'");
      rates[i] = obj.at("rate").get<double>();
      for (const char* side : {"reactants", "products"}) {
        if (!obj.contains(side)) continue;
        Eigen::MatrixXi& m = side == std::string("reactants") ? reac : prod;
        for (const auto& [name, coef] : obj.at(side).items())
          m(i, species_index(species, name)) =
              stoich_from_json(coef, "reaction " + std::to_string(i));
      }
    }
    return ReactionNetwork::from_matrices(std::move(reac), std::move(prod), std::move(rates),
                                          std::move(species));
  }

  // matrix encoding, mirroring the stoichiometric-table input
  if (!doc.contains("reactant_stoich") || !doc.contains("product_stoich") || !doc.contains("rates"))
    throw Error(Errc::malformed_input,
                "expected 'reactions' or reactant_stoich/product_stoich/rates");
  auto read_matrix = [&](const char* key) {
    const auto& rows = doc.at(key);
    if (!rows.is_array() || rows.empty())
      throw Error(Errc::malformed_input, std::string(key) + " must be a nonempty array");
    Eigen::MatrixXi m(static_cast<int>(rows.size()), n);
    for (int i = 0; i < m.rows(); ++i) {
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
        throw Error(Errc::shape_mismatch, std::string(key) + " row " + std::to_string(i) +
                                              " does not have " + std::to_string(n) + " columns");
      for (int j = 0; j < n; ++j)
        m(i, j) = stoich_from_json(rows[i][j], std::string(key) + " row " + std::to_string(i));
    }
    return m;
  };
  Eigen::MatrixXi reac = read_matrix("reactant_stoich");
  Eigen::MatrixXi prod = read_matrix("product_stoich");
  if (reac.rows() != prod.rows())
    throw Error(Errc::shape_mismatch,
                "reactant matrix has " + std::to_string(reac.rows()) + " rows, product matrix " +
                    std::to_string(prod.rows()));
  const auto& rj = doc.at("rates");
  if (static_cast<int>(rj.size()) != reac.rows())
    throw Error(Errc::shape_mismatch, "rates length does not match reaction count");
  Eigen::VectorXd rates(reac.rows());
  for (int i = 0; i < rates.size(); ++i) rates[i] = rj[i].get<double>();
  return ReactionNetwork::from_matrices(std::move(reac), std::move(prod), std::move(rates),
                                        std::move(species));
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \r\n");
  auto e = s.find_last_not_of(" \r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

/// Parses one side of a TSV reaction: "0", "name", "coef*name", joined by '+'.
void parse_terms(const std::string& side, const std::vector<std::string>& species,
                 Eigen::MatrixXi& m, int row) {
  std::string s = trim(side);
  if (s == "0") return;
  std::size_t pos = 0;
  while (pos != std::string::npos) {
    auto plus = s.find('+', pos);
    std::string term = trim(plus == std::string::npos ? s.substr(pos) : s.substr(pos, plus - pos));
    pos = plus == std::string::npos ? std::string::npos : plus + 1;
    if (term.empty()) throw Error(Errc::malformed_input, "empty term in '" + side + "'");
    int coef = 1;
    auto star = term.find('*');
    std::string name = term;
    if (star != std::string::npos) {
      std::string c = trim(term.substr(0, star));
      std::size_t used = 0;
      try {
        double d = std::stod(c, &used);
        if (used != c.size() || d != std::floor(d) || d < 0)
          throw Error(Errc::non_integer_stoichiometry, "bad coefficient '" + c + "'");
        coef = static_cast<int>(d);
      } catch (const std::invalid_argument&) {
        throw Error(Errc::malformed_input, "bad coefficient '" + c + "'");
      }
      name = trim(term.substr(star + 1));
    }
    m(row, species_index(species, name)) += coef;
  }
}

ReactionNetwork parse_tsv(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(trim(line));

  std::size_t i = 0;
  auto skip_blank = [&] { while (i < lines.size() && lines[i].empty()) ++i; };
  skip_blank();
  if (i >= lines.size() || lines[i] != "species")
    throw Error(Errc::malformed_input, "expected 'species' block header");
  ++i;
  std::vector<std::string> species;
  while (i < lines.size() && !lines[i].empty()) species.push_back(lines[i++]);
  check_species(species);
  skip_blank();
  if (i >= lines.size() || lines[i] != "reactions")
    throw Error(Errc::malformed_input, "expected 'reactions' block header");
  ++i;

  std::vector<std::string> rows;
  while (i < lines.size() && !lines[i].empty()) rows.push_back(lines[i++]);
  if (rows.empty()) throw Error(Errc::malformed_input, "no reactions");

  const int r = static_cast<int>(rows.size());
  const int n = static_cast<int>(species.size());
  Eigen::MatrixXi reac = Eigen::MatrixXi::Zero(r, n);
  Eigen::MatrixXi prod = Eigen::MatrixXi::Zero(r, n);
  Eigen::VectorXd rates(r);
  for (int k = 0; k < r; ++k) {
    auto tab = rows[k].find('\t');
    if (tab == std::string::npos)
      throw Error(Errc::malformed_input, "reaction row lacks a tab before the rate: " + rows[k]);
    std::string eq = rows[k].substr(0, tab);
    try {
      rates[k] = std::stod(trim(rows[k].substr(tab + 1)));
    } catch (const std::exception&) {
      throw Error(Errc::malformed_input, "bad rate in row: " + rows[k]);
    }
    auto arrow = eq.find("->");
    if (arrow == std::string::npos)
      throw Error(Errc::malformed_input, "reaction row lacks '->': " + rows[k]);
    parse_terms(eq.substr(0, arrow), species, reac, k);
    parse_terms(eq.substr(arrow + 2), species, prod, k);
  }
  return ReactionNetwork::from_matrices(std::move(reac), std::move(prod), std::move(rates),
                                        std::move(species));
}

std::string side_string_tsv(const Eigen::MatrixXi& m, int row,
                            const std::vector<std::string>& species) {
  std::string s;
  for (int j = 0; j < m.cols(); ++j) {
    if (m(row, j) == 0) continue;
    if (!s.empty()) s += " + ";
    if (m(row, j) != 1) s += std::to_string(m(row, j)) + "*";
    s += species[j];
  }
  return s.empty() ? "0" : s;
}

}  // namespace

double ReactionNetwork::propensity(int reaction, const Eigen::VectorXi& x) const {
  double g = 1.0;
  for (int j = 0; j < species_count(); ++j)
    for (int t = 0; t < reactants(reaction, j); ++t) g *= static_cast<double>(x[j] - t);
  return rates[reaction] * g;
}

std::string ReactionNetwork::reaction_string(int reaction) const {
  auto side = [&](const Eigen::MatrixXi& m) {
    std::string s;
    for (int j = 0; j < species_count(); ++j) {
      if (m(reaction, j) == 0) continue;
      if (!s.empty()) s += " + ";
      if (m(reaction, j) != 1) s += std::to_string(m(reaction, j)) + " ";
      s += species[j];
    }
    return s.empty() ? std::string("0") : s;
  };
  return side(reactants) + " -> " + side(products) + " (k=" + format_rate(rates[reaction]) + ")";
}

ReactionNetwork ReactionNetwork::from_matrices(Eigen::MatrixXi reactants, Eigen::MatrixXi products,
                                               Eigen::VectorXd rates,
                                               std::vector<std::string> names) {
  if (reactants.rows() < 1 || reactants.cols() < 1)
    throw Error(Errc::malformed_input, "need at least one reaction and one species");
  if (reactants.rows() != products.rows() || reactants.cols() != products.cols())
    throw Error(Errc::shape_mismatch, "reactant and product matrices differ in shape");
  if (rates.size() != reactants.rows())
    throw Error(Errc::shape_mismatch, "rate count does not match reaction count");
  if (reactants.minCoeff() < 0 || products.minCoeff() < 0)
    throw Error(Errc::malformed_input, "stoichiometric coefficients must be nonnegative");
  for (int i = 0; i < rates.size(); ++i)
    if (!std::isfinite(rates[i]))
      throw Error(Errc::malformed_input, "rate " + std::to_string(i) + " is not finite");
  for (int i = 0; i < reactants.rows(); ++i)
    if (reactants.row(i).isZero() && products.row(i).isZero())
      throw Error(Errc::malformed_input, "reaction " + std::to_string(i) + " is empty");
  if (names.empty())
    for (int j = 0; j < reactants.cols(); ++j) names.push_back(default_name(j));
  if (static_cast<int>(names.size()) != reactants.cols())
    throw Error(Errc::shape_mismatch, "species name count does not match matrix columns");
  check_species(names);
  return ReactionNetwork{std::move(names), std::move(reactants), std::move(products),
                         std::move(rates)};
}

bool operator==(const ReactionNetwork& a, const ReactionNetwork& b) {
  return a.species == b.species && a.reactants == b.reactants && a.products == b.products &&
         a.rates == b.rates;
}

ReactionNetwork parse_network(const std::string& text, NetworkFormat format) {
  return format == NetworkFormat::json ? parse_json(text) : parse_tsv(text);
}

std::string save_network(const ReactionNetwork& net, NetworkFormat format) {
  if (format == NetworkFormat::tsv) {
    std::string out = "species\n";
    for (const auto& s : net.species) out += s + "\n";
    out += "\nreactions\n";
    for (int i = 0; i < net.reaction_count(); ++i)
      out += side_string_tsv(net.reactants, i, net.species) + " -> " +
             side_string_tsv(net.products, i, net.species) + "\t" + format_rate(net.rates[i]) +
             "\n";
    return out;
  }
  json doc;
  doc["species"] = net.species;
  doc["reactions"] = json::array();
  for (int i = 0; i < net.reaction_count(); ++i) {
    json rx;
    json reac = json::object(), prod = json::object();
    for (int j = 0; j < net.species_count(); ++j) {
      if (net.reactants(i, j) != 0) reac[net.species[j]] = net.reactants(i, j);
      if (net.products(i, j) != 0) prod[net.species[j]] = net.products(i, j);
    }
    rx["reactants"] = reac;
    rx["products"] = prod;
    rx["rate"] = net.rates[i];
    doc["reactions"].push_back(rx);
  }
  return doc.dump(2) + "\n";
}

ValidationReport validate_over(const ReactionNetwork& net, const StateSpace& space) {
  if (space.dim() != net.species_count())
    throw Error(Errc::dimension_mismatch, "state space dimension does not match species count");

  std::map<std::vector<int>, std::vector<int>> by_change;
  for (int r = 0; r < net.reaction_count(); ++r) {
    Eigen::VectorXi nu = net.net_change(r);
    by_change[std::vector<int>(nu.data(), nu.data() + nu.size())].push_back(r);
  }

  ValidationReport report;
  for (const auto& [nu, members] : by_change) {
    PropensityGroup g;
    g.net_change = Eigen::Map<const Eigen::VectorXi>(nu.data(), static_cast<int>(nu.size()));
    g.reactions = members;
    g.min_propensity = std::numeric_limits<double>::infinity();
    report.groups.push_back(std::move(g));
  }

  for_each_state(space, [&](const Eigen::VectorXi& x, std::size_t) {
    for (auto& g : report.groups) {
      double a = 0.0;
      for (int r : g.reactions) a += net.propensity(r, x);
      if (a < g.min_propensity) {
        g.min_propensity = a;
        g.argmin_state = x;
      }
    }
  });

  for (const auto& g : report.groups)
    if (g.min_propensity < -1e-9) report.valid = false;
  return report;
}

std::vector<ConservationLaw> conservation_laws(const ReactionNetwork& net) {
  const int r = net.reaction_count(), n = net.species_count();
  Eigen::MatrixXi netmat = net.products - net.reactants;

  // rational RREF of the R x N net matrix; kernel vectors come from the
  // free columns
  std::vector<std::vector<Rat>> m(r, std::vector<Rat>(n));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = Rat(netmat(i, j));

  std::vector<int> pivot_col;
  int row = 0;
  for (int col = 0; col < n && row < r; ++col) {
    int p = -1;
    for (int i = row; i < r; ++i)
      if (!m[i][col].is_zero()) { p = i; break; }
    if (p < 0) continue;
    std::swap(m[row], m[p]);
    Rat inv = Rat(1) / m[row][col];
    for (int j = col; j < n; ++j) m[row][j] = m[row][j] * inv;
    for (int i = 0; i < r; ++i) {
      if (i == row || m[i][col].is_zero()) continue;
      Rat f = m[i][col];
      for (int j = col; j < n; ++j) m[i][j] = m[i][j] - f * m[row][j];
    }
    pivot_col.push_back(col);
    ++row;
  }

  std::vector<bool> is_pivot(n, false);
  for (int c : pivot_col) is_pivot[c] = true;

  std::vector<Eigen::VectorXi> basis;
  for (int free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rat> v(n);
    v[free] = Rat(1);
    for (std::size_t pr = 0; pr < pivot_col.size(); ++pr)
      v[pivot_col[pr]] = -m[static_cast<int>(pr)][free];
    long long lcm = 1;
    for (const auto& x : v) lcm = std::lcm(lcm, x.den);
    Eigen::VectorXi w(n);
    for (int j = 0; j < n; ++j) w[j] = static_cast<int>(v[j].num * (lcm / v[j].den));
    basis.push_back(w);
  }

  // reduce to primitive and fix signs
  auto primitive = [](Eigen::VectorXi& w) {
    long long g = 0;
    for (int j = 0; j < w.size(); ++j) g = std::gcd(g, static_cast<long long>(std::abs(w[j])));
    if (g > 1) w /= static_cast<int>(g);
    if (w.maxCoeff() <= 0) w = -w;
  };
  for (auto& w : basis) primitive(w);

  // combine basis vectors until every entry is nonnegative
  for (auto& w : basis) {
    for (int guard = 0; guard < 256 && w.minCoeff() < 0; ++guard) {
      int j = 0;
      w.minCoeff(&j);
      bool fixed = false;
      for (const auto& u : basis) {
        if (&u == &w || u[j] <= 0 || u.minCoeff() < 0) continue;
        int t = (-w[j] + u[j] - 1) / u[j];
        w += t * u;
        fixed = true;
        break;
      }
      if (!fixed) break;
    }
    primitive(w);
  }

  std::vector<ConservationLaw> laws;
  for (auto& w : basis) laws.push_back(ConservationLaw{std::move(w), std::nullopt});
  return laws;
}

ReactionNetwork to_open_form(const ReactionNetwork& net, const std::vector<ConservationLaw>& laws,
                             const std::vector<std::string>& dependent) {
  if (laws.size() != dependent.size())
    throw Error(Errc::dimension_mismatch, "need exactly one dependent species per law");
  if (laws.empty()) return net;

  const int n = net.species_count();
  const int k = static_cast<int>(laws.size());

  std::vector<int> dep;
  for (const auto& name : dependent) {
    auto it = std::find(net.species.begin(), net.species.end(), name);
    if (it == net.species.end())
      throw Error(Errc::unresolvable_dependency, "no species named '" + name + "'");
    dep.push_back(static_cast<int>(it - net.species.begin()));
  }
  std::vector<bool> is_dep(n, false);
  for (int d : dep) is_dep[d] = true;

  for (const auto& law : laws) {
    if (law.coefficients.size() != n)
      throw Error(Errc::dimension_mismatch, "law coefficient length does not match species count");
    if (!law.total) throw Error(Errc::total_missing, "conservation law lacks a total");
  }

  // Solve the law system for the dependent species: X_dep = c0 - C X_indep.
  // Rational Gauss-Jordan on [L_dep | -L_indep | totals]; the substitution
  // coefficients must come out integer.
  std::vector<std::vector<Rat>> a(k, std::vector<Rat>(k));
  std::vector<std::vector<Rat>> b(k, std::vector<Rat>(n));  // columns for indep species only
  std::vector<double> c0(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) a[i][j] = Rat(laws[i].coefficients[dep[j]]);
    for (int j = 0; j < n; ++j)
      if (!is_dep[j]) b[i][j] = Rat(-static_cast<long long>(laws[i].coefficients[j]));
    c0[i] = *laws[i].total;
  }
  for (int col = 0; col < k; ++col) {
    int p = -1;
    for (int i = col; i < k; ++i)
      if (!a[i][col].is_zero()) { p = i; break; }
    if (p < 0)
      throw Error(Errc::unresolvable_dependency,
                  "laws do not determine species '" + dependent[col] + "'");
    std::swap(a[col], a[p]);
    std::swap(b[col], b[p]);
    std::swap(c0[col], c0[p]);
    Rat inv = Rat(1) / a[col][col];
    for (int j = 0; j < k; ++j) a[col][j] = a[col][j] * inv;
    for (int j = 0; j < n; ++j) b[col][j] = b[col][j] * inv;
    c0[col] *= inv.to_double();
    for (int i = 0; i < k; ++i) {
      if (i == col || a[i][col].is_zero()) continue;
      Rat f = a[i][col];
      for (int j = 0; j < k; ++j) a[i][j] = a[i][j] - f * a[col][j];
      for (int j = 0; j < n; ++j) b[i][j] = b[i][j] - f * b[col][j];
      c0[i] -= f.to_double() * c0[col];
    }
  }
  // substitution for dep[i]: c0[i] + sum_j coef[i][j] * X_j (indep j only)
  std::vector<std::vector<long long>> coef(k, std::vector<long long>(n, 0));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) {
      if (b[i][j].is_zero()) continue;
      if (!b[i][j].is_integer())
        throw Error(Errc::unresolvable_dependency,
                    "substitution for '" + dependent[i] + "' is not integer");
      coef[i][j] = b[i][j].num;
    }

  struct Row {
    Eigen::VectorXi reac, prod;
    double rate;
  };
  std::vector<Row> out;

  // Splits a reaction on its first dependent reactant; recursion ends when
  // no dependent species remains on the left.
  std::function<void(Row)> emit = [&](Row row) {
    for (int di = 0; di < k; ++di) {
      int d = dep[di];
      if (row.reac[d] == 0) continue;
      if (row.reac[d] >= 2)
        throw Error(Errc::nonlinear_dependence, "dependent species '" + dependent[di] +
                                                    "' has reactant coefficient " +
                                                    std::to_string(row.reac[d]));
      row.reac[d] = 0;
      if (c0[di] != 0.0) {
        Row piece = row;
        piece.rate = row.rate * c0[di];
        emit(piece);
      }
      for (int j = 0; j < n; ++j) {
        if (coef[di][j] == 0) continue;
        Row piece = row;
        piece.rate = row.rate * static_cast<double>(coef[di][j]);
        piece.reac[j] += 1;
        piece.prod[j] += 1;
        emit(piece);
        // X ff(X,s) = ff(X,s+1) + s ff(X,s): when X_j is already a reactant
        // the both-sides insertion alone would encode ff(X,s+1), so a second
        // reaction carries the s ff(X,s) part.
        if (row.reac[j] > 0) {
          Row rest = row;
          rest.rate = row.rate * static_cast<double>(coef[di][j] * row.reac[j]);
          emit(rest);
        }
      }
      return;
    }
    for (int d : dep) row.prod[d] = 0;
    out.push_back(std::move(row));
  };

  for (int r = 0; r < net.reaction_count(); ++r)
    emit(Row{net.reactants.row(r).transpose(), net.products.row(r).transpose(), net.rates[r]});

  std::vector<int> keep;
  std::vector<std::string> names;
  for (int j = 0; j < n; ++j)
    if (!is_dep[j]) {
      keep.push_back(j);
      names.push_back(net.species[j]);
    }

  std::vector<Row> rows;
  for (auto& row : out) {
    bool empty = true;
    for (int j : keep)
      if (row.reac[j] != 0 || row.prod[j] != 0) empty = false;
    if (!empty && row.rate != 0.0) rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw Error(Errc::malformed_input, "transformation left no nonempty reactions");

  const int rn = static_cast<int>(rows.size()), nn = static_cast<int>(keep.size());
  Eigen::MatrixXi reac(rn, nn), prod(rn, nn);
  Eigen::VectorXd rates(rn);
  for (int i = 0; i < rn; ++i) {
    for (int j = 0; j < nn; ++j) {
      reac(i, j) = rows[i].reac[keep[j]];
      prod(i, j) = rows[i].prod[keep[j]];
    }
    rates[i] = rows[i].rate;
  }
  return ReactionNetwork::from_matrices(std::move(reac), std::move(prod), std::move(rates),
                                        std::move(names));
}

}  // namespace zics
