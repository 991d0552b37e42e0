#include "zics/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace zics {

namespace {

/// Falling factorial of an integer argument, ff(v, m) = v (v-1) ... (v-m+1).
long long ff_int(long long v, int m) {
  long long r = 1;
  for (int t = 0; t < m; ++t) r *= v - t;
  return r;
}

long long binom(int a, int b) {
  if (b < 0 || b > a) return 0;
  long long r = 1;
  for (int t = 1; t <= b; ++t) r = r * (a - b + t) / t;
  return r;
}

/// Coefficients of ff(x, a) * ff(x, b) in the falling-factorial basis:
/// sum_k C(a,k) C(b,k) k! ff(x, a+b-k). Returned as degree -> coefficient.
std::vector<long long> product_expansion(int a, int b) {
  std::vector<long long> out(static_cast<std::size_t>(a + b + 1), 0);
  long long kfact = 1;
  for (int k = 0; k <= std::min(a, b); ++k) {
    if (k > 0) kfact *= k;
    out[static_cast<std::size_t>(a + b - k)] += binom(a, k) * binom(b, k) * kfact;
  }
  return out;
}

/// Coefficients of ff(x, s) * ff(x + shift, m): Vandermonde expansion of the
/// shifted factor, then products term by term.
std::vector<long long> shifted_product_expansion(int s, int m, int shift) {
  std::vector<long long> out(static_cast<std::size_t>(s + m + 1), 0);
  for (int k = 0; k <= m; ++k) {
    long long c = binom(m, k) * ff_int(shift, m - k);
    if (c == 0) continue;
    auto prod = product_expansion(s, k);
    for (std::size_t d = 0; d < prod.size(); ++d) out[d] += c * prod[d];
  }
  return out;
}

void enumerate_grade(int n, int total, std::vector<int>& prefix,
                     std::vector<MomentIndex>& out) {
  if (n == 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int v = total; v >= 0; --v) {
    prefix.push_back(v);
    enumerate_grade(n - 1, total - v, prefix, out);
    prefix.pop_back();
  }
}

bool graded_less(const MomentIndex& a, const MomentIndex& b) {
  int oa = index_order(a), ob = index_order(b);
  if (oa != ob) return oa < ob;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

std::string coeff_str(double c) {
  std::ostringstream os;
  os << c;
  return os.str();
}

}  // namespace

int index_order(const MomentIndex& idx) {
  int s = 0;
  for (int m : idx) s += m;
  return s;
}

std::string moment_label(const MomentIndex& idx, const std::vector<std::string>& species) {
  std::string s;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] == 0) continue;
    if (!s.empty()) s += " ";
    s += species[j];
    if (idx[j] > 1) s += "^" + std::to_string(idx[j]);
  }
  return s.empty() ? "1" : s;
}

MomentBasis build_basis(int n_species, int closure_order) {
  if (n_species < 1 || closure_order < 1)
    throw Error(Errc::malformed_input, "need n_species >= 1 and closure_order >= 1");
  MomentBasis basis;
  basis.n_species = n_species;
  basis.closure_order = closure_order;
  std::vector<int> prefix;
  for (int total = 1; total <= closure_order; ++total)
    enumerate_grade(n_species, total, prefix, basis.lower);
  return basis;
}

MomentEquations generate_equations(const ReactionNetwork& net, MomentBasis& basis) {
  const int n = net.species_count();
  if (basis.n_species != n)
    throw Error(Errc::dimension_mismatch, "basis dimension does not match species count");
  const int psi = basis.psi();
  const int order_cap = basis.closure_order;

  // per lower index: accumulated coefficient of each resulting index
  std::vector<std::map<MomentIndex, double>> rows(static_cast<std::size_t>(psi));

  for (int r = 0; r < net.reaction_count(); ++r) {
    Eigen::VectorXi nu = net.net_change(r);
    for (int i = 0; i < psi; ++i) {
      const MomentIndex& m = basis.lower[static_cast<std::size_t>(i)];
      // per-species expansions of g_r * f_m(X + nu) and g_r * f_m(X)
      std::vector<std::vector<long long>> shifted(static_cast<std::size_t>(n));
      std::vector<std::vector<long long>> plain(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) {
        int s = net.reactants(r, j);
        shifted[static_cast<std::size_t>(j)] =
            shifted_product_expansion(s, m[static_cast<std::size_t>(j)], nu[j]);
        plain[static_cast<std::size_t>(j)] =
            product_expansion(s, m[static_cast<std::size_t>(j)]);
      }
      // tensor products across species, subtracting the unshifted part
      auto expand = [&](const std::vector<std::vector<long long>>& factors, double sign) {
        MomentIndex idx(static_cast<std::size_t>(n), 0);
        std::function<void(int, long long)> rec = [&](int j, long long c) {
          if (c == 0) return;
          if (j == n) {
            rows[static_cast<std::size_t>(i)][idx] += sign * net.rates[r] * static_cast<double>(c);
            return;
          }
          const auto& f = factors[static_cast<std::size_t>(j)];
          for (std::size_t d = 0; d < f.size(); ++d) {
            if (f[d] == 0) continue;
            idx[static_cast<std::size_t>(j)] = static_cast<int>(d);
            rec(j + 1, c * f[d]);
          }
          idx[static_cast<std::size_t>(j)] = 0;
        };
        rec(0, 1);
      };
      expand(shifted, 1.0);
      expand(plain, -1.0);
    }
  }

  // collect the higher-order indices that actually received coefficients
  std::map<MomentIndex, bool> higher_set;
  for (const auto& row : rows)
    for (const auto& [idx, c] : row)
      if (index_order(idx) > order_cap && c != 0.0) higher_set[idx] = true;
  basis.higher.clear();
  for (const auto& [idx, _] : higher_set) basis.higher.push_back(idx);
  std::sort(basis.higher.begin(), basis.higher.end(), graded_less);

  std::map<MomentIndex, int> lower_col, higher_col;
  for (int i = 0; i < psi; ++i) lower_col[basis.lower[static_cast<std::size_t>(i)]] = i;
  for (int i = 0; i < basis.psi_prime(); ++i)
    higher_col[basis.higher[static_cast<std::size_t>(i)]] = i;

  MomentEquations eqs;
  eqs.A = Eigen::MatrixXd::Zero(psi, psi);
  eqs.A_prime = Eigen::MatrixXd::Zero(psi, basis.psi_prime());
  eqs.mu_c = Eigen::VectorXd::Zero(psi);
  for (int i = 0; i < psi; ++i) {
    for (const auto& [idx, c] : rows[static_cast<std::size_t>(i)]) {
      if (c == 0.0) continue;
      int ord = index_order(idx);
      if (ord == 0)
        eqs.mu_c[i] += c;
      else if (ord <= order_cap)
        eqs.A(i, lower_col.at(idx)) += c;
      else
        eqs.A_prime(i, higher_col.at(idx)) += c;
    }
  }
  return eqs;
}

std::string export_equations(const MomentEquations& eqs, const MomentBasis& basis,
                             const std::vector<std::string>& species, EquationFormat format) {
  std::vector<std::string> lower_labels, higher_labels;
  for (const auto& idx : basis.lower) lower_labels.push_back(moment_label(idx, species));
  for (const auto& idx : basis.higher) higher_labels.push_back(moment_label(idx, species));

  if (format == EquationFormat::json) {
    nlohmann::ordered_json doc;
    doc["labels_lower"] = lower_labels;
    doc["labels_higher"] = higher_labels;
    doc["A"] = nlohmann::json::array();
    doc["A_prime"] = nlohmann::json::array();
    for (int i = 0; i < eqs.A.rows(); ++i) {
      std::vector<double> row(eqs.A.row(i).begin(), eqs.A.row(i).end());
      doc["A"].push_back(row);
      if (eqs.A_prime.cols() > 0) {
        std::vector<double> rowp(eqs.A_prime.row(i).begin(), eqs.A_prime.row(i).end());
        doc["A_prime"].push_back(rowp);
      }
    }
    doc["mu_c"] = std::vector<double>(eqs.mu_c.begin(), eqs.mu_c.end());
    return doc.dump(2) + "\n";
  }

  if (format == EquationFormat::csv) {
    std::ostringstream os;
    os << "moment";
    for (const auto& l : lower_labels) os << "," << l;
    for (const auto& l : higher_labels) os << "," << l;
    os << ",const\n";
    for (int i = 0; i < eqs.A.rows(); ++i) {
      os << lower_labels[static_cast<std::size_t>(i)];
      for (int j = 0; j < eqs.A.cols(); ++j) os << "," << eqs.A(i, j);
      for (int j = 0; j < eqs.A_prime.cols(); ++j) os << "," << eqs.A_prime(i, j);
      os << "," << eqs.mu_c[i] << "\n";
    }
    return os.str();
  }

  // plain text ODEs, e.g. "d<X>/dt = 4 - 2*<X>"
  std::ostringstream os;
  for (int i = 0; i < eqs.A.rows(); ++i) {
    os << "d<" << lower_labels[static_cast<std::size_t>(i)] << ">/dt = ";
    bool first = true;
    auto term = [&](double c, const std::string& label) {
      if (c == 0.0) return;
      double mag = std::abs(c);
      if (first) {
        if (c < 0) os << "-";
        first = false;
      } else {
        os << (c < 0 ? " - " : " + ");
      }
      if (label.empty())
        os << coeff_str(mag);
      else if (mag == 1.0)
        os << "<" << label << ">";
      else
        os << coeff_str(mag) << "*<" << label << ">";
    };
    term(eqs.mu_c[i], "");
    for (int j = 0; j < eqs.A.cols(); ++j) term(eqs.A(i, j), lower_labels[static_cast<std::size_t>(j)]);
    for (int j = 0; j < eqs.A_prime.cols(); ++j)
      term(eqs.A_prime(i, j), higher_labels[static_cast<std::size_t>(j)]);
    if (first) os << "0";
    os << "\n";
  }
  return os.str();
}

}  // namespace zics
