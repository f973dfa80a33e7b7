#include "lsindy/function_library.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lsindy/csv.hpp"
#include "lsindy/errors.hpp"

namespace lsindy {

void validate(const LibrarySpec& spec, int dim) {
  if (dim < 1) throw ConfigError("library: coordinate dimension must be >= 1");
  if (spec.poly_order < 0 || spec.poly_order > 5) throw ConfigError("library: poly_order must be in [0, 5]");
  if (spec.poly_order == 0 && spec.trig == TrigMode::kNone && !spec.include_constant) {
    throw ConfigError("library: at least one term class must be enabled");
  }
  if (!(spec.trig_frequency > 0.0)) throw ConfigError("library: trig_frequency must be > 0");
  if (!(spec.memory_budget_mb > 0.0)) throw ConfigError("library: memory budget must be > 0");
  std::set<int> seen;
  for (int c : spec.trig_coordinates) {
    if (c < 0 || c >= dim) throw ConfigError("library: trig coordinate index out of range");
    if (!seen.insert(c).second) throw ConfigError("library: duplicate trig coordinate");
  }
  std::set<int> seen_poly;
  for (int c : spec.poly_coordinates) {
    if (c < 0 || c >= dim) throw ConfigError("library: poly coordinate index out of range");
    if (!seen_poly.insert(c).second) throw ConfigError("library: duplicate poly coordinate");
  }
  if (!spec.coordinate_names.empty() && static_cast<int>(spec.coordinate_names.size()) != dim) {
    throw ConfigError("library: coordinate_names length must equal dimension");
  }
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double acc = 1.0;
  for (int i = 1; i <= k; ++i) acc = acc * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(acc);
}

namespace {

// Graded-lexicographic enumeration over the chosen coordinate subset;
// exponent vectors stay full-dimensional.
void enumerate_monomials(const std::vector<int>& coords, int degree, std::vector<int>& exps,
                         std::size_t pos, std::vector<Term>& out) {
  if (pos + 1 == coords.size()) {
    exps[static_cast<std::size_t>(coords[pos])] = degree;
    Term t;
    t.kind = Term::Kind::kMonomial;
    t.exponents = exps;
    out.push_back(std::move(t));
    exps[static_cast<std::size_t>(coords[pos])] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    exps[static_cast<std::size_t>(coords[pos])] = e;
    enumerate_monomials(coords, degree - e, exps, pos + 1, out);
  }
  exps[static_cast<std::size_t>(coords[pos])] = 0;
}

std::vector<int> subset_or_all(const std::vector<int>& subset, int dim) {
  if (!subset.empty()) {
    std::vector<int> c = subset;
    std::sort(c.begin(), c.end());
    return c;
  }
  std::vector<int> c(dim);
  for (int i = 0; i < dim; ++i) c[i] = i;
  return c;
}

}  // namespace

std::vector<Term> enumerate_terms(int dim, const LibrarySpec& spec) {
  validate(spec, dim);
  std::vector<Term> terms;
  if (spec.include_constant) terms.push_back(Term{Term::Kind::kConstant, {}, -1, -1});

  const std::vector<int> pc = subset_or_all(spec.poly_coordinates, dim);
  std::vector<int> exps(dim, 0);
  for (int degree = 1; degree <= spec.poly_order; ++degree) {
    enumerate_monomials(pc, degree, exps, 0, terms);
  }

  const std::vector<int> tc = subset_or_all(spec.trig_coordinates, dim);
  if (spec.trig == TrigMode::kPerCoordinate) {
    for (int c : tc) terms.push_back(Term{Term::Kind::kSin, {}, c, -1});
    for (int c : tc) terms.push_back(Term{Term::Kind::kCos, {}, c, -1});
  } else if (spec.trig == TrigMode::kPairwiseDifference) {
    for (std::size_t a = 0; a < tc.size(); ++a)
      for (std::size_t b = a + 1; b < tc.size(); ++b)
        terms.push_back(Term{Term::Kind::kSinDiff, {}, tc[a], tc[b]});
    for (std::size_t a = 0; a < tc.size(); ++a)
      for (std::size_t b = a + 1; b < tc.size(); ++b)
        terms.push_back(Term{Term::Kind::kCosDiff, {}, tc[a], tc[b]});
  }
  return terms;
}

namespace {

std::string coord_name(int i, int dim, const LibrarySpec& spec) {
  if (!spec.coordinate_names.empty()) return spec.coordinate_names[i];
  (void)dim;
  return "x" + std::to_string(i + 1);
}

std::string trig_arg(const Term& t, const LibrarySpec& spec, int dim) {
  std::string inner;
  if (t.kind == Term::Kind::kSin || t.kind == Term::Kind::kCos) {
    inner = coord_name(t.i, dim, spec);
  } else {
    inner = coord_name(t.i, dim, spec) + "-" + coord_name(t.j, dim, spec);
  }
  if (spec.trig_frequency != 1.0) {
    return csv::format_double(spec.trig_frequency) + "*(" + inner + ")";
  }
  return inner;
}

}  // namespace

std::vector<std::string> term_descriptors(int dim, const LibrarySpec& spec,
                                          const std::vector<Term>& terms) {
  std::vector<std::string> out;
  out.reserve(terms.size());
  for (const Term& t : terms) {
    switch (t.kind) {
      case Term::Kind::kConstant:
        out.push_back("1");
        break;
      case Term::Kind::kMonomial: {
        std::string s;
        for (int i = 0; i < dim; ++i) {
          if (t.exponents[i] == 0) continue;
          if (!s.empty()) s += "*";
          s += coord_name(i, dim, spec);
          if (t.exponents[i] > 1) s += "^" + std::to_string(t.exponents[i]);
        }
        out.push_back(std::move(s));
        break;
      }
      case Term::Kind::kSin:
      case Term::Kind::kSinDiff:
        out.push_back("sin(" + trig_arg(t, spec, dim) + ")");
        break;
      case Term::Kind::kCos:
      case Term::Kind::kCosDiff:
        out.push_back("cos(" + trig_arg(t, spec, dim) + ")");
        break;
    }
  }
  return out;
}

double evaluate_term(const Term& term, const Eigen::VectorXd& state, double trig_frequency) {
  switch (term.kind) {
    case Term::Kind::kConstant:
      return 1.0;
    case Term::Kind::kMonomial: {
      double v = 1.0;
      for (std::size_t i = 0; i < term.exponents.size(); ++i) {
        for (int e = 0; e < term.exponents[i]; ++e) v *= state[static_cast<Eigen::Index>(i)];
      }
      return v;
    }
    case Term::Kind::kSin:
      return std::sin(trig_frequency * state[term.i]);
    case Term::Kind::kCos:
      return std::cos(trig_frequency * state[term.i]);
    case Term::Kind::kSinDiff:
      return std::sin(trig_frequency * (state[term.i] - state[term.j]));
    case Term::Kind::kCosDiff:
      return std::cos(trig_frequency * (state[term.i] - state[term.j]));
  }
  return 0.0;
}

int find_constant(const std::vector<Term>& terms) {
  for (std::size_t c = 0; c < terms.size(); ++c)
    if (terms[c].kind == Term::Kind::kConstant) return static_cast<int>(c);
  return -1;
}

int find_linear(const std::vector<Term>& terms, int coord) {
  for (std::size_t c = 0; c < terms.size(); ++c) {
    const Term& t = terms[c];
    if (t.kind != Term::Kind::kMonomial) continue;
    bool match = true;
    for (std::size_t i = 0; i < t.exponents.size(); ++i) {
      const int want = (static_cast<int>(i) == coord) ? 1 : 0;
      if (t.exponents[i] != want) {
        match = false;
        break;
      }
    }
    if (match) return static_cast<int>(c);
  }
  return -1;
}

int find_sin_diff(const std::vector<Term>& terms, int a, int b) {
  const int lo = std::min(a, b), hi = std::max(a, b);
  for (std::size_t c = 0; c < terms.size(); ++c) {
    const Term& t = terms[c];
    if (t.kind == Term::Kind::kSinDiff && t.i == lo && t.j == hi) return static_cast<int>(c);
  }
  return -1;
}

std::string trig_mode_to_string(TrigMode mode) {
  switch (mode) {
    case TrigMode::kNone:
      return "none";
    case TrigMode::kPerCoordinate:
      return "per_coordinate";
    case TrigMode::kPairwiseDifference:
      return "pairwise_difference";
  }
  return "none";
}

TrigMode trig_mode_from_string(const std::string& s) {
  if (s == "none") return TrigMode::kNone;
  if (s == "per_coordinate") return TrigMode::kPerCoordinate;
  if (s == "pairwise_difference") return TrigMode::kPairwiseDifference;
  throw ConfigError("unknown trig mode '" + s + "'");
}

int CandidateLibrary::find_constant() const { return lsindy::find_constant(terms); }
int CandidateLibrary::find_linear(int coord) const { return lsindy::find_linear(terms, coord); }
int CandidateLibrary::find_sin_diff(int a, int b) const { return lsindy::find_sin_diff(terms, a, b); }

CandidateLibrary build(const Eigen::MatrixXd& data, const LibrarySpec& spec) {
  const int dim = static_cast<int>(data.rows());
  validate(spec, dim);
  if (!data.allFinite()) throw NumericError("library: data contains nonfinite entries");

  CandidateLibrary lib;
  lib.spec = spec;
  lib.dim = dim;
  lib.terms = enumerate_terms(dim, spec);
  lib.descriptors = term_descriptors(dim, spec, lib.terms);

  {
    std::set<std::string> unique(lib.descriptors.begin(), lib.descriptors.end());
    if (unique.size() != lib.descriptors.size()) throw NumericError("library: duplicate descriptors");
  }

  const Eigen::Index m = data.cols();
  const Eigen::Index p = static_cast<Eigen::Index>(lib.terms.size());
  const double size_mb = static_cast<double>(m) * static_cast<double>(p) * sizeof(double) / (1024.0 * 1024.0);
  if (size_mb > spec.memory_budget_mb) {
    throw ConfigError("library: evaluated matrix would need " + std::to_string(size_mb) +
                      " MB, over the budget of " + std::to_string(spec.memory_budget_mb) + " MB (" +
                      std::to_string(m) + " x " + std::to_string(p) + ")");
  }

  lib.Theta.resize(m, p);
  const double freq = spec.trig_frequency;

#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < p; ++c) {
    const Term& t = lib.terms[static_cast<std::size_t>(c)];
    switch (t.kind) {
      case Term::Kind::kConstant:
        lib.Theta.col(c).setOnes();
        break;
      case Term::Kind::kMonomial: {
        Eigen::ArrayXd col = Eigen::ArrayXd::Ones(m);
        for (int i = 0; i < dim; ++i) {
          for (int e = 0; e < t.exponents[static_cast<std::size_t>(i)]; ++e) {
            col *= data.row(i).transpose().array();
          }
        }
        lib.Theta.col(c) = col.matrix();
        break;
      }
      case Term::Kind::kSin:
        lib.Theta.col(c) = (freq * data.row(t.i).transpose().array()).sin().matrix();
        break;
      case Term::Kind::kCos:
        lib.Theta.col(c) = (freq * data.row(t.i).transpose().array()).cos().matrix();
        break;
      case Term::Kind::kSinDiff:
        lib.Theta.col(c) =
            (freq * (data.row(t.i) - data.row(t.j)).transpose().array()).sin().matrix();
        break;
      case Term::Kind::kCosDiff:
        lib.Theta.col(c) =
            (freq * (data.row(t.i) - data.row(t.j)).transpose().array()).cos().matrix();
        break;
    }
  }

  lib.column_norms = lib.Theta.colwise().norm();
  return lib;
}

}  // namespace lsindy
