#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace lsindy {

enum class TrigMode { kNone, kPerCoordinate, kPairwiseDifference };

// Which candidate terms to build. Columns are ordered deterministically:
// constant, degree-1 terms in coordinate order, graded-lexicographic
// monomials per degree, then sin blocks before cos blocks.
struct LibrarySpec {
  int poly_order = 1;  // 0..5
  bool include_constant = true;
  TrigMode trig = TrigMode::kNone;
  double trig_frequency = 1.0;
  // Coordinates trig terms are built from; empty means all. For full-state
  // swing data this is the delta block, since frequencies never appear
  // inside the coupling sines.
  std::vector<int> trig_coordinates;
  // Coordinates monomials are built from; empty means all. Full-state swing
  // identification restricts these to the omega block, where angles would
  // otherwise duplicate the small-angle part of the sine columns.
  std::vector<int> poly_coordinates;
  // Labels used in descriptors; empty means x1..xd.
  std::vector<std::string> coordinate_names;
  double memory_budget_mb = 2048.0;
};

void validate(const LibrarySpec& spec, int dim);

struct Term {
  enum class Kind { kConstant, kMonomial, kSin, kCos, kSinDiff, kCosDiff };
  Kind kind = Kind::kConstant;
  std::vector<int> exponents;  // monomials
  int i = -1, j = -1;          // trig coordinate indices
};

double evaluate_term(const Term& term, const Eigen::VectorXd& state, double trig_frequency);

// Column lookups over a term list; -1 when absent.
int find_constant(const std::vector<Term>& terms);
int find_linear(const std::vector<Term>& terms, int coord);
int find_sin_diff(const std::vector<Term>& terms, int a, int b);

std::string trig_mode_to_string(TrigMode mode);
TrigMode trig_mode_from_string(const std::string& s);

// Column order and descriptors for a given dimension; shared by the library
// builder and by model import so both enumerate identically.
std::vector<Term> enumerate_terms(int dim, const LibrarySpec& spec);
std::vector<std::string> term_descriptors(int dim, const LibrarySpec& spec,
                                          const std::vector<Term>& terms);

// Evaluated candidate matrix plus symbolic descriptors for every column.
struct CandidateLibrary {
  Eigen::MatrixXd Theta;  // m x p, row per snapshot
  std::vector<Term> terms;
  std::vector<std::string> descriptors;
  Eigen::VectorXd column_norms;
  LibrarySpec spec;
  int dim = 0;

  int find_constant() const;
  int find_linear(int coord) const;
  // sin(x_a - x_b) column for the unordered pair {a, b}; -1 if absent.
  int find_sin_diff(int a, int b) const;
};

// data is d x m (coordinate rows, snapshot columns). Columns of Theta are
// evaluated in parallel; refuses with the computed size when the evaluated
// matrix would exceed the spec's memory budget.
CandidateLibrary build(const Eigen::MatrixXd& data, const LibrarySpec& spec);

// C(n, k) in double precision (exact for the sizes used here).
double binomial(int n, int k);

}  // namespace lsindy
