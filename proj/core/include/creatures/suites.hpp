#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace creatures {

// One verified clause of a suite. Reported-only clauses document regimes a
// desk ladder cannot guarantee; they never affect the verdict.
struct SuiteCheck {
  std::string clause;
  bool asserted = true;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string name;
  bool passed = false;          // conjunction of the asserted checks
  std::uint64_t instances = 0;  // cases the sweep covered
  std::vector<SuiteCheck> checks;
  std::string certificate;
};

// Registered verification suites, in canonical order:
//   norm-axioms            norm of the full space, monotonicity, zero threshold
//   bigness-halving        partition selection, halving round trip and floor
//   restriction-extension  averaged restriction and its exact inverse
//   balanced-product       product density lower bound on balanced pairs
//   projection             monotonicity, cylinder surjectivity, complete lift
//   amalgamation           projection domination and bounded norm drop
//   disjoint-step          one splitting step, exhaustively
//   disjoint-level         the per-history level loop on seeded instances
//   counting-obstruction   coincidence fractions and the forced zero norm
//   creature-disjoint      two-pass creature disjointification
//   branch-amalgamation    scheduled separation across a whole amalgamation
//   cone-criterion         transported difference forces disjoint cones
//   pipeline               fuse, extract, code, bounded intersection, replay
std::vector<std::string> suite_names();

// Runs one suite. The seed pins every randomized choice; the cap bounds
// enumerations (it is the enum cap of every ladder the suite builds).
// Unknown names throw std::invalid_argument. Same (seed, cap) gives a
// byte-identical certificate.
SuiteResult run_suite(const std::string& name, std::uint64_t seed, std::uint64_t cap);

}  // namespace creatures
