//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <random>
#include <set>

#include "chemlm/canonical.h"
#include "chemlm/smiles.h"
#include "testkit.h"

using namespace chemlm;

TEST_SUITE("canonical") {

TEST_CASE("refinement separates inequivalent atoms only") {
  const std::vector<int> benzene = refine_ranks(parse_smiles("c1ccccc1"));
  CHECK(std::set<int>(benzene.begin(), benzene.end()).size() == 1);

  const std::vector<int> ethanol = canonical_ranks(parse_smiles("CCO"));
  CHECK(std::set<int>(ethanol.begin(), ethanol.end()).size() == 3);

  const std::vector<int> full = canonical_ranks(parse_smiles("c1ccccc1"));
  CHECK(std::set<int>(full.begin(), full.end()).size() == 6);
}

TEST_CASE("spellings of one molecule agree") {
  CHECK(canonicalize("OCC") == canonicalize("CCO"));
  CHECK(canonicalize("c1ccccc1") == canonicalize("C1=CC=CC=C1"));
  CHECK(canonicalize("c1ccncc1") == canonicalize("C1=CN=CC=C1"));
  CHECK(canonicalize("Cc1ccccc1") == canonicalize("c1ccc(C)cc1"));
  CHECK(canonicalize("c1cc[nH]c1") == canonicalize("C1=CNC=C1"));
  CHECK(canonicalize("CCO") != canonicalize("COC"));
  CHECK(canonicalize("[13CH4]") != canonicalize("C"));
  CHECK_THROWS_AS(canonicalize("C1CC"), ParseError);
}

TEST_CASE("idempotent and permutation invariant") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const MolGraph g = testkit::random_molecule(rng);
    const std::string c = canonicalize(g);
    INFO(c);
    CHECK(canonicalize(std::string_view(c)) == c);
    CHECK(canonicalize(testkit::shuffled(g, rng)) == c);
  }
}

TEST_CASE("real molecules from the corpus") {
  std::mt19937_64 rng(22);
  for (const std::string &s: testkit::read_smiles_column("corpus500.smi")) {
    const MolGraph g = parse_smiles(s);
    const std::string c = canonicalize(g);
    INFO(s);
    CHECK(canonicalize(testkit::shuffled(g, rng)) == c);
    CHECK(canonicalize(serialize(g, static_cast<int>(rng() % g.num_atoms()),
                                 TraversalOrder::kRandom, rng()))
          == c);
  }
}

}  // TEST_SUITE
