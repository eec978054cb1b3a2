#include <gtest/gtest.h>

#include "oncoprompt/smiles_lint.hpp"

namespace oncoprompt {
namespace {

TEST(SmilesLintTest, AcceptsWellFormedStrings) {
  EXPECT_TRUE(validate_smiles_lite("COC1=CC=C(C=C1)CN2C=CC3=C2C=C(C=C3)C(=O)NO"));
  EXPECT_TRUE(validate_smiles_lite("N.N.Cl[Pt]Cl"));
  EXPECT_TRUE(validate_smiles_lite("C[C@@H](O)C(=O)O"));
  EXPECT_TRUE(validate_smiles_lite("F/C=C/F"));
  EXPECT_TRUE(validate_smiles_lite("C%10CCCCC%10"));
  // Bracket digits are isotopes and charges, not ring closures.
  EXPECT_TRUE(validate_smiles_lite("[13CH4]"));
  EXPECT_TRUE(validate_smiles_lite("[Fe+2]"));
}

TEST(SmilesLintTest, RejectsEmptyAndUnbalanced) {
  EXPECT_FALSE(validate_smiles_lite(""));
  EXPECT_FALSE(validate_smiles_lite("C1CC("));
  EXPECT_FALSE(validate_smiles_lite("CC)C("));
  EXPECT_FALSE(validate_smiles_lite("C[NH4"));
  EXPECT_FALSE(validate_smiles_lite("C]C"));
  EXPECT_FALSE(validate_smiles_lite("C[N[H]]"));
}

TEST(SmilesLintTest, RejectsOddRingDigitsAndForeignCharacters) {
  EXPECT_FALSE(validate_smiles_lite("C1CCC"));
  EXPECT_FALSE(validate_smiles_lite("C1CC2CC1"));
  EXPECT_FALSE(validate_smiles_lite("C%1CC"));
  EXPECT_FALSE(validate_smiles_lite("CC O"));
  EXPECT_FALSE(validate_smiles_lite("CC;O"));
  EXPECT_FALSE(validate_smiles_lite("CC\xC3\xA9"));
}

}  // namespace
}  // namespace oncoprompt
