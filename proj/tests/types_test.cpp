#include <gtest/gtest.h>

#include <sstream>

#include "oncoprompt/error.hpp"
#include "oncoprompt/text.hpp"
#include "oncoprompt/types.hpp"

namespace oncoprompt {
namespace {

TEST(FeatureSetTest, DrugIsMandatory) {
  EXPECT_THROW((FeatureSet{Feature::kCellLine}), ValidationError);
  EXPECT_THROW(FeatureSet::parse("cell_line,smiles"), ValidationError);
  EXPECT_NO_THROW((FeatureSet{Feature::kDrug}));
}

TEST(FeatureSetTest, ParseIsOrderInsensitive) {
  EXPECT_EQ(FeatureSet::parse("mutation,drug,smiles,cell_line"),
            FeatureSet::parse("drug+cell_line+smiles+mutation"));
  EXPECT_EQ(FeatureSet::parse("drug,cell_line,smiles").key(), "drug+cell_line+smiles");
  EXPECT_EQ(FeatureSet::parse("drug,cell_line,smiles").phrase(), "drug + cell line + smile");
  EXPECT_THROW(FeatureSet::parse("drug,colour"), ValidationError);
}

TEST(FeatureSetTest, AblationSetsMatchTheFourInputCombinations) {
  const auto sets = FeatureSet::ablation_sets();
  ASSERT_EQ(sets.size(), 4u);
  EXPECT_EQ(sets[0].phrase(), "drug + cell line");
  EXPECT_EQ(sets[1].phrase(), "drug + cell line + smile");
  EXPECT_EQ(sets[2].phrase(), "drug + cell line + mutation");
  EXPECT_EQ(sets[3].phrase(), "drug + cell line + smile + mutation");
}

TEST(TissueTest, ListingOrderAndAliases) {
  EXPECT_EQ(Tissue("coad/read").code(), "COREAD");
  EXPECT_LT(Tissue("LUAD"), Tissue("BRCA"));
  EXPECT_LT(Tissue("THCA"), Tissue("LGG"));
  EXPECT_LT(Tissue("LGG"), Tissue("AAA"));
  EXPECT_FALSE(Tissue("SKCM").is_known());
}

TEST(TextTest, ParseDoubleRejectsGarbageAndNonFinite) {
  EXPECT_EQ(text::parse_double(" -3.1 "), -3.1);
  EXPECT_EQ(text::parse_double("+2"), 2.0);
  EXPECT_FALSE(text::parse_double("abc"));
  EXPECT_FALSE(text::parse_double("1.5x"));
  EXPECT_FALSE(text::parse_double(""));
  EXPECT_FALSE(text::parse_double("inf"));
  EXPECT_FALSE(text::parse_double("nan"));
}

TEST(TextTest, CsvReaderHandlesQuotesAndEmbeddedNewlines) {
  std::istringstream in("a,\"b, c\",\"say \"\"hi\"\"\"\r\n\"x\ny\",z\n");
  std::vector<std::string> row;
  ASSERT_TRUE(text::read_csv_row(in, row));
  EXPECT_EQ(row, (std::vector<std::string>{"a", "b, c", "say \"hi\""}));
  ASSERT_TRUE(text::read_csv_row(in, row));
  EXPECT_EQ(row, (std::vector<std::string>{"x\ny", "z"}));
  EXPECT_FALSE(text::read_csv_row(in, row));
}

TEST(TextTest, CsvEscapeRoundTrips) {
  for (std::string field : {"plain", "with,comma", "quote\"inside", "multi\nline", ""}) {
    std::istringstream in(text::csv_escape(field) + "\n");
    std::vector<std::string> row;
    ASSERT_TRUE(text::read_csv_row(in, row));
    ASSERT_EQ(row.size(), 1u);
    EXPECT_EQ(row[0], field);
  }
}

TEST(TextTest, Sha256KnownVector) {
  EXPECT_EQ(text::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace oncoprompt
