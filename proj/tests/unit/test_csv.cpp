#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "mfac/csv.hpp"
#include "mfac/errors.hpp"
#include "oracles.hpp"

using namespace mfac;

TEST(Csv, FormatNumberRoundTrips) {
  oracle::Rng rng(60);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform(-1, 1) * std::pow(10.0, rng.integer(-300, 300));
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(0.5), "0.5");
}

TEST(Csv, WriterEmitsSchemaLine) {
  std::ostringstream os;
  CsvWriter w(os, "demo", {"a", "b"});
  w.row({1.0, 2.5});
  EXPECT_EQ(os.str(), std::string(kCsvSchemaPrefix) + " demo\na,b\n1,2.5\n");
  EXPECT_THROW(w.row({1.0}), ShapeError);
}

TEST(Csv, ReadBack) {
  std::ostringstream os;
  CsvWriter w(os, "demo", {"a", "b"});
  w.row({1.0, -std::numeric_limits<double>::infinity()});
  w.row({0.1, std::nan("")});
  std::istringstream in(os.str());
  const CsvTable t = read_csv(in);
  EXPECT_EQ(t.kind, "demo");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.values("a")[1], 0.1);
  EXPECT_TRUE(std::isinf(t.values("b")[0]));
  EXPECT_TRUE(std::isnan(t.values("b")[1]));
  EXPECT_THROW(t.column("c"), RangeError);
}

TEST(Csv, QuotedHeaderNames) {
  std::ostringstream os;
  CsvWriter w(os, "demo", {"Phi1[0,1]", "say \"hi\"", "plain"});
  w.row({1.0, 2.0, 3.0});
  EXPECT_NE(os.str().find("\"Phi1[0,1]\",\"say \"\"hi\"\"\",plain"), std::string::npos);
  std::istringstream in(os.str());
  const CsvTable t = read_csv(in);
  EXPECT_EQ(t.header, (std::vector<std::string>{"Phi1[0,1]", "say \"hi\"", "plain"}));
  EXPECT_EQ(t.values("Phi1[0,1]")[0], 1.0);
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream open_quote(std::string(kCsvSchemaPrefix) + " x\n\"a,b\n");
  EXPECT_THROW(read_csv(open_quote), ShapeError);
  std::istringstream no_schema("a,b\n1,2\n");
  EXPECT_THROW(read_csv(no_schema), ShapeError);
  std::istringstream ragged(std::string(kCsvSchemaPrefix) + " x\na,b\n1\n");
  EXPECT_THROW(read_csv(ragged), ShapeError);
  std::istringstream garbage(std::string(kCsvSchemaPrefix) + " x\na\nfoo\n");
  EXPECT_THROW(read_csv(garbage), ShapeError);
}
