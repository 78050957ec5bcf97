#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "quantdim/io.hpp"
#include "quantdim/spec_json.hpp"

using namespace quantdim;

TEST(SpecJson, RoundTripsEveryVariant) {
  const std::vector<std::string> texts{
      R"({"d":3,"variant":"ifs","offsets":[[0,0,0],[0.5,0,0]],"probabilities":[0.25,0.75]})",
      R"({"d":1,"variant":"density","name":"ex29"})",
      R"({"d":1,"variant":"density","pieces":[{"lo":0,"hi":1,"coeffs":[0,2]}],"s_h":"inf","dim_infty":1})",
      R"({"d":2,"variant":"atomic","points":[[0.25,0.5],[0.75,1]],"weights":[0.5,0.5]})"};
  for (const auto& t : texts) {
    const auto s = spec_from_string(t);
    const auto j = spec_to_json(s);
    EXPECT_EQ(spec_to_json(spec_from_json(j)), j) << t;
    EXPECT_EQ(j, json::parse(t)) << t;
  }
}

TEST(SpecJson, InfiniteCriticalExponentParses) {
  const auto s = spec_from_string(R"({"d":1,"variant":"density","name":"uniform","s_h":"inf"})");
  EXPECT_TRUE(std::isinf(*std::get<DensitySpec>(s.variant).s_h));
}

TEST(SpecJson, MalformedInputIsASpecError) {
  EXPECT_THROW(spec_from_string("{"), SpecError);
  EXPECT_THROW(spec_from_string("[]"), SpecError);
  EXPECT_THROW(spec_from_string(R"({"variant":"ifs"})"), SpecError);
  EXPECT_THROW(spec_from_string(R"({"d":5,"variant":"atomic","points":[],"weights":[]})"), SpecError);
  EXPECT_THROW(spec_from_string(R"({"d":1,"variant":"fractal"})"), SpecError);
  EXPECT_THROW(spec_from_string(R"({"d":1,"variant":"density"})"), SpecError);
  EXPECT_THROW(spec_from_string(R"({"d":1,"variant":"atomic","points":"x","weights":[1]})"), SpecError);
  EXPECT_THROW(spec_from_file("/nonexistent/spec.json"), SpecError);
}

TEST(SpecJson, ErrorsCarryConfigExitCode) {
  try {
    spec_from_string("{");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ExitCode::Config);
  }
}

TEST(Io, NumbersRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23}) EXPECT_EQ(std::stod(io::num(x)), x);
  EXPECT_EQ(io::num(INFINITY), "inf");
  EXPECT_EQ(io::jnum(-INFINITY), json("-inf"));
}

TEST(Io, CsvFilesStartWithVersionAndProtocol) {
  const auto banner = io::csv_banner();
  EXPECT_NE(banner.find(kArtifactVersion), std::string::npos);
  EXPECT_NE(banner.find(protocol_name(DepthProtocol::MaxLastIntercept_v1)), std::string::npos);
  ErrorCurve c;
  c.points = {{1, 0.5}, {2, 0.25}};
  const auto csv = io::error_curve_csv(c);
  EXPECT_EQ(csv.rfind(banner, 0), 0u);
  EXPECT_NE(csv.find("n,e,log_n,neg_log_e\n"), std::string::npos);
}

TEST(Io, CriticalExponentJsonHasBracketAndResidual) {
  CriticalExponent c;
  c.r = -0.5;
  c.q_r = 1.87;
  c.bracket = {1.3, 15.0};
  const auto j = io::critical_json(c);
  EXPECT_EQ(j["bracket"][1], 15.0);
  EXPECT_TRUE(j.contains("residual"));
  EXPECT_EQ(j["protocol"], std::string(protocol_name(DepthProtocol::MaxLastIntercept_v1)));
}
