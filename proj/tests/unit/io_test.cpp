#include <gtest/gtest.h>

#include <random>

#include "spintree/io.hpp"
#include "support/oracles.hpp"

using namespace spintree;

TEST(NetworkJson, RoundTripsBuilders) {
  for (const NetworkSpec& net : {build_binary_tree(3, 0.7, 1.1), build_modified_bt2(1.0, 6.5),
                                 concatenate_trees(sixteen_output_layout(), 1.0, 0.0)}) {
    const NetworkSpec back = network_from_json(network_to_json(net));
    EXPECT_EQ(back.nodes(), net.nodes());
    EXPECT_EQ(back.fields(), net.fields());
    ASSERT_EQ(back.edges().size(), net.edges().size());
    for (std::size_t k = 0; k < net.edges().size(); ++k) {
      EXPECT_EQ(back.edges()[k].a, net.edges()[k].a);
      EXPECT_EQ(back.edges()[k].b, net.edges()[k].b);
      EXPECT_EQ(back.edges()[k].j, net.edges()[k].j);
    }
  }
}

TEST(NetworkJson, TextRoundTripIsBitExact) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    const NetworkSpec net = oracle::random_network(rng, 2 + static_cast<std::size_t>(trial % 9));
    const std::string text = dump(network_to_json(net));
    const NetworkSpec back = network_from_json(Json::parse(text));
    EXPECT_EQ(dump(network_to_json(back)), text);
    EXPECT_EQ(back.fields(), net.fields());
  }
}

TEST(NetworkJson, RejectsMalformedDocuments) {
  EXPECT_THROW(network_from_json(Json::parse(R"({"nodes":[]})")), InvalidArgument);
  EXPECT_THROW(network_from_json(Json::parse(R"({"nodes":[{"id":"a"}],"edges":[]})")), InvalidArgument);
  EXPECT_THROW(network_from_json(Json::parse(R"({"nodes":[{"id":"a","omega":"x"}],"edges":[]})")),
               InvalidArgument);
  EXPECT_THROW(network_from_json(Json::parse(R"({"nodes":[{"id":"a","omega":0}],"edges":[{"a":"a","b":"b","j":1}]})")),
               InvalidArgument);
}

TEST(StateJson, RoundTripAndOmittedLabels) {
  std::mt19937_64 rng(71);
  const NetworkSpec net = build_modified_bt2(1.0, 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    const ExcitationState s = oracle::random_state(rng, net.size());
    const ExcitationState back = state_from_json(net, Json::parse(dump(state_to_json(net, s))));
    EXPECT_EQ(max_deviation(back, s), 0.0);
  }
  const Json sparse = Json::parse(R"({"amps":{"(2,3)/aux":[0,1]}})");
  const ExcitationState s = state_from_json(net, sparse);
  EXPECT_EQ(s.vacuum(), Complex(0.0, 0.0));
  EXPECT_EQ(s.amp(net.at("(2,3)/aux")), Complex(0.0, 1.0));
  EXPECT_EQ(s.norm(), 1.0);
  EXPECT_EQ(state_to_json(net, s)["amps"].size(), 1U);
  EXPECT_THROW(state_from_json(net, Json::parse(R"({"amps":{"ghost":[1,0]}})")), InvalidArgument);
  EXPECT_THROW(state_from_json(net, Json::parse(R"j({"amps":{"(0,0)":[1]}})j")), InvalidArgument);
  EXPECT_THROW(state_to_json(net, ExcitationState::zero(2)), InvalidArgument);
}

TEST(ProtocolJson, RoundTrip) {
  const ProtocolSetup p = bt2_protocol(2, 8, 1.0);
  const Json doc = Json::parse(dump(protocol_to_json(p)));
  const ProtocolSetup back = protocol_from_json(p.network, doc);
  ASSERT_EQ(back.steps.size(), 3U);
  EXPECT_EQ(std::get<Evolve>(back.steps[0]).duration, std::get<Evolve>(p.steps[0]).duration);
  EXPECT_EQ(std::get<PhaseFlip>(back.steps[1]).targets, std::get<PhaseFlip>(p.steps[1]).targets);
  EXPECT_EQ(run_protocol(back).fidelity, run_protocol(p).fidelity);
  EXPECT_THROW(steps_from_json(Json::parse(R"j([{"evolve":1,"flip":["(0,0)"]}])j")), InvalidArgument);
  EXPECT_THROW(steps_from_json(Json::parse(R"([{"wait":1}])")), InvalidArgument);
  EXPECT_THROW(protocol_from_json(p.network, Json::parse(R"({"steps":[]})")), InvalidArgument);
}

TEST(Dump, FixedFloatFormatting) {
  const Json j = {{"x", 0.1}, {"pair", {1.5, -2.0}}, {"n", 3}, {"bad", std::nan("")}};
  const std::string text = dump(j);
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(text.find("[1.5, -2]"), std::string::npos);
  EXPECT_NE(text.find("\"bad\": null"), std::string::npos);
  EXPECT_EQ(dump(j, 0), R"({"x":0.10000000000000001,"pair":[1.5,-2],"n":3,"bad":null})");
}

TEST(ReportJson, Fields) {
  const ProtocolSetup p = bt2_protocol(1, 8, 1.0);
  const TransferReport r = run_protocol(p);
  const Json j = report_to_json(p.network, r);
  EXPECT_EQ(j["fidelity"].get<double>(), r.fidelity);
  EXPECT_EQ(j["per_step_norms"].size(), 3U);
  EXPECT_EQ(j["amplitude"].size(), 2U);
  EXPECT_TRUE(j["final_state"].contains("amps"));
}
