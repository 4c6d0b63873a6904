// Copyright 2026 The qndwork Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <string>

#include "qndwork/config.hpp"
#include "qndwork/scenarios.hpp"

using namespace qndwork;
using nlohmann::json;

namespace {

json base() {
    return json::parse(R"({
      "bath": {"eta": 0.2, "omega0": 1.4285714285714286, "tc": 10.0, "beta": 3.74},
      "drive": {"omega_a": 1.0, "delta": 0.25, "Omega": 2.5, "t_start": 1.0}
    })");
}

}  // namespace

TEST(Config, MinimalParses) {
    const ScenarioConfig c = parse_config(base());
    EXPECT_EQ(c.bath.tc, 10.0);
    EXPECT_EQ(c.drive.t_start, 1.0);
    EXPECT_EQ(c.exact.pulse.t_m, 1.0);
    EXPECT_EQ(c.exact.discretization.n_modes, 5);
}

TEST(Config, InfiniteBeta) {
    json j = base();
    j["bath"]["beta"] = "inf";
    EXPECT_TRUE(parse_config(j).bath.zero_temperature());
    j["bath"]["beta"] = "hot";
    EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, StrictKeys) {
    json j = base();
    j["bath"]["width"] = 1.0;
    EXPECT_THROW(parse_config(j), ConfigError);
    j = base();
    j["extra"] = 1;
    EXPECT_THROW(parse_config(j), ConfigError);
    j = base();
    j["exact"] = {{"pulse", {{"tau", 1.0}}}};
    EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, PhysicalParametersHaveNoDefaults) {
    json j = base();
    j["drive"].erase("delta");
    EXPECT_THROW(parse_config(j), ConfigError);
    j = base();
    j.erase("bath");
    EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, ValidationBeforeComputation) {
    json j = base();
    j["bath"]["tc"] = -1.0;
    EXPECT_THROW(parse_config(j), ConfigError);
    j = base();
    j["drive"]["delta"] = 1.5;
    EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, SweepRanges) {
    json j = base();
    j["sweep"] = {{"variable", "Omega"}, {"from", 1.0}, {"to", 10.0}, {"points", 10}};
    const ScenarioConfig c = parse_config(j);
    ASSERT_EQ(c.sweep->values.size(), 10u);
    EXPECT_DOUBLE_EQ(c.sweep->values.back(), 10.0);
    j["sweep"] = {{"variable", "t_cycle"}, {"values", json::array({3.0, 1.0})}};
    EXPECT_EQ(parse_config(j).sweep->values.front(), 1.0);
    j["sweep"] = {{"variable", "mass"}, {"values", json::array({1.0})}};
    EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Scenario, EmptySweepIsHeaderOnly) {
    json j = base();
    j["sweep"] = {{"variable", "Omega"}, {"values", json::array()}};
    EXPECT_EQ(run_work_sweep(parse_config(j)),
              "sweep_value,W_quadrature,W_closed_form,W_approx,W_nsm_max,W_sel_max,W_SL\n");
}

TEST(Scenario, ZeroCouplingKernels) {
    json j = base();
    j["bath"]["eta"] = 0.0;
    j["kernels"] = {{"points_per_period", 20}};
    const std::string csv = run_kernels(parse_config(j));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,J_e,J_g,dJ,s");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const auto first = line.find(',');
        EXPECT_EQ(line.substr(first + 1, 6), "0,0,0,") << line;
    }
    EXPECT_EQ(rows, 21);
}

TEST(Scenario, SweepRowsOrderedAndThreadIndependent) {
    json j = base();
    j["kernels"] = {{"points_per_period", 200}};
    j["exact"] = {{"n_modes", 2}};
    j["sweep"] = {{"variable", "beta"}, {"values", json::array({5.0, 1.0, 2.0})}};
    const ScenarioConfig c = parse_config(j);
    RunOptions one, three;
    three.threads = 3;
    EXPECT_EQ(run_work_sweep(c, one), run_work_sweep(c, three));
}

TEST(Scenario, ExactDimensionRefusal) {
    json j = base();
    j["exact"] = {{"n_modes", 9}, {"convergence", false}};
    EXPECT_THROW(run_exact(parse_config(j)), ConfigError);
}

TEST(Scenario, MarkovianStaticLevels) {
    json j = base();
    j["drive"]["delta"] = 0.0;
    j["markovian"] = {{"mode", "golden_rule"}};
    const json r = run_markovian(parse_config(j));
    EXPECT_EQ(r["W"].get<double>(), 0.0);
}

TEST(Scenario, MarkovianCampaignDeterministic) {
    json j = base();
    j["markovian"] = {{"trials", 10}};
    j["seed"] = 17;
    const ScenarioConfig c = parse_config(j);
    EXPECT_EQ(run_markovian(c).dump(), run_markovian(c).dump());
    EXPECT_TRUE(run_markovian(c)["passed"].get<bool>());
}
