// Copyright 2026 The bellcert Authors
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bellcert/cli.hpp"

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "bellcert");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Outcome o;
    o.code = bellcert::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

int count_lines(const std::string& s) {
    int lines = 0;
    for (char c : s) lines += c == '\n';
    return lines;
}

}  // namespace

TEST(cli, bounds_passes) {
    const Outcome o = invoke({"bounds", "--n", "3"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto j = nlohmann::json::parse(o.out);
    ASSERT_EQ(j["schema_version"], "1");
    ASSERT_TRUE(j["passed"].get<bool>());
    ASSERT_EQ(j["payload"]["local_bound_formula"].get<int>(), 6);
}

TEST(cli, bounds_skips_brute_force_above_twelve) {
    const Outcome o = invoke({"bounds", "--n", "13"});
    ASSERT_EQ(o.code, 0) << o.err;
    ASSERT_NE(o.out.find("skipped: n>12"), std::string::npos);
}

TEST(cli, full_pipeline_passes) {
    const Outcome o = invoke({"all", "--n", "4"});
    ASSERT_EQ(o.code, 0) << o.out;
    const auto j = nlohmann::json::parse(o.out);
    ASSERT_TRUE(j["passed"].get<bool>());
    for (const char* stage : {"bounds", "strategy", "sos", "extract", "robustness"}) {
        ASSERT_TRUE(j["payload"].contains(stage)) << stage;
    }
}

TEST(cli, injected_fault_fails_sos_verdict) {
    const Outcome o = invoke({"sos-check", "--n", "4", "--inject-fault", "non-involutive"});
    ASSERT_EQ(o.code, 1);
    const auto j = nlohmann::json::parse(o.out);
    ASSERT_FALSE(j["passed"].get<bool>());
    bool sos_failed = false;
    for (const auto& [name, v] : j["verdicts"].items()) {
        if (name.find("sos") != std::string::npos && !v["pass"].get<bool>()) sos_failed = true;
    }
    ASSERT_TRUE(sos_failed);
    ASSERT_NE(invoke({"all", "--n", "4", "--inject-fault", "non-involutive"}).code, 0);
}

TEST(cli, usage_errors) {
    ASSERT_EQ(invoke({"bounds", "--n", "1"}).code, 2);
    ASSERT_EQ(invoke({"frobnicate"}).code, 2);
    ASSERT_EQ(invoke({}).code, 2);
    ASSERT_EQ(invoke({"robustness", "--n", "2", "--eps-grid", "0.5"}).code, 2);
    ASSERT_EQ(invoke({"bounds", "--tol.bogus=1"}).code, 2);
    ASSERT_EQ(invoke({"bounds", "--tol.sos=abc"}).code, 2);
    ASSERT_EQ(invoke({"bounds", "--format", "xml"}).code, 2);
}

TEST(cli, degenerate_grid_is_usage_error_with_payload) {
    const Outcome o = invoke({"robustness", "--n", "2", "--eps-grid", "0,0"});
    ASSERT_EQ(o.code, 2);
    const auto j = nlohmann::json::parse(o.out);
    ASSERT_EQ(j["error"]["type"], "invalid_parameter");
    ASSERT_FALSE(j["passed"].get<bool>());
}

TEST(cli, help_lists_tolerances) {
    const Outcome o = invoke({"--help"});
    ASSERT_EQ(o.code, 0);
    ASSERT_NE(o.out.find("fidelity = 0.999999"), std::string::npos);
    ASSERT_NE(o.out.find("BELLCERT_THREADS"), std::string::npos);
}

TEST(cli, output_is_deterministic) {
    const std::vector<std::string> args{"robustness", "--n", "2", "--seed", "11", "--seeds", "2"};
    const Outcome a = invoke(args);
    const Outcome b = invoke(args);
    ASSERT_EQ(a.out, b.out);
    const Outcome c = invoke({"extract", "--n", "3", "--seed", "5", "--junk-a", "2"});
    ASSERT_EQ(c.out, invoke({"extract", "--n", "3", "--seed", "5", "--junk-a", "2"}).out);
}

TEST(cli, json_is_canonical) {
    const Outcome o = invoke({"strategy", "--n", "3"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto j = nlohmann::json::parse(o.out);
    ASSERT_EQ(bellcert::report::to_canonical_json(j), o.out);
    const std::string s = o.out;
    ASSERT_LT(s.find("\"config\""), s.find("\"passed\""));
    ASSERT_LT(s.find("\"passed\""), s.find("\"payload\""));
}

TEST(cli, csv_has_one_row_per_sample) {
    const Outcome o = invoke({"robustness", "--n", "2", "--format", "csv", "--eps-grid",
                              "1e-3,2e-3,3e-3,5e-3,1e-2,2e-2,3e-2,5e-2,1e-1,2e-1", "--seeds", "3"});
    ASSERT_TRUE(o.code == 0 || o.code == 1) << o.err;
    ASSERT_EQ(count_lines(o.out), 31);
    const std::string header = o.out.substr(0, o.out.find('\n'));
    ASSERT_NE(header.find("eps"), std::string::npos);
    ASSERT_NE(header.find("state_distance"), std::string::npos);
}

TEST(cli, tolerance_override_changes_verdicts) {
    const Outcome strict = invoke({"robustness", "--n", "2", "--tol.exponent=1e-9"});
    ASSERT_EQ(strict.code, 1);
    const auto j = nlohmann::json::parse(strict.out);
    ASSERT_DOUBLE_EQ(j["config"]["tolerances"]["exponent"].get<double>(), 1e-9);
    const Outcome spaced = invoke({"bounds", "--tol.value", "1e-6"});
    ASSERT_EQ(spaced.code, 0);
    ASSERT_DOUBLE_EQ(nlohmann::json::parse(spaced.out)["config"]["tolerances"]["value"].get<double>(), 1e-6);
}

TEST(cli, threads_from_environment) {
    ::setenv("BELLCERT_THREADS", "2", 1);
    const Outcome env = invoke({"bounds", "--n", "2"});
    const Outcome flag = invoke({"bounds", "--n", "2", "--threads", "3"});
    ::unsetenv("BELLCERT_THREADS");
    ASSERT_EQ(nlohmann::json::parse(env.out)["config"]["threads"].get<int>(), 2);
    ASSERT_EQ(nlohmann::json::parse(flag.out)["config"]["threads"].get<int>(), 3);
}

TEST(cli, writes_to_file_and_reports_unwritable_path) {
    const auto path = std::filesystem::temp_directory_path() / "bellcert_cli_test.json";
    const Outcome o = invoke({"bounds", "--n", "3", "--out", path.string()});
    ASSERT_EQ(o.code, 0);
    ASSERT_TRUE(o.out.empty());
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    ASSERT_EQ(ss.str(), invoke({"bounds", "--n", "3"}).out);
    std::filesystem::remove(path);
    const Outcome bad = invoke({"bounds", "--n", "3", "--out", "/nonexistent-dir/x/report.json"});
    ASSERT_EQ(bad.code, 2);
    ASSERT_NE(bad.err.find("cannot write"), std::string::npos);
}

TEST(cli, float_formatting) {
    ASSERT_EQ(bellcert::report::format_double(1.0), "1.0");
    ASSERT_EQ(bellcert::report::format_double(0.1), "0.10000000000000001");
    ASSERT_EQ(bellcert::report::format_double(std::nan("")), "null");
}
