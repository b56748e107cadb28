// Copyright 2026 The auditstat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("auditstat_cli_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
    return dir / name;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir / name, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }
};

int cli(const std::string& args) {
  const std::string cmd = std::string(AUDITSTAT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const char* kReviews =
    "product_id,reviewer_id,question_id,answer,final_classification,team\n"
    "p1,R1,Q1,yes,flag,A\np1,R2,Q1,yes,flag,B\n"
    "p2,R1,Q1,no,pass,A\np2,R2,Q1,yes,pass,B\n"
    "p3,R1,Q1,no,pass,A\np3,R2,Q1,no,pass,B\n"
    "p4,R1,Q1,yes,flag,A\np4,R2,Q1,no,flag,B\n";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage and input errors exit 2") {
    Scratch s;
    CHECK(cli("--help") == 0);
    CHECK(cli("") == 2);
    CHECK(cli("agreement") == 2);
    CHECK(cli("agreement --format yaml --input " + q(s.write("r.csv", kReviews))) == 2);
    CHECK(cli("agreement --input " + q(s.write("bad.csv", "product_id,answer\np,a\n"))) == 2);
    CHECK(cli("agreement --input " + q(s.dir / "missing.csv")) == 2);
    CHECK(cli("simulate --config " + q(s.write("c.json", R"({"questions": []})"))) == 2);
  }

  TEST_CASE("subcommands succeed on valid input") {
    Scratch s;
    const auto in = q(s.write("r.csv", kReviews));
    CHECK(cli("agreement --input " + in) == 0);
    CHECK(cli("chisq --input " + in + " --format text") == 0);
    CHECK(cli("ttest --input " + in) == 0);
    CHECK(cli("anova --input " + in) == 0);
    CHECK(cli("ci --x 5 --n 50 --ci-method wilson") == 0);
    CHECK(cli("ci --input " + in) == 0);
    CHECK(cli("regress --input " + in + " --factors Q1,team") == 0);
    const auto did = q(s.write("d.csv", "group,period,outcome\ncontrol,0,10\ncontrol,1,14\n"
                                        "treated,0,20\ntreated,1,30\n"));
    CHECK(cli("did --input " + did + " --change-period 1 --format text -o " +
              q(s.dir / "did.txt")) == 0);
    CHECK(s.read("did.txt").find("counterfactual series") != std::string::npos);
    CHECK(cli("did --input " + did) == 2);
  }

  TEST_CASE("audit exit status and determinism") {
    Scratch s;
    const auto in = q(s.write("r.csv", kReviews));
    CHECK(cli("audit --input " + in + " -o " + q(s.dir / "a.json")) == 0);
    CHECK(cli("audit --input " + in + " -o " + q(s.dir / "b.json")) == 0);
    CHECK(s.read("a.json") == s.read("b.json"));
    CHECK(s.read("a.json").find("\"schema_version\": 1") != std::string::npos);

    // One classification label: chi-square and bias factors fail, agreement
    // still runs.
    std::string one_class = kReviews;
    for (auto pos = one_class.find("pass"); pos != std::string::npos;
         pos = one_class.find("pass")) {
      one_class.replace(pos, 4, "flag");
    }
    CHECK(cli("audit --input " + q(s.write("one.csv", one_class))) == 1);
  }

  TEST_CASE("simulate output feeds audit and did") {
    Scratch s;
    const auto cfg = q(s.write("c.json", R"({"n_products": 400, "seed": 3, "n_periods": 2,
      "questions": [{"id": "Q1", "difficulty": 0.3}, {"id": "Q2", "difficulty": 0.3}],
      "treatment": {"change_period": 1, "error_rate_delta": 0.1}})"));
    REQUIRE(cli("simulate --config " + cfg + " -o " + q(s.dir / "g.csv") +
                " --ground-truth-out " + q(s.dir / "t.csv")) == 0);
    CHECK(s.read("g.csv").rfind("product_id,reviewer_id,question_id,answer,"
                                "final_classification,period,group\n", 0) == 0);
    CHECK(cli("did --input " + q(s.dir / "g.csv") + " --change-period 1 --ground-truth " +
              q(s.dir / "t.csv")) == 0);
    CHECK(cli("did --input " + q(s.dir / "g.csv") + " --change-period 1") == 2);
  }
}
