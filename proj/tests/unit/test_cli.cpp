#include <doctest.h>

#include <algorithm>

#include <json.hpp>

#include "cli_runner.hpp"
#include "fixtures.hpp"

using fixtures::run_cli;
using nlohmann::json;

namespace {

const std::string kCli = MMD_CLI_PATH;

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  fixtures::TempDir dir("cli-usage");
  CHECK(run_cli(kCli, {}, dir.path()).exit_code == 2);
  CHECK(run_cli(kCli, {"frobnicate"}, dir.path()).exit_code == 2);
  CHECK(run_cli(kCli, {"gen-catalog", "--bogus"}, dir.path()).exit_code == 2);
  CHECK(run_cli(kCli, {"gen-catalog", "--n", "0"}, dir.path()).exit_code == 2);
  CHECK(run_cli(kCli, {"gen-dialogs"}, dir.path()).exit_code == 2);
  CHECK(run_cli(kCli, {"--help"}, dir.path()).exit_code == 0);
}

TEST_CASE("gen-catalog writes the requested number of products") {
  fixtures::TempDir dir("cli-catalog");
  const auto out = dir / "cat.jsonl";
  const auto r = run_cli(kCli, {"gen-catalog", "--n", "3500", "--seed", "7", "--out", out.string()}, dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(count_lines(fixtures::slurp(out)) == 3500);
  CHECK(std::filesystem::exists(dir / "cat.vocab.json"));
  CHECK(std::filesystem::exists(dir / "cat.features.bin"));
  CHECK(json::parse(r.out)["products"] == 3500);
}

TEST_CASE("runtime errors exit with 1 and name the path") {
  fixtures::TempDir dir("cli-errors");
  const auto cat = dir / "cat.jsonl";
  REQUIRE(run_cli(kCli, {"gen-catalog", "--n", "40", "--out", cat.string()}, dir.path()).exit_code == 0);
  const auto missing = (dir / "no-such-agent.bin").string();
  const auto r = run_cli(kCli,
                         {"evaluate", "--catalog", cat.string(), "--corrnet", (dir / "c.bin").string(),
                          "--agent", missing, "--dialogs", (dir / "d.jsonl").string()},
                         dir.path());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("no-such-") != std::string::npos);

  const auto r2 = run_cli(kCli, {"train-corrnet", "--catalog", (dir / "absent.jsonl").string()}, dir.path());
  CHECK(r2.exit_code == 1);
  CHECK(r2.err.find("absent.jsonl") != std::string::npos);

  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"corrnet\": {\"k\": 0}}";
  }
  const auto r3 = run_cli(kCli, {"--config", (dir / "bad.json").string(), "train-corrnet", "--catalog", cat.string()},
                          dir.path());
  CHECK(r3.exit_code == 1);
}

TEST_CASE("small pipeline end to end") {
  fixtures::TempDir dir("cli-pipeline");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"corrnet": {"k": 8, "epochs": 3}, "agent": {"epochs": 2}})";
  }
  const std::string cfg = (dir / "cfg.json").string();
  const std::string cat = (dir / "cat.jsonl").string(), dlg = (dir / "dlg.jsonl").string();
  const std::string cn = (dir / "cn.bin").string(), ag = (dir / "ag.bin").string();
  const std::string metrics = (dir / "metrics.json").string();

  auto step = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", cfg, "--seed", "3"});
    const auto r = run_cli(kCli, args, dir.path());
    CHECK_MESSAGE(r.exit_code == 0, r.err);
    return r;
  };
  step({"gen-catalog", "--n", "80", "--out", cat});
  step({"gen-dialogs", "--catalog", cat, "--sessions", "40", "--out", dlg});
  const auto trained = step({"train-corrnet", "--catalog", cat, "--out", cn});
  CHECK(json::parse(fixtures::slurp(cn + ".json"))["loss_history"].size() == 4);
  step({"train-agent", "--catalog", cat, "--corrnet", cn, "--dialogs", dlg, "--out", ag});
  const auto eval = step({"evaluate", "--catalog", cat, "--corrnet", cn, "--agent", ag, "--dialogs", dlg,
                          "--out", metrics});
  const auto m = json::parse(fixtures::slurp(metrics));
  CHECK(m == json::parse(eval.out));
  CHECK(m["test_mean_cosine"].is_number());
  CHECK(m["baseline_mean_cosine"].is_number());
  CHECK(m["improvement"].get<double>() ==
        doctest::Approx(m["test_mean_cosine"].get<double>() - m["baseline_mean_cosine"].get<double>()));
}
