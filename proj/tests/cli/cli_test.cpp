#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"
#include "toy_data.hpp"

namespace {

struct Outcome {
  int status = -1;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.status = genforge::cli::dispatch(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::vector<nlohmann::json> jsonl(const std::string& text) {
  std::vector<nlohmann::json> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  return rows;
}

}  // namespace

TEST_CASE("usage errors exit 2, domain errors exit 1") {
  CHECK(run({}).status == 2);
  const Outcome bogus = run({"frobnicate"});
  CHECK(bogus.status == 2);
  CHECK(bogus.err.find("unknown subcommand") != std::string::npos);
  const Outcome missing = run({"eval", "--hyp", "x.jsonl"});
  CHECK(missing.status == 2);
  CHECK(missing.err.find("--ref") != std::string::npos);
  CHECK(run({"--version"}).status == 0);
  CHECK(run({"eval", "--help"}).status == 0);

  testing::TempDir dir;
  CHECK(run({"eval", "--hyp", (dir / "none.jsonl").string(), "--ref", (dir / "none").string()})
            .status == 1);
}

TEST_CASE("decode then eval round trip") {
  testing::TempDir dir;
  testing::write_toy_dataset(dir.path(), 30, 6);
  const std::string data = dir.path().string();
  const std::string hyp = (dir / "hyp.jsonl").string();

  const Outcome dec = run({"decode", "--dataset", data, "--beam", "3", "--max-len", "10", "-o", hyp});
  REQUIRE(dec.status == 0);
  const auto rows = jsonl(testing::read_file(hyp));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].contains("hypothesis"));
  CHECK(rows[0].at("id") == "test-0");

  const Outcome workers4 =
      run({"decode", "--dataset", data, "--beam", "3", "--max-len", "10", "--workers", "4"});
  CHECK(workers4.out == testing::read_file(hyp));

  const Outcome ev = run({"eval", "--hyp", hyp, "--ref", data, "--metrics",
                          "bleu,rouge-1,rouge-2,rouge-l,meteor,distinct-1,self-bleu"});
  REQUIRE(ev.status == 0);
  const auto report = nlohmann::json::parse(ev.out);
  CHECK(report.at("n") == 6);
  CHECK(report.at("corpus").contains("meteor"));

  const Outcome unknown = run({"eval", "--hyp", hyp, "--ref", data, "--metrics", "bertscore"});
  CHECK(unknown.status == 1);
  CHECK(unknown.err.find("rouge-l") != std::string::npos);

  testing::write_file(dir / "short.jsonl", "{\"id\": \"test-0\", \"hypothesis\": \"x\"}\n");
  const Outcome misaligned = run({"eval", "--hyp", (dir / "short.jsonl").string(), "--ref", data});
  CHECK(misaligned.status == 1);
  CHECK(misaligned.err.find("test-1") != std::string::npos);
}

TEST_CASE("corrupt is seeded and reconstructible") {
  testing::TempDir dir;
  testing::write_toy_dataset(dir.path(), 20, 2);
  const std::vector<std::string> args = {"corrupt", "--input", dir.path().string(),
                                         "--objective", "span", "--seed", "5"};
  const Outcome a = run(args);
  REQUIRE(a.status == 0);
  CHECK(run(args).out == a.out);
  const auto rows = jsonl(a.out);
  CHECK(rows.size() == 20);
  CHECK(rows[0].contains("plan"));
  CHECK(run({"corrupt", "--input", dir.path().string(), "--objective", "bogus"}).status != 0);
}

TEST_CASE("run and search") {
  testing::TempDir dir;
  testing::write_toy_dataset(dir.path(), 30, 5);
  testing::write_file(dir / "exp.cfg", "dataset = " + dir.path().string() +
                                           "\ndecode.max_len = 8\nseeds = 2020, 2021\n"
                                           "lm.subsample = 15\n");
  const Outcome dump = run({"run", "--config", (dir / "exp.cfg").string(), "--decode.beam_size",
                            "2", "--dump-config"});
  REQUIRE(dump.status == 0);
  CHECK(dump.out.find("decode.beam_size = 2") != std::string::npos);
  CHECK(dump.out.find("decode.max_len = 8") != std::string::npos);

  const Outcome r = run({"run", "--config", (dir / "exp.cfg").string()});
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("objective_values").size() == 2);

  testing::write_file(dir / "space.cfg", "decode.beam_size = 1, 2\n");
  const auto out_dir = (dir / "results").string();
  const Outcome s1 = run({"search", "--space", (dir / "space.cfg").string(), "--config",
                          (dir / "exp.cfg").string(), "--output-dir", out_dir, "--workers", "1"});
  REQUIRE(s1.status == 0);
  const Outcome s2 = run({"search", "--space", (dir / "space.cfg").string(), "--config",
                          (dir / "exp.cfg").string(), "--output-dir", out_dir, "--workers", "2"});
  CHECK(s1.out == s2.out);
  CHECK(std::filesystem::exists(dir / "results" / "best.cfg"));
}

TEST_CASE("analyze and leaderboard") {
  testing::TempDir dir;
  testing::write_toy_dataset(dir.path(), 20, 6);
  const std::string data = dir.path().string();
  const std::string hyp = (dir / "a.jsonl").string();
  const std::string hyp2 = (dir / "b.jsonl").string();
  REQUIRE(run({"decode", "--dataset", data, "--max-len", "8", "-o", hyp}).status == 0);
  REQUIRE(run({"decode", "--dataset", data, "--max-len", "8", "--strategy", "greedy", "-o", hyp2})
              .status == 0);
  const std::vector<std::string> args = {"analyze", "--hyp",  hyp,    "--hyp2", hyp2, "--dataset",
                                         data,      "--edges", "0,8,12"};
  auto json_args = args;
  json_args.insert(json_args.end(), {"--format", "json"});
  const Outcome j1 = run(json_args);
  REQUIRE(j1.status == 0);
  CHECK(run(json_args).out == j1.out);
  const auto report = nlohmann::json::parse(j1.out);
  CHECK(report.contains("comparison"));
  const Outcome html = run(args);
  REQUIRE(html.status == 0);
  CHECK(html.out.find("<svg") != std::string::npos);

  const std::string lb = (dir / "boards").string();
  CHECK(run({"leaderboard", "--dir", lb, "--dataset", "cnndm", "--model", "BART", "--scores",
             "rouge-1=44.16,rouge-l=40.90", "--source", "paper"})
            .status == 0);
  const Outcome shown = run({"leaderboard", "--dir", lb, "--dataset", "cnndm", "--model",
                             "BART (ours)", "--scores", "rouge-1=44.47", "--primary", "rouge-1"});
  REQUIRE(shown.status == 0);
  CHECK(shown.out.find("| 1 | BART (ours) | 44.47 |") != std::string::npos);
  CHECK(run({"leaderboard", "--dir", lb, "--dataset", "cnndm", "--primary", "nonsense"}).status ==
        1);
}
