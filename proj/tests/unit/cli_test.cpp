// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scorelm/checkpoint.hpp"
#include "scorelm/cli/commands.hpp"
#include "scorelm/cli/config.hpp"
#include "scorelm/data.hpp"
#include "scorelm/error.hpp"

namespace scorelm::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("scorelm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string make_corpus() {
    const Outcome r = run({"synth", "--states", "3", "--length", "3000", "--seed", "5", "--out",
                       path("corpus.txt"), "--table", path("table.json")});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return path("corpus.txt");
  }

  std::vector<std::string> train_args(const std::string& corpus, const std::string& tag) {
    return {"train",          "--corpus",    corpus,   "--steps",      "30",
            "--context",      "2",           "--embed-dim", "4",       "--hidden-dim",
            "8",              "--batch-size", "16",     "--eval-every", "10",
            "--metrics",      path(tag + ".jsonl"), "--checkpoint", path(tag + ".json")};
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsage) {
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"verify", "bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"train", "--steps", "many"}).code, kExitUsage);
}

TEST_F(CliTest, VerifyTable1) {
  const Outcome r = run({"verify", "table1"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("0.8119"), std::string::npos);
  EXPECT_NE(r.out.find("-inf"), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST_F(CliTest, VerifyFailureExitCode) {
  const Outcome bad = run({"verify", "propriety", "--rule", "linear"});
  EXPECT_EQ(bad.code, kExitVerifyFail);
  EXPECT_FALSE(nlohmann::json::parse(bad.out).at("pass").get<bool>());
  EXPECT_EQ(run({"verify", "propriety", "--rule", "brier", "--grid-step", "0.05"}).code, kExitOk);
  EXPECT_EQ(run({"verify", "propriety", "--m", "5"}).code, kExitFailure);
}

TEST_F(CliTest, VerifyOtherChecks) {
  EXPECT_EQ(run({"verify", "smoothing", "--rule", "spherical", "--mask-enhanced"}).code, kExitOk);
  EXPECT_EQ(run({"verify", "gradcheck", "--m", "8", "--trials", "10", "--eps", "0.1"}).code,
            kExitOk);
  EXPECT_EQ(run({"verify", "entmax", "--trials", "20"}).code, kExitOk);
}

TEST_F(CliTest, SynthWritesCorpusAndTable) {
  const std::string corpus = make_corpus();
  const std::string text = read_text_file(corpus);
  EXPECT_EQ(text.size(), 3000u);
  EXPECT_EQ(text.find_first_not_of("abc"), std::string::npos);
  const auto table = nlohmann::json::parse(read_text_file(path("table.json")));
  EXPECT_EQ(table.at("transition").size(), 3u);
}

TEST_F(CliTest, TrainEvalGenerate) {
  const std::string corpus = make_corpus();
  const Outcome t = run(train_args(corpus, "a"));
  ASSERT_EQ(t.code, kExitOk) << t.err;

  std::istringstream lines(read_text_file(path("a.jsonl")));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto rec = nlohmann::ordered_json::parse(line);
    std::vector<std::string> keys;
    for (const auto& [k, v] : rec.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"step", "loss", "score_log", "score_brier",
                                              "score_spherical", "ppl", "rel_log", "rel_brier",
                                              "rel_spherical"}));
    ++count;
  }
  EXPECT_EQ(count, 3);

  const Checkpoint ckpt = load_checkpoint(path("a.json"));
  EXPECT_EQ(ckpt.step, 30);
  EXPECT_EQ(ckpt.model.vocab_size, 5);

  const Outcome e = run({"eval", "--checkpoint", path("a.json"), "--corpus", corpus});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  const auto scores = nlohmann::json::parse(e.out);
  EXPECT_NEAR(scores.at("ppl").get<double>(), std::exp(-scores.at("score_log").get<double>()),
              1e-9);

  const Outcome g = run({"generate", "--checkpoint", path("a.json"), "--prompt", "ab", "--greedy",
                     "--max-len", "6"});
  ASSERT_EQ(g.code, kExitOk) << g.err;
  EXPECT_LE(g.out.size(), 7u);
  const Outcome b = run({"decode", "--checkpoint", path("a.json"), "--prompt", "ab", "--beam", "3",
                     "--max-len", "6", "--objective", "brier", "--nbest", "2"});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_NE(b.out.find('\t'), std::string::npos);
  EXPECT_EQ(run({"generate", "--checkpoint", path("a.json"), "--prompt", "xyz"}).code,
            kExitFailure);
}

TEST_F(CliTest, TrainTwiceIsByteIdentical) {
  const std::string corpus = make_corpus();
  ASSERT_EQ(run(train_args(corpus, "a")).code, kExitOk);
  ASSERT_EQ(run(train_args(corpus, "b")).code, kExitOk);
  EXPECT_EQ(read_text_file(path("a.jsonl")), read_text_file(path("b.jsonl")));
  EXPECT_EQ(read_text_file(path("a.json")), read_text_file(path("b.json")));
}

TEST_F(CliTest, ConfigFileAndOverrides) {
  const std::string corpus = make_corpus();
  nlohmann::json cfg = {{"corpus", corpus},        {"steps", 12},
                        {"context", 1},            {"embed_dim", 3},
                        {"hidden_dim", 5},         {"batch_size", 8},
                        {"eval_every", 4},         {"rule", "pseudo_spherical"},
                        {"alpha", 2.5},            {"metrics", path("m.jsonl")},
                        {"checkpoint", path("c.json")}};
  write_text_file(path("cfg.json"), cfg.dump());
  ASSERT_EQ(run({"train", "--config", path("cfg.json"), "--steps", "8", "--set", "hidden_dim=6"})
                .code,
            kExitOk);
  const Checkpoint ckpt = load_checkpoint(path("c.json"));
  EXPECT_EQ(ckpt.step, 8);
  EXPECT_EQ(ckpt.model.hidden_dim, 6);
  EXPECT_EQ(ckpt.rule, ScoreRule::pseudo_spherical(2.5));

  cfg["colour"] = "blue";
  write_text_file(path("bad.json"), cfg.dump());
  const Outcome bad = run({"train", "--config", path("bad.json")});
  EXPECT_EQ(bad.code, kExitFailure);
  EXPECT_NE(bad.err.find("colour"), std::string::npos);

  write_text_file(path("broken.json"), "{\"steps\": ");
  EXPECT_EQ(run({"train", "--config", path("broken.json")}).code, kExitFailure);
}

TEST_F(CliTest, GenerateFromConfig) {
  const std::string corpus = make_corpus();
  ASSERT_EQ(run(train_args(corpus, "a")).code, kExitOk);
  write_text_file(path("beam.json"),
                  R"({"beam_size": 1, "max_len": 5, "objective": "spherical"})");
  const Outcome viaconfig =
      run({"generate", "--checkpoint", path("a.json"), "--prompt", "a", "--config", path("beam.json")});
  const Outcome viagreedy =
      run({"generate", "--checkpoint", path("a.json"), "--prompt", "a", "--greedy", "--max-len", "5"});
  ASSERT_EQ(viaconfig.code, kExitOk) << viaconfig.err;
  EXPECT_EQ(viaconfig.out, viagreedy.out);
}

TEST_F(CliTest, ValidationErrors) {
  const std::string corpus = make_corpus();
  auto args = train_args(corpus, "a");
  args.push_back("--rule");
  args.push_back("hinge");
  EXPECT_EQ(run(args).code, kExitFailure);
  auto zero = train_args(corpus, "a");
  zero[4] = "0";  // --steps
  EXPECT_EQ(run(zero).code, kExitFailure);
  EXPECT_EQ(run({"train", "--steps", "5"}).code, kExitFailure);  // no data
  auto masked = train_args(corpus, "a");
  masked.push_back("--mask-enhanced");
  const Outcome m = run(masked);
  EXPECT_EQ(m.code, kExitFailure);
  EXPECT_NE(m.err.find("configuration"), std::string::npos);
}

TEST_F(CliTest, FinetuneFromCheckpoint) {
  const std::string corpus = make_corpus();
  ASSERT_EQ(run(train_args(corpus, "base")).code, kExitOk);
  auto args = train_args(corpus, "ft");
  args[0] = "finetune";
  args.push_back("--base");
  args.push_back(path("base.json"));
  args.push_back("--rule");
  args.push_back("brier");
  const Outcome r = run(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Checkpoint ft = load_checkpoint(path("ft.json"));
  EXPECT_EQ(ft.step, 60);
  EXPECT_EQ(ft.rule, ScoreRule::brier());
  const auto first = nlohmann::json::parse(read_text_file(path("ft.jsonl")).substr(0, read_text_file(path("ft.jsonl")).find('\n')));
  EXPECT_FALSE(first.at("rel_brier").is_null());

  auto wrong = args;
  wrong[10] = "9";  // --hidden-dim
  const Outcome w = run(wrong);
  EXPECT_EQ(w.code, kExitFailure);
  EXPECT_NE(w.err.find("hidden_dim"), std::string::npos);
}

TEST_F(CliTest, PairsWorkflow) {
  write_text_file(path("pairs.jsonl"),
                  "{\"source\":\"ab\",\"target\":\"ba\"}\n{\"source\":\"ba\",\"target\":\"ab\"}\n"
                  "{\"source\":\"aa\",\"target\":\"bb\"}\n");
  const Outcome t = run({"train", "--pairs", path("pairs.jsonl"), "--steps", "5", "--context", "3",
                     "--embed-dim", "2", "--hidden-dim", "4", "--batch-size", "4", "--metrics",
                     path("p.jsonl"), "--checkpoint", path("p.json")});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  const Outcome g = run({"generate", "--checkpoint", path("p.json"), "--prompt", "ab", "--conditional",
                     "--beam", "2", "--max-len", "4"});
  EXPECT_EQ(g.code, kExitOk) << g.err;
  EXPECT_EQ(run({"eval", "--checkpoint", path("p.json"), "--pairs", path("pairs.jsonl"), "--all"})
                .code,
            kExitOk);
}

TEST(RunConfig, KeysAndDefaults) {
  const RunConfig d = default_run_config();
  EXPECT_EQ(d.train.learning_rate, 1e-3);
  EXPECT_EQ(d.train.batch_size, 64u);
  EXPECT_EQ(d.train.warmup_steps, 100);
  EXPECT_EQ(d.train.smoothing.eps, 0.0);
  const RunConfig c = parse_run_config({{"eps", 0.1}, {"mask_enhanced", true}, {"seed", 9}});
  EXPECT_EQ(c.train.smoothing, (SmoothingConfig{0.1, true}));
  EXPECT_EQ(c.model.seed, 9u);
  EXPECT_EQ(c.train.seed, 9u);
  EXPECT_THROW(parse_run_config({{"steps", "ten"}}), Error);
  EXPECT_THROW(parse_run_config(nlohmann::json::array()), Error);
}

}  // namespace
}  // namespace scorelm::cli
