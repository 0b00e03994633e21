// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/cli/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>

#include <nlohmann/json.hpp>

#include "scorelm/checkpoint.hpp"
#include "scorelm/cli/config.hpp"
#include "scorelm/data.hpp"
#include "scorelm/decode.hpp"
#include "scorelm/error.hpp"
#include "scorelm/train.hpp"
#include "scorelm/verify.hpp"

namespace scorelm::cli {
namespace {

using nlohmann::json;

// Flags shared by train and finetune; each maps onto a config key.
struct RunFlags {
  std::string config;
  std::optional<std::string> corpus, pairs, metrics, checkpoint, rule;
  std::optional<std::int64_t> steps, warmup_steps, eval_every;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha, eps, learning_rate;
  std::optional<std::size_t> batch_size;
  std::optional<int> context, embed_dim, hidden_dim;
  bool mask_enhanced = false;
  std::vector<std::string> sets;  // key=json-value

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON run configuration");
    cmd->add_option("--corpus", corpus, "plain UTF-8 training corpus");
    cmd->add_option("--pairs", pairs, "JSON-lines source/target pairs");
    cmd->add_option("--metrics", metrics, "metrics output (JSON-lines)");
    cmd->add_option("--checkpoint", checkpoint, "checkpoint output path");
    cmd->add_option("--rule", rule, "scoring rule used as the loss");
    cmd->add_option("--alpha", alpha, "alpha for alpha_power / pseudo_spherical");
    cmd->add_option("--eps", eps, "score smoothing factor");
    cmd->add_flag("--mask-enhanced", mask_enhanced, "add the masked logarithmic term");
    cmd->add_option("--steps", steps, "optimizer steps");
    cmd->add_option("--seed", seed, "initialization and shuffling seed");
    cmd->add_option("--learning-rate", learning_rate, "peak Adam learning rate");
    cmd->add_option("--batch-size", batch_size, "examples per batch");
    cmd->add_option("--warmup-steps", warmup_steps, "linear warmup length");
    cmd->add_option("--eval-every", eval_every, "held-out evaluation interval");
    cmd->add_option("--context", context, "context window K");
    cmd->add_option("--embed-dim", embed_dim, "embedding width");
    cmd->add_option("--hidden-dim", hidden_dim, "hidden width");
    cmd->add_option("--set", sets, "override any config key: key=<json value>");
  }

  RunConfig resolve() const {
    json doc = json::object();
    if (!config.empty()) {
      try {
        doc = json::parse(read_text_file(config));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kConfiguration,
                    "config '" + config + "' is not valid JSON: " + e.what());
      }
    }
    auto put = [&](const char* key, const auto& value) {
      if (value) doc[key] = *value;
    };
    put("corpus", corpus);
    put("pairs", pairs);
    put("metrics", metrics);
    put("checkpoint", checkpoint);
    put("rule", rule);
    put("alpha", alpha);
    put("eps", eps);
    put("steps", steps);
    put("seed", seed);
    put("learning_rate", learning_rate);
    put("batch_size", batch_size);
    put("warmup_steps", warmup_steps);
    put("eval_every", eval_every);
    put("context", context);
    put("embed_dim", embed_dim);
    put("hidden_dim", hidden_dim);
    if (mask_enhanced) doc["mask_enhanced"] = true;
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::kConfiguration, "--set expects key=value, got '" + kv + "'");
      }
      const std::string value = kv.substr(eq + 1);
      try {
        doc[kv.substr(0, eq)] = json::parse(value);
      } catch (const json::exception&) {
        doc[kv.substr(0, eq)] = value;  // bare strings need no quotes
      }
    }
    return parse_run_config(doc);
  }
};

struct Dataset {
  Vocab vocab;
  TrainData data;
};

std::vector<PairRecord> read_pairs(const std::string& path) { return load_pairs(path); }

std::string pairs_text(const std::vector<PairRecord>& records) {
  std::string all;
  for (const auto& r : records) all += r.source + r.target;
  return all;
}

// Loads the configured data; `vocab` fixes the symbol set when continuing
// from a checkpoint.
Dataset load_dataset(const RunConfig& cfg, const std::optional<Vocab>& vocab) {
  if (cfg.corpus.empty() == cfg.pairs.empty()) {
    throw Error(ErrorCode::kConfiguration,
                "exactly one of \"corpus\" or \"pairs\" must be configured");
  }
  Dataset ds;
  if (!cfg.corpus.empty()) {
    const std::string text = read_text_file(cfg.corpus);
    ds.vocab = vocab ? *vocab : build_vocab(text);
    const TokenSeq seq = encode(ds.vocab, text);
    ds.data = split_tokens(seq.tokens, cfg.model.context);
  } else {
    const auto records = read_pairs(cfg.pairs);
    ds.vocab = vocab ? *vocab : build_vocab(pairs_text(records));
    std::vector<TokenSeq> seqs;
    for (const auto& r : records) seqs.push_back(pair_sequence(ds.vocab, r));
    ds.data = split_sequences(seqs, cfg.model.context);
  }
  return ds;
}

void write_outputs(const RunConfig& cfg, const TrainResult& result) {
  write_text_file(cfg.metrics, metrics_to_jsonl(result.metrics));
  save_checkpoint(cfg.checkpoint, result.checkpoint);
}

void print_summary(std::ostream& out, const TrainResult& result) {
  out << "step " << result.checkpoint.step;
  if (!result.metrics.empty()) {
    const MetricsRecord& last = result.metrics.back();
    out << std::setprecision(6) << "  loss " << last.loss << "  score_log "
        << last.scores.logarithmic << "  score_brier " << last.scores.brier
        << "  score_spherical " << last.scores.spherical;
    if (last.ppl) out << "  ppl " << *last.ppl;
  }
  out << '\n';
}

int cmd_train(const RunFlags& flags, std::ostream& out) {
  RunConfig cfg = flags.resolve();
  cfg.train.validate();
  Dataset ds = load_dataset(cfg, std::nullopt);
  cfg.model.vocab_size = ds.vocab.size();
  TrainResult result = train(cfg.train, cfg.model, ds.data);
  result.checkpoint.vocab = ds.vocab;
  write_outputs(cfg, result);
  print_summary(out, result);
  return kExitOk;
}

int cmd_finetune(const RunFlags& flags, const std::string& base_path,
                 std::ostream& out) {
  RunConfig cfg = flags.resolve();
  const Checkpoint base = load_checkpoint(base_path);
  if (!base.vocab) {
    throw Error(ErrorCode::kConfiguration,
                "base checkpoint carries no vocabulary; cannot encode data");
  }
  Dataset ds = load_dataset(cfg, base.vocab);
  cfg.model.vocab_size = ds.vocab.size();
  TrainResult result = finetune(base, cfg.model, cfg.train, ds.data);
  write_outputs(cfg, result);
  print_summary(out, result);
  return kExitOk;
}

struct GenerateFlags {
  std::string checkpoint;
  std::string config;
  std::string prompt;
  bool greedy = false;
  std::optional<int> beam;
  std::optional<int> max_len;
  std::optional<double> length_penalty;
  std::optional<std::string> objective;
  bool conditional = false;
  int nbest = 1;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  if (!ckpt.vocab) {
    throw Error(ErrorCode::kConfiguration, "checkpoint carries no vocabulary");
  }
  BeamConfig cfg = f.config.empty() ? default_run_config().beam : load_run_config(f.config).beam;
  if (f.beam) cfg.beam_size = *f.beam;
  if (f.max_len) cfg.max_len = *f.max_len;
  if (f.length_penalty) cfg.length_penalty = *f.length_penalty;
  if (f.objective) cfg.objective = ScoreRule::parse(*f.objective);
  cfg.validate();

  std::vector<TokenId> prompt = encode(*ckpt.vocab, f.prompt).tokens;
  if (f.conditional) prompt.push_back(kEosId);
  const FeedForwardModel model(ckpt.model, ckpt.params);

  // Beam search when a width is given on the command line or in a config.
  if (f.greedy || (!f.beam && f.config.empty())) {
    const Hypothesis h = greedy(model, prompt, cfg.max_len);
    out << decode(*ckpt.vocab, h.tokens) << '\n';
    return kExitOk;
  }
  const auto hyps = beam_search(model, prompt, cfg);
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(f.nbest, 1)),
                                              hyps.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (f.nbest > 1) {
      out << std::setprecision(6) << hyps[i].normalized_score(cfg.length_penalty) << '\t';
    }
    out << decode(*ckpt.vocab, hyps[i].tokens) << '\n';
  }
  return kExitOk;
}

struct EvalFlags {
  std::string checkpoint;
  std::string corpus;
  std::string pairs;
  bool all = false;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  if (!ckpt.vocab) {
    throw Error(ErrorCode::kConfiguration, "checkpoint carries no vocabulary");
  }
  if (f.corpus.empty() == f.pairs.empty()) {
    throw Error(ErrorCode::kConfiguration, "pass exactly one of --corpus or --pairs");
  }
  std::vector<Example> examples;
  if (!f.corpus.empty()) {
    const TokenSeq seq = encode(*ckpt.vocab, read_text_file(f.corpus));
    if (f.all) {
      examples = sequence_examples(seq, ckpt.model.context);
    } else {
      examples = split_tokens(seq.tokens, ckpt.model.context).heldout;
    }
  } else {
    std::vector<TokenSeq> seqs;
    for (const auto& r : read_pairs(f.pairs)) seqs.push_back(pair_sequence(*ckpt.vocab, r));
    if (f.all) {
      for (const auto& s : seqs) {
        auto ex = sequence_examples(s, ckpt.model.context);
        examples.insert(examples.end(), ex.begin(), ex.end());
      }
    } else {
      examples = split_sequences(seqs, ckpt.model.context).heldout;
    }
  }
  if (examples.empty()) throw Error(ErrorCode::kInvalidInput, "no examples to evaluate");
  const HeldoutScores s = evaluate_scores(ckpt.model, ckpt.params, examples);
  const double ppl = std::exp(-s.logarithmic);
  json doc = {{"examples", examples.size()},
              {"score_log", s.logarithmic},
              {"score_brier", s.brier},
              {"score_spherical", s.spherical},
              {"ppl", std::isfinite(ppl) ? json(ppl) : json(nullptr)}};
  out << doc.dump() << '\n';
  return kExitOk;
}

struct SynthFlags {
  int states = 4;
  std::size_t length = 10000;
  std::uint64_t seed = 1;
  std::string out;
  std::string table;
  std::string spec;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  MarkovSpec spec;
  if (!f.spec.empty()) {
    json doc;
    try {
      doc = json::parse(read_text_file(f.spec));
      spec.transition = doc.at("transition").get<std::vector<std::vector<double>>>();
      spec.states = static_cast<int>(spec.transition.size());
      spec.initial = doc.contains("initial")
                         ? doc.at("initial").get<std::vector<double>>()
                         : std::vector<double>(spec.transition.size(),
                                               1.0 / static_cast<double>(spec.transition.size()));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kConfiguration, std::string("bad Markov spec: ") + e.what());
    }
    spec.seed = f.seed;
  } else {
    spec = random_markov_spec(f.states, f.seed);
  }
  if (spec.states > 26) {
    throw Error(ErrorCode::kConfiguration, "synth writes states as letters a-z; use <= 26 states");
  }
  const MarkovSample sample = synth_markov(spec, f.length);
  std::string text;
  text.reserve(sample.states.size());
  for (int s : sample.states) text.push_back(static_cast<char>('a' + s));
  write_text_file(f.out, text);
  if (!f.table.empty()) {
    json doc = {{"states", spec.states},
                {"symbols", json::array()},
                {"transition", sample.conditionals},
                {"initial", spec.initial},
                {"seed", spec.seed}};
    for (int s = 0; s < spec.states; ++s) doc["symbols"].push_back(std::string(1, static_cast<char>('a' + s)));
    write_text_file(f.table, doc.dump(1) + "\n");
  }
  out << "wrote " << sample.states.size() << " symbols over " << spec.states
      << " states to " << f.out << '\n';
  return kExitOk;
}

struct VerifyFlags {
  std::string rule;
  double alpha = 2.0;
  std::optional<std::size_t> m;
  double grid_step = 0.02;
  double eps = 0.1;
  bool mask_enhanced = false;
  std::optional<std::size_t> trials;
  double h = 1e-5;
  std::uint64_t seed = 1;
  std::vector<double> alphas = {1.5, 2.0, 2.5};
};

std::vector<ProbVector> default_q_set(std::size_t m) {
  std::vector<ProbVector> qs = {ProbVector::one_hot(m, 0), ProbVector::uniform(m)};
  if (m == 3) {
    qs.emplace_back(std::vector<double>{0.5, 0.3, 0.2});
  } else {
    qs.emplace_back(std::vector<double>{0.6, 0.4});
  }
  return qs;
}

std::vector<ScoreRule> proper_rules() {
  return {ScoreRule::logarithmic(),          ScoreRule::brier(),
          ScoreRule::spherical(),            ScoreRule::alpha_power(1.5),
          ScoreRule::alpha_power(2.5),       ScoreRule::pseudo_spherical(1.5),
          ScoreRule::pseudo_spherical(2.5)};
}

int verdict(bool pass) { return pass ? kExitOk : kExitVerifyFail; }

int cmd_verify(const std::string& which, VerifyFlags f, std::ostream& out) {
  // Entmax equivalence wants more outcomes than the simplex grids allow.
  if (!f.m) f.m = which == "entmax" ? 16 : 3;
  if (!f.trials) f.trials = which == "entmax" ? 200 : 100;
  const std::size_t m = *f.m;
  if (which == "table1") {
    const auto report = verify::table1_check();
    for (const auto& v : report.values) {
      out << std::left << std::setw(12) << v.rule << " p=" << std::setw(6) << v.prediction
          << std::right << std::fixed << std::setprecision(4) << v.value
          << (v.match ? "  ok" : "  MISMATCH") << '\n';
    }
    out.unsetf(std::ios::floatfield);
    out << (report.pass ? "PASS" : "FAIL") << '\n';
    return verdict(report.pass);
  }
  if (which == "propriety") {
    if (!f.rule.empty()) {
      const auto report = verify::propriety_scan(ScoreRule::parse(f.rule, f.alpha), m,
                                                 f.grid_step, default_q_set(m));
      out << verify::to_json(report).dump(1) << '\n';
      return verdict(report.pass);
    }
    // Certificate suite: every proper rule passes and the linear control fails.
    json reports = json::array();
    bool pass = true;
    for (const ScoreRule& rule : proper_rules()) {
      const auto r = verify::propriety_scan(rule, m, f.grid_step, default_q_set(m));
      pass = pass && r.pass;
      reports.push_back(verify::to_json(r));
    }
    const auto control = verify::propriety_scan(ScoreRule::linear(), m, f.grid_step,
                                                default_q_set(m));
    pass = pass && !control.pass;
    json doc = {{"reports", reports},
                {"control", verify::to_json(control)},
                {"control_rejected", !control.pass},
                {"pass", pass}};
    out << doc.dump(1) << '\n';
    return verdict(pass);
  }
  if (which == "smoothing") {
    const SmoothingConfig cfg{f.eps, f.mask_enhanced};
    std::vector<ScoreRule> rules;
    if (f.rule.empty()) {
      rules = {ScoreRule::brier(), ScoreRule::spherical()};
    } else {
      rules = {ScoreRule::parse(f.rule, f.alpha)};
    }
    json reports = json::array();
    bool pass = true;
    for (const ScoreRule& rule : rules) {
      for (const bool mask : {false, true}) {
        if (!f.rule.empty() && mask != f.mask_enhanced) continue;
        const auto r = verify::smoothing_propriety_scan(
            rule, {cfg.eps, mask}, m, f.grid_step, default_q_set(m));
        pass = pass && r.pass;
        reports.push_back(verify::to_json(r));
      }
    }
    out << json({{"reports", reports}, {"pass", pass}}).dump(1) << '\n';
    return verdict(pass);
  }
  if (which == "gradcheck") {
    constexpr double kTolerance = 1e-4;
    std::vector<ScoreRule> rules;
    if (f.rule.empty()) {
      rules = proper_rules();
      rules.push_back(ScoreRule::linear());
    } else {
      rules = {ScoreRule::parse(f.rule, f.alpha)};
    }
    json reports = json::array();
    bool pass = true;
    for (const ScoreRule& rule : rules) {
      const auto r = verify::grad_check(rule, {f.eps, f.mask_enhanced}, m, *f.trials,
                                        f.h, f.seed);
      pass = pass && r.finite && r.max_relative_error < kTolerance;
      reports.push_back(verify::to_json(r));
    }
    out << json({{"reports", reports}, {"tolerance", kTolerance}, {"pass", pass}}).dump(1)
        << '\n';
    return verdict(pass);
  }
  if (which == "entmax") {
    const auto report = verify::entmax_sweep(f.alphas, *f.trials, m, f.seed);
    out << verify::to_json(report).dump(1) << '\n';
    return verdict(report.pass);
  }
  throw Error(ErrorCode::kInternal, "unhandled verify check " + which);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Train, fine-tune, decode and verify language models under "
               "strictly proper scoring rules",
               "scorelm"};
  app.require_subcommand(1);

  RunFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train a model from scratch");
  train_flags.attach(train_cmd);

  RunFlags finetune_flags;
  std::string base_path;
  auto* finetune_cmd = app.add_subcommand("finetune", "continue training from a checkpoint");
  finetune_flags.attach(finetune_cmd);
  finetune_cmd->add_option("--base", base_path, "base checkpoint")->required();

  GenerateFlags gen;
  auto* gen_cmd = app.add_subcommand("generate", "decode from a checkpoint");
  gen_cmd->alias("decode");
  gen_cmd->add_option("--checkpoint", gen.checkpoint, "checkpoint to decode from")->required();
  gen_cmd->add_option("--config", gen.config, "JSON config supplying beam settings");
  gen_cmd->add_option("--prompt", gen.prompt, "prompt text");
  auto* greedy_flag = gen_cmd->add_flag("--greedy", gen.greedy, "greedy argmax decoding");
  gen_cmd->add_option("--beam", gen.beam, "beam width")->excludes(greedy_flag);
  gen_cmd->add_option("--max-len", gen.max_len, "maximum generated tokens");
  gen_cmd->add_option("--length-penalty", gen.length_penalty, "length penalty exponent");
  gen_cmd->add_option("--objective", gen.objective,
                      "beam objective: logarithmic, brier or spherical");
  gen_cmd->add_flag("--conditional", gen.conditional,
                    "append the separator after the prompt (paired models)");
  gen_cmd->add_option("--nbest", gen.nbest, "print the n best hypotheses with scores");

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "held-out scores and perplexity");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint")->required();
  eval_cmd->add_option("--corpus", eval.corpus, "plain text corpus");
  eval_cmd->add_option("--pairs", eval.pairs, "JSON-lines pairs");
  eval_cmd->add_flag("--all", eval.all, "score the whole file instead of the held-out split");

  VerifyFlags vf;
  std::string which;
  auto* verify_cmd = app.add_subcommand("verify", "run a brute-force certificate");
  verify_cmd->add_option("check", which, "table1 | propriety | smoothing | gradcheck | entmax")
      ->required()
      ->check(CLI::IsMember({"table1", "propriety", "smoothing", "gradcheck", "entmax"}));
  verify_cmd->add_option("--rule", vf.rule, "restrict to one rule");
  verify_cmd->add_option("--alpha", vf.alpha, "alpha for parametric rules");
  verify_cmd->add_option("--m", vf.m, "number of outcomes");
  verify_cmd->add_option("--grid-step", vf.grid_step, "simplex grid resolution");
  verify_cmd->add_option("--eps", vf.eps, "smoothing factor");
  verify_cmd->add_flag("--mask-enhanced", vf.mask_enhanced, "masked logarithmic variant");
  verify_cmd->add_option("--trials", vf.trials, "random trials (gradcheck, entmax)");
  verify_cmd->add_option("--fd-step", vf.h, "finite-difference step");
  verify_cmd->add_option("--seed", vf.seed, "random seed");
  verify_cmd->add_option("--alphas", vf.alphas, "entmax alphas");

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "emit a synthetic Markov corpus");
  synth_cmd->add_option("--states", synth.states, "number of states (letters a..)");
  synth_cmd->add_option("--length", synth.length, "symbols to emit");
  synth_cmd->add_option("--seed", synth.seed, "sampling seed");
  synth_cmd->add_option("--spec", synth.spec, "JSON with \"transition\" (and \"initial\")");
  synth_cmd->add_option("--out", synth.out, "corpus output path")->required();
  synth_cmd->add_option("--table", synth.table, "write the true conditionals as JSON");

  std::vector<const char*> argv = {"scorelm"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_flags, out);
    if (finetune_cmd->parsed()) return cmd_finetune(finetune_flags, base_path, out);
    if (gen_cmd->parsed()) return cmd_generate(gen, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (verify_cmd->parsed()) return cmd_verify(which, vf, out);
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace scorelm::cli
