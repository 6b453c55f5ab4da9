// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/cli.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "refverify/bench.hpp"
#include "refverify/selftest.hpp"
#include "refverify/vocabulary.hpp"

namespace refverify {

namespace {

constexpr const char* kDefaultTemplate = "${draft} [BACK] ${prefix} ${draft}";
constexpr const char* kMarkerWord = "[BACK]";

struct ModelOptions {
  std::string target_model = "table";
  std::string draft_model = "divergence";
  std::size_t vocab_size = 32;
  std::uint64_t model_seed = 1234;
  std::size_t order = 2;
  double smoothing = 1.0;
  double eta = 0.4;
  double beta = 0.5;
  std::string corpus;
};

struct DecodeOptions {
  std::uint64_t seed = 0;
  std::string strategy = "specsample";
  double alpha = 0.3;
  std::size_t gamma = 5;
  double temperature = 0.8;
  double epsilon = TypicalConfig{}.epsilon;
  double delta = TypicalConfig{}.delta;
  std::string template_file;
  std::string template_inline;
  std::size_t prefix_len = 4;
  std::string prompt;
  std::string prompt_file;
  std::size_t max_tokens = 64;
  std::optional<std::string> eos;
  std::string entropy_source = "original";
  bool timing = false;
  bool check_causality = false;
};

struct SweepOptions {
  std::vector<double> alphas{0.0, 0.3};
  std::vector<std::size_t> gammas{5};
  std::vector<std::string> strategies{"specsample"};
  std::vector<double> etas{0.4};
  std::vector<std::string> templates;
  std::vector<std::uint64_t> seeds{0};
  std::size_t num_prompts = 50;
  std::size_t prompt_len = 8;
  std::string out;
  std::string format = "csv";
  int jobs = 0;
};

// Models, vocabulary and resolved template shared by decode and sweep.
struct Setup {
  std::optional<Vocabulary> vocab;
  std::size_t vocab_size = 0;
  Token marker = 0;
  ModelPtr base;
  ModelPtr target;
  ModelPtr draft;
  std::vector<TokenSeq> corpus_docs;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string template_text(const DecodeOptions& d) {
  if (!d.template_file.empty()) return read_file(d.template_file);
  if (!d.template_inline.empty()) return d.template_inline;
  return kDefaultTemplate;
}

Token resolve_word(const Setup& s, const std::string& word) {
  if (s.vocab) {
    if (auto id = s.vocab->find(word)) return *id;
    throw Error(ErrorKind::kInvalidToken, "unknown word '" + word + "'");
  }
  if (word == kMarkerWord) return s.marker;
  return parse_raw_tokens(word, s.vocab_size).front();
}

ReflectiveTemplate resolve_template(const Setup& s, const std::string& text,
                                    std::size_t prefix_len) {
  const ParsedTemplate parsed = parse_template(text);
  ReflectiveTemplate t;
  t.reflective = parsed.reflective;
  t.prefix_len = parsed.has_prefix ? prefix_len : 0;
  for (const auto& w : parsed.probe_words) {
    t.prompt_tokens.push_back(resolve_word(s, w));
  }
  return t;
}

TokenSeq encode_prompt(const Setup& s, const std::string& text) {
  TokenSeq out =
      s.vocab ? s.vocab->encode(text) : parse_raw_tokens(text, s.vocab_size);
  if (out.empty()) throw Error(ErrorKind::kInvalidConfig, "empty prompt");
  return out;
}

Setup build_setup(const ModelOptions& m,
                  const std::vector<std::string>& template_texts,
                  const std::vector<std::string>& prompt_texts) {
  Setup s;
  if (!m.corpus.empty()) {
    Vocabulary vocab;
    for (const auto& line : read_lines(m.corpus)) {
      s.corpus_docs.push_back(vocab.encode_adding(line));
    }
    vocab.add(kMarkerWord);
    for (const auto& text : template_texts) {
      for (const auto& w : parse_template(text).probe_words) vocab.add(w);
    }
    for (const auto& text : prompt_texts) vocab.encode_adding(text);
    s.vocab_size = vocab.size();
    s.marker = *vocab.find(kMarkerWord);
    s.vocab = std::move(vocab);
  } else {
    s.vocab_size = m.vocab_size;
    s.marker = static_cast<Token>(m.vocab_size) - 1;
  }

  ModelSpec spec;
  spec.kind = ModelKind::kTable;
  spec.vocab_size = s.vocab_size;
  spec.seed = m.model_seed;
  spec.order = m.order;
  spec.smoothing = m.smoothing;
  spec.eta = m.eta;
  spec.beta = m.beta;
  spec.validate();

  if (m.target_model == "table") {
    s.base = make_table_model(spec);
  } else if (m.target_model == "ngram") {
    if (s.corpus_docs.empty()) {
      throw Error(ErrorKind::kInvalidConfig, "--target-model ngram needs --corpus");
    }
    s.base = make_ngram_model(s.corpus_docs, s.vocab_size, m.order, m.smoothing);
  } else {
    throw Error(ErrorKind::kInvalidConfig,
                "unknown target model '" + m.target_model + "'");
  }

  ModelSpec noise = spec;
  noise.seed = hash_combine(m.model_seed, 0x6e6f697365ULL);
  if (m.draft_model == "divergence") {
    s.draft = make_divergence_pair(s.base, noise, m.eta).second;
  } else if (m.draft_model == "same") {
    s.draft = s.base;
  } else if (m.draft_model == "table") {
    s.draft = make_table_model(noise);
  } else {
    throw Error(ErrorKind::kInvalidConfig,
                "unknown draft model '" + m.draft_model + "'");
  }
  s.target = m.beta > 0.0 ? make_reflection_aware(s.base, s.marker, m.beta)
                          : s.base;
  return s;
}

DecodeConfig make_decode_config(const Setup& s, const DecodeOptions& d,
                                const std::string& tmpl_text) {
  DecodeConfig c;
  if (d.strategy == "vanilla") {
    c.mode = DecodeMode::kAutoregressive;
  } else {
    c.strategy = strategy_from_string(d.strategy);
  }
  c.gamma = d.gamma;
  c.alpha = d.alpha;
  c.temperature = d.temperature;
  c.typical = TypicalConfig{d.epsilon, d.delta};
  c.entropy_source = d.entropy_source == "fused" ? EntropySource::kFused
                                                 : EntropySource::kOriginal;
  c.reflective_template = resolve_template(s, tmpl_text, d.prefix_len);
  c.max_new_tokens = d.max_tokens;
  if (d.eos) c.eos_token = resolve_word(s, *d.eos);
  c.seed = d.seed;
  c.check_causality = d.check_causality;
  c.validate();
  return c;
}

void add_model_flags(CLI::App* app, ModelOptions& m) {
  app->add_option("--target-model", m.target_model, "Target backend")
      ->check(CLI::IsMember({"table", "ngram"}))
      ->capture_default_str();
  app->add_option("--draft-model", m.draft_model,
                  "Draft backend: divergence pair member, identical, or "
                  "independent table")
      ->check(CLI::IsMember({"divergence", "same", "table"}))
      ->capture_default_str();
  app->add_option("--vocab-size", m.vocab_size,
                  "Vocabulary size in raw-integer mode (ignored with --corpus)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20))
      ->capture_default_str();
  app->add_option("--model-seed", m.model_seed, "Seed of the table models")
      ->capture_default_str();
  app->add_option("--order", m.order, "Context order k of table/ngram models")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--smoothing", m.smoothing, "N-gram add-lambda smoothing")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--eta", m.eta, "Draft noise rate of the divergence pair")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--beta", m.beta,
                  "Reflection blend of the target (0 disables the wrapper)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--corpus", m.corpus,
                  "Whitespace-tokenized corpus, one document per line")
      ->check(CLI::ExistingFile);
}

void add_decode_flags(CLI::App* app, DecodeOptions& d) {
  app->add_option("--seed", d.seed, "Decode RNG seed")->capture_default_str();
  app->add_option("--strategy", d.strategy, "Verification strategy")
      ->check(CLI::IsMember({"exact", "specsample", "typical", "vanilla"}))
      ->capture_default_str();
  app->add_option("--alpha", d.alpha, "Weight of the reflective logits")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--gamma", d.gamma, "Draft tokens per step")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}))
      ->capture_default_str();
  app->add_option("--temperature", d.temperature,
                  "Sampling temperature (0 = greedy)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--epsilon", d.epsilon, "Typical acceptance cap")
      ->check(CLI::Range(1e-12, 1.0))
      ->capture_default_str();
  app->add_option("--delta", d.delta, "Typical entropy scale")
      ->check(CLI::Range(1e-12, 1.0))
      ->capture_default_str();
  auto* tf = app->add_option("--template-file", d.template_file,
                             "Reflective template file (${draft}/${prefix})")
                 ->check(CLI::ExistingFile);
  app->add_option("--template-inline", d.template_inline,
                  "Reflective template text")
      ->default_str(kDefaultTemplate)
      ->excludes(tf);
  app->add_option("--prefix-len", d.prefix_len,
                  "Committed tokens replayed before the second copy")
      ->capture_default_str();
  app->add_option("--max-tokens", d.max_tokens, "Maximum new tokens")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--eos", d.eos, "End-of-sequence word or token id");
  app->add_option("--entropy-source", d.entropy_source,
                  "Distribution whose entropy sets the typical threshold")
      ->check(CLI::IsMember({"original", "fused"}))
      ->capture_default_str();
  app->add_flag("--timing", d.timing, "Report wall-clock throughput (toy scale)");
}

int cmd_decode(const ModelOptions& m, const DecodeOptions& d,
               std::ostream& out) {
  std::vector<std::string> prompts;
  if (!d.prompt_file.empty()) {
    prompts = read_lines(d.prompt_file);
  } else {
    prompts.push_back(d.prompt);
  }
  const std::string tmpl = template_text(d);
  const Setup s = build_setup(m, {tmpl}, prompts);
  const DecodeConfig config = make_decode_config(s, d, tmpl);

  out << std::setprecision(6) << std::fixed;
  out << "config: strategy " << d.strategy << " alpha " << config.alpha
      << " gamma " << config.gamma << " temperature " << config.temperature
      << " prefix_len " << config.reflective_template.prefix_len
      << " template_tokens " << config.reflective_template.prompt_tokens.size()
      << " vocab " << s.vocab_size << '\n';
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const TokenSeq prompt = encode_prompt(s, prompts[i]);
    const DecodeResult r = decode(s.target, s.draft, prompt, config);
    if (prompts.size() > 1) out << "prompt " << i << '\n';
    out << "tokens:";
    for (Token t : r.output) out << ' ' << t;
    out << '\n';
    if (s.vocab) out << "text: " << s.vocab->decode(r.output) << '\n';
    out << "steps: " << r.stats.steps.size() << '\n'
        << "target_forwards: " << r.stats.target_forwards << '\n'
        << "draft_forwards: " << r.stats.draft_forwards << '\n'
        << "output_tokens: " << r.stats.output_tokens << '\n'
        << "input_tokens_fed: " << r.stats.input_tokens_fed << '\n'
        << "mat: " << mean_accepted_tokens(r.stats) << '\n';
    if (d.timing) {
      out << "tokens_per_second (toy backends, not comparable to real LLMs): "
          << static_cast<double>(r.stats.output_tokens) / r.stats.wall_seconds
          << '\n';
    }
  }
  return kExitOk;
}

std::vector<TokenSeq> synthetic_prompts(const Setup& s, std::size_t count,
                                        std::size_t length, std::uint64_t seed) {
  Rng rng(hash_combine(seed, 0x70726f6d7074ULL));
  std::vector<TokenSeq> prompts(count);
  for (auto& p : prompts) {
    while (p.size() < length) {
      const auto t = static_cast<Token>(rng.next_u64() % s.vocab_size);
      if (t != s.marker) p.push_back(t);
    }
  }
  return prompts;
}

int cmd_sweep(const ModelOptions& m, const DecodeOptions& d,
              const SweepOptions& w, std::ostream& out) {
  std::vector<std::string> prompt_texts;
  if (!d.prompt_file.empty()) prompt_texts = read_lines(d.prompt_file);
  std::vector<std::string> templates = w.templates;
  if (templates.empty()) templates.push_back(template_text(d));
  const Setup s = build_setup(m, templates, prompt_texts);

  SweepSpec spec;
  spec.alphas = w.alphas;
  spec.gammas = w.gammas;
  spec.strategies.clear();
  for (const auto& name : w.strategies) {
    spec.strategies.push_back(strategy_from_string(name));
  }
  spec.etas = w.etas;
  spec.seeds = w.seeds;
  for (const auto& text : templates) {
    spec.templates.push_back({text, resolve_template(s, text, d.prefix_len)});
  }
  if (prompt_texts.empty()) {
    spec.prompts = synthetic_prompts(s, w.num_prompts, w.prompt_len, d.seed);
  } else {
    for (const auto& text : prompt_texts) {
      spec.prompts.push_back(encode_prompt(s, text));
    }
  }
  if (!s.corpus_docs.empty() || m.target_model != "table") {
    throw Error(ErrorKind::kInvalidConfig,
                "sweep runs the table divergence pair; drop --corpus/--target-model");
  }
  spec.base_model.vocab_size = s.vocab_size;
  spec.base_model.seed = m.model_seed;
  spec.base_model.order = m.order;
  spec.beta = m.beta;
  spec.marker = s.marker;
  spec.temperature = d.temperature;
  spec.typical = TypicalConfig{d.epsilon, d.delta};
  spec.entropy_source = d.entropy_source == "fused" ? EntropySource::kFused
                                                    : EntropySource::kOriginal;
  spec.max_new_tokens = d.max_tokens;
  if (d.eos) spec.eos_token = resolve_word(s, *d.eos);
  spec.validate();

  const auto rows = run_sweep(spec, w.jobs);
  const auto format = w.format == "json" ? ReportFormat::kJson : ReportFormat::kCsv;
  emit_report(w.out, rows, format, d.timing);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
  out << "wrote " << rows.size() << " rows to " << w.out;
  if (failed) out << " (" << failed << " cells failed)";
  out << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Speculative decoding with reflective verification on toy "
               "backends"};
  app.set_config("--config", "", "TOML/INI file supplying flag values");
  app.require_subcommand(1);

  ModelOptions model;
  DecodeOptions decode_opts;
  SweepOptions sweep_opts;

  auto* decode_cmd = app.add_subcommand("decode", "Decode prompts and print stats");
  add_model_flags(decode_cmd, model);
  add_decode_flags(decode_cmd, decode_opts);
  auto* prompt_opt =
      decode_cmd->add_option("--prompt", decode_opts.prompt, "Prompt text");
  decode_cmd
      ->add_option("--prompt-file", decode_opts.prompt_file,
                   "Prompt set, one prompt per line")
      ->check(CLI::ExistingFile)
      ->excludes(prompt_opt);
  decode_cmd->add_flag("--check-causality", decode_opts.check_causality,
                       "Recompute draft-segment logits each step and fail on drift");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a configuration grid");
  add_model_flags(sweep_cmd, model);
  add_decode_flags(sweep_cmd, decode_opts);
  sweep_cmd
      ->add_option("--prompt-file", decode_opts.prompt_file,
                   "Prompt set, one prompt per line")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--alphas", sweep_opts.alphas, "Alpha grid")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sweep_cmd->add_option("--gammas", sweep_opts.gammas, "Gamma grid")
      ->delimiter(',')
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}))
      ->capture_default_str();
  sweep_cmd->add_option("--strategies", sweep_opts.strategies, "Strategy grid")
      ->delimiter(',')
      ->check(CLI::IsMember({"exact", "specsample", "typical"}))
      ->capture_default_str();
  sweep_cmd->add_option("--etas", sweep_opts.etas, "Draft noise grid")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sweep_cmd->add_option("--templates", sweep_opts.templates,
                        "Template grid (inline placeholder texts)");
  sweep_cmd->add_option("--seeds", sweep_opts.seeds, "Seed grid")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--num-prompts", sweep_opts.num_prompts,
                        "Synthetic prompts when no --prompt-file")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_cmd->add_option("--prompt-len", sweep_opts.prompt_len,
                        "Length of each synthetic prompt")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_opts.out, "Report path")->required();
  sweep_cmd->add_option("--format", sweep_opts.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep_opts.jobs,
                        "Parallel cells (0 = all cores)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  auto* selftest_cmd =
      app.add_subcommand("selftest", "Run the verification oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*selftest_cmd) {
      bool ok = true;
      for (const auto& c : run_selftest(out)) ok = ok && c.passed;
      return ok ? kExitOk : kExitRuntime;
    }
    if (*decode_cmd) {
      if (decode_opts.prompt.empty() && decode_opts.prompt_file.empty()) {
        err << "decode: one of --prompt / --prompt-file is required\n";
        return kExitUsage;
      }
      return cmd_decode(model, decode_opts, out);
    }
    return cmd_sweep(model, decode_opts, sweep_opts, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool usage = e.kind() == ErrorKind::kInvalidConfig ||
                       e.kind() == ErrorKind::kInvalidToken;
    return usage ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace refverify
