#include "gparse/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "gparse/corpus.hpp"
#include "gparse/error.hpp"
#include "gparse/learning.hpp"
#include "gparse/metrics.hpp"
#include "gparse/oracle.hpp"
#include "gparse/supertags.hpp"

namespace gparse {

using nlohmann::json;

std::string DecoderSpec::str() const {
  switch (kind) {
    case DecoderKind::AStar: return "astar";
    case DecoderKind::BestFirst: return "best_first";
    case DecoderKind::Beam: return "beam:" + std::to_string(n);
    case DecoderKind::Rerank: return "rerank:" + std::to_string(n);
  }
  return "?";
}

namespace {

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const std::string s(text);
  std::size_t used = 0;
  try {
    const long long v = std::stoll(s, &used);
    if (v <= 0 || used != s.size()) throw std::invalid_argument(s);
    value = static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(std::string(what) + " must be a positive integer, got '" + s + "'");
  }
  return value;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

DecoderSpec parse_decoder_spec(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  DecoderSpec spec;
  if (name == "astar") {
    spec.kind = DecoderKind::AStar;
  } else if (name == "best_first") {
    spec.kind = DecoderKind::BestFirst;
  } else if (name == "beam" || name == "rerank") {
    spec.kind = name == "beam" ? DecoderKind::Beam : DecoderKind::Rerank;
    if (colon == std::string_view::npos) throw ConfigError("decoder '" + std::string(name) + "' needs a size, e.g. " + std::string(name) + ":4");
    spec.n = parse_count(text.substr(colon + 1), "decoder size");
    return spec;
  } else {
    throw ConfigError("unknown decoder '" + std::string(text) + "' (expected astar, best_first, beam:N or rerank:N)");
  }
  if (colon != std::string_view::npos) throw ConfigError("decoder '" + std::string(name) + "' takes no size");
  return spec;
}

DecodeResult run_decoder(const DecoderSpec& spec, const SearchProblem& problem, const DecodeOptions& options) {
  switch (spec.kind) {
    case DecoderKind::AStar: return decode_astar(problem, options);
    case DecoderKind::BestFirst: return decode_best_first(problem, options);
    case DecoderKind::Beam: return decode_beam(problem, spec.n);
    case DecoderKind::Rerank: return decode_rerank(problem, spec.n);
  }
  throw InternalError("run_decoder: bad decoder kind");
}

DecodeLimits parse_limits(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw ConfigError("--limits expects forest,agenda,units");
  return {parse_count(parts[0], "forest limit"), parse_count(parts[1], "agenda limit"),
          parse_count(parts[2], "unit limit")};
}

namespace {

struct CommonOptions {
  std::string lexicon;
  std::string unary_rules;
  std::string supertags;
  std::string roots = "S,NP";
  std::string limits;
  bool composition = false;
  int jobs = 1;
  std::uint64_t seed = 1;
};

void add_grammar_options(CLI::App& app, CommonOptions& o) {
  app.add_option("--lexicon", o.lexicon, "Lexicon file: word<TAB>category<TAB>logprob");
  app.add_option("--unary-rules", o.unary_rules, "Unary rule file: from<TAB>to (default N -> NP)");
  app.add_option("--roots", o.roots, "Comma-separated root categories")->capture_default_str();
  app.add_flag("--composition", o.composition, "Enable forward and backward composition");
}

void add_decode_options(CLI::App& app, CommonOptions& o) {
  app.add_option("--limits", o.limits, "Decode limits: forest,agenda,units");
  app.add_option("--jobs", o.jobs, "Sentences decoded in parallel")->capture_default_str()->check(CLI::PositiveNumber);
}

Grammar make_grammar(const CommonOptions& o) {
  UnaryTable unary = o.unary_rules.empty() ? UnaryTable::defaults() : UnaryTable::load(o.unary_rules);
  return Grammar(GrammarConfig{o.composition}, std::move(unary));
}

DecodeLimits make_limits(const CommonOptions& o) { return o.limits.empty() ? DecodeLimits{} : parse_limits(o.limits); }

Lexicon require_lexicon(const CommonOptions& o) {
  if (o.lexicon.empty()) throw ConfigError("--lexicon is required");
  return Lexicon::load(o.lexicon);
}

std::vector<TaggedSentence> load_inputs(const CommonOptions& o, const std::string& input) {
  if (!o.supertags.empty()) {
    if (!input.empty()) throw ConfigError("give either --supertags or --input, not both");
    return load_supertag_file(o.supertags);
  }
  if (input.empty()) throw ConfigError("one of --input or --supertags is required");
  const Lexicon lexicon = require_lexicon(o);
  std::ifstream in(input);
  if (!in) throw DataError("cannot open input " + input);
  std::vector<TaggedSentence> out;
  for (auto& words : read_sentences(in)) {
    auto table = SupertagTable::from_lexicon(words, lexicon);
    out.push_back({std::move(words), std::move(table)});
  }
  return out;
}

std::optional<ParameterStore> load_model(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return ParameterStore::load(path);
}

class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw DataError("cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---- parse ----

struct ParseOptions {
  CommonOptions common;
  std::string input;
  std::string model_in;
  std::string output;
  std::string decoder = "astar";
  std::size_t beam = 0;
  std::size_t nbest = 0;
  bool lazy = true;
  bool backoff = true;
  bool timing = false;
  double heuristic_offset = 0.0;
};

DecoderSpec decoder_from(const std::string& name, std::size_t beam, std::size_t nbest) {
  if (name == "beam" && beam > 0) return {DecoderKind::Beam, beam};
  if (name == "rerank" && nbest > 0) return {DecoderKind::Rerank, nbest};
  return parse_decoder_spec(name);
}

json stats_json(const DecodeResult& r, bool timing) {
  json s = {{"nodes_explored", r.stats.nodes_explored},
            {"edges_pushed", r.stats.edges_pushed},
            {"global_evals", r.stats.global_evals}};
  if (timing) s["wall_seconds"] = r.stats.wall_seconds;
  return s;
}

json result_json(std::size_t index, const std::vector<std::string>& words, const DecodeResult& r, bool timing) {
  json j;
  j["index"] = index;
  j["words"] = words;
  j["certificate"] = std::string(certificate_name(r.certificate));
  if (r.parse.empty()) {
    j["parse"] = nullptr;
    j["score"] = nullptr;
  } else {
    j["parse"] = r.parse.to_bracketed();
    j["score"] = r.score;
  }
  j["backoff"] = r.stats.used_backoff_model;
  j["stats"] = stats_json(r, timing);
  return j;
}

int cmd_parse(const ParseOptions& o, std::ostream& out) {
  const Grammar grammar = make_grammar(o.common);
  const RootSet roots = RootSet::parse(o.common.roots);
  const auto inputs = load_inputs(o.common, o.input);
  const auto model = load_model(o.model_in);
  const auto spec = decoder_from(o.decoder, o.beam, o.nbest);
  DecodeOptions options;
  options.limits = make_limits(o.common);
  options.lazy = o.lazy;
  options.backoff = o.backoff;
  options.heuristic_offset = o.heuristic_offset;

  std::vector<std::string> lines(inputs.size());
  parallel_for(inputs.size(), o.common.jobs, [&](std::size_t i) {
    SearchProblem problem{&grammar, &inputs[i].table, inputs[i].words, roots, model ? &*model : nullptr};
    const auto r = run_decoder(spec, problem, options);
    lines[i] = result_json(i, inputs[i].words, r, o.timing).dump();
  });
  OutputFile file(o.output, out);
  for (const auto& l : lines) file.stream() << l << '\n';
  return exit_code::kOk;
}

// ---- evaluate ----

struct EvaluateOptions {
  std::string predictions;
  std::string gold;
};

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const auto gold = load_corpus(o.gold);
  std::ifstream in(o.predictions);
  if (!in) throw DataError("cannot open predictions " + o.predictions);
  EvalSummary summary;
  std::size_t optimal = 0;
  double explored = 0.0;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("prediction " + std::to_string(index) + ": " + e.what());
    }
    if (index >= gold.size()) {
      throw DataError("misaligned files: prediction " + std::to_string(index) + " has no gold record");
    }
    if (j.contains("words") && j["words"].get<std::vector<std::string>>() != gold[index].words) {
      throw DataError("misaligned files: sentence " + std::to_string(index) + " differs between predictions and gold");
    }
    Tree predicted;
    if (j.contains("parse") && !j["parse"].is_null()) predicted = Tree::parse_bracketed(j["parse"].get<std::string>());
    summary.add(predicted, gold[index].gold);
    if (j.value("certificate", "") == "OPTIMAL") ++optimal;
    if (j.contains("stats")) explored += j["stats"].value("nodes_explored", 0.0);
    ++index;
  }
  if (index != gold.size()) {
    throw DataError("misaligned files: gold sentence " + std::to_string(index) + " has no prediction");
  }
  const double n = static_cast<double>(std::max<std::size_t>(index, 1));
  out << "sentences      " << index << '\n';
  out << "labeled_f1     " << fixed(summary.f1()) << '\n';
  out << "precision      " << fixed(100.0 * summary.spans().precision()) << '\n';
  out << "recall         " << fixed(100.0 * summary.spans().recall()) << '\n';
  out << "supertag_acc   " << fixed(summary.supertag_accuracy()) << '\n';
  out << "exact_match    " << fixed(summary.exact_match()) << '\n';
  out << "optimal_pct    " << fixed(100.0 * static_cast<double>(optimal) / n) << '\n';
  out << "mean_explored  " << fixed(explored / n) << '\n';
  return exit_code::kOk;
}

// ---- verify ----

struct VerifyOptions {
  CommonOptions common;
  std::string input;
  std::string model_in;
  double heuristic_offset = 0.0;
  double tolerance = 1e-9;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  const Grammar grammar = make_grammar(o.common);
  const RootSet roots = RootSet::parse(o.common.roots);
  const auto inputs = load_inputs(o.common, o.input);
  const auto model = load_model(o.model_in);
  DecodeLimits limits = make_limits(o.common);

  std::vector<std::string> lines(inputs.size());
  std::vector<int> status(inputs.size(), 0);  // 0 ok, 1 discrepancy, 2 skipped
  parallel_for(inputs.size(), o.common.jobs, [&](std::size_t i) {
    const auto& s = inputs[i];
    if (s.table.length() > kEnumerationCap) {
      status[i] = 2;
      lines[i] = std::to_string(i) + " skipped: " + std::to_string(s.table.length()) + " tokens exceed the cap of " +
                 std::to_string(kEnumerationCap);
      return;
    }
    SearchProblem full{&grammar, &s.table, s.words, roots, model ? &*model : nullptr};
    SearchProblem local{&grammar, &s.table, s.words, roots, nullptr};
    DecodeOptions options;
    options.limits = limits;
    options.backoff = false;
    options.heuristic_offset = o.heuristic_offset;
    std::vector<std::string> problems;

    options.lazy = false;
    const auto eager = decode_astar(full, options);
    const auto all = enumerate_parses(full);
    if (all.empty()) {
      if (eager.certificate != Certificate::Failed) problems.push_back("A* found a parse the enumeration does not have");
    } else {
      double best = all.front().score;
      for (const auto& t : all) best = std::max(best, t.score);
      if (eager.certificate != Certificate::Optimal) {
        problems.push_back(std::string("A* certificate ") + std::string(certificate_name(eager.certificate)));
      } else if (std::fabs(eager.score - best) > o.tolerance) {
        problems.push_back("A* score " + fixed(eager.score, 12) + " vs enumeration max " + fixed(best, 12));
      }
    }

    const auto cky = cky_viterbi(local);
    const auto backbone = decode_astar(local, options);
    if (cky.has_value() != (backbone.certificate == Certificate::Optimal)) {
      problems.push_back("CKY and local A* disagree on parseability");
    } else if (cky && std::fabs(cky->score - backbone.score) > o.tolerance) {
      problems.push_back("local A* score " + fixed(backbone.score, 12) + " vs CKY " + fixed(cky->score, 12));
    }

    options.lazy = true;
    const auto lazy = decode_astar(full, options);
    if (lazy.certificate != eager.certificate || lazy.parse != eager.parse ||
        (!lazy.parse.empty() && std::fabs(lazy.score - eager.score) > o.tolerance)) {
      problems.push_back("lazy and eager decodes differ");
    }

    if (problems.empty()) {
      lines[i] = std::to_string(i) + " ok";
    } else {
      status[i] = 1;
      lines[i] = std::to_string(i) + " FAIL:";
      for (const auto& p : problems) lines[i] += " " + p + ";";
    }
  });

  std::size_t failures = 0;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (status[i] == 2) {
      err << "notice: sentence " << lines[i] << '\n';
      ++skipped;
      continue;
    }
    failures += status[i] == 1;
    out << lines[i] << '\n';
  }
  out << "verified " << (inputs.size() - skipped) << " sentences, " << failures << " discrepancies, " << skipped
      << " skipped\n";
  return failures == 0 ? exit_code::kOk : exit_code::kVerify;
}

// ---- bench ----

struct BenchOptions {
  CommonOptions common;
  std::string corpus;
  std::string model_in;
  std::string decoders = "astar,best_first,beam:2,beam:4,rerank:10";
  bool lazy = true;
  bool timing = false;
};

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
  const Grammar grammar = make_grammar(o.common);
  const RootSet roots = RootSet::parse(o.common.roots);
  const Lexicon lexicon = require_lexicon(o.common);
  const auto corpus = load_corpus(o.corpus);
  const auto model = load_model(o.model_in);
  std::vector<SupertagTable> tables;
  for (const auto& r : corpus) tables.push_back(SupertagTable::from_lexicon(r.words, lexicon));

  std::vector<DecoderSpec> specs;
  for (const auto& name : split(o.decoders, ',')) specs.push_back(parse_decoder_spec(name));
  DecodeOptions options;
  options.limits = make_limits(o.common);
  options.lazy = o.lazy;

  auto run_all = [&](const DecoderSpec& spec, std::vector<DecodeResult>& results, double& seconds) {
    results.assign(corpus.size(), {});
    const auto start = std::chrono::steady_clock::now();
    parallel_for(corpus.size(), o.common.jobs, [&](std::size_t i) {
      SearchProblem problem{&grammar, &tables[i], corpus[i].words, roots, model ? &*model : nullptr};
      try {
        results[i] = run_decoder(spec, problem, options);
      } catch (const DataError& e) {
        results[i] = DecodeResult{};
      }
    });
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  std::vector<DecodeResult> reference;
  double reference_seconds = 0.0;
  run_all(DecoderSpec{}, reference, reference_seconds);

  out << std::left << std::setw(12) << "decoder" << std::right << std::setw(9) << "f1" << std::setw(14) << "f1_no_backoff"
      << std::setw(10) << "parsed%" << std::setw(14) << "mean_explored" << std::setw(13) << "mean_evals"
      << std::setw(13) << "below_astar" << std::setw(13) << "above_astar";
  if (o.timing) out << std::setw(10) << "rel_time";
  out << '\n';
  for (const auto& spec : specs) {
    std::vector<DecodeResult> results;
    double seconds = 0.0;
    if (spec.kind == DecoderKind::AStar) {
      results = reference;
      seconds = reference_seconds;
    } else {
      run_all(spec, results, seconds);
    }
    EvalSummary all;
    EvalSummary no_backoff;
    std::size_t parsed = 0;
    std::size_t below = 0;
    std::size_t above = 0;
    double explored = 0.0;
    double evals = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& r = results[i];
      all.add(r.parse, corpus[i].gold);
      const bool own = r.certificate != Certificate::Failed && !r.stats.used_backoff_model;
      no_backoff.add(own ? r.parse : Tree{}, corpus[i].gold);
      parsed += own;
      explored += static_cast<double>(r.stats.nodes_explored);
      evals += static_cast<double>(r.stats.global_evals);
      const auto& ref = reference[i];
      if (!r.parse.empty() && !ref.parse.empty()) {
        if (r.score < ref.score - 1e-9) ++below;
        if (r.score > ref.score + 1e-9) ++above;
      }
    }
    const double n = static_cast<double>(std::max<std::size_t>(corpus.size(), 1));
    out << std::left << std::setw(12) << spec.str() << std::right << std::setw(9) << fixed(all.f1()) << std::setw(14)
        << fixed(no_backoff.f1()) << std::setw(10) << fixed(100.0 * static_cast<double>(parsed) / n) << std::setw(14)
        << fixed(explored / n) << std::setw(13) << fixed(evals / n) << std::setw(13) << below << std::setw(13)
        << above;
    if (o.timing) out << std::setw(10) << fixed(reference_seconds > 0 ? seconds / reference_seconds : 1.0);
    out << '\n';
    if (above > 0) {
      err << "note: " << spec.str() << " beat A* on " << above << " sentences where A* backed off\n";
    }
  }
  return exit_code::kOk;
}

// ---- train ----

struct TrainOptions {
  CommonOptions common;
  std::string corpus;
  std::string dev;
  std::string model_in;
  std::string model_out;
  std::string metrics_out;
  std::string update = "all";
  std::string dims = "50,16,64";
  int epochs = 30;
  double dropout = 0.4;
  double learning_rate = 1e-3;
  std::size_t train_forest_limit = 2000;
};

ModelDims parse_dims(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw ConfigError("--dims expects word,category,hidden");
  return {static_cast<int>(parse_count(parts[0], "word dimension")),
          static_cast<int>(parse_count(parts[1], "category dimension")),
          static_cast<int>(parse_count(parts[2], "hidden dimension"))};
}

std::vector<TrainExample> examples(const std::vector<CorpusRecord>& records, const Lexicon& lexicon) {
  std::vector<TrainExample> out;
  for (const auto& r : records) out.push_back({r.words, SupertagTable::from_lexicon(r.words, lexicon), r.gold});
  return out;
}

ParameterStore fresh_model(const std::vector<CorpusRecord>& corpus, const Lexicon& lexicon, const Grammar& grammar,
                           const ModelDims& dims, std::uint64_t seed) {
  std::set<std::string> words;
  std::set<std::string> categories;
  for (const auto& r : corpus) {
    words.insert(r.words.begin(), r.words.end());
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(r.gold.size()); ++i) {
      categories.insert(r.gold.node(i).category.str());
    }
  }
  for (const auto& [w, entries] : lexicon.entries()) {
    for (const auto& e : entries) {
      categories.insert(e.category.str());
      for (const auto& u : grammar.unary_rules(e.category)) categories.insert(u.category.str());
    }
  }
  Vocabulary wv;
  for (const auto& w : words) wv.add(w);
  Vocabulary cv;
  for (const auto& c : categories) cv.add(c);
  auto params = ParameterStore::create(dims, std::move(wv), std::move(cv));
  params.initialize(seed);
  return params;
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  if (o.corpus.empty()) throw ConfigError("--corpus is required");
  const Grammar grammar = make_grammar(o.common);
  const RootSet roots = RootSet::parse(o.common.roots);
  const Lexicon lexicon = require_lexicon(o.common);
  const auto corpus = load_corpus(o.corpus);
  const auto dev = o.dev.empty() ? std::vector<CorpusRecord>{} : load_corpus(o.dev);
  const auto train_set = examples(corpus, lexicon);
  const auto dev_set = examples(dev, lexicon);

  std::vector<UpdateKind> kinds;
  for (const auto& k : split(o.update, ',')) kinds.push_back(parse_update_kind(k));

  TrainConfig config;
  config.epochs = o.epochs;
  config.dropout = o.dropout;
  config.seed = o.common.seed;
  config.adam.learning_rate = o.learning_rate;
  config.limits.max_forest_size = o.train_forest_limit;
  config.dev_limits = make_limits(o.common);
  config.dev_jobs = o.common.jobs;

  OutputFile metrics(o.metrics_out, out);
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    config.update = kinds[k];
    ParameterStore params = o.model_in.empty()
                                ? fresh_model(corpus, lexicon, grammar, parse_dims(o.dims), o.common.seed)
                                : ParameterStore::load(o.model_in);
    const auto name = update_name(kinds[k]);
    const auto result = train(train_set, dev_set, grammar, roots, params, config, [&](const EpochMetrics& m) {
      metrics.stream() << "update=" << name << " epoch=" << m.epoch << " loss=" << fixed(m.mean_loss, 6)
                       << " violations=" << fixed(m.mean_violations, 4) << " dev_f1=" << fixed(m.dev_f1)
                       << " dev_exact=" << fixed(m.dev_exact) << " updates=" << m.updates
                       << " skipped=" << m.skipped << (m.aborted ? " aborted=1" : "") << '\n';
    });
    err << "update=" << name << ": kept epoch " << result.best_epoch << " (dev F1 " << fixed(result.best_dev_f1)
        << ")\n";
    if (!o.model_out.empty()) {
      const std::string path = kinds.size() == 1 ? o.model_out : o.model_out + "." + std::string(name);
      params.save(path);
    }
  }
  return exit_code::kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"A* CCG parsing with a global recursive model"};
  app.require_subcommand(1);

  ParseOptions parse_o;
  auto* parse = app.add_subcommand("parse", "Decode sentences and print one JSON record per sentence");
  add_grammar_options(*parse, parse_o.common);
  add_decode_options(*parse, parse_o.common);
  parse->add_option("--supertags", parse_o.common.supertags, "Supertag file (replaces --input and --lexicon)");
  parse->add_option("--input", parse_o.input, "Sentences, one per line");
  parse->add_option("--model-in", parse_o.model_in, "Model file; without it global scoring is disabled");
  parse->add_option("--output", parse_o.output, "Write records here instead of standard output");
  parse->add_option("--decoder", parse_o.decoder, "astar, best_first, beam[:N] or rerank[:N]")->capture_default_str();
  parse->add_option("--beam", parse_o.beam, "Beam width for --decoder beam");
  parse->add_option("--nbest", parse_o.nbest, "List size for --decoder rerank");
  parse->add_flag("--lazy,!--no-lazy", parse_o.lazy, "Split edges into local and global halves")->capture_default_str();
  parse->add_flag("!--no-backoff", parse_o.backoff, "Report FAILED instead of backing off at a limit");
  parse->add_flag("--timing", parse_o.timing, "Include wall-clock time in the stats");
  parse->add_option("--heuristic-offset", parse_o.heuristic_offset, "Test hook: added to h below the full span");

  TrainOptions train_o;
  auto* trn = app.add_subcommand("train", "Train the global model from gold derivations");
  add_grammar_options(*trn, train_o.common);
  add_decode_options(*trn, train_o.common);
  trn->add_option("--corpus", train_o.corpus, "Training corpus")->required();
  trn->add_option("--dev", train_o.dev, "Development corpus for early stopping");
  trn->add_option("--model-in", train_o.model_in, "Initial model");
  trn->add_option("--model-out", train_o.model_out, "Where to write the best model");
  trn->add_option("--metrics-out", train_o.metrics_out, "Per-epoch metrics log (default standard output)");
  trn->add_option("--update", train_o.update, "Comma list of greedy, max, all")->capture_default_str();
  trn->add_option("--epochs", train_o.epochs, "Training epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
  trn->add_option("--seed", train_o.common.seed, "Random seed")->capture_default_str();
  trn->add_option("--dropout", train_o.dropout, "Word-embedding dropout")->capture_default_str();
  trn->add_option("--lr", train_o.learning_rate, "ADAM step size")->capture_default_str();
  trn->add_option("--dims", train_o.dims, "word,category,hidden sizes of a new model")->capture_default_str();
  trn->add_option("--train-forest-limit", train_o.train_forest_limit, "Forest limit during training")
      ->capture_default_str();

  EvaluateOptions eval_o;
  auto* eval = app.add_subcommand("evaluate", "Score parse records against gold derivations");
  eval->add_option("--predictions", eval_o.predictions, "Output of the parse command")->required();
  eval->add_option("--gold", eval_o.gold, "Gold corpus")->required();

  VerifyOptions verify_o;
  auto* verify = app.add_subcommand("verify", "Check A* against the exhaustive and CKY oracles");
  add_grammar_options(*verify, verify_o.common);
  add_decode_options(*verify, verify_o.common);
  verify->add_option("--supertags", verify_o.common.supertags, "Supertag file (replaces --input and --lexicon)");
  verify->add_option("--input", verify_o.input, "Sentences, one per line");
  verify->add_option("--model-in", verify_o.model_in, "Model file");
  verify->add_option("--heuristic-offset", verify_o.heuristic_offset, "Test hook: added to h below the full span");

  BenchOptions bench_o;
  auto* bench = app.add_subcommand("bench", "Compare decoders on a gold corpus");
  add_grammar_options(*bench, bench_o.common);
  add_decode_options(*bench, bench_o.common);
  bench->add_option("--corpus", bench_o.corpus, "Gold corpus")->required();
  bench->add_option("--model-in", bench_o.model_in, "Model file");
  bench->add_option("--decoders", bench_o.decoders, "Comma list of decoders")->capture_default_str();
  bench->add_flag("--lazy,!--no-lazy", bench_o.lazy, "Lazy global scoring for A*")->capture_default_str();
  bench->add_flag("--timing", bench_o.timing, "Add a wall-clock column relative to A*");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? exit_code::kOk : exit_code::kUsage;
  }

  try {
    if (*parse) return cmd_parse(parse_o, out);
    if (*trn) return cmd_train(train_o, out, err);
    if (*eval) return cmd_evaluate(eval_o, out);
    if (*verify) return cmd_verify(verify_o, out, err);
    if (*bench) return cmd_bench(bench_o, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kData;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  }
  return exit_code::kUsage;
}

}  // namespace gparse
