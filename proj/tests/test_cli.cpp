#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gparse/cli.hpp"
#include "gparse/corpus.hpp"
#include "gparse/error.hpp"
#include "gparse/metrics.hpp"
#include "gparse/synthetic.hpp"
#include "json.hpp"

using namespace gparse;
namespace fs = std::filesystem;

namespace {

const std::string kData = GPARSE_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gparse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("gparse_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& contents = {}) const {
    auto p = (path_ / name).string();
    if (!contents.empty()) std::ofstream(p) << contents;
    return p;
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<nlohmann::json> records(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

// Right-branching tree over n tokens with the given labels, leaves first.
Tree chain_tree(const std::vector<std::string>& leaves, const std::vector<std::string>& inner, bool unary_top) {
  Tree t;
  std::vector<std::int32_t> ids;
  for (std::size_t i = 0; i < leaves.size(); ++i) ids.push_back(t.add_leaf(static_cast<std::int32_t>(i), parse_category(leaves[i])));
  std::int32_t right = ids.back();
  for (std::size_t k = 0; k + 1 < leaves.size(); ++k) {
    std::size_t i = leaves.size() - 2 - k;
    right = t.add_binary(parse_category(inner[k]), RuleKind::ForwardApply, ids[i], right);
  }
  if (unary_top) t.add_unary(parse_category("S"), right);
  return t;
}

Tree random_tree(std::mt19937_64& rng, std::int32_t start, std::int32_t end, Tree& t, std::int32_t* root) {
  static const char* cats[] = {"A", "B", "C"};
  auto cat = [&] { return parse_category(cats[rng() % 3]); };
  if (end - start == 1) {
    *root = t.add_leaf(start, cat());
  } else {
    std::int32_t split = start + 1 + static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(end - start - 1));
    std::int32_t l, r;
    random_tree(rng, start, split, t, &l);
    random_tree(rng, split, end, t, &r);
    *root = t.add_binary(cat(), RuleKind::ForwardApply, l, r);
  }
  if (rng() % 5 == 0) *root = t.add_unary(cat(), *root);
  return t;
}

}  // namespace

TEST_CASE("labeled F1 on a 10-span example") {
  Tree gold = chain_tree({"A", "B", "C", "D", "E"}, {"P", "Q", "R", "T"}, true);
  Tree pred = chain_tree({"A", "X", "C", "D", "E"}, {"P", "Q", "Y", "T"}, true);
  REQUIRE(gold.size() == 10);
  auto c = labeled_span_counts(pred, gold);
  CHECK(c.matched == 8);
  CHECK(c.predicted == 10);
  CHECK(c.gold == 10);
  CHECK(c.precision() == doctest::Approx(0.8));
  CHECK(c.recall() == doctest::Approx(0.8));
  CHECK(c.f1() == doctest::Approx(80.0));
  CHECK(supertag_matches(pred, gold) == 4);

  EvalSummary s;
  s.add(gold, gold);
  CHECK(s.f1() == doctest::Approx(100.0));
  CHECK(s.exact_match() == doctest::Approx(100.0));
  s.add(pred, gold);
  CHECK(s.exact_match() == doctest::Approx(50.0));
  CHECK(s.supertag_accuracy() == doctest::Approx(90.0));
  s.add(Tree{}, gold);
  CHECK(s.spans().predicted == 20);
  CHECK(s.spans().gold == 30);
}

TEST_CASE("span counts agree with a naive multiset intersection") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    std::int32_t n = 1 + static_cast<std::int32_t>(rng() % 7);
    Tree a, b;
    std::int32_t ra, rb;
    random_tree(rng, 0, n, a, &ra);
    random_tree(rng, 0, n, b, &rb);
    std::map<std::string, int> ca, cb;
    for (const auto& nd : a.nodes()) ca[std::to_string(nd.span.start) + ":" + std::to_string(nd.span.end) + nd.category.str()]++;
    for (const auto& nd : b.nodes()) cb[std::to_string(nd.span.start) + ":" + std::to_string(nd.span.end) + nd.category.str()]++;
    std::size_t common = 0;
    for (const auto& [k, v] : ca) {
      if (cb.count(k)) common += static_cast<std::size_t>(std::min(v, cb[k]));
    }
    auto c = labeled_span_counts(a, b);
    CHECK(c.matched == common);
    CHECK(c.predicted == a.size());
    CHECK(c.gold == b.size());
  }
}

TEST_CASE("corpus files round trip and report bad records") {
  PlantedCorpus pc = planted_corpus(3, 5, 0);
  std::ostringstream out;
  write_corpus(out, pc.train);
  std::istringstream in(out.str());
  auto back = read_corpus(in);
  REQUIRE(back.size() == pc.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].words == pc.train[i].words);
    CHECK(back[i].gold == pc.train[i].gold);
  }

  std::istringstream bad("a b\n(NP FA (NP/N LEX 0) (N LEX 1))\n\na b c\n(NP FA (NP/N LEX 0) (N LEX 1))\n");
  try {
    read_corpus(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }

  std::istringstream sentences("a b\n\n  c  d e \n");
  auto s = read_sentences(sentences);
  REQUIRE(s.size() == 2);
  CHECK(s[1] == std::vector<std::string>{"c", "d", "e"});
}

TEST_CASE("decoder specs and limits parse") {
  CHECK(parse_decoder_spec("beam:4").kind == DecoderKind::Beam);
  CHECK(parse_decoder_spec("beam:4").n == 4);
  CHECK(parse_decoder_spec("rerank:10").str() == "rerank:10");
  CHECK(parse_decoder_spec("best_first").kind == DecoderKind::BestFirst);
  CHECK_THROWS_AS(parse_decoder_spec("beam:0"), ConfigError);
  CHECK_THROWS_AS(parse_decoder_spec("viterbi"), ConfigError);
  auto l = parse_limits("10,20,30");
  CHECK(l.max_forest_size == 10);
  CHECK(l.max_agenda_size == 20);
  CHECK(l.max_tree_units == 30);
  CHECK_THROWS_AS(parse_limits("10,0,30"), ConfigError);
  CHECK_THROWS_AS(parse_limits("10,20"), ConfigError);
}

TEST_CASE("parallel_for keeps every index and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 7) throw DataError("boom");
  }), DataError);
}

TEST_CASE("parse reproduces the fruit-flies derivation") {
  auto r = cli({"parse", "--lexicon", kData + "/fruit_flies/lexicon.tsv", "--unary-rules", kData + "/fruit_flies/unary.tsv",
                "--input", kData + "/fruit_flies/sentences.txt", "--model-in", kData + "/fruit_flies/model.json"});
  REQUIRE(r.code == 0);
  auto recs = records(r.out);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["certificate"] == "OPTIMAL");
  CHECK(recs[0]["parse"] == fruit_flies_expected());
  CHECK(recs[0]["backoff"] == false);
  CHECK(recs[0]["stats"]["nodes_explored"].get<int>() > 0);
  CHECK_FALSE(recs[0]["stats"].contains("wall_seconds"));
}

TEST_CASE("parse handles empty input, failures and the lazy flag") {
  TempDir tmp;
  auto empty = tmp.file("empty.txt");
  std::ofstream(empty).close();
  auto r = cli({"parse", "--lexicon", kData + "/toy/lexicon.tsv", "--input", empty});
  CHECK(r.code == 0);
  CHECK(r.out.empty());

  auto lex = tmp.file("lex.tsv", "x\tNP\t-0.1\n");
  auto in = tmp.file("in.txt", "x x\nx\n");
  r = cli({"parse", "--lexicon", lex, "--input", in});
  REQUIRE(r.code == 0);
  auto recs = records(r.out);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0]["certificate"] == "FAILED");
  CHECK(recs[0]["parse"].is_null());
  CHECK(recs[1]["certificate"] == "OPTIMAL");

  std::vector<std::string> base = {"parse", "--lexicon", kData + "/toy/lexicon.tsv", "--composition", "--input",
                                   kData + "/toy/sentences.txt", "--model-in", kData + "/toy/model.json"};
  auto lazy_args = base;
  lazy_args.push_back("--lazy");
  auto eager_args = base;
  eager_args.push_back("--no-lazy");
  auto lazy = records(cli(lazy_args).out);
  auto eager = records(cli(eager_args).out);
  REQUIRE(lazy.size() == eager.size());
  REQUIRE(lazy.size() > 100);
  std::size_t fewer = 0;
  for (std::size_t i = 0; i < lazy.size(); ++i) {
    CHECK(lazy[i]["parse"] == eager[i]["parse"]);
    CHECK(lazy[i]["score"].get<double>() == doctest::Approx(eager[i]["score"].get<double>()).epsilon(1e-12));
    CHECK(lazy[i]["stats"]["global_evals"].get<int>() <= eager[i]["stats"]["global_evals"].get<int>());
    fewer += lazy[i]["stats"]["global_evals"].get<int>() < eager[i]["stats"]["global_evals"].get<int>();
  }
  CHECK(fewer > 0);
}

TEST_CASE("exit codes follow the error class") {
  CHECK(cli({}).code == exit_code::kUsage);
  CHECK(cli({"parse", "--bogus"}).code == exit_code::kUsage);
  CHECK(cli({"parse", "--lexicon", "/nonexistent/lexicon.tsv", "--input", "/nonexistent/in.txt"}).code ==
        exit_code::kUsage);
  TempDir tmp;
  auto lex = tmp.file("lex.tsv", "x\tNP\tpositive\n");
  auto in = tmp.file("in.txt", "x\n");
  CHECK(cli({"parse", "--lexicon", lex, "--input", in}).code == exit_code::kData);
  auto good_lex = tmp.file("good.tsv", "x\tNP\t-0.1\n");
  auto oov = tmp.file("oov.txt", "x y\n");
  auto r = cli({"parse", "--lexicon", good_lex, "--input", oov});
  CHECK(r.code == exit_code::kData);
  CHECK(r.err.find("'y'") != std::string::npos);
  auto corpus = tmp.file("corpus.txt", "x\n(NP LEX 0\n\n");
  CHECK(cli({"train", "--lexicon", good_lex, "--corpus", corpus, "--epochs", "1"}).code == exit_code::kData);
}

TEST_CASE("verify passes the toy suite and catches a broken heuristic") {
  std::vector<std::string> args = {"verify", "--lexicon", kData + "/toy/lexicon.tsv", "--composition", "--input",
                                   kData + "/toy/sentences.txt", "--model-in", kData + "/toy/model.json"};
  auto ok = cli(args);
  CHECK(ok.code == exit_code::kOk);
  CHECK(ok.out.find(" 0 discrepancies") != std::string::npos);

  auto raised = args;
  raised.insert(raised.end(), {"--heuristic-offset", "0.5"});
  CHECK(cli(raised).code == exit_code::kOk);

  auto broken = args;
  broken.insert(broken.end(), {"--heuristic-offset", "-0.5"});
  auto bad = cli(broken);
  CHECK(bad.code == exit_code::kVerify);
  CHECK(bad.out.find("FAIL") != std::string::npos);

  TempDir tmp;
  auto single = tmp.file("one.txt", "w0\nw1\n");
  auto r = cli({"verify", "--lexicon", kData + "/toy/lexicon.tsv", "--composition", "--roots", "S,NP,N,S\\NP",
                "--input", single});
  CHECK(r.code == exit_code::kOk);

  auto long_input = tmp.file("long.txt", "w0 w0 w0 w0 w0 w0 w0 w0\n");
  r = cli({"verify", "--lexicon", kData + "/toy/lexicon.tsv", "--input", long_input});
  CHECK(r.code == exit_code::kOk);
  CHECK(r.err.find("skipped") != std::string::npos);
}

TEST_CASE("train writes a loadable model and one metrics line per epoch") {
  TempDir tmp;
  PlantedCorpus pc = planted_corpus(4, 10, 5);
  std::ofstream(tmp.file("train.txt")) << [&] {
    std::ostringstream s;
    write_corpus(s, pc.train);
    return s.str();
  }();
  std::ofstream(tmp.file("dev.txt")) << [&] {
    std::ostringstream s;
    write_corpus(s, pc.dev);
    return s.str();
  }();
  std::ofstream(tmp.file("lex.tsv")) << [&] {
    std::ostringstream s;
    pc.lexicon.write(s);
    return s.str();
  }();
  std::vector<std::string> args = {"train", "--lexicon", tmp.file("lex.tsv"), "--corpus", tmp.file("train.txt"),
                                   "--dev", tmp.file("dev.txt"), "--epochs", "2", "--dims", "4,3,4",
                                   "--model-out", tmp.file("model.json"), "--metrics-out", tmp.file("metrics.txt")};
  auto r = cli(args);
  REQUIRE(r.code == 0);
  auto metrics = slurp(tmp.file("metrics.txt"));
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 2);
  CHECK(metrics.find("update=all epoch=1 ") == 0);
  auto model = ParameterStore::load(tmp.file("model.json"));
  CHECK(model.dims == ModelDims{4, 3, 4});

  auto again = cli(args);
  REQUIRE(again.code == 0);
  CHECK(slurp(tmp.file("metrics.txt")) == metrics);
  const auto model_bytes = slurp(tmp.file("model.json"));

  auto threaded = args;
  threaded.insert(threaded.end(), {"--jobs", "3"});
  REQUIRE(cli(threaded).code == 0);
  CHECK(slurp(tmp.file("metrics.txt")) == metrics);
  CHECK(slurp(tmp.file("model.json")) == model_bytes);

  auto kinds = args;
  kinds.insert(kinds.end(), {"--update", "greedy,max,all"});
  r = cli(kinds);
  REQUIRE(r.code == 0);
  metrics = slurp(tmp.file("metrics.txt"));
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 6);
  for (const char* k : {"greedy", "max", "all"}) {
    CHECK(metrics.find(std::string("update=") + k + " epoch=2 ") != std::string::npos);
    CHECK(fs::exists(tmp.file(std::string("model.json.") + k)));
  }
}

TEST_CASE("evaluate scores predictions against gold") {
  TempDir tmp;
  auto gold = kData + "/fruit_flies/gold.txt";
  auto pred = tmp.file("pred.jsonl");
  auto r = cli({"parse", "--lexicon", kData + "/fruit_flies/lexicon.tsv", "--input", kData + "/fruit_flies/sentences.txt",
                "--model-in", kData + "/fruit_flies/model.json", "--output", pred});
  REQUIRE(r.code == 0);
  r = cli({"evaluate", "--predictions", pred, "--gold", gold});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("labeled_f1     100.00") != std::string::npos);
  CHECK(r.out.find("exact_match    100.00") != std::string::npos);
  CHECK(r.out.find("optimal_pct    100.00") != std::string::npos);

  auto two = tmp.file("two.jsonl", slurp(pred) + slurp(pred));
  r = cli({"evaluate", "--predictions", two, "--gold", gold});
  CHECK(r.code == exit_code::kData);
  CHECK(r.err.find("prediction 1") != std::string::npos);
}

TEST_CASE("bench prints one row per decoder") {
  std::vector<std::string> args = {"bench", "--lexicon", kData + "/garden_path/lexicon.tsv", "--unary-rules",
                                   kData + "/garden_path/unary.tsv", "--corpus", kData + "/garden_path/gold.txt",
                                   "--model-in", kData + "/garden_path/model.json", "--decoders",
                                   "astar,beam:2,rerank:1,rerank:5,rerank:10", "--timing"};
  auto r = cli(args);
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line.find("rel_time") != std::string::npos);
  std::map<std::string, std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::istringstream cols(line);
    std::string name, c;
    cols >> name;
    while (cols >> c) rows[name].push_back(c);
  }
  REQUIRE(rows.size() == 5);
  CHECK(rows["astar"].back() == "1.00");
  CHECK(std::stod(rows["beam:2"][1]) <= std::stod(rows["astar"][0]));
  CHECK(std::stod(rows["rerank:1"][0]) <= std::stod(rows["rerank:5"][0]));
  CHECK(std::stod(rows["rerank:5"][0]) <= std::stod(rows["rerank:10"][0]));
}
