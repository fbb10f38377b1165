#include "gparse/oracle.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>

#include "gparse/error.hpp"

namespace gparse {

namespace reference {

namespace {

double sigm(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// W * concat(parts) + b, one row at a time.
std::vector<double> affine(const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                           const std::vector<const std::vector<double>*>& parts) {
  std::vector<double> out(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    double acc = b(r);
    Eigen::Index col = 0;
    for (const auto* part : parts) {
      for (double v : *part) acc += w(r, col++) * v;
    }
    if (col != w.cols()) throw InternalError("reference: input width mismatch");
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

std::vector<double> column(const Eigen::MatrixXd& m, int j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

std::vector<double> vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

long double log_sigmoid(long double z) {
  if (z >= 0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

State chain_step(const ChainParams& p, const State& prev, const std::vector<double>& x) {
  const auto zi = affine(p.w_i, p.b_i, {&prev.c, &prev.h, &x});
  const auto zc = affine(p.w_c, p.b_c, {&prev.h, &x});
  std::vector<double> ct(zc.size());
  for (std::size_t k = 0; k < zc.size(); ++k) ct[k] = std::tanh(zc[k]);
  const auto zo = affine(p.w_o, p.b_o, {&ct, &prev.h, &x});
  State s;
  s.c.resize(ct.size());
  s.h.resize(ct.size());
  for (std::size_t k = 0; k < ct.size(); ++k) {
    const double i = sigm(zi[k]);
    s.c[k] = i * ct[k] + (1.0 - i) * prev.c[k];
    s.h[k] = sigm(zo[k]) * std::tanh(s.c[k]);
  }
  return s;
}

void encode(const ParameterStore& params, const std::vector<std::string>& words, std::vector<State>& forward,
            std::vector<State>& backward, const Eigen::MatrixXd* dropout) {
  const std::size_t n = words.size();
  std::vector<std::vector<double>> xs(n);
  for (std::size_t t = 0; t < n; ++t) {
    xs[t] = column(params.word_embeddings, params.words.lookup(words[t]));
    if (dropout) {
      for (std::size_t k = 0; k < xs[t].size(); ++k) xs[t][k] *= (*dropout)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
    }
  }
  forward.assign(n, {});
  backward.assign(n, {});
  State prev{vec(params.c_start), vec(params.h_start)};
  for (std::size_t t = 0; t < n; ++t) {
    forward[t] = chain_step(params.forward, prev, xs[t]);
    prev = forward[t];
  }
  prev = {vec(params.c_end), vec(params.h_end)};
  for (std::size_t t = n; t-- > 0;) {
    backward[t] = chain_step(params.backward, prev, xs[t]);
    prev = backward[t];
  }
}

State tree_unit(const ParameterStore& params, RuleKind rule, const Category& category, const State& left,
                const State& right) {
  const auto& p = params.rules[static_cast<std::size_t>(rule)];
  const auto x = column(params.category_embeddings, params.categories.lookup(category.str()));
  const auto zi = affine(p.w_i, p.b_i, {&left.c, &left.h, &right.c, &right.h, &x});
  const auto zf = affine(p.w_f, p.b_f, {&left.c, &left.h, &right.c, &right.h, &x});
  const auto zc = affine(p.w_c, p.b_c, {&left.h, &right.h, &x});
  std::vector<double> ct(zc.size());
  for (std::size_t k = 0; k < zc.size(); ++k) ct[k] = std::tanh(zc[k]);
  const auto zo = affine(p.w_o, p.b_o, {&ct, &left.h, &right.h, &x});
  State s;
  s.c.resize(ct.size());
  s.h.resize(ct.size());
  for (std::size_t k = 0; k < ct.size(); ++k) {
    const double f = sigm(zf[k]);
    const double clr = f * left.c[k] + (1.0 - f) * right.c[k];
    const double i = sigm(zi[k]);
    s.c[k] = i * ct[k] + (1.0 - i) * clr;
    s.h[k] = sigm(zo[k]) * std::tanh(s.c[k]);
  }
  return s;
}

double score(const ParameterStore& params, const State& state) {
  long double z = 0;
  for (std::size_t k = 0; k < state.h.size(); ++k) z += static_cast<long double>(params.score(static_cast<Eigen::Index>(k))) * state.h[k];
  return static_cast<double>(log_sigmoid(z));
}

}  // namespace reference

namespace {

// An enumerated derivation. Children are shared between parents, but each
// node's state and score are computed once from its own subtree.
struct Derivation {
  Category category;
  RuleKind rule = RuleKind::Lex;
  std::int32_t token = -1;
  std::shared_ptr<const Derivation> left;
  std::shared_ptr<const Derivation> right;
  reference::State state;
  double total = 0.0;  // local + global over the subtree
};
using DerivPtr = std::shared_ptr<const Derivation>;

class Enumerator {
 public:
  explicit Enumerator(const SearchProblem& problem) : problem_(problem), n_(problem.length()) {
    if (problem.params) {
      reference::encode(*problem.params, problem.words, forward_, backward_);
      unary_left_ = {std::vector<double>(problem.params->c_unary.data(),
                                         problem.params->c_unary.data() + problem.params->c_unary.size()),
                     std::vector<double>(problem.params->h_unary.data(),
                                         problem.params->h_unary.data() + problem.params->h_unary.size())};
    }
    chart_.resize(static_cast<std::size_t>((n_ + 1) * (n_ + 1)));
  }

  std::vector<ScoredTree> run() {
    for (std::int32_t len = 1; len <= n_; ++len) {
      for (std::int32_t i = 0; i + len <= n_; ++i) fill(i, i + len);
    }
    std::vector<ScoredTree> out;
    for (const auto& d : cell(0, n_)) {
      if (!problem_.roots.accepts(d->category)) continue;
      Tree t;
      build(t, *d);
      out.push_back({std::move(t), d->total});
    }
    return out;
  }

 private:
  std::vector<DerivPtr>& cell(std::int32_t i, std::int32_t j) {
    return chart_[static_cast<std::size_t>(i * (n_ + 1) + j)];
  }

  double global(Derivation& d, const reference::State& l, const reference::State& r) {
    if (!problem_.params) return 0.0;
    d.state = reference::tree_unit(*problem_.params, d.rule, d.category, l, r);
    return reference::score(*problem_.params, d.state);
  }

  void fill(std::int32_t i, std::int32_t j) {
    std::vector<DerivPtr> found;
    if (j - i == 1) {
      for (const auto& tag : problem_.table->tags(i)) {
        auto d = std::make_shared<Derivation>();
        d->category = tag.category;
        d->token = i;
        const auto& f = problem_.params ? forward_[static_cast<std::size_t>(i)] : reference::State{};
        const auto& b = problem_.params ? backward_[static_cast<std::size_t>(i)] : reference::State{};
        d->total = tag.logprob + global(*d, f, b);
        found.push_back(std::move(d));
      }
    } else {
      for (std::int32_t k = i + 1; k < j; ++k) {
        for (const auto& l : cell(i, k)) {
          for (const auto& r : cell(k, j)) {
            for (const auto& p : problem_.grammar->combine(l->category, r->category)) {
              auto d = std::make_shared<Derivation>();
              d->category = p.category;
              d->rule = p.rule;
              d->left = l;
              d->right = r;
              d->total = l->total + r->total + global(*d, l->state, r->state);
              found.push_back(std::move(d));
            }
          }
        }
      }
    }
    const std::size_t base = found.size();
    for (std::size_t k = 0; k < base; ++k) {
      const DerivPtr child = found[k];
      for (const auto& p : problem_.grammar->unary_rules(child->category)) {
        auto d = std::make_shared<Derivation>();
        d->category = p.category;
        d->rule = RuleKind::Unary;
        d->left = child;
        d->total = child->total + global(*d, unary_left_, child->state);
        found.push_back(std::move(d));
      }
    }
    cell(i, j) = std::move(found);
  }

  std::int32_t build(Tree& t, const Derivation& d) {
    switch (d.rule) {
      case RuleKind::Lex: return t.add_leaf(d.token, d.category);
      case RuleKind::Unary: return t.add_unary(d.category, build(t, *d.left));
      default: {
        const auto l = build(t, *d.left);
        const auto r = build(t, *d.right);
        return t.add_binary(d.category, d.rule, l, r);
      }
    }
  }

  const SearchProblem& problem_;
  std::int32_t n_;
  std::vector<reference::State> forward_;
  std::vector<reference::State> backward_;
  reference::State unary_left_;
  std::vector<std::vector<DerivPtr>> chart_;
};

}  // namespace

std::vector<ScoredTree> enumerate_parses(const SearchProblem& problem, std::int32_t cap) {
  if (problem.length() > cap) {
    throw ConfigError("enumeration refused: sentence has " + std::to_string(problem.length()) +
                      " tokens, the cap is " + std::to_string(cap));
  }
  return Enumerator(problem).run();
}

std::optional<ScoredTree> cky_viterbi(const SearchProblem& problem) {
  const std::int32_t n = problem.length();
  struct Back {
    double score;
    RuleKind rule;
    std::int32_t split;  // binary split point
    std::string left, right;  // child categories
    bool left_is_base = false;
  };
  // Per span: best derivation per category without and with a top unary.
  std::vector<std::map<std::string, Back>> base(static_cast<std::size_t>((n + 1) * (n + 1)));
  std::vector<std::map<std::string, Back>> full(base.size());
  std::map<std::string, Category> cats;
  auto at = [n](std::int32_t i, std::int32_t j) { return static_cast<std::size_t>(i * (n + 1) + j); };
  auto offer = [](std::map<std::string, Back>& cell, const std::string& key, Back b) {
    auto it = cell.find(key);
    if (it == cell.end() || b.score > it->second.score) cell[key] = std::move(b);
  };

  for (std::int32_t len = 1; len <= n; ++len) {
    for (std::int32_t i = 0; i + len <= n; ++i) {
      const std::int32_t j = i + len;
      auto& b = base[at(i, j)];
      if (len == 1) {
        for (const auto& tag : problem.table->tags(i)) {
          cats.emplace(tag.category.str(), tag.category);
          offer(b, tag.category.str(), {tag.logprob, RuleKind::Lex, -1, {}, {}});
        }
      } else {
        for (std::int32_t k = i + 1; k < j; ++k) {
          for (const auto& [lk, lb] : full[at(i, k)]) {
            for (const auto& [rk, rb] : full[at(k, j)]) {
              for (const auto& p : problem.grammar->combine(cats.at(lk), cats.at(rk))) {
                cats.emplace(p.category.str(), p.category);
                offer(b, p.category.str(), {lb.score + rb.score, p.rule, k, lk, rk});
              }
            }
          }
        }
      }
      auto& f = full[at(i, j)];
      f = b;
      for (const auto& [ck, cb] : b) {
        for (const auto& p : problem.grammar->unary_rules(cats.at(ck))) {
          cats.emplace(p.category.str(), p.category);
          Back u{cb.score, RuleKind::Unary, -1, ck, {}};
          u.left_is_base = true;
          offer(f, p.category.str(), std::move(u));
        }
      }
    }
  }

  const Back* best = nullptr;
  std::string best_key;
  for (const auto& [k, b] : full[at(0, n)]) {
    if (!problem.roots.accepts(cats.at(k))) continue;
    if (!best || b.score > best->score) {
      best = &b;
      best_key = k;
    }
  }
  if (!best) return std::nullopt;

  Tree tree;
  std::function<std::int32_t(std::int32_t, std::int32_t, const std::string&, bool)> build =
      [&](std::int32_t i, std::int32_t j, const std::string& key, bool from_base) -> std::int32_t {
    const Back& b = (from_base ? base : full)[at(i, j)].at(key);
    switch (b.rule) {
      case RuleKind::Lex: return tree.add_leaf(i, cats.at(key));
      case RuleKind::Unary: return tree.add_unary(cats.at(key), build(i, j, b.left, true));
      default: {
        const auto l = build(i, b.split, b.left, false);
        const auto r = build(b.split, j, b.right, false);
        return tree.add_binary(cats.at(key), b.rule, l, r);
      }
    }
  };
  build(0, n, best_key, false);
  return ScoredTree{std::move(tree), best->score};
}

}  // namespace gparse
