#include "gparse/global_model.hpp"

#include <cmath>

#include "gparse/error.hpp"

namespace gparse {

namespace {

using Eigen::VectorXd;

VectorXd sigmoid(const VectorXd& v) {
  return v.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

VectorXd tanh_of(const VectorXd& v) {
  return v.unaryExpr([](double x) { return std::tanh(x); });
}

VectorXd ones_minus(const VectorXd& v) { return (1.0 - v.array()).matrix(); }

// d sigmoid = s (1 - s); d tanh = 1 - t^2
VectorXd dsigmoid(const VectorXd& s) { return (s.array() * (1.0 - s.array())).matrix(); }
VectorXd dtanh(const VectorXd& t) { return (1.0 - t.array().square()).matrix(); }

}  // namespace

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

ComputationGraph::ComputationGraph(const ParameterStore& params, bool keep_activations)
    : params_(&params), keep_(keep_activations) {}

std::int32_t ComputationGraph::push(Unit unit) {
  units_.push_back(std::move(unit));
  return static_cast<std::int32_t>(units_.size() - 1);
}

std::int32_t ComputationGraph::chain_step(UnitKind kind, std::int32_t prev, int word, std::int32_t token,
                                          const Eigen::MatrixXd* dropout) {
  const auto& p = kind == UnitKind::ForwardStep ? params_->forward : params_->backward;
  const int hd = params_->dims.hidden;
  const int wd = params_->dims.word;
  VectorXd x = params_->word_embeddings.col(word);
  VectorXd mask;
  if (dropout) {
    mask = dropout->col(token);
    x = x.cwiseProduct(mask);
  }
  const VectorXd& cp = units_[static_cast<std::size_t>(prev)].c;
  const VectorXd& hp = units_[static_cast<std::size_t>(prev)].h;

  VectorXd u1(2 * hd + wd);
  u1 << cp, hp, x;
  VectorXd u2(hd + wd);
  u2 << hp, x;
  Unit u;
  u.kind = kind;
  u.a = prev;
  u.index = word;
  u.token = token;
  u.i = sigmoid(p.w_i * u1 + p.b_i);
  u.ct = tanh_of(p.w_c * u2 + p.b_c);
  VectorXd u3(2 * hd + wd);
  u3 << u.ct, hp, x;
  u.o = sigmoid(p.w_o * u3 + p.b_o);
  u.c = u.i.cwiseProduct(u.ct) + ones_minus(u.i).cwiseProduct(cp);
  u.tc = tanh_of(u.c);
  u.h = u.o.cwiseProduct(u.tc);
  u.x = std::move(x);
  u.mask = std::move(mask);
  return push(std::move(u));
}

SentenceEncoding ComputationGraph::encode_sentence(const std::vector<std::string>& words,
                                                   const Eigen::MatrixXd* dropout) {
  const auto n = static_cast<std::int32_t>(words.size());
  if (dropout && (dropout->rows() != params_->dims.word || dropout->cols() < n)) {
    throw InternalError("dropout mask has the wrong shape");
  }
  SentenceEncoding enc;
  enc.forward.resize(static_cast<std::size_t>(n));
  enc.backward.resize(static_cast<std::size_t>(n));
  std::vector<int> ids;
  for (const auto& w : words) ids.push_back(params_->words.lookup(w));

  Unit start;
  start.kind = UnitKind::ForwardStart;
  start.c = params_->c_start;
  start.h = params_->h_start;
  std::int32_t prev = push(std::move(start));
  for (std::int32_t t = 0; t < n; ++t) {
    prev = chain_step(UnitKind::ForwardStep, prev, ids[static_cast<std::size_t>(t)], t, dropout);
    enc.forward[static_cast<std::size_t>(t)] = prev;
  }
  Unit end;
  end.kind = UnitKind::BackwardEnd;
  end.c = params_->c_end;
  end.h = params_->h_end;
  prev = push(std::move(end));
  for (std::int32_t t = n - 1; t >= 0; --t) {
    prev = chain_step(UnitKind::BackwardStep, prev, ids[static_cast<std::size_t>(t)], t, dropout);
    enc.backward[static_cast<std::size_t>(t)] = prev;
  }
  return enc;
}

LeafInputs ComputationGraph::leaf_state(std::int32_t token, const SentenceEncoding& encoding) const {
  if (token < 0 || static_cast<std::size_t>(token) >= encoding.forward.size()) {
    throw InternalError("leaf_state: token index out of range");
  }
  return {encoding.forward[static_cast<std::size_t>(token)], encoding.backward[static_cast<std::size_t>(token)]};
}

std::int32_t ComputationGraph::unary_left() {
  if (unary_left_ < 0) {
    Unit u;
    u.kind = UnitKind::UnaryLeft;
    u.c = params_->c_unary;
    u.h = params_->h_unary;
    unary_left_ = push(std::move(u));
  }
  return unary_left_;
}

std::int32_t ComputationGraph::tree_unit(RuleKind rule, const Category& category, std::int32_t left,
                                         std::int32_t right) {
  const auto& p = params_->rules[static_cast<std::size_t>(rule)];
  const int hd = params_->dims.hidden;
  const int cd = params_->dims.category;
  if (p.w_i.rows() != hd || p.w_i.cols() != 4 * hd + cd) {
    throw ConfigError("missing parameters for rule " + std::string(rule_name(rule)));
  }
  const int cat = params_->categories.lookup(category.str());
  const VectorXd x = params_->category_embeddings.col(cat);
  const VectorXd& cl = units_[static_cast<std::size_t>(left)].c;
  const VectorXd& hl = units_[static_cast<std::size_t>(left)].h;
  const VectorXd& cr = units_[static_cast<std::size_t>(right)].c;
  const VectorXd& hr = units_[static_cast<std::size_t>(right)].h;

  VectorXd u1(4 * hd + cd);
  u1 << cl, hl, cr, hr, x;
  VectorXd u2(2 * hd + cd);
  u2 << hl, hr, x;
  VectorXd i = sigmoid(p.w_i * u1 + p.b_i);
  VectorXd f = sigmoid(p.w_f * u1 + p.b_f);
  VectorXd ct = tanh_of(p.w_c * u2 + p.b_c);
  VectorXd u3(3 * hd + cd);
  u3 << ct, hl, hr, x;
  VectorXd o = sigmoid(p.w_o * u3 + p.b_o);
  VectorXd clr = f.cwiseProduct(cl) + ones_minus(f).cwiseProduct(cr);

  Unit u;
  u.kind = UnitKind::Tree;
  u.rule = rule;
  u.a = left;
  u.b = right;
  u.index = cat;
  u.c = i.cwiseProduct(ct) + ones_minus(i).cwiseProduct(clr);
  VectorXd tc = tanh_of(u.c);
  u.h = o.cwiseProduct(tc);
  if (keep_) {
    u.i = std::move(i);
    u.f = std::move(f);
    u.ct = std::move(ct);
    u.o = std::move(o);
    u.clr = std::move(clr);
    u.tc = std::move(tc);
  }
  ++tree_units_;
  return push(std::move(u));
}

std::int32_t ComputationGraph::score_head(std::int32_t state) {
  Unit u;
  u.kind = UnitKind::Score;
  u.a = state;
  u.z = params_->score.dot(units_[static_cast<std::size_t>(state)].h);
  u.value = log_sigmoid(u.z);
  return push(std::move(u));
}

double ComputationGraph::score(std::int32_t unit) const {
  const auto& u = units_[static_cast<std::size_t>(unit)];
  if (u.kind != UnitKind::Score) throw InternalError("score() on a non-score unit");
  return u.value;
}

void ComputationGraph::backward(const std::vector<std::pair<std::int32_t, double>>& seeds,
                                ParameterStore& grads) const {
  if (seeds.empty()) return;
  const int hd = params_->dims.hidden;
  const int wd = params_->dims.word;
  const int cd = params_->dims.category;
  std::vector<VectorXd> dc(units_.size());
  std::vector<VectorXd> dh(units_.size());
  std::vector<double> dscore(units_.size(), 0.0);
  std::vector<char> touched(units_.size(), 0);
  std::int32_t highest = -1;
  for (const auto& [unit, weight] : seeds) {
    if (unit < 0 || static_cast<std::size_t>(unit) >= units_.size() || units_[static_cast<std::size_t>(unit)].kind != UnitKind::Score) {
      throw InternalError("backward: seed does not reference a recorded score unit");
    }
    dscore[static_cast<std::size_t>(unit)] += weight;
    touched[static_cast<std::size_t>(unit)] = 1;
    highest = std::max(highest, unit);
  }
  auto touch = [&](std::int32_t u) { touched[static_cast<std::size_t>(u)] = 1; };
  auto grad_c = [&](std::int32_t u) -> VectorXd& {
    auto& v = dc[static_cast<std::size_t>(u)];
    if (v.size() == 0) v = VectorXd::Zero(hd);
    touch(u);
    return v;
  };
  auto grad_h = [&](std::int32_t u) -> VectorXd& {
    auto& v = dh[static_cast<std::size_t>(u)];
    if (v.size() == 0) v = VectorXd::Zero(hd);
    touch(u);
    return v;
  };

  for (std::int32_t k = highest; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    if (!touched[idx]) continue;
    const Unit& u = units_[idx];
    switch (u.kind) {
      case UnitKind::Score: {
        const double w = dscore[idx];
        if (w == 0.0) break;
        // d log sigmoid(z) / dz = sigmoid(-z)
        const double dz = w / (1.0 + std::exp(u.z));
        const VectorXd& h = units_[static_cast<std::size_t>(u.a)].h;
        grads.score += dz * h;
        grad_h(u.a) += dz * params_->score;
        break;
      }
      case UnitKind::ForwardStart:
      case UnitKind::BackwardEnd:
      case UnitKind::UnaryLeft: {
        VectorXd* gc = u.kind == UnitKind::ForwardStart ? &grads.c_start
                       : u.kind == UnitKind::BackwardEnd ? &grads.c_end
                                                         : &grads.c_unary;
        VectorXd* gh = u.kind == UnitKind::ForwardStart ? &grads.h_start
                       : u.kind == UnitKind::BackwardEnd ? &grads.h_end
                                                         : &grads.h_unary;
        if (dc[idx].size()) *gc += dc[idx];
        if (dh[idx].size()) *gh += dh[idx];
        break;
      }
      case UnitKind::ForwardStep:
      case UnitKind::BackwardStep: {
        const auto& p = u.kind == UnitKind::ForwardStep ? params_->forward : params_->backward;
        auto& g = u.kind == UnitKind::ForwardStep ? grads.forward : grads.backward;
        const VectorXd dhu = dh[idx].size() ? dh[idx] : VectorXd::Zero(hd);
        const VectorXd dcu = dc[idx].size() ? dc[idx] : VectorXd::Zero(hd);
        const VectorXd& cp = units_[static_cast<std::size_t>(u.a)].c;
        const VectorXd& hp = units_[static_cast<std::size_t>(u.a)].h;

        VectorXd dcell = dcu + dhu.cwiseProduct(u.o).cwiseProduct(dtanh(u.tc));
        VectorXd go = dhu.cwiseProduct(u.tc).cwiseProduct(dsigmoid(u.o));
        VectorXd u3(2 * hd + wd);
        u3 << u.ct, hp, u.x;
        g.w_o.noalias() += go * u3.transpose();
        g.b_o += go;
        VectorXd du3 = p.w_o.transpose() * go;

        VectorXd dct = dcell.cwiseProduct(u.i) + du3.head(hd);
        VectorXd di = dcell.cwiseProduct(u.ct - cp);
        VectorXd dcp = dcell.cwiseProduct(ones_minus(u.i));
        VectorXd dhp = du3.segment(hd, hd);
        VectorXd dx = du3.tail(wd);

        VectorXd gc = dct.cwiseProduct(dtanh(u.ct));
        VectorXd u2(hd + wd);
        u2 << hp, u.x;
        g.w_c.noalias() += gc * u2.transpose();
        g.b_c += gc;
        VectorXd du2 = p.w_c.transpose() * gc;
        dhp += du2.head(hd);
        dx += du2.tail(wd);

        VectorXd gi = di.cwiseProduct(dsigmoid(u.i));
        VectorXd u1(2 * hd + wd);
        u1 << cp, hp, u.x;
        g.w_i.noalias() += gi * u1.transpose();
        g.b_i += gi;
        VectorXd du1 = p.w_i.transpose() * gi;
        dcp += du1.head(hd);
        dhp += du1.segment(hd, hd);
        dx += du1.tail(wd);

        grad_c(u.a) += dcp;
        grad_h(u.a) += dhp;
        if (u.mask.size()) {
          grads.word_embeddings.col(u.index) += dx.cwiseProduct(u.mask);
        } else {
          grads.word_embeddings.col(u.index) += dx;
        }
        break;
      }
      case UnitKind::Tree: {
        if (!keep_) throw InternalError("backward: graph was built without activations");
        auto& g = grads.rules[static_cast<std::size_t>(u.rule)];
        const auto& p = params_->rules[static_cast<std::size_t>(u.rule)];
        const VectorXd dhu = dh[idx].size() ? dh[idx] : VectorXd::Zero(hd);
        const VectorXd dcu = dc[idx].size() ? dc[idx] : VectorXd::Zero(hd);
        const VectorXd& cl = units_[static_cast<std::size_t>(u.a)].c;
        const VectorXd& hl = units_[static_cast<std::size_t>(u.a)].h;
        const VectorXd& cr = units_[static_cast<std::size_t>(u.b)].c;
        const VectorXd& hr = units_[static_cast<std::size_t>(u.b)].h;
        const VectorXd x = params_->category_embeddings.col(u.index);

        VectorXd dcell = dcu + dhu.cwiseProduct(u.o).cwiseProduct(dtanh(u.tc));
        VectorXd go = dhu.cwiseProduct(u.tc).cwiseProduct(dsigmoid(u.o));
        VectorXd u3(3 * hd + cd);
        u3 << u.ct, hl, hr, x;
        g.w_o.noalias() += go * u3.transpose();
        g.b_o += go;
        VectorXd du3 = p.w_o.transpose() * go;

        VectorXd dct = dcell.cwiseProduct(u.i) + du3.head(hd);
        VectorXd dhl = du3.segment(hd, hd);
        VectorXd dhr = du3.segment(2 * hd, hd);
        VectorXd dx = du3.tail(cd);
        VectorXd di = dcell.cwiseProduct(u.ct - u.clr);
        VectorXd dclr = dcell.cwiseProduct(ones_minus(u.i));
        VectorXd df = dclr.cwiseProduct(cl - cr);
        VectorXd dcl = dclr.cwiseProduct(u.f);
        VectorXd dcr = dclr.cwiseProduct(ones_minus(u.f));

        VectorXd gc = dct.cwiseProduct(dtanh(u.ct));
        VectorXd u2(2 * hd + cd);
        u2 << hl, hr, x;
        g.w_c.noalias() += gc * u2.transpose();
        g.b_c += gc;
        VectorXd du2 = p.w_c.transpose() * gc;
        dhl += du2.head(hd);
        dhr += du2.segment(hd, hd);
        dx += du2.tail(cd);

        VectorXd gi = di.cwiseProduct(dsigmoid(u.i));
        VectorXd gf = df.cwiseProduct(dsigmoid(u.f));
        VectorXd u1(4 * hd + cd);
        u1 << cl, hl, cr, hr, x;
        g.w_i.noalias() += gi * u1.transpose();
        g.w_f.noalias() += gf * u1.transpose();
        g.b_i += gi;
        g.b_f += gf;
        VectorXd du1 = p.w_i.transpose() * gi + p.w_f.transpose() * gf;
        dcl += du1.head(hd);
        dhl += du1.segment(hd, hd);
        dcr += du1.segment(2 * hd, hd);
        dhr += du1.segment(3 * hd, hd);
        dx += du1.tail(cd);

        grad_c(u.a) += dcl;
        grad_h(u.a) += dhl;
        grad_c(u.b) += dcr;
        grad_h(u.b) += dhr;
        grads.category_embeddings.col(u.index) += dx;
        break;
      }
    }
  }
}

}  // namespace gparse
