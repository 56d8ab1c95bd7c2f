#include "absa/graph.hpp"

#include <algorithm>
#include <cmath>

#include "absa/error.hpp"

namespace absa {

Graph::Graph(ParamStore* store, GradMode mode) : store_(store), view_(store), mode_(mode) {}

Graph::Graph(const ParamStore& store) : store_(nullptr), view_(&store), mode_(GradMode::kOff) {}

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) {
    throw InvalidArgument("Graph: invalid Var id " + std::to_string(v.id));
  }
  return nodes_[v.id];
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::param(const std::string& name) {
  if (!view_) throw InvalidArgument("Graph::param: graph has no ParamStore");
  if (auto it = param_nodes_.find(name); it != param_nodes_.end()) {
    return Var{it->second};
  }
  Node n;
  n.value = view_->value(name);
  n.requires_grad = mode_ == GradMode::kOn;
  nodes_.push_back(std::move(n));
  const std::size_t id = nodes_.size() - 1;
  auto [it, _] = param_nodes_.emplace(name, id);
  nodes_[id].param_name = &it->first;
  return Var{id};
}

const Tensor& Graph::value(Var v) const { return node(v).value; }

Tensor Graph::grad(Var v) const {
  const Node& n = node(v);
  return n.has_grad ? n.grad : Tensor(n.value.shape());
}

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Graph::record(Tensor value, const std::vector<Var>& inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  if (mode_ == GradMode::kOn) {
    n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                  [&](Var in) { return node(in).requires_grad; });
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Tensor& Graph::grad_slot(Var v) {
  Node& n = nodes_.at(v.id);
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::backward(Var loss) {
  if (mode_ != GradMode::kOn) {
    throw InvalidArgument("Graph::backward: graph was built with gradients off");
  }
  if (backward_done_) throw InvalidArgument("Graph::backward: called twice");
  if (node(loss).value.size() != 1) {
    throw ShapeError("Graph::backward: loss must be a scalar, got " +
                     shape_string(node(loss).value.shape()));
  }
  backward_done_ = true;
  grad_slot(loss)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, n.grad);
  }
  if (store_) {
    for (const auto& [name, id] : param_nodes_) {
      if (nodes_[id].has_grad) store_->accumulate_grad(name, nodes_[id].grad.values());
    }
  }
}

namespace ops {
namespace {

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

void require_vector(const char* op, const Tensor& a) {
  if (a.rank() != 1) {
    throw ShapeError(std::string(op) + ": expected a vector, got " +
                     shape_string(a.shape()));
  }
}

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " +
                     shape_string(a.shape()));
  }
}

void accumulate(Tensor& dst, const Tensor& src) {
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

template <typename F, typename D>
Var unary(Graph& g, Var a, F f, D dfdx_from_out) {
  Tensor out = g.value(a);
  for (double& v : out.values()) v = f(v);
  return g.record(std::move(out), {a}, [a, out_id = g.size(), dfdx_from_out](Graph& gr, const Tensor& og) {
    const Tensor& y = gr.value(Var{out_id});
    const Tensor& x = gr.value(a);
    Tensor& ga = gr.grad_slot(a);
    for (std::size_t i = 0; i < og.size(); ++i) ga[i] += og[i] * dfdx_from_out(x[i], y[i]);
  });
}

}  // namespace

Var add(Graph& g, Var a, Var b) {
  require_same("add", g.value(a), g.value(b));
  Tensor out = g.value(a);
  const Tensor& bv = g.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return g.record(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& og) {
    if (gr.requires_grad(a)) accumulate(gr.grad_slot(a), og);
    if (gr.requires_grad(b)) accumulate(gr.grad_slot(b), og);
  });
}

Var sub(Graph& g, Var a, Var b) {
  require_same("sub", g.value(a), g.value(b));
  Tensor out = g.value(a);
  const Tensor& bv = g.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return g.record(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& og) {
    if (gr.requires_grad(a)) accumulate(gr.grad_slot(a), og);
    if (gr.requires_grad(b)) {
      Tensor& gb = gr.grad_slot(b);
      for (std::size_t i = 0; i < og.size(); ++i) gb[i] -= og[i];
    }
  });
}

Var mul(Graph& g, Var a, Var b) {
  require_same("mul", g.value(a), g.value(b));
  Tensor out = g.value(a);
  const Tensor& bv = g.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return g.record(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& og) {
    if (gr.requires_grad(a)) {
      const Tensor& bv = gr.value(b);
      Tensor& ga = gr.grad_slot(a);
      for (std::size_t i = 0; i < og.size(); ++i) ga[i] += og[i] * bv[i];
    }
    if (gr.requires_grad(b)) {
      const Tensor& av = gr.value(a);
      Tensor& gb = gr.grad_slot(b);
      for (std::size_t i = 0; i < og.size(); ++i) gb[i] += og[i] * av[i];
    }
  });
}

Var scale(Graph& g, Var a, double c) {
  return unary(g, a, [c](double x) { return c * x; },
               [c](double, double) { return c; });
}

Var one_minus(Graph& g, Var a) {
  return unary(g, a, [](double x) { return 1.0 - x; },
               [](double, double) { return -1.0; });
}

Var sigmoid(Graph& g, Var a) {
  return unary(
      g, a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Graph& g, Var a) {
  return unary(g, a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var square(Graph& g, Var a) {
  return unary(g, a, [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Var matvec(Graph& g, Var w, Var x) {
  const Tensor& wv = g.value(w);
  const Tensor& xv = g.value(x);
  require_matrix("matvec", wv);
  require_vector("matvec", xv);
  const std::size_t m = wv.rows(), n = wv.cols();
  if (xv.size() != n) {
    throw ShapeError("matvec: " + shape_string(wv.shape()) + " times " +
                     shape_string(xv.shape()));
  }
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    const double* wr = wv.data() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += wr[j] * xv[j];
    out[i] = s;
  }
  return g.record(std::move(out), {w, x}, [w, x, m, n](Graph& gr, const Tensor& og) {
    const Tensor& wv = gr.value(w);
    const Tensor& xv = gr.value(x);
    if (gr.requires_grad(w)) {
      Tensor& gw = gr.grad_slot(w);
      for (std::size_t i = 0; i < m; ++i) {
        const double o = og[i];
        if (o == 0.0) continue;
        double* gr_row = gw.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) gr_row[j] += o * xv[j];
      }
    }
    if (gr.requires_grad(x)) {
      Tensor& gx = gr.grad_slot(x);
      for (std::size_t i = 0; i < m; ++i) {
        const double o = og[i];
        if (o == 0.0) continue;
        const double* wr = wv.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) gx[j] += o * wr[j];
      }
    }
  });
}

Var affine(Graph& g, Var w, Var x, Var b) { return add(g, matvec(g, w, x), b); }

Var dot(Graph& g, Var a, Var b) {
  require_same("dot", g.value(a), g.value(b));
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return g.record(Tensor::scalar(s), {a, b}, [a, b](Graph& gr, const Tensor& og) {
    const double o = og[0];
    if (gr.requires_grad(a)) {
      const Tensor& bv = gr.value(b);
      Tensor& ga = gr.grad_slot(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o * bv[i];
    }
    if (gr.requires_grad(b)) {
      const Tensor& av = gr.value(a);
      Tensor& gb = gr.grad_slot(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += o * av[i];
    }
  });
}

Var sum(Graph& g, Var a) {
  return g.record(Tensor::scalar(g.value(a).sum()), {a}, [a](Graph& gr, const Tensor& og) {
    Tensor& ga = gr.grad_slot(a);
    for (double& v : ga.values()) v += og[0];
  });
}

Var concat(Graph& g, const std::vector<Var>& parts) {
  std::vector<double> out;
  std::vector<std::size_t> sizes;
  for (Var p : parts) {
    const Tensor& t = g.value(p);
    require_vector("concat", t);
    out.insert(out.end(), t.values().begin(), t.values().end());
    sizes.push_back(t.size());
  }
  return g.record(Tensor::vector(std::move(out)), parts,
                  [parts, sizes](Graph& gr, const Tensor& og) {
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < parts.size(); ++k) {
                      if (gr.requires_grad(parts[k])) {
                        Tensor& gp = gr.grad_slot(parts[k]);
                        for (std::size_t i = 0; i < sizes[k]; ++i) gp[i] += og[off + i];
                      }
                      off += sizes[k];
                    }
                  });
}

Var stack(Graph& g, const std::vector<Var>& rows) {
  if (rows.empty()) throw ShapeError("stack: no rows");
  const std::size_t k = g.value(rows.front()).size();
  Tensor out({rows.size(), k});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& r = g.value(rows[i]);
    require_vector("stack", r);
    if (r.size() != k) {
      throw ShapeError("stack: row " + std::to_string(i) + " has shape " +
                       shape_string(r.shape()) + ", expected [" + std::to_string(k) + "]");
    }
    std::copy_n(r.data(), k, out.data() + i * k);
  }
  return g.record(std::move(out), rows, [rows, k](Graph& gr, const Tensor& og) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!gr.requires_grad(rows[i])) continue;
      Tensor& gi = gr.grad_slot(rows[i]);
      for (std::size_t j = 0; j < k; ++j) gi[j] += og[i * k + j];
    }
  });
}

Var row(Graph& g, Var m, std::size_t i) {
  const Tensor& mv = g.value(m);
  require_matrix("row", mv);
  if (i >= mv.rows()) {
    throw ShapeError("row: index " + std::to_string(i) + " out of range for " +
                     shape_string(mv.shape()));
  }
  const std::size_t k = mv.cols();
  return g.record(mv.row_tensor(i), {m}, [m, i, k](Graph& gr, const Tensor& og) {
    Tensor& gm = gr.grad_slot(m);
    for (std::size_t j = 0; j < k; ++j) gm[i * k + j] += og[j];
  });
}

std::vector<Var> unstack(Graph& g, Var m) {
  require_matrix("unstack", g.value(m));
  std::vector<Var> out;
  const std::size_t n = g.value(m).rows();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(row(g, m, i));
  return out;
}

Var gather_rows(Graph& g, Var table, const std::vector<std::size_t>& ids) {
  const Tensor& tv = g.value(table);
  require_matrix("gather_rows", tv);
  const std::size_t k = tv.cols();
  Tensor out({ids.size(), k});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= tv.rows()) {
      throw ShapeError("gather_rows: id " + std::to_string(ids[i]) +
                       " out of range for " + shape_string(tv.shape()));
    }
    std::copy_n(tv.data() + ids[i] * k, k, out.data() + i * k);
  }
  return g.record(std::move(out), {table}, [table, ids, k](Graph& gr, const Tensor& og) {
    Tensor& gt = gr.grad_slot(table);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = 0; j < k; ++j) gt[ids[i] * k + j] += og[i * k + j];
    }
  });
}

Var max_rows(Graph& g, Var m) {
  const Tensor& mv = g.value(m);
  require_matrix("max_rows", mv);
  const std::size_t n = mv.rows(), k = mv.cols();
  if (n == 0) throw ShapeError("max_rows: empty matrix " + shape_string(mv.shape()));
  Tensor out({k});
  std::vector<std::size_t> arg(k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    double best = mv[j];
    for (std::size_t i = 1; i < n; ++i) {
      if (mv[i * k + j] > best) {
        best = mv[i * k + j];
        arg[j] = i;
      }
    }
    out[j] = best;
  }
  return g.record(std::move(out), {m}, [m, arg, k](Graph& gr, const Tensor& og) {
    Tensor& gm = gr.grad_slot(m);
    for (std::size_t j = 0; j < k; ++j) gm[arg[j] * k + j] += og[j];
  });
}

Var mean_rows(Graph& g, Var m) {
  const Tensor& mv = g.value(m);
  require_matrix("mean_rows", mv);
  const std::size_t n = mv.rows(), k = mv.cols();
  if (n == 0) throw ShapeError("mean_rows: empty matrix " + shape_string(mv.shape()));
  Tensor out({k});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out[j] += mv[i * k + j];
  for (double& v : out.values()) v /= static_cast<double>(n);
  return g.record(std::move(out), {m}, [m, n, k](Graph& gr, const Tensor& og) {
    Tensor& gm = gr.grad_slot(m);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) gm[i * k + j] += og[j] * inv;
  });
}

Var weighted_rows(Graph& g, Var alpha, Var m) {
  const Tensor& av = g.value(alpha);
  const Tensor& mv = g.value(m);
  require_vector("weighted_rows", av);
  require_matrix("weighted_rows", mv);
  const std::size_t n = mv.rows(), k = mv.cols();
  if (av.size() != n) {
    throw ShapeError("weighted_rows: weights " + shape_string(av.shape()) +
                     " vs rows " + shape_string(mv.shape()));
  }
  Tensor out({k});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out[j] += av[i] * mv[i * k + j];
  return g.record(std::move(out), {alpha, m}, [alpha, m, n, k](Graph& gr, const Tensor& og) {
    const Tensor& av = gr.value(alpha);
    const Tensor& mv = gr.value(m);
    if (gr.requires_grad(alpha)) {
      Tensor& ga = gr.grad_slot(alpha);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += og[j] * mv[i * k + j];
        ga[i] += s;
      }
    }
    if (gr.requires_grad(m)) {
      Tensor& gm = gr.grad_slot(m);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) gm[i * k + j] += av[i] * og[j];
    }
  });
}

Var softmax(Graph& g, Var logits) {
  const Tensor& lv = g.value(logits);
  require_vector("softmax", lv);
  if (lv.size() == 0) throw ShapeError("softmax: empty vector");
  Tensor out = Tensor::vector(absa::softmax(lv.values()));
  return g.record(std::move(out), {logits},
                  [logits, out_id = g.size()](Graph& gr, const Tensor& og) {
                    const Tensor& y = gr.value(Var{out_id});
                    double inner = 0.0;
                    for (std::size_t i = 0; i < y.size(); ++i) inner += og[i] * y[i];
                    Tensor& gl = gr.grad_slot(logits);
                    for (std::size_t i = 0; i < y.size(); ++i) gl[i] += y[i] * (og[i] - inner);
                  });
}

Var softmax_cross_entropy(Graph& g, Var logits, std::size_t label) {
  const Tensor& lv = g.value(logits);
  require_vector("softmax_cross_entropy", lv);
  if (label >= lv.size()) {
    throw ShapeError("softmax_cross_entropy: label " + std::to_string(label) +
                     " out of range for " + shape_string(lv.shape()));
  }
  const double loss = log_sum_exp(lv.values()) - lv[label];
  return g.record(Tensor::scalar(loss), {logits}, [logits, label](Graph& gr, const Tensor& og) {
    const auto p = absa::softmax(gr.value(logits).values());
    Tensor& gl = gr.grad_slot(logits);
    for (std::size_t i = 0; i < p.size(); ++i) {
      gl[i] += og[0] * (p[i] - (i == label ? 1.0 : 0.0));
    }
  });
}

}  // namespace ops
}  // namespace absa
