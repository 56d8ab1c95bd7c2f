#include "absa/param_store.hpp"

#include <algorithm>

#include "absa/error.hpp"

namespace absa {

Tensor& ParamStore::add(const std::string& name, Tensor init) {
  if (entries_.count(name)) {
    throw InvalidArgument("ParamStore: duplicate parameter '" + name + "'");
  }
  ParamEntry e;
  e.grad = Tensor(init.shape());
  e.first_moment = Tensor(init.shape());
  e.second_moment = Tensor(init.shape());
  e.value = std::move(init);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : entries_) n += e.value.size();
  return n;
}

ParamEntry& ParamStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw NotFound("ParamStore: no parameter '" + name + "'");
  return it->second;
}

const ParamEntry& ParamStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw NotFound("ParamStore: no parameter '" + name + "'");
  return it->second;
}

Tensor& ParamStore::value(const std::string& name) { return entry(name).value; }
const Tensor& ParamStore::value(const std::string& name) const {
  return entry(name).value;
}
const Tensor& ParamStore::grad(const std::string& name) const {
  return entry(name).grad;
}

void ParamStore::accumulate_grad(const std::string& name, std::span<const double> g) {
  auto& e = entry(name);
  if (g.size() != e.grad.size()) {
    throw ShapeError("ParamStore::accumulate_grad: '" + name + "' has " +
                     std::to_string(e.grad.size()) + " values, gradient has " +
                     std::to_string(g.size()));
  }
  auto dst = e.grad.values();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

void ParamStore::zero_grad() {
  for (auto& [_, e] : entries_) e.grad.fill(0.0);
}

void ParamStore::clear_gradients() {
  zero_grad();
  gradients_populated_ = false;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  for (auto& [name, e] : entries_) {
    const Tensor& src = other.value(name);
    if (src.shape() != e.value.shape()) {
      throw ShapeError("ParamStore::copy_values_from: '" + name + "' " +
                       shape_string(e.value.shape()) + " vs " +
                       shape_string(src.shape()));
    }
    e.value = src;
  }
}

}  // namespace absa
