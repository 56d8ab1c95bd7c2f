#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "absa/tensor.hpp"

namespace absa {

struct ParamEntry {
  Tensor value;
  Tensor grad;
  Tensor first_moment;
  Tensor second_moment;
};

// Named parameters with gradient slots and Adam moment state. Iteration order
// is lexicographic by name, which fixes checkpoint layout and update order.
class ParamStore {
 public:
  // Registers a new parameter; throws InvalidArgument on a duplicate name.
  Tensor& add(const std::string& name, Tensor init);

  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  std::size_t count() const noexcept { return entries_.size(); }
  std::size_t parameter_count() const;

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  const Tensor& grad(const std::string& name) const;

  void accumulate_grad(const std::string& name, std::span<const double> g);
  void zero_grad();
  // Gradients are "populated" once a backward pass has written them; an
  // optimizer step clears both the values and the flag.
  void mark_gradients_populated() noexcept { gradients_populated_ = true; }
  bool gradients_populated() const noexcept { return gradients_populated_; }
  void clear_gradients();

  std::uint64_t step() const noexcept { return step_; }
  void advance_step() noexcept { ++step_; }

  std::map<std::string, ParamEntry>& entries() noexcept { return entries_; }
  const std::map<std::string, ParamEntry>& entries() const noexcept { return entries_; }
  std::vector<std::string> names() const;

  // Copies parameter values (not gradients or moments) from `other`, which
  // must hold the same names and shapes.
  void copy_values_from(const ParamStore& other);

 private:
  ParamEntry& entry(const std::string& name);
  const ParamEntry& entry(const std::string& name) const;

  std::map<std::string, ParamEntry> entries_;
  std::uint64_t step_ = 0;
  bool gradients_populated_ = false;
};

}  // namespace absa
