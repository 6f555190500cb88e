#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "prb/nn/tensor.hpp"
#include "prb/random.hpp"

namespace prb::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Handle to a parameter inside a ParameterSet; stays valid across copies of the set.
struct ParamId {
  std::size_t index = 0;
};

struct DenseIds {
  ParamId weight;
  ParamId bias;
};

// Named parameters in insertion order. Insertion order fixes the
// serialization order and the optimizer's iteration order.
class ParameterSet {
 public:
  ParamId add(const std::string& name, Tensor value);
  // Glorot-uniform weight [fan_in x fan_out] named "<prefix>.weight", zero bias "<prefix>.bias".
  DenseIds add_dense(const std::string& prefix, std::size_t fan_in, std::size_t fan_out, Rng& rng);

  Parameter& operator[](ParamId id) { return params_.at(id.index); }
  const Parameter& operator[](ParamId id) const { return params_.at(id.index); }
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  ParamId id_of(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  bool all_finite() const;

  // Values only; gradients are not part of the comparison.
  bool same_values(const ParameterSet& other) const;

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

double glorot_bound(std::size_t fan_in, std::size_t fan_out);

// Checkpoint format: JSON object {"format": "prb-params/1", "parameters": [{"name", "shape", "values"}]}.
std::string checkpoint_to_json(const ParameterSet& params);
ParameterSet checkpoint_from_json(const std::string& text);
void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path);
ParameterSet load_checkpoint(const std::filesystem::path& path);

}  // namespace prb::nn
