#include "prb/nn/parameters.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace prb::nn {

using nlohmann::json;

ParamId ParameterSet::add(const std::string& name, Tensor value) {
  if (index_.count(name) != 0) throw std::invalid_argument("parameter already exists: " + name);
  const std::size_t idx = params_.size();
  Tensor grad(value.rows(), value.cols());
  params_.push_back(Parameter{name, std::move(value), std::move(grad)});
  index_.emplace(name, idx);
  return ParamId{idx};
}

DenseIds ParameterSet::add_dense(const std::string& prefix, std::size_t fan_in,
                                 std::size_t fan_out, Rng& rng) {
  if (fan_in == 0 || fan_out == 0) {
    throw std::invalid_argument("dense layer '" + prefix + "' needs positive dimensions");
  }
  const double bound = glorot_bound(fan_in, fan_out);
  Tensor w(fan_in, fan_out);
  for (double& x : w.data()) x = rng.uniform(-bound, bound);
  DenseIds ids;
  ids.weight = add(prefix + ".weight", std::move(w));
  ids.bias = add(prefix + ".bias", Tensor(1, fan_out));
  return ids;
}

Parameter& ParameterSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return params_[it->second];
}

const Parameter& ParameterSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return params_[it->second];
}

ParamId ParameterSet::id_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return ParamId{it->second};
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

bool ParameterSet::all_finite() const {
  for (const auto& p : params_) {
    if (!p.value.all_finite()) return false;
  }
  return true;
}

bool ParameterSet::same_values(const ParameterSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name != other.params_[i].name || params_[i].value != other.params_[i].value) {
      return false;
    }
  }
  return true;
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

std::string checkpoint_to_json(const ParameterSet& params) {
  json doc;
  doc["format"] = "prb-params/1";
  json list = json::array();
  for (const auto& p : params) {
    list.push_back({{"name", p.name},
                    {"shape", p.value.shape()},
                    {"values", p.value.values()}});
  }
  doc["parameters"] = std::move(list);
  return doc.dump();
}

ParameterSet checkpoint_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("format", "") != "prb-params/1") {
    throw std::runtime_error("checkpoint: unsupported or missing format tag");
  }
  ParameterSet out;
  for (const auto& entry : doc.at("parameters")) {
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw std::runtime_error("checkpoint: shape must have rank 2");
    auto values = entry.at("values").get<std::vector<double>>();
    out.add(entry.at("name").get<std::string>(), Tensor(shape[0], shape[1], std::move(values)));
  }
  return out;
}

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path.string());
  os << checkpoint_to_json(params);
}

ParameterSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read checkpoint: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace prb::nn
