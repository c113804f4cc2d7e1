#include <nlohmann/json.hpp>

#include "trajprop/error.hpp"
#include "trajprop/nn/tape.hpp"

namespace trajprop::nn {

nlohmann::json ParamSet::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& s : specs_) {
    layers.push_back({{"kind", s.kind}, {"name", s.name}, {"in_dim", s.in_dim}, {"out_dim", s.out_dim}, {"init", s.init}});
  }
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : params_) {
    std::vector<double> flat(static_cast<std::size_t>(p.value.size()));
    // Row-major flattening.
    for (Eigen::Index r = 0; r < p.value.rows(); ++r)
      for (Eigen::Index c = 0; c < p.value.cols(); ++c)
        flat[static_cast<std::size_t>(r * p.value.cols() + c)] = p.value(r, c);
    params.push_back({{"name", p.name}, {"shape", {p.value.rows(), p.value.cols()}}, {"values", flat}});
  }
  return {{"format", "trajprop.params"}, {"version", 1}, {"layers", layers}, {"params", params}};
}

void ParamSet::load_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.params" || j.value("version", 0) != 1) {
    fail(ErrorKind::kConfig, "not a version-1 parameter document");
  }
  const auto& ps = j.at("params");
  if (ps.size() != params_.size()) fail(ErrorKind::kConfig, "parameter count mismatch while loading weights");
  std::size_t i = 0;
  for (auto& p : params_) {
    const auto& e = ps.at(i++);
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<std::vector<Eigen::Index>>();
    if (name != p.name || shape.size() != 2 || shape[0] != p.value.rows() || shape[1] != p.value.cols()) {
      fail(ErrorKind::kConfig, "parameter '" + name + "' does not match model layout (expected '" + p.name + "')");
    }
    const auto flat = e.at("values").get<std::vector<double>>();
    require(flat.size() == static_cast<std::size_t>(p.value.size()), "parameter '" + name + "' has wrong value count");
    for (Eigen::Index r = 0; r < p.value.rows(); ++r)
      for (Eigen::Index c = 0; c < p.value.cols(); ++c)
        p.value(r, c) = flat[static_cast<std::size_t>(r * p.value.cols() + c)];
    p.zero_grad();
  }
}

}  // namespace trajprop::nn
