#include "alerta/param_store.hpp"

#include "alerta/errors.hpp"

namespace alerta {

void ParamStore::add(const std::string& name, Matrix value) {
  if (contains(name)) throw UsageError("duplicate parameter name '" + name + "'");
  grads_.emplace(name, Matrix(value.rows(), value.cols()));
  values_.emplace(name, std::move(value));
}

Matrix& ParamStore::value(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

const Matrix& ParamStore::value(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

Matrix& ParamStore::grad(const std::string& name) {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

const Matrix& ParamStore::grad(const std::string& name) const {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [name, _] : values_) out.push_back(name);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, m] : values_) n += m.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& [_, g] : grads_) g.fill(0.0);
}

}  // namespace alerta
