#pragma once

#include <map>
#include <string>
#include <vector>

#include "alerta/matrix.hpp"

namespace alerta {

/// Named learnable matrices with a gradient slot of identical shape per entry.
/// Iteration order is lexicographic by name, which fixes every reduction order.
class ParamStore {
 public:
  /// Adds a parameter; throws UsageError if the name already exists.
  void add(const std::string& name, Matrix value);

  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  Matrix& value(const std::string& name);
  const Matrix& value(const std::string& name) const;
  Matrix& grad(const std::string& name);
  const Matrix& grad(const std::string& name) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return values_.size(); }
  std::size_t scalar_count() const;

  void zero_grads();

  const std::map<std::string, Matrix>& values() const { return values_; }

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.values_ == b.values_;
  }

 private:
  std::map<std::string, Matrix> values_;
  std::map<std::string, Matrix> grads_;
};

}  // namespace alerta
