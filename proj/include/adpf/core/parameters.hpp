#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace adpf {

/// Where a parameter may live. Intervals are open unless `closed` is set.
struct Support {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool closed = false;

  static Support real() { return {}; }
  static Support positive() { return {0.0, std::numeric_limits<double>::infinity(), false}; }
  static Support unit_interval() { return {0.0, 1.0, false}; }
  static Support closed_unit_interval() { return {0.0, 1.0, true}; }
  static Support interval(double a, double b) { return {a, b, false}; }

  bool contains(double v) const {
    if (!std::isfinite(v)) return false;
    return closed ? (v >= lower && v <= upper) : (v > lower && v < upper);
  }
};

struct Parameter {
  std::string name;
  double value = 0.0;
  Support support;
};

/// Named parameter values with their supports. Order is insertion order.
class ParameterVector {
 public:
  ParameterVector() = default;
  ParameterVector(std::initializer_list<Parameter> ps) {
    for (const auto& p : ps) add(p.name, p.value, p.support);
  }

  void add(std::string name, double value, Support s = Support::real()) {
    if (find(name) >= 0) throw std::invalid_argument("duplicate parameter " + name);
    entries_.push_back({std::move(name), value, s});
  }

  double operator[](const std::string& name) const { return entries_.at(index(name)).value; }
  double get(const std::string& name, double fallback) const {
    const int i = find(name);
    return i < 0 ? fallback : entries_[static_cast<std::size_t>(i)].value;
  }
  void set(const std::string& name, double v) { entries_.at(index(name)).value = v; }
  bool has(const std::string& name) const { return find(name) >= 0; }

  bool in_support() const {
    for (const auto& e : entries_) {
      if (!e.support.contains(e.value)) return false;
    }
    return true;
  }

  std::size_t size() const { return entries_.size(); }
  const std::vector<Parameter>& entries() const { return entries_; }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
  }

 private:
  int find(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }
  std::size_t index(const std::string& name) const {
    const int i = find(name);
    if (i < 0) throw std::out_of_range("unknown parameter " + name);
    return static_cast<std::size_t>(i);
  }

  std::vector<Parameter> entries_;
};

}  // namespace adpf
