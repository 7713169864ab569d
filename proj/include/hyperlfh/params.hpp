#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/matrix.hpp"

namespace hyperlfh {

/// Named trainable matrices with deterministic (insertion) iteration order.
template <typename T>
class ParamStore {
 public:
  Mat<T>& add(const std::string& name, Mat<T> value) {
    if (index_.count(name)) throw std::logic_error("ParamStore: duplicate name " + name);
    index_[name] = values_.size();
    names_.push_back(name);
    values_.push_back(std::move(value));
    return values_.back();
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  Mat<T>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::logic_error("ParamStore: unknown name " + name);
    return values_[it->second];
  }
  const Mat<T>& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::logic_error("ParamStore: unknown name " + name);
    return values_[it->second];
  }

  std::size_t count() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::logic_error("ParamStore: unknown name " + name);
    return it->second;
  }
  Mat<T>& value(std::size_t i) { return values_[i]; }
  const Mat<T>& value(std::size_t i) const { return values_[i]; }

  std::size_t total_entries() const {
    std::size_t n = 0;
    for (const auto& m : values_) n += m.size();
    return n;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Mat<T>> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {
inline void write_value(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}
inline void write_value(std::ostream& os, float v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  os << buf;
}
}  // namespace detail

/// Checkpoint container: plain text, one named matrix per block.
///
///   hyperlfh-checkpoint v1
///   params <count>
///   <name> <rows> <cols>
///   <row-major values, space separated, one row per line>
///
/// Values are printed with enough digits to round-trip the stored precision.
template <typename T>
void save_checkpoint(const ParamStore<T>& store, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path);
  os << "hyperlfh-checkpoint v1\n";
  os << "params " << store.count() << "\n";
  for (std::size_t i = 0; i < store.count(); ++i) {
    const Mat<T>& m = store.value(i);
    os << store.names()[i] << " " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (c) os << ' ';
        detail::write_value(os, m(r, c));
      }
      os << '\n';
    }
  }
  if (!os) throw DataError("failed writing checkpoint: " + path);
}

template <typename T>
ParamStore<T> load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  std::string magic, version;
  is >> magic >> version;
  if (magic != "hyperlfh-checkpoint" || version != "v1")
    throw DataError("bad checkpoint header in " + path);
  std::string token;
  std::size_t count = 0;
  is >> token >> count;
  if (token != "params") throw DataError("bad checkpoint param count in " + path);
  ParamStore<T> store;
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols))
      throw DataError("truncated checkpoint (matrix " + std::to_string(i) + ") in " + path);
    Mat<T> m(rows, cols);
    for (std::size_t k = 0; k < m.size(); ++k) {
      double v;
      if (!(is >> v)) throw DataError("truncated checkpoint values for " + name);
      m.at(k) = static_cast<T>(v);
    }
    store.add(name, std::move(m));
  }
  return store;
}

}  // namespace hyperlfh
