#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "hyperlfh/errors.hpp"

namespace hyperlfh {

/// Unweighted mean of per-class F1 = 2TP/(2TP+FP+FN); a class never
/// predicted and never present scores 0.
inline double macro_f1(const std::vector<int>& pred, const std::vector<int>& gold,
                       int num_classes) {
  if (pred.size() != gold.size())
    throw std::invalid_argument("macro_f1: prediction/label size mismatch");
  std::vector<long> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gold[i])
      ++tp[pred[i]];
    else {
      ++fp[pred[i]];
      ++fn[gold[i]];
    }
  }
  double sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const long denom = 2 * tp[c] + fp[c] + fn[c];
    sum += denom == 0 ? 0.0 : 2.0 * tp[c] / static_cast<double>(denom);
  }
  return sum / num_classes;
}

inline double accuracy(const std::vector<int>& pred, const std::vector<int>& gold) {
  if (pred.empty()) return 0.0;
  long hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == gold[i]) ++hit;
  return static_cast<double>(hit) / pred.size();
}

/// Binary F1 of the positive class (label 1).
inline double binary_f1(const std::vector<int>& pred, const std::vector<int>& gold) {
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1 && gold[i] == 1) ++tp;
    else if (pred[i] == 1) ++fp;
    else if (gold[i] == 1) ++fn;
  }
  const long denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
}

struct EpochRow {
  int epoch;
  double train_loss;
  double val_loss;
  double val_f1;
};

/// CSV schema: epoch,train_loss,val_loss,val_f1. Values get 17 significant
/// digits so the file is byte-stable for bitwise-identical runs.
inline void write_metrics_csv(const std::vector<EpochRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write metrics csv: " + path);
  os << "epoch,train_loss,val_loss,val_f1\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss,
                  r.val_loss, r.val_f1);
    os << buf;
  }
}

struct SweepRow {
  std::string param;
  double value;
  double f1;
  std::uint64_t seed;
};

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write sweep csv: " + path);
  os << "param,value,f1,seed\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%llu\n", r.param.c_str(), r.value, r.f1,
                  static_cast<unsigned long long>(r.seed));
    os << buf;
  }
}

}  // namespace hyperlfh
