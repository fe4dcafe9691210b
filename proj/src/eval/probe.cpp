#include "partrep/eval/probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "partrep/kern/kernels.hpp"
#include "partrep/nn/adam.hpp"

namespace partrep::eval {

namespace {

std::vector<int> predict_logits(const Tensor<float>& w, const Tensor<float>& b,
                                const Tensor<float>& x) {
  int64_t n = x.dim(0), dim = x.dim(1), classes = w.dim(0);
  std::vector<int> out(static_cast<size_t>(n));
  std::vector<float> logits(static_cast<size_t>(classes));
  for (int64_t i = 0; i < n; ++i) {
    const float* xi = x.data() + i * dim;
    int best = 0;
    for (int64_t c = 0; c < classes; ++c) {
      logits[static_cast<size_t>(c)] = kern::dot(w.data() + c * dim, xi, dim) + b[c];
      if (logits[static_cast<size_t>(c)] > logits[static_cast<size_t>(best)]) best = static_cast<int>(c);
    }
    out[static_cast<size_t>(i)] = best;
  }
  return out;
}

}  // namespace

std::vector<int> LinearProbe::predict(const Tensor<float>& features) const {
  if (features.dim(1) != feature_dim())
    throw std::invalid_argument("probe: feature dimension mismatch");
  return predict_logits(weight, bias, features);
}

double LinearProbe::accuracy(const Tensor<float>& features, const std::vector<int>& labels) const {
  auto preds = predict(features);
  if (preds.size() != labels.size()) throw std::invalid_argument("probe: label count mismatch");
  if (preds.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(preds.size());
}

LinearProbe fit_probe(const Tensor<float>& features, const std::vector<int>& labels,
                      const ProbeConfig& cfg) {
  int64_t n = features.dim(0), dim = features.dim(1);
  if (n == 0 || static_cast<size_t>(n) != labels.size())
    throw std::invalid_argument("fit_probe: feature/label count mismatch");
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2)
    throw std::runtime_error("fit_probe: degenerate labels (a single class)");
  int classes = *std::max_element(labels.begin(), labels.end()) + 1;

  // Standardize for conditioning; folded back into the raw-feature probe.
  std::vector<float> mean(static_cast<size_t>(dim)), inv_std(static_cast<size_t>(dim));
  for (int64_t d = 0; d < dim; ++d) {
    double s = 0, s2 = 0;
    for (int64_t i = 0; i < n; ++i) {
      float v = features[i * dim + d];
      s += v;
      s2 += static_cast<double>(v) * v;
    }
    double m = s / static_cast<double>(n);
    double var = std::max(0.0, s2 / static_cast<double>(n) - m * m);
    mean[static_cast<size_t>(d)] = static_cast<float>(m);
    inv_std[static_cast<size_t>(d)] = static_cast<float>(1.0 / std::sqrt(var + 1e-12));
  }
  Tensor<float> x({n, dim});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t d = 0; d < dim; ++d)
      x[i * dim + d] = (features[i * dim + d] - mean[static_cast<size_t>(d)]) *
                       inv_std[static_cast<size_t>(d)];

  Tensor<float> w({classes, dim}), b({classes});
  Tensor<float> dw({classes, dim}), db({classes});
  nn::ParamRefs<float> params;
  params.add("w", w, dw);
  params.add("b", b, db);
  nn::Adam<float> opt(params, static_cast<float>(cfg.lr));

  Tensor<float> logits({n, classes});
  float inv_n = 1.0f / static_cast<float>(n);
  LinearProbe probe;
  probe.lr = cfg.lr;
  probe.seed = cfg.seed;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    kern::gemm_nt(x.data(), w.data(), logits.data(), n, classes, dim, false);
    dw.zero();
    db.zero();
    for (int64_t i = 0; i < n; ++i) {
      float* row = logits.data() + i * classes;
      float mx = row[0] + b[0];
      for (int64_t c = 0; c < classes; ++c) {
        row[c] += b[c];
        mx = std::max(mx, row[c]);
      }
      float z = 0;
      for (int64_t c = 0; c < classes; ++c) {
        row[c] = std::exp(row[c] - mx);
        z += row[c];
      }
      for (int64_t c = 0; c < classes; ++c) {
        float p = row[c] / z;
        float g = (p - (labels[static_cast<size_t>(i)] == static_cast<int>(c) ? 1.0f : 0.0f)) * inv_n;
        kern::axpy(g, x.data() + i * dim, dw.data() + c * dim, dim);
        db[c] += g;
      }
    }
    double gnorm = std::sqrt(static_cast<double>(kern::sumsq(dw.data(), dw.numel())) +
                             static_cast<double>(kern::sumsq(db.data(), db.numel())));
    probe.epochs_run = epoch + 1;
    probe.final_grad_norm = gnorm;
    if (gnorm < cfg.grad_tol) break;
    opt.step();
  }

  probe.weight = Tensor<float>({classes, dim});
  probe.bias = Tensor<float>({classes});
  for (int64_t c = 0; c < classes; ++c) {
    float shift = 0;
    for (int64_t d = 0; d < dim; ++d) {
      float wr = w[c * dim + d] * inv_std[static_cast<size_t>(d)];
      probe.weight[c * dim + d] = wr;
      shift += wr * mean[static_cast<size_t>(d)];
    }
    probe.bias[c] = b[c] - shift;
  }
  return probe;
}

}  // namespace partrep::eval
