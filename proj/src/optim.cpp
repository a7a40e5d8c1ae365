#include "reenact/optim.hpp"

#include <Eigen/Core>
#include <cmath>

REENACT_NS_BEGIN

namespace {

using MatR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using CMapR = Eigen::Map<const MatR>;

constexpr Real kSigmaFloor = Real(1e-12);

void normalize_in_place(Vec& v) {
  const Real n = v.norm();
  if (n > kSigmaFloor) v /= n;
}

}  // namespace

Parameter::Parameter(std::string name_, Tensor value)
    : name(std::move(name_)), tensor(std::move(value)) {
  tensor.set_requires_grad(true);
  adam_m.assign(tensor.numel(), Real(0));
  adam_v.assign(tensor.numel(), Real(0));
}

void Parameter::enable_spectral(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec u(tensor.shape().n);
  for (int i = 0; i < u.size(); ++i) u[i] = static_cast<Real>(normal(rng));
  normalize_in_place(u);
  spectral_u.assign(u.data(), u.data() + u.size());
}

void adam_step(const ParamList& params, const AdamSettings& s) {
  for (const Parameter* p : params) {
    if (!p->tensor.has_grad()) {
      throw std::logic_error("adam_step: parameter '" + p->name + "' has no gradient");
    }
  }
  for (Parameter* p : params) {
    ++p->step_count;
    const double bc1 = 1.0 - std::pow(static_cast<double>(s.beta1), p->step_count);
    const double bc2 = 1.0 - std::pow(static_cast<double>(s.beta2), p->step_count);
    auto w = p->tensor.mutable_data();
    auto g = p->tensor.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      p->adam_m[i] = s.beta1 * p->adam_m[i] + (1 - s.beta1) * g[i];
      p->adam_v[i] = s.beta2 * p->adam_v[i] + (1 - s.beta2) * g[i] * g[i];
      const double m_hat = p->adam_m[i] / bc1;
      const double v_hat = p->adam_v[i] / bc2;
      w[i] -= static_cast<Real>(s.lr * m_hat / (std::sqrt(v_hat) + s.eps));
    }
    p->tensor.zero_grad();
  }
}

void zero_grad(const ParamList& params) {
  for (Parameter* p : params) p->tensor.zero_grad();
}

void set_trainable(const ParamList& params, bool trainable) {
  for (Parameter* p : params) p->tensor.set_requires_grad(trainable);
}

Tensor spectral_normalize(Parameter& weight, const SpectralOptions& options) {
  if (!weight.spectral()) {
    throw std::logic_error("spectral_normalize: '" + weight.name +
                           "' has no power-iteration state");
  }
  const Shape ws = weight.tensor.shape();
  const int rows = ws.n;
  const int cols = static_cast<int>(ws.numel() / ws.n);
  CMapR w(weight.tensor.data().data(), rows, cols);
  Vec u = Eigen::Map<const Vec>(weight.spectral_u.data(), rows);
  Vec v(cols);
  for (int it = 0; it < std::max(options.iterations, 1); ++it) {
    v.noalias() = w.transpose() * u;
    normalize_in_place(v);
    u.noalias() = w * v;
    normalize_in_place(u);
  }
  const Real sigma = std::max(u.dot(w * v), kSigmaFloor);
  if (options.update) weight.spectral_u.assign(u.data(), u.data() + rows);

  std::vector<Real> out(ws.numel());
  const auto src = weight.tensor.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = src[i] / sigma;

  TensorImpl* iw = weight.tensor.impl();
  std::vector<Real> uv(u.data(), u.data() + rows);
  std::vector<Real> vv(v.data(), v.data() + cols);
  return make_result(
      ws, std::move(out), {weight.tensor},
      [iw, sigma, rows, cols, uv = std::move(uv), vv = std::move(vv)](TensorImpl& self) {
        // dL/dW = (G - <G, W_sn> u v^T) / sigma
        double inner = 0.0;
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          inner += static_cast<double>(self.grad[i]) * self.data[i];
        Real* gw = iw->grad_buffer();
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * cols + c;
            gw[i] += static_cast<Real>((self.grad[i] - inner * uv[r] * vv[c]) / sigma);
          }
      });
}

REENACT_NS_END
