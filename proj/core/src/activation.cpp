#include "ntkcond/activation.hpp"

#include <cmath>
#include <limits>

#include "ntkcond/types.hpp"

namespace ntkcond {
namespace {

// sup |tanh''| = 4 / (3 sqrt 3), attained at tanh(z) = 1/sqrt(3).
constexpr double kTanhSmoothness = 0.76980035891950104;
// sup |swish'|, attained near z = 2.39936.
constexpr double kSwishLipschitz = 1.0998393201288670;
constexpr double kSwishSmoothness = 0.5;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Activation Activation::parse(std::string_view name) {
  if (name == "tanh") return Activation(ActivationKind::kTanh);
  if (name == "swish") return Activation(ActivationKind::kSwish);
  if (name == "softplus") return Activation(ActivationKind::kSoftplus);
  if (name == "relu") return Activation(ActivationKind::kRelu);
  if (name == "identity" || name == "linear") return Activation(ActivationKind::kIdentity);
  if (name == "quadratic") return Activation(ActivationKind::kQuadratic);
  if (name == "tanh3" || name == "scaled-tanh-3") return Activation(ActivationKind::kScaledTanh3);
  throw ContractError("unknown activation '" + std::string(name) + "'");
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::kTanh: return "tanh";
    case ActivationKind::kSwish: return "swish";
    case ActivationKind::kSoftplus: return "softplus";
    case ActivationKind::kRelu: return "relu";
    case ActivationKind::kIdentity: return "identity";
    case ActivationKind::kQuadratic: return "quadratic";
    case ActivationKind::kScaledTanh3: return "tanh3";
  }
  return "unknown";
}

double Activation::value(double z) const {
  switch (kind_) {
    case ActivationKind::kTanh: return std::tanh(z);
    case ActivationKind::kSwish: return z * sigmoid(z);
    case ActivationKind::kSoftplus: return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    case ActivationKind::kRelu: return z > 0.0 ? z : 0.0;
    case ActivationKind::kIdentity: return z;
    case ActivationKind::kQuadratic: return z * z;
    case ActivationKind::kScaledTanh3: return 3.0 * std::tanh(z);
  }
  return 0.0;
}

double Activation::first(double z) const {
  switch (kind_) {
    case ActivationKind::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case ActivationKind::kSwish: {
      const double s = sigmoid(z);
      return s + z * s * (1.0 - s);
    }
    case ActivationKind::kSoftplus: return sigmoid(z);
    case ActivationKind::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case ActivationKind::kIdentity: return 1.0;
    case ActivationKind::kQuadratic: return 2.0 * z;
    case ActivationKind::kScaledTanh3: {
      const double t = std::tanh(z);
      return 3.0 * (1.0 - t * t);
    }
  }
  return 0.0;
}

void Activation::apply(const Eigen::ArrayXXd& z, Eigen::ArrayXXd* value, Eigen::ArrayXXd* first) const {
  switch (kind_) {
    case ActivationKind::kRelu:
      if (value) *value = z.max(0.0);
      if (first) *first = (z > 0.0).cast<double>();
      return;
    case ActivationKind::kTanh:
    case ActivationKind::kScaledTanh3: {
      const double c = kind_ == ActivationKind::kTanh ? 1.0 : 3.0;
      const Eigen::ArrayXXd t = z.tanh();
      if (value) *value = c * t;
      if (first) *first = c * (1.0 - t.square());
      return;
    }
    case ActivationKind::kIdentity:
      if (value) *value = z;
      if (first) *first = Eigen::ArrayXXd::Ones(z.rows(), z.cols());
      return;
    case ActivationKind::kQuadratic:
      if (value) *value = z.square();
      if (first) *first = 2.0 * z;
      return;
    default:
      if (value) *value = z.unaryExpr([this](double v) { return this->value(v); });
      if (first) *first = z.unaryExpr([this](double v) { return this->first(v); });
      return;
  }
}

double Activation::second(double z) const {
  switch (kind_) {
    case ActivationKind::kTanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case ActivationKind::kSwish: {
      const double s = sigmoid(z);
      return s * (1.0 - s) * (2.0 + z * (1.0 - 2.0 * s));
    }
    case ActivationKind::kSoftplus: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
    case ActivationKind::kRelu: return 0.0;
    case ActivationKind::kIdentity: return 0.0;
    case ActivationKind::kQuadratic: return 2.0;
    case ActivationKind::kScaledTanh3: {
      const double t = std::tanh(z);
      return -6.0 * t * (1.0 - t * t);
    }
  }
  return 0.0;
}

double Activation::lipschitz() const {
  switch (kind_) {
    case ActivationKind::kSwish: return kSwishLipschitz;
    case ActivationKind::kQuadratic: return std::numeric_limits<double>::infinity();
    case ActivationKind::kScaledTanh3: return 3.0;
    default: return 1.0;
  }
}

std::optional<double> Activation::smoothness() const {
  switch (kind_) {
    case ActivationKind::kTanh: return kTanhSmoothness;
    case ActivationKind::kSwish: return kSwishSmoothness;
    case ActivationKind::kSoftplus: return 0.25;
    case ActivationKind::kRelu: return std::nullopt;
    case ActivationKind::kIdentity: return 0.0;
    case ActivationKind::kQuadratic: return 2.0;
    case ActivationKind::kScaledTanh3: return 3.0 * kTanhSmoothness;
  }
  return std::nullopt;
}

OutputMap OutputMap::identity() {
  return OutputMap{"identity", [](double z) { return z; }, [](double) { return 1.0; },
                   [](double) { return 0.0; }, 1.0};
}

OutputMap OutputMap::linear(double scale) {
  return OutputMap{"linear", [scale](double z) { return scale * z; },
                   [scale](double) { return scale; }, [](double) { return 0.0; },
                   std::abs(scale)};
}

OutputMap OutputMap::from_activation(const Activation& activation) {
  if (!activation.smooth()) {
    throw UnsupportedOperation("output map '" + activation.name() +
                               "' must be twice differentiable");
  }
  return OutputMap{activation.name(), [activation](double z) { return activation.value(z); },
                   [activation](double z) { return activation.first(z); },
                   [activation](double z) { return activation.second(z); },
                   activation.lipschitz()};
}

OutputMap OutputMap::parse(std::string_view name) {
  if (name == "identity" || name == "linear") return identity();
  return from_activation(Activation::parse(name));
}

}  // namespace ntkcond
