#include "thetaem/models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace thetaem {

CallableModel::CallableModel(std::size_t d, std::size_t m, Field drift, Field diffusion,
                             std::string label)
    : d_(d), m_(m), drift_(std::move(drift)), diffusion_(std::move(diffusion)),
      label_(std::move(label)) {
  if (d_ == 0 || m_ == 0) {
    throw std::invalid_argument("CallableModel: dimensions must be positive");
  }
  if (!drift_ || !diffusion_) {
    throw std::invalid_argument("CallableModel: drift and diffusion must be callable");
  }
}

namespace {

// |x|^{p} x with the convention 0 at x = 0.
inline double signed_power(double x, double p) {
  if (x == 0.0) return 0.0;
  return std::pow(std::abs(x), p) * x;
}

class PolyModel final : public ScalarSdeModel {
 public:
  explicit PolyModel(const PolyModelParams& p) : p_(p) {}

  double drift_at(double x, double) const override {
    return p_.a * x + p_.b * signed_power(x, p_.q - 1.0);
  }
  double diffusion_at(double x, double) const override {
    return p_.c * std::pow(std::abs(x), p_.gamma);
  }
  std::string label() const override {
    std::ostringstream os;
    os << "poly(a=" << p_.a << ",b=" << p_.b << ",c=" << p_.c << ",q=" << p_.q
       << ",gamma=" << p_.gamma << ")";
    return os.str();
  }

 private:
  PolyModelParams p_;
};

class TimeDecayModel final : public ScalarSdeModel {
 public:
  TimeDecayModel(double K1, double C, double gamma) : K1_(K1), C_(C), gamma_(gamma) {}

  double drift_at(double x, double t) const override {
    const double s = 1.0 + t;
    return (-std::sqrt(s) * signed_power(x, 2.0 * gamma_ - 2.0) - 2.0 * K1_ * x) / (2.0 * s);
  }
  double diffusion_at(double x, double t) const override {
    const double s = 1.0 + t;
    return std::sqrt(std::pow(std::abs(x), 2.0 * gamma_) / std::sqrt(s) + C_ * std::pow(s, -K1_));
  }
  std::string label() const override {
    std::ostringstream os;
    os << "time-decay(K1=" << K1_ << ",C=" << C_ << ",gamma=" << gamma_ << ")";
    return os.str();
  }

 private:
  double K1_;
  double C_;
  double gamma_;
};

class LinearModel final : public ScalarSdeModel {
 public:
  LinearModel(double lambda, double sigma) : lambda_(lambda), sigma_(sigma) {}

  double drift_at(double x, double) const override { return lambda_ * x; }
  double diffusion_at(double x, double) const override { return sigma_ * x; }
  std::string label() const override {
    std::ostringstream os;
    os << "linear(lambda=" << lambda_ << ",sigma=" << sigma_ << ")";
    return os.str();
  }

 private:
  double lambda_;
  double sigma_;
};

class ZeroModel final : public SdeModel {
 public:
  ZeroModel(std::size_t d, std::size_t m) : d_(d), m_(m) {}

  std::size_t state_dim() const override { return d_; }
  std::size_t noise_dim() const override { return m_; }
  void drift(std::span<const double>, double, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }
  void diffusion(std::span<const double>, double, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }
  std::string label() const override { return "zero"; }

 private:
  std::size_t d_;
  std::size_t m_;
};

}  // namespace

std::unique_ptr<SdeModel> make_poly_model(const PolyModelParams& params) {
  if (!(params.q > 0.0)) {
    throw std::invalid_argument("make_poly_model: q must be > 0");
  }
  if (!(params.gamma >= 0.5)) {
    throw std::invalid_argument("make_poly_model: gamma must be >= 1/2");
  }
  if (!std::isfinite(params.a) || !std::isfinite(params.b) || !std::isfinite(params.c)) {
    throw std::invalid_argument("make_poly_model: a, b, c must be finite");
  }
  return std::make_unique<PolyModel>(params);
}

std::unique_ptr<SdeModel> make_time_decay_model(double K1, double C, double gamma) {
  if (!(K1 > 1.0)) throw std::invalid_argument("make_time_decay_model: K1 must be > 1");
  if (!(C > 0.0)) throw std::invalid_argument("make_time_decay_model: C must be > 0");
  if (!(gamma >= 1.0)) throw std::invalid_argument("make_time_decay_model: gamma must be >= 1");
  return std::make_unique<TimeDecayModel>(K1, C, gamma);
}

std::unique_ptr<SdeModel> make_linear_model(double lambda, double sigma) {
  return std::make_unique<LinearModel>(lambda, sigma);
}

std::unique_ptr<SdeModel> make_zero_model(std::size_t d, std::size_t m) {
  if (d == 0 || m == 0) throw std::invalid_argument("make_zero_model: dimensions must be positive");
  return std::make_unique<ZeroModel>(d, m);
}

}  // namespace thetaem
