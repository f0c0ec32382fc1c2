#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>

namespace thetaem {

/// Drift f(x,t) and diffusion g(x,t) of dX = f dt + g dB.
///
/// Evaluation writes into caller-owned buffers so the stepping kernels can
/// run allocation free. The diffusion buffer is the d×m matrix in row-major
/// order. Implementations must be pure in (x, t).
class SdeModel {
 public:
  virtual ~SdeModel() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::size_t noise_dim() const = 0;
  virtual void drift(std::span<const double> x, double t, std::span<double> out) const = 0;
  virtual void diffusion(std::span<const double> x, double t, std::span<double> out) const = 0;
  virtual std::string label() const = 0;
};

/// Convenience base for d = m = 1 models.
class ScalarSdeModel : public SdeModel {
 public:
  virtual double drift_at(double x, double t) const = 0;
  virtual double diffusion_at(double x, double t) const = 0;

  std::size_t state_dim() const final { return 1; }
  std::size_t noise_dim() const final { return 1; }
  void drift(std::span<const double> x, double t, std::span<double> out) const final {
    out[0] = drift_at(x[0], t);
  }
  void diffusion(std::span<const double> x, double t, std::span<double> out) const final {
    out[0] = diffusion_at(x[0], t);
  }
};

/// Wraps user-supplied callables as a model.
class CallableModel final : public SdeModel {
 public:
  using Field = std::function<void(std::span<const double>, double, std::span<double>)>;

  CallableModel(std::size_t d, std::size_t m, Field drift, Field diffusion, std::string label);

  std::size_t state_dim() const override { return d_; }
  std::size_t noise_dim() const override { return m_; }
  void drift(std::span<const double> x, double t, std::span<double> out) const override {
    drift_(x, t, out);
  }
  void diffusion(std::span<const double> x, double t, std::span<double> out) const override {
    diffusion_(x, t, out);
  }
  std::string label() const override { return label_; }

 private:
  std::size_t d_;
  std::size_t m_;
  Field drift_;
  Field diffusion_;
  std::string label_;
};

/// Parameters of dX = (a X + b |X|^{q-1} X) dt + c |X|^gamma dB.
struct PolyModelParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double q = 1.0;
  double gamma = 1.0;
};

/// Scalar model with polynomial drift and power-law diffusion.
/// Uses |x|^{q-1} x := 0 at x = 0. Throws std::invalid_argument for q <= 0
/// or gamma < 1/2.
std::unique_ptr<SdeModel> make_poly_model(const PolyModelParams& params);

/// Scalar model with polynomially decaying coefficients:
///
///   f(x,t) = (-(1+t)^{1/2} |x|^{2γ-2} x - 2 K1 x) / (2 (1+t))
///   g(x,t) = sqrt(|x|^{2γ} (1+t)^{-1/2} + C (1+t)^{-K1})
///
/// so that 2 x f + g^2 = C (1+t)^{-K1} - 2 K1 (1+t)^{-1} x^2 exactly.
/// Requires K1 > 1, C > 0, gamma >= 1.
std::unique_ptr<SdeModel> make_time_decay_model(double K1, double C, double gamma);

/// f(x) = lambda x, g(x) = sigma x (scalar geometric Brownian motion).
std::unique_ptr<SdeModel> make_linear_model(double lambda, double sigma);

/// f ≡ 0, g ≡ 0 in dimension d with m noise channels.
std::unique_ptr<SdeModel> make_zero_model(std::size_t d = 1, std::size_t m = 1);

}  // namespace thetaem
