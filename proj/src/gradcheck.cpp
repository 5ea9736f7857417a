#include "lnskd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lnskd {
namespace {

double finite_or_throw(double v, const char* what, std::size_t index) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("finite_difference_check: non-finite ") + what + " at coordinate " +
                       std::to_string(index));
  }
  return v;
}

}  // namespace

double finite_difference_check(const ScalarFunction& f, TensorD x, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("finite_difference_check: epsilon must be positive");

  const bool had_requires_grad = x.requires_grad();
  x.set_requires_grad(true);
  x.zero_grad();
  TapeD tape;
  TensorD loss = f(&tape, x);
  finite_or_throw(loss.item(), "loss", 0);
  tape.backward(loss);
  std::vector<double> analytic(x.numel(), 0.0);
  if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
  x.zero_grad();
  tape.clear();

  double worst = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double saved = x[i];
    x[i] = saved + epsilon;
    const double up = finite_or_throw(f(nullptr, x).item(), "f(x+eps)", i);
    x[i] = saved - epsilon;
    const double down = finite_or_throw(f(nullptr, x).item(), "f(x-eps)", i);
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double a = finite_or_throw(analytic[i], "analytic gradient", i);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  x.set_requires_grad(had_requires_grad);
  return worst;
}

}  // namespace lnskd
