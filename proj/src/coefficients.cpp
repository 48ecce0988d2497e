#include "thinlayer/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

Permittivity::Permittivity(const Domain1D& dom, FunctionDescriptor sigma, int samples)
    : sigma_(std::move(sigma)),
      min_(std::numeric_limits<double>::infinity()),
      max_(-std::numeric_limits<double>::infinity()) {
  if (!sigma_.independent_of_w()) throw ValidationError("permittivity must depend on (x, z) only");
  for (int i = 0; i <= samples; ++i) {
    const double x = dom.a + dom.length() * i / samples;
    for (int j = 0; j <= samples; ++j) {
      const double z = -dom.H - 1.0 + static_cast<double>(j) / samples;
      const double v = sigma_(x, z);
      min_ = std::min(min_, v);
      max_ = std::max(max_, v);
    }
  }
  if (!(min_ > 0.0)) {
    throw ValidationError(fmt::format(
        "permittivity: sigma_min > 0 violated on [a,b] x [-H-1,-H] (sampled min {:.6g})", min_));
  }
}

double sigma_delta(const Permittivity& sigma, const Domain1D& dom, double delta, double x, double z) {
  if (z < -dom.H - delta) throw OutOfDomain(fmt::format("z = {:.17g} lies below the layer", z));
  if (z < -dom.H) return delta * sigma(x, z);
  return 1.0;
}

BoundaryData::BoundaryData(FunctionDescriptor h, FunctionDescriptor h_b, FunctionDescriptor frak_h,
                           bool affine)
    : h_(std::move(h)),
      hb_(std::move(h_b)),
      frak_(std::move(frak_h)),
      h_x_(h_.dx()),
      h_z_(h_.dz()),
      h_w_(h_.dw()),
      hb_x_(hb_.dx()),
      hb_z_(hb_.dz()),
      hb_w_(hb_.dw()),
      affine_(affine) {}

BoundaryData BoundaryData::affine(FunctionDescriptor h, FunctionDescriptor frak_h) {
  if (!frak_h.independent_of_z()) throw ValidationError("frak_h must depend on (x, w) only");
  const double H = h.frame().H;
  FunctionDescriptor trace = h.at_z(-H);
  FunctionDescriptor hb = trace + (trace - frak_h).times_z_shift();
  return {std::move(h), std::move(hb), std::move(frak_h), true};
}

BoundaryData BoundaryData::with_layer_datum(FunctionDescriptor h, FunctionDescriptor h_b) {
  const double H = h.frame().H;
  FunctionDescriptor frak = h_b.at_z(-H - 1.0);
  return {std::move(h), std::move(h_b), std::move(frak), false};
}

double h_delta(const BoundaryData& bd, double delta, double x, double z, double w) {
  const double H = bd.frame().H;
  if (z < -H - delta) throw OutOfDomain(fmt::format("z = {:.17g} lies below the layer", z));
  if (z < -H) return bd.h_b()(x, -H + (z + H) / delta, w);
  return bd.h()(x, z, w);
}

Eigen::Vector2d grad_h_delta(const BoundaryData& bd, const DeflectionProfile& u, double delta,
                             double x, double z) {
  const double H = bd.frame().H;
  if (z < -H - delta) throw OutOfDomain(fmt::format("z = {:.17g} lies below the layer", z));
  if (z >= -H) return grad_h_u(bd, u, x, z);
  const double w = u(x);
  const double zeta = -H + (z + H) / delta;
  return {bd.hb_x()(x, zeta, w) + bd.hb_w()(x, zeta, w) * u.derivative(x),
          bd.hb_z()(x, zeta, w) / delta};
}

double h_u(const BoundaryData& bd, const DeflectionProfile& u, double x, double z) {
  return bd.h()(x, z, u(x));
}

Eigen::Vector2d grad_h_u(const BoundaryData& bd, const DeflectionProfile& u, double x, double z) {
  const double w = u(x);
  return {bd.h_x()(x, z, w) + bd.h_w()(x, z, w) * u.derivative(x), bd.h_z()(x, z, w)};
}

double frak_h_u(const BoundaryData& bd, const DeflectionProfile& u, double x) {
  return bd.h_b()(x, -bd.frame().H - 1.0, u(x));
}

CompatibilityReport check_compatibility(const BoundaryData& bd, const Permittivity& sigma,
                                        double w_min, double w_max, double tol) {
  constexpr int n = 32;
  const Frame& f = bd.frame();
  CompatibilityReport r;
  r.tol = tol;
  for (int i = 0; i < n; ++i) {
    const double x = f.a + (f.b - f.a) * i / (n - 1);
    for (int k = 0; k < n; ++k) {
      const double w = w_min + (w_max - w_min) * k / (n - 1);
      const double cont = std::abs(bd.h_b()(x, -f.H, w) - bd.h()(x, -f.H, w));
      const double flux = std::abs(sigma(x, -f.H) * bd.hb_z()(x, -f.H, w) - bd.h_z()(x, -f.H, w));
      if (!std::isfinite(cont) || !std::isfinite(flux)) {
        // singular data, e.g. (w+H)^-1 at touchdown
        r.continuity_residual = std::numeric_limits<double>::infinity();
        r.flux_residual = std::numeric_limits<double>::infinity();
        return r;
      }
      r.continuity_residual = std::max(r.continuity_residual, cont);
      r.flux_residual = std::max(r.flux_residual, flux);
    }
  }
  return r;
}

}  // namespace thinlayer
