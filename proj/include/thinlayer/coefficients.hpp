#pragma once

#include <Eigen/Core>

#include "thinlayer/descriptor.hpp"
#include "thinlayer/geometry.hpp"

namespace thinlayer {

/// Layer permittivity sigma(x, z) on [a,b] x [-H-1, -H], bounded below by sigma_min > 0.
class Permittivity {
 public:
  Permittivity(const Domain1D& dom, FunctionDescriptor sigma, int samples = 64);

  [[nodiscard]] double operator()(double x, double z) const { return sigma_(x, z); }
  [[nodiscard]] double sigma_min() const { return min_; }
  [[nodiscard]] double sigma_max() const { return max_; }
  [[nodiscard]] const FunctionDescriptor& descriptor() const { return sigma_; }

 private:
  FunctionDescriptor sigma_;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// delta * sigma in the layer (-H-delta, -H), 1 for z >= -H.
double sigma_delta(const Permittivity& sigma, const Domain1D& dom, double delta, double x, double z);

/// Boundary data h (free space) and h_b (layer, rescaled to unit thickness), plus the
/// bottom-plate datum frak_h(x, w) = h_b(x, -H-1, w).
class BoundaryData {
 public:
  /// h_b(x,z,w) = h(x,-H,w) + (z+H) (h(x,-H,w) - frak_h(x,w)).
  static BoundaryData affine(FunctionDescriptor h, FunctionDescriptor frak_h);
  static BoundaryData with_layer_datum(FunctionDescriptor h, FunctionDescriptor h_b);

  [[nodiscard]] const Frame& frame() const { return h_.frame(); }
  [[nodiscard]] bool is_affine() const { return affine_; }

  [[nodiscard]] const FunctionDescriptor& h() const { return h_; }
  [[nodiscard]] const FunctionDescriptor& h_b() const { return hb_; }
  [[nodiscard]] const FunctionDescriptor& frak_h() const { return frak_; }

  [[nodiscard]] const FunctionDescriptor& h_x() const { return h_x_; }
  [[nodiscard]] const FunctionDescriptor& h_z() const { return h_z_; }
  [[nodiscard]] const FunctionDescriptor& h_w() const { return h_w_; }
  [[nodiscard]] const FunctionDescriptor& hb_x() const { return hb_x_; }
  [[nodiscard]] const FunctionDescriptor& hb_z() const { return hb_z_; }
  [[nodiscard]] const FunctionDescriptor& hb_w() const { return hb_w_; }

 private:
  BoundaryData(FunctionDescriptor h, FunctionDescriptor h_b, FunctionDescriptor frak_h, bool affine);

  FunctionDescriptor h_, hb_, frak_;
  FunctionDescriptor h_x_, h_z_, h_w_, hb_x_, hb_z_, hb_w_;
  bool affine_ = false;
};

/// h_delta(x, z, w): h_b with its z-argument stretched from the layer, h above it.
double h_delta(const BoundaryData& bd, double delta, double x, double z, double w);

/// (d/dx, d/dz) of (x, z) -> h_delta(x, z, u(x)), chain rule through u'.
Eigen::Vector2d grad_h_delta(const BoundaryData& bd, const DeflectionProfile& u, double delta,
                             double x, double z);

/// h_u(x, z) = h(x, z, u(x)).
double h_u(const BoundaryData& bd, const DeflectionProfile& u, double x, double z);
Eigen::Vector2d grad_h_u(const BoundaryData& bd, const DeflectionProfile& u, double x, double z);

/// frak_h_u(x) = h_b(x, -H-1, u(x)).
double frak_h_u(const BoundaryData& bd, const DeflectionProfile& u, double x);

struct CompatibilityReport {
  double continuity_residual = 0.0;  // max |h_b(x,-H,w) - h(x,-H,w)|
  double flux_residual = 0.0;        // max |sigma(x,-H) d_z h_b(x,-H,w) - d_z h(x,-H,w)|
  double tol = 0.0;
  [[nodiscard]] bool passed() const { return continuity_residual <= tol && flux_residual <= tol; }
};

/// Samples a 32 x 32 grid of (x, w) in [a,b] x [w_min, w_max].
CompatibilityReport check_compatibility(const BoundaryData& bd, const Permittivity& sigma,
                                        double w_min, double w_max, double tol);

}  // namespace thinlayer
