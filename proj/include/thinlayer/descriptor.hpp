#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace thinlayer {

/// Interval D = (a, b) and gap height H shared by every descriptor of a device.
struct Frame {
  double a = 0.0;
  double b = 1.0;
  double H = 1.0;

  bool operator==(const Frame&) const = default;
};

enum class Trig : std::uint8_t { None, Sin, Cos };

/// One product term
///   coeff * x^px * z^pz * w^pw * (z+H)^pzs * (w+H)^pws * trig(mode*pi*(x-a)/(b-a)).
/// pw, pz, px are >= 0; the shifted powers may be negative.
struct Term {
  double coeff = 0.0;
  int px = 0;
  int pz = 0;
  int pw = 0;
  int pzs = 0;
  int pws = 0;
  Trig trig = Trig::None;
  int mode = 0;
};

namespace detail {

template <typename Scalar>
Scalar ipow(Scalar base, int e) {
  if (e == 0) return Scalar(1);
  const bool inv = e < 0;
  unsigned n = static_cast<unsigned>(inv ? -e : e);
  Scalar acc(1);
  Scalar p = base;
  while (n != 0u) {
    if (n & 1u) acc *= p;
    p *= p;
    n >>= 1u;
  }
  return inv ? Scalar(1) / acc : acc;
}

}  // namespace detail

/// Closed family of smooth functions of (x, z, w) with exact symbolic partials.
///
/// All of h, h_b, the permittivity and the deflection are instances; unused
/// arguments are simply absent from the exponents. The family is closed under
/// d/dx, d/dz, d/dw and under substitution of a constant for z.
class FunctionDescriptor {
 public:
  FunctionDescriptor() = default;
  FunctionDescriptor(Frame frame, std::vector<Term> terms);

  static FunctionDescriptor constant(Frame frame, double value);

  [[nodiscard]] const Frame& frame() const { return frame_; }
  [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
  [[nodiscard]] bool empty() const { return terms_.empty(); }

  template <typename Scalar>
  Scalar operator()(Scalar x, Scalar z = Scalar(0), Scalar w = Scalar(0)) const {
    const double k = std::numbers::pi / (frame_.b - frame_.a);
    Scalar out(0);
    for (const Term& t : terms_) {
      Scalar v = Scalar(t.coeff) * detail::ipow(x, t.px) * detail::ipow(z, t.pz) *
                 detail::ipow(w, t.pw) * detail::ipow(z + Scalar(frame_.H), t.pzs) *
                 detail::ipow(w + Scalar(frame_.H), t.pws);
      if (t.trig != Trig::None) {
        using std::cos;
        using std::sin;
        const Scalar arg = Scalar(k * t.mode) * (x - Scalar(frame_.a));
        v *= (t.trig == Trig::Sin) ? sin(arg) : cos(arg);
      }
      out += v;
    }
    return out;
  }

  [[nodiscard]] FunctionDescriptor dx() const;
  [[nodiscard]] FunctionDescriptor dz() const;
  [[nodiscard]] FunctionDescriptor dw() const;

  /// The function (x, w) -> f(x, z0, w), still a descriptor in (x, z, w).
  [[nodiscard]] FunctionDescriptor at_z(double z0) const;
  /// Multiply by (z+H).
  [[nodiscard]] FunctionDescriptor times_z_shift() const;

  /// True if no term depends on the given variable.
  [[nodiscard]] bool independent_of_z() const;
  [[nodiscard]] bool independent_of_w() const;

  FunctionDescriptor& operator+=(const FunctionDescriptor& other);
  FunctionDescriptor& operator*=(double s);

  friend FunctionDescriptor operator+(FunctionDescriptor lhs, const FunctionDescriptor& rhs) {
    return lhs += rhs;
  }
  friend FunctionDescriptor operator-(FunctionDescriptor lhs, FunctionDescriptor rhs) {
    rhs *= -1.0;
    return lhs += rhs;
  }
  friend FunctionDescriptor operator*(double s, FunctionDescriptor f) { return f *= s; }

  [[nodiscard]] std::string to_string() const;

 private:
  void normalize();

  Frame frame_;
  std::vector<Term> terms_;
};

}  // namespace thinlayer
