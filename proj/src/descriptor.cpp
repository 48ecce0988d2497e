#include "thinlayer/descriptor.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace thinlayer {

namespace {

auto key(const Term& t) {
  return std::tie(t.px, t.pz, t.pw, t.pzs, t.pws, t.trig, t.mode);
}

}  // namespace

FunctionDescriptor::FunctionDescriptor(Frame frame, std::vector<Term> terms)
    : frame_(frame), terms_(std::move(terms)) {
  if (!(frame_.a < frame_.b)) throw std::invalid_argument("descriptor frame needs a < b");
  for (const Term& t : terms_) {
    if (t.px < 0 || t.pz < 0 || t.pw < 0) {
      throw std::invalid_argument("plain monomial exponents must be non-negative");
    }
    if (t.trig != Trig::None && t.mode <= 0) {
      throw std::invalid_argument("trigonometric modes must be positive");
    }
  }
  normalize();
}

FunctionDescriptor FunctionDescriptor::constant(Frame frame, double value) {
  return FunctionDescriptor(frame, {Term{value}});
}

void FunctionDescriptor::normalize() {
  for (Term& t : terms_) {
    if (t.trig == Trig::None) t.mode = 0;
  }
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& l, const Term& r) { return key(l) < key(r); });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const Term& t : terms_) {
    if (!merged.empty() && key(merged.back()) == key(t)) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
  terms_ = std::move(merged);
}

FunctionDescriptor FunctionDescriptor::dx() const {
  const double k = std::numbers::pi / (frame_.b - frame_.a);
  std::vector<Term> out;
  for (const Term& t : terms_) {
    if (t.px > 0) {
      Term d = t;
      d.coeff *= t.px;
      d.px -= 1;
      out.push_back(d);
    }
    if (t.trig != Trig::None) {
      Term d = t;
      const double km = k * t.mode;
      if (t.trig == Trig::Sin) {
        d.trig = Trig::Cos;
        d.coeff *= km;
      } else {
        d.trig = Trig::Sin;
        d.coeff *= -km;
      }
      out.push_back(d);
    }
  }
  return {frame_, std::move(out)};
}

FunctionDescriptor FunctionDescriptor::dz() const {
  std::vector<Term> out;
  for (const Term& t : terms_) {
    if (t.pz > 0) {
      Term d = t;
      d.coeff *= t.pz;
      d.pz -= 1;
      out.push_back(d);
    }
    if (t.pzs != 0) {
      Term d = t;
      d.coeff *= t.pzs;
      d.pzs -= 1;
      out.push_back(d);
    }
  }
  return {frame_, std::move(out)};
}

FunctionDescriptor FunctionDescriptor::dw() const {
  std::vector<Term> out;
  for (const Term& t : terms_) {
    if (t.pw > 0) {
      Term d = t;
      d.coeff *= t.pw;
      d.pw -= 1;
      out.push_back(d);
    }
    if (t.pws != 0) {
      Term d = t;
      d.coeff *= t.pws;
      d.pws -= 1;
      out.push_back(d);
    }
  }
  return {frame_, std::move(out)};
}

FunctionDescriptor FunctionDescriptor::at_z(double z0) const {
  std::vector<Term> out;
  for (const Term& t : terms_) {
    Term d = t;
    d.coeff *= detail::ipow(z0, t.pz) * detail::ipow(z0 + frame_.H, t.pzs);
    d.pz = 0;
    d.pzs = 0;
    out.push_back(d);
  }
  return {frame_, std::move(out)};
}

FunctionDescriptor FunctionDescriptor::times_z_shift() const {
  std::vector<Term> out = terms_;
  for (Term& t : out) t.pzs += 1;
  return {frame_, std::move(out)};
}

bool FunctionDescriptor::independent_of_z() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.pz == 0 && t.pzs == 0; });
}

bool FunctionDescriptor::independent_of_w() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.pw == 0 && t.pws == 0; });
}

FunctionDescriptor& FunctionDescriptor::operator+=(const FunctionDescriptor& other) {
  if (!other.terms_.empty() && !terms_.empty() && !(other.frame_ == frame_)) {
    throw std::invalid_argument("cannot add descriptors with different frames");
  }
  if (terms_.empty()) frame_ = other.frame_;
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  normalize();
  return *this;
}

FunctionDescriptor& FunctionDescriptor::operator*=(double s) {
  for (Term& t : terms_) t.coeff *= s;
  normalize();
  return *this;
}

std::string FunctionDescriptor::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const Term& t : terms_) {
    if (!s.empty()) s += " + ";
    s += fmt::format("{:.17g}", t.coeff);
    if (t.px) s += fmt::format("*x^{}", t.px);
    if (t.pz) s += fmt::format("*z^{}", t.pz);
    if (t.pw) s += fmt::format("*w^{}", t.pw);
    if (t.pzs) s += fmt::format("*(z+H)^{}", t.pzs);
    if (t.pws) s += fmt::format("*(w+H)^{}", t.pws);
    if (t.trig == Trig::Sin) s += fmt::format("*sin({}pi x')", t.mode);
    if (t.trig == Trig::Cos) s += fmt::format("*cos({}pi x')", t.mode);
  }
  return s;
}

}  // namespace thinlayer
