#include "thinlayer/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "thinlayer/errors.hpp"
#include "thinlayer/gamma.hpp"

namespace thinlayer {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr int kMaxDegree = 4;

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

class Reader {
 public:
  explicit Reader(std::string label) : label_(std::move(label)) {}

  [[noreturn]] void parse_fail(const YAML::Node& n, const std::string& what) const {
    throw ParseError(fmt::format("{}:{}: {}", label_, line_of(n), what));
  }

  void violation(const YAML::Node& n, const std::string& what) {
    violations_.push_back(fmt::format("{}:{}: {}", label_, line_of(n), what));
  }

  void warn(const YAML::Node& n, const std::string& what) {
    warnings_.push_back(fmt::format("{}:{}: {}", label_, line_of(n), what));
  }

  template <typename T>
  T scalar(const YAML::Node& n, const char* key) const {
    if (!n.IsScalar()) parse_fail(n, fmt::format("'{}' must be a scalar", key));
    try {
      return n.as<T>();
    } catch (const YAML::BadConversion&) {
      parse_fail(n, fmt::format("'{}' has the wrong type: '{}'", key, n.Scalar()));
    }
  }

  template <typename T>
  T get(const YAML::Node& map, const char* key, T fallback) const {
    const YAML::Node v = map[key];
    return v ? scalar<T>(v, key) : fallback;
  }

  YAML::Node section(const YAML::Node& root, const char* key, bool required) const {
    const YAML::Node n = root[key];
    if (!n) {
      if (required) throw ParseError(fmt::format("{}: missing section '{}'", label_, key));
      return n;
    }
    if (!n.IsMap()) parse_fail(n, fmt::format("section '{}' must be a map", key));
    return n;
  }

  void check_keys(const YAML::Node& map, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
      const std::string k = kv.first.as<std::string>();
      if (!ok.count(k)) warn(kv.first, fmt::format("unknown key '{}' ignored", k));
    }
  }

  Term term(const YAML::Node& n) {
    Term t;
    if (n.IsSequence()) {
      if (n.size() != 4) parse_fail(n, "a term list is [i, j, k, c]");
      t.px = scalar<int>(n[0], "i");
      t.pz = scalar<int>(n[1], "j");
      t.pw = scalar<int>(n[2], "k");
      t.coeff = scalar<double>(n[3], "c");
    } else if (n.IsMap()) {
      check_keys(n, {"i", "j", "k", "c", "p", "q", "sin", "cos"});
      if (!n["c"]) parse_fail(n, "term is missing its coefficient 'c'");
      t.coeff = scalar<double>(n["c"], "c");
      t.px = get<int>(n, "i", 0);
      t.pz = get<int>(n, "j", 0);
      t.pw = get<int>(n, "k", 0);
      t.pzs = get<int>(n, "q", 0);
      t.pws = get<int>(n, "p", 0);
      if (n["sin"] && n["cos"]) parse_fail(n, "a term carries either 'sin' or 'cos'");
      if (n["sin"]) {
        t.trig = Trig::Sin;
        t.mode = scalar<int>(n["sin"], "sin");
      } else if (n["cos"]) {
        t.trig = Trig::Cos;
        t.mode = scalar<int>(n["cos"], "cos");
      }
    } else {
      parse_fail(n, "a term is a list [i, j, k, c] or a map");
    }
    if (t.px < 0 || t.pz < 0 || t.pw < 0) violation(n, "monomial exponents must be >= 0");
    if (t.px + t.pz + t.pw > kMaxDegree) violation(n, fmt::format("monomial degree exceeds {}", kMaxDegree));
    if (std::abs(t.pzs) > kMaxDegree || std::abs(t.pws) > kMaxDegree) {
      violation(n, fmt::format("shifted powers p, q must satisfy |p|, |q| <= {}", kMaxDegree));
    }
    if (t.trig != Trig::None && t.mode < 1) violation(n, "trigonometric mode must be >= 1");
    return t;
  }

  FunctionDescriptor descriptor(const YAML::Node& n, const Frame& frame, const char* key) {
    if (!n) throw ParseError(fmt::format("{}: missing '{}'", label_, key));
    if (!n.IsSequence()) parse_fail(n, fmt::format("'{}' must be a list of terms", key));
    std::vector<Term> terms;
    for (const auto& t : n) terms.push_back(term(t));
    return {frame, std::move(terms)};
  }

  std::vector<std::string> violations_;
  std::vector<std::string> warnings_;
  std::string label_;
};

template <typename T, typename Fn>
std::optional<T> attempt(Reader& rd, const YAML::Node& at, Fn fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    rd.violation(at, e.what());
  } catch (const std::invalid_argument& e) {
    rd.violation(at, e.what());
  }
  return std::nullopt;
}

}  // namespace

DeviceConfig parse_config_text(const std::string& text, const std::string& label) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(fmt::format("{}:{}: {}", label, e.mark.line + 1, e.msg));
  }
  if (!root.IsMap()) throw ParseError(fmt::format("{}: top level must be a map", label));

  Reader rd(label);
  rd.check_keys(root, {"domain", "deflection", "permittivity", "boundary", "mesh", "solver", "sweep",
                       "recovery", "output"});

  const YAML::Node dn = rd.section(root, "domain", true);
  rd.check_keys(dn, {"a", "b", "H"});
  const std::optional<Domain1D> dom = attempt<Domain1D>(rd, dn, [&] {
    return Domain1D(rd.get<double>(dn, "a", 0.0), rd.get<double>(dn, "b", 1.0), rd.get<double>(dn, "H", 1.0));
  });
  if (!dom) throw ValidationError(rd.violations_.front());
  const Frame frame = dom->frame();

  const YAML::Node un = rd.section(root, "deflection", true);
  rd.check_keys(un, {"terms"});
  const FunctionDescriptor ud = rd.descriptor(un["terms"], frame, "deflection.terms");
  const auto u = attempt<DeflectionProfile>(rd, un, [&] { return DeflectionProfile(*dom, ud); });

  const YAML::Node sn = rd.section(root, "permittivity", true);
  rd.check_keys(sn, {"terms"});
  const FunctionDescriptor sd = rd.descriptor(sn["terms"], frame, "permittivity.terms");
  const auto sigma = attempt<Permittivity>(rd, sn, [&] { return Permittivity(*dom, sd); });

  const YAML::Node bn = rd.section(root, "boundary", true);
  rd.check_keys(bn, {"form", "h", "frak_h", "h_b"});
  const std::string form = rd.get<std::string>(bn, "form", "affine");
  const FunctionDescriptor hd = rd.descriptor(bn["h"], frame, "boundary.h");
  std::optional<BoundaryData> data;
  if (form == "affine") {
    const FunctionDescriptor fd = rd.descriptor(bn["frak_h"], frame, "boundary.frak_h");
    data = attempt<BoundaryData>(rd, bn["frak_h"], [&] { return BoundaryData::affine(hd, fd); });
  } else if (form == "explicit") {
    const FunctionDescriptor hbd = rd.descriptor(bn["h_b"], frame, "boundary.h_b");
    data = attempt<BoundaryData>(rd, bn["h_b"], [&] { return BoundaryData::with_layer_datum(hd, hbd); });
  } else {
    rd.parse_fail(bn["form"], fmt::format("boundary.form must be 'affine' or 'explicit', got '{}'", form));
  }
  MeshControls mesh;
  if (const YAML::Node mn = rd.section(root, "mesh", false)) {
    rd.check_keys(mn, {"nx", "nz", "layers", "layer_base", "coincidence_eps"});
    mesh.nx = rd.get<int>(mn, "nx", mesh.nx);
    mesh.nz = rd.get<int>(mn, "nz", mesh.nz);
    mesh.nl = rd.get<int>(mn, "layers", mesh.nl);
    mesh.layer_base = rd.get<int>(mn, "layer_base", mesh.layer_base);
    mesh.eps_c = rd.get<double>(mn, "coincidence_eps", mesh.eps_c);
    if (mesh.nx < 2 || mesh.nz < 2) rd.violation(mn, "mesh.nx and mesh.nz must be >= 2");
    if (mesh.nl < 1 || mesh.layer_base < 1) rd.violation(mn, "mesh.layers and mesh.layer_base must be >= 1");
  }

  SolverOptions solver;
  if (const YAML::Node on = rd.section(root, "solver", false)) {
    rd.check_keys(on, {"tol", "max_iter", "dense_threshold", "method"});
    const std::string method = rd.get<std::string>(on, "method", "auto");
    if (method == "auto") {
      solver.choice = SolverChoice::Auto;
    } else if (method == "cg") {
      solver.choice = SolverChoice::ConjugateGradient;
    } else if (method == "dense") {
      solver.choice = SolverChoice::Dense;
    } else {
      rd.parse_fail(on["method"], fmt::format("solver.method must be auto, cg or dense, got '{}'", method));
    }
    solver.tol = rd.get<double>(on, "tol", solver.tol);
    solver.max_iter = rd.get<int>(on, "max_iter", solver.max_iter);
    solver.dense_threshold = rd.get<int>(on, "dense_threshold", solver.dense_threshold);
    if (!(solver.tol > 0.0 && solver.tol < 1.0)) rd.violation(on, "solver.tol must lie in (0, 1)");
    if (solver.max_iter < 0 || solver.dense_threshold < 0) {
      rd.violation(on, "solver.max_iter and solver.dense_threshold must be >= 0");
    }
  }

  std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  bool strict = false;
  if (const YAML::Node wn = rd.section(root, "sweep", false)) {
    rd.check_keys(wn, {"deltas", "strict_compat"});
    strict = rd.get<bool>(wn, "strict_compat", false);
    if (const YAML::Node ln = wn["deltas"]) {
      if (!ln.IsSequence()) rd.parse_fail(ln, "sweep.deltas must be a list");
      deltas.clear();
      for (const auto& v : ln) deltas.push_back(rd.scalar<double>(v, "deltas"));
      attempt<bool>(rd, ln, [&] {
        validate_delta_list(deltas);
        return true;
      });
    }
  }

  std::optional<FunctionDescriptor> recovery;
  if (const YAML::Node rn = rd.section(root, "recovery", false)) {
    rd.check_keys(rn, {"field"});
    if (rn["field"]) recovery = rd.descriptor(rn["field"], frame, "recovery.field");
  }

  OutputControls output;
  if (const YAML::Node pn = rd.section(root, "output", false)) {
    rd.check_keys(pn, {"dir", "svg"});
    output.dir = rd.get<std::string>(pn, "dir", output.dir);
    output.svg = rd.get<bool>(pn, "svg", output.svg);
  }

  if (!rd.violations_.empty()) {
    std::string msg = fmt::format("{} violation(s):", rd.violations_.size());
    for (const auto& v : rd.violations_) msg += "\n  " + v;
    throw ValidationError(msg);
  }

  DeviceConfig cfg{Device{*dom, *u, *sigma, *data, mesh, solver},
                   std::move(deltas),
                   strict,
                   std::move(recovery),
                   std::move(output),
                   fmt::format("{:016x}", fnv1a(text)),
                   label,
                   std::move(rd.warnings_)};
  return cfg;
}

DeviceConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open config '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace thinlayer
