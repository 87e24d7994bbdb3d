#pragma once

// Subcommand drivers behind the `oline` executable. Each command reads a
// parsed scene and writes CSV files and a `key: value` report into a
// directory.

#include "oline/common.hpp"
#include "oline/error.hpp"
#include "oline/families.hpp"
#include "oline/line_space.hpp"
#include "oline/optics.hpp"
#include "oline/scene.hpp"
#include "oline/variational.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace oline::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_scene_error = 1;
inline constexpr int exit_numerical_failure = 2;

/// Command-line values that take precedence over the scene's [options].
struct Overrides {
  std::optional<int> grid;
  std::optional<double> tol;
  std::optional<double> step;
  std::optional<std::uint64_t> seed;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"trace", "defect", "check-symplectic", "wavefront", "mirror", "characteristic"};
  return names;
}

namespace detail {

/// Ordered `key: value` lines.
class Report {
 public:
  void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, format_real(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, const Vec3& v) { add(key, format_vec(v)); }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : lines_) os << k << ": " << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

struct Context {
  const Scene& scene;
  Overrides overrides;
  std::filesystem::path out;

  int grid() const {
    const int n = overrides.grid.value_or(scene.family ? scene.family->grid : 21);
    if (n < 3) throw Error::syntax(0, 1, "grid must be at least 3");
    return n;
  }
  std::optional<double> tol() const { return overrides.tol ? overrides.tol : scene.options.tol; }
  std::optional<double> step() const { return overrides.step ? overrides.step : scene.options.step; }
  std::uint64_t seed() const { return overrides.seed.value_or(scene.options.seed); }

  template <class Writer>
  void write(const std::string& name, Writer&& writer) const {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + (out / name).string());
    writer(f);
  }

  void write_report(const std::string& name, const Report& r) const {
    write(name, [&](std::ostream& os) { r.write(os); });
  }
};

inline std::string rect_verdict(bool rectangular) { return rectangular ? "RECTANGULAR" : "NOT RECTANGULAR"; }

template <class T>
const T& require(const std::optional<T>& v, const char* key) {
  if (!v) throw Error::syntax(0, 1, std::string("missing option '") + key + "' in [options]");
  return *v;
}

inline Vec2 base_point(const Context& c, const RayFamily& f) { return c.scene.options.k0.value_or(f.domain().center()); }

inline int run_trace(const Context& c) {
  const RayFamily f = c.scene.build_family();
  const int n = c.grid();
  const auto k1 = grid_axis(f.domain().lo.x(), f.domain().hi.x(), n, 0.0);
  const auto k2 = grid_axis(f.domain().lo.y(), f.domain().hi.y(), n, 0.0);
  std::ostringstream csv;
  csv << "k1,k2,ox,oy,oz,ux,uy,uz,qx,qy,qz,optical_length\n";
  for (double a : k1)
    for (double b : k2) {
      const Vec2 k(a, b);
      const TraceResult tr = [&] {
        try {
          return propagate_system(f.ray(k), c.scene.system);
        } catch (const Error& e) {
          throw e.at_parameter(k);
        }
      }();
      const Vec3 o = tr.ray_out.origin();
      const Vec3& u = tr.line_out().direction();
      const Vec3& q = tr.line_out().foot();
      csv << format_real(a) << ',' << format_real(b);
      for (const Vec3* v : {&o, &u, &q})
        for (int i = 0; i < 3; ++i) csv << ',' << format_real((*v)(i));
      csv << ',' << format_real(tr.optical_length) << '\n';
    }
  c.write("trace.csv", [&](std::ostream& os) { os << csv.str(); });
  Report r;
  r.add("command", std::string("trace"));
  r.add("family", std::string(to_string(f.kind())));
  r.add("interfaces", c.scene.system.interfaces.size());
  r.add("grid", n);
  r.add("rays", k1.size() * k2.size());
  r.add("t_min", TraceOptions{}.t_min);
  c.write_report("trace_report.txt", r);
  return exit_ok;
}

inline int run_defect(const Context& c) {
  const RayFamily in = c.scene.build_family();
  const RayFamily out = transform_family(in, c.scene.system);
  GridOptions go;
  go.resolution = c.grid();
  go.step = c.step();
  const double h = go.step.value_or(in.default_step());
  const double tol = c.tol().value_or(1e-6 * in.domain().diameter());
  const auto before = is_rectangular(in, go, tol);
  const auto after = is_rectangular(out, go, tol);
  c.write("defect_in.csv", [&](std::ostream& os) { before.grid.write_csv(os); });
  c.write("defect_out.csv", [&](std::ostream& os) { after.grid.write_csv(os); });
  Report r;
  r.add("command", std::string("defect"));
  r.add("family", std::string(to_string(in.kind())));
  r.add("interfaces", c.scene.system.interfaces.size());
  r.add("grid", go.resolution);
  r.add("step", h);
  r.add("tolerance", tol);
  r.add("max_abs_defect_in", before.grid.max_abs_defect);
  r.add("max_abs_defect_out", after.grid.max_abs_defect);
  r.add("verdict_in", rect_verdict(before.rectangular));
  r.add("verdict_out", rect_verdict(after.rectangular));
  r.add("verdict", rect_verdict(before.rectangular && after.rectangular));
  c.write_report("defect_report.txt", r);
  return exit_ok;
}

/// Samples are k values drawn from the seeded generator; the raw 64-bit
/// outputs are mapped by hand so the stream is identical on every platform.
inline int run_check_symplectic(const Context& c) {
  const RayFamily f = c.scene.build_family();
  const OpticalSystem& sys = c.scene.system;
  if (sys.interfaces.empty()) throw Error::syntax(0, 1, "check-symplectic needs at least one interface");
  const double h = c.step().value_or(1e-5);
  const double tol = c.tol().value_or(1e-6);
  std::mt19937_64 rng(c.seed());
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  Report r;
  r.add("command", std::string("check-symplectic"));
  r.add("interfaces", sys.interfaces.size());
  r.add("samples", c.scene.options.samples);
  r.add("seed", std::to_string(c.seed()));
  r.add("step", h);
  r.add("tolerance", tol);
  bool all_ok = true;
  for (std::size_t i = 0; i < sys.interfaces.size(); ++i) {
    const Interface& face = sys.interfaces[i];
    const double expected = face.n_in / face.n_out;
    OpticalSystem before{{sys.interfaces.begin(), sys.interfaces.begin() + static_cast<std::ptrdiff_t>(i)}, sys.ambient_index};
    double worst = 0.0, ratio_sum = 0.0;
    for (int s = 0; s < c.scene.options.samples; ++s) {
      const Vec2 k(uniform(f.domain().lo.x(), f.domain().hi.x()), uniform(f.domain().lo.y(), f.domain().hi.y()));
      try {
        const Ray incoming = propagate_system(f.ray(k), before).ray_out;
        const double start = incoming.start;
        auto map = [&](const OrientedLine& l) { return apply_interface(Ray{l, start}, face, TraceOptions{}.t_min).line; };
        const Mat4 jac = chart_jacobian(map, incoming.line, h);
        worst = std::max(worst, symplectic_deviation(jac, expected));
        ratio_sum += symplectic_scale(jac);
      } catch (const Error& e) {
        throw e.at_parameter(k).at_interface(static_cast<int>(i));
      }
    }
    const std::string p = "interface_" + std::to_string(i) + "_";
    r.add(p + "surface", c.scene.interface_names.at(i));
    r.add(p + "action", std::string(to_string(face.action)));
    r.add(p + "expected_ratio", expected);
    r.add(p + "estimated_ratio", ratio_sum / c.scene.options.samples);
    r.add(p + "max_deviation", worst);
    const bool ok = worst < tol;
    r.add(p + "verdict", std::string(ok ? "PASS" : "FAIL"));
    all_ok = all_ok && ok;
  }
  r.add("verdict", std::string(all_ok ? "PASS" : "FAIL"));
  c.write_report("symplectic_report.txt", r);
  return exit_ok;
}

inline int run_wavefront(const Context& c) {
  const RayFamily f = transform_family(c.scene.build_family(), c.scene.system);
  WavefrontOptions wo;
  wo.resolution = c.grid();
  wo.constant = c.scene.options.wavefront_constant;
  wo.step = c.step();
  if (c.tol()) wo.path_tolerance = *c.tol();
  const Vec2 k0 = base_point(c, f);
  const Wavefront w = reconstruct_wavefront(f, k0, wo);
  c.write("wavefront.csv", [&](std::ostream& os) { w.write_csv(os); });
  Report r;
  r.add("command", std::string("wavefront"));
  r.add("grid", wo.resolution);
  r.add("step", wo.step.value_or(f.default_step()));
  r.add("path_tolerance", wo.path_tolerance);
  r.add("refinement_tolerance", oline::detail::phase_tolerance);
  r.add("k0", format_real(k0.x()) + " " + format_real(k0.y()));
  r.add("constant", w.constant);
  r.add("path_discrepancy", w.path_discrepancy);
  r.add("orthogonality_residual", w.orthogonality);
  c.write_report("wavefront_report.txt", r);
  return exit_ok;
}

inline int run_mirror(const Context& c) {
  const RayFamily f = transform_family(c.scene.build_family(), c.scene.system);
  MirrorOptions mo;
  mo.resolution = c.grid();
  mo.wavefront_constant = c.scene.options.wavefront_constant;
  mo.step = c.step();
  const Vec3& focus = require(c.scene.options.focus, "focus");
  const double level = require(c.scene.options.level, "level");
  const Vec2 k0 = base_point(c, f);
  const MirrorDesign md = design_focusing_mirror(f, k0, focus, c.scene.options.epsilon, level, mo);
  const double tol = c.tol().value_or(1e-6);
  const FocusReport fr = verify_focus(md, f, tol);
  c.write("mirror.csv", [&](std::ostream& os) { md.write_csv(os); });
  Report r;
  r.add("command", std::string("mirror"));
  r.add("grid", mo.resolution);
  r.add("step", mo.step.value_or(f.default_step()));
  r.add("root_tolerance", limits::root_tolerance);
  r.add("k0", format_real(k0.x()) + " " + format_real(k0.y()));
  r.add("focus", focus);
  r.add("epsilon", md.epsilon);
  r.add("level", level);
  r.add("wavefront_constant", md.wavefront.constant);
  r.add("tolerance", tol);
  r.add("checked_nodes", fr.checked);
  r.add("max_miss_distance", fr.max_miss);
  r.add("verdict", std::string(fr.focused ? "FOCUSED" : "NOT FOCUSED"));
  c.write_report("mirror_report.txt", r);
  return exit_ok;
}

inline int run_characteristic(const Context& c) {
  const Vec3& m1 = require(c.scene.options.endpoint1, "endpoint1");
  const Vec3& m2 = require(c.scene.options.endpoint2, "endpoint2");
  CharacteristicOptions co;
  if (c.tol()) co.law_tolerance = *c.tol();
  const CharacteristicResult res = characteristic_function(m1, m2, c.scene.system, std::nullopt, co);
  c.write("characteristic_report.txt", [&](std::ostream& os) {
    os << "command: characteristic\n";
    os << "endpoint1: " << format_vec(m1) << '\n';
    os << "endpoint2: " << format_vec(m2) << '\n';
    os << "gradient_tolerance: " << format_real(co.gradient_tolerance) << '\n';
    os << "law_tolerance: " << format_real(co.law_tolerance) << '\n';
    os << "hessian_step: " << format_real(co.hessian_step) << '\n';
    res.write_report(os);
  });
  return exit_ok;
}

}  // namespace detail

/// Runs one subcommand. Returns 0 on success, 1 for scene errors, 2 for
/// numerical failures; the message (with the failing k or interface) goes to
/// `err`.
inline int run(const std::string& command, const Scene& scene, const Overrides& overrides,
               const std::filesystem::path& out, std::ostream& err) {
  try {
    std::filesystem::create_directories(out);
    const detail::Context c{scene, overrides, out};
    if (command == "trace") return detail::run_trace(c);
    if (command == "defect") return detail::run_defect(c);
    if (command == "check-symplectic") return detail::run_check_symplectic(c);
    if (command == "wavefront") return detail::run_wavefront(c);
    if (command == "mirror") return detail::run_mirror(c);
    if (command == "characteristic") return detail::run_characteristic(c);
    err << "unknown command '" << command << "'\n";
    return exit_scene_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::SyntaxError:
      case ErrorCode::UnknownSurface:
      case ErrorCode::BadMediaChain: return exit_scene_error;
      default: return exit_numerical_failure;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_scene_error;
  }
}

/// Parses `text` and runs `command`.
inline int run(const std::string& command, std::string_view text, const Overrides& overrides,
               const std::filesystem::path& out, std::ostream& err) {
  Scene scene;
  try {
    scene = parse_scene(text);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_scene_error;
  }
  return run(command, scene, overrides, out, err);
}

}  // namespace oline::cli
